use dcf_delay::{
    analyze, compare, compute_simulation_durations, delay_histogram, empirical_rtdf, eval_grid, model_rtdf,
    run_simulation, Analysis, DelaySamples, ValidationReport,
};
use serde::Serialize;

use crate::args::{Common, RunManifest};
use crate::error::CliError;
use crate::output::{csv, json_doc, num, OutDir};

fn grid(manifest: &RunManifest) -> Result<Vec<f64>, CliError> {
    Ok(eval_grid(manifest.bin_ms, manifest.params.horizon_ms)?)
}

pub fn cmd_analyze(common: &Common) -> Result<OutDir, CliError> {
    let manifest = common.resolve("analyze")?;
    let analysis = analyze(&manifest.params, &manifest.analysis_options())?;
    let curve = model_rtdf(&analysis.solution, &grid(&manifest)?)?;
    let hist = delay_histogram(&analysis.solution, manifest.bin_ms, manifest.params.horizon_ms)?;

    let mut out = OutDir::create(&common.out)?;
    out.write(
        "model_rtdf.csv",
        &csv(&manifest, &["t_ms", "rtdf_model"], curve.points.iter().map(|p| [num(p.t_ms), num(p.value)])),
    )?;
    let bins = hist.bins.iter().map(|b| [num(b.a_ms), num(b.b_ms), num(b.mass)]);
    let tail = std::iter::once([num(manifest.params.horizon_ms as f64), "inf".to_string(), num(hist.tail_mass)]);
    out.write("histogram.csv", &csv(&manifest, &["a_ms", "b_ms", "mass"], bins.chain(tail)))?;
    out.write("analysis.json", &json_doc(&manifest, "analysis", &analysis))?;
    Ok(out)
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    metadata: &'a dcf_delay::SampleMetadata,
    tallies: &'a [dcf_delay::SlotTally],
    mean_delay_s: f64,
}

fn simulate(manifest: &RunManifest) -> Result<DelaySamples, CliError> {
    let params = &manifest.params;
    let durations = compute_simulation_durations(params)?;
    Ok(run_simulation(params, &durations, &manifest.sim_config())?)
}

pub fn cmd_simulate(common: &Common) -> Result<OutDir, CliError> {
    let manifest = common.resolve("simulate")?;
    let samples = simulate(&manifest)?;
    let curve = empirical_rtdf(&samples, &grid(&manifest)?)?;

    let mut out = OutDir::create(&common.out)?;
    out.write_with("samples.txt", |buf| samples.write_dump(buf))?;
    out.write(
        "sim_rtdf.csv",
        &csv(&manifest, &["t_ms", "rtdf_sim"], curve.points.iter().map(|p| [num(p.t_ms), num(p.value)])),
    )?;
    let summary = SimulationSummary {
        metadata: &samples.metadata,
        tallies: &samples.tallies,
        mean_delay_s: samples.delays.iter().sum::<f64>() / samples.len() as f64,
    };
    out.write("simulation.json", &json_doc(&manifest, "simulation", &summary))?;
    Ok(out)
}

fn validate(manifest: &RunManifest) -> Result<(Analysis, ValidationReport), CliError> {
    let analysis = analyze(&manifest.params, &manifest.analysis_options())?;
    let samples = simulate(manifest)?;
    let grid = grid(manifest)?;
    let mut report = compare(model_rtdf(&analysis.solution, &grid)?, empirical_rtdf(&samples, &grid)?)?;
    report.n_nodes = manifest.params.n_nodes;
    report.sample_count = samples.len();
    report.seed = manifest.seed;
    Ok((analysis, report))
}

fn validation_csv(manifest: &RunManifest, report: &ValidationReport) -> String {
    csv(
        manifest,
        &["t_ms", "rtdf_model", "rtdf_sim", "abs_err"],
        report.rows().map(|(t, m, s, e)| [num(t), num(m), num(s), num(e)]),
    )
}

pub fn cmd_validate(common: &Common) -> Result<(OutDir, f64), CliError> {
    let manifest = common.resolve("validate")?;
    let (_, report) = validate(&manifest)?;
    let mut out = OutDir::create(&common.out)?;
    out.write("validation.csv", &validation_csv(&manifest, &report))?;
    out.write("validation.json", &json_doc(&manifest, "report", &report))?;
    Ok((out, report.max_abs_error))
}

#[derive(Serialize)]
struct SweepRow {
    n_nodes: u32,
    tau: f64,
    x: f64,
    mu: f64,
    tail_coeff: f64,
    max_abs_error: f64,
    worst_t_ms: f64,
    samples: usize,
}

pub fn cmd_sweep(common: &Common, from: u32, to: u32, step: u32) -> Result<OutDir, CliError> {
    if step == 0 || from > to {
        return Err(CliError::Config(format!("empty node range {from}..={to} step {step}")));
    }
    let mut manifest = common.resolve("sweep")?;
    manifest.sweep = Some([from, to, step]);

    let mut rows = Vec::new();
    for n in (from..=to).step_by(step as usize) {
        let mut per_n = manifest.clone();
        per_n.params.n_nodes = n;
        per_n.params.validate()?;
        let (analysis, report) = validate(&per_n)?;
        rows.push(SweepRow {
            n_nodes: n,
            tau: analysis.attempt.tau_tr,
            x: analysis.solution.x,
            mu: analysis.solution.mu,
            tail_coeff: analysis.solution.tail_coeff,
            max_abs_error: report.max_abs_error,
            worst_t_ms: report.worst_t_ms,
            samples: report.sample_count,
        });
    }

    let mut out = OutDir::create(&common.out)?;
    out.write(
        "sweep.csv",
        &csv(
            &manifest,
            &["n_nodes", "tau", "x", "mu", "tail_coeff", "max_abs_error", "worst_t_ms", "samples"],
            rows.iter().map(|r| {
                [
                    r.n_nodes.to_string(),
                    num(r.tau),
                    num(r.x),
                    num(r.mu),
                    num(r.tail_coeff),
                    num(r.max_abs_error),
                    num(r.worst_t_ms),
                    r.samples.to_string(),
                ]
            }),
        ),
    )?;
    out.write("sweep.json", &json_doc(&manifest, "rows", &rows))?;
    Ok(out)
}
