use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcf-delay"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data lines of a CSV, skipping the manifest comment.
fn csv_body(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

const FAST: &[&str] = &["--samples", "3000", "--warmup-slots", "1000"];

#[test]
fn analyze_reproduces_worked_example() {
    let dir = TempDir::new().unwrap();
    let o = run(&["analyze", "--tau", "0.05", "--mode", "polynomial", "--round-probs", "4"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&dir.path().join("analysis.json"));
    let sol = &doc["analysis"]["solution"];
    assert!((sol["t_root"].as_f64().unwrap() - 1.000261721).abs() < 1e-8);
    assert!((sol["x"].as_f64().unwrap() - 5.234).abs() < 1e-3);
    assert_eq!(doc["manifest"]["mode"], "polynomial");
    assert_eq!(doc["analysis"]["durations"]["d_suc"], 9412.0);

    let rtdf = csv_body(&dir.path().join("model_rtdf.csv"));
    assert_eq!(rtdf[0], "t_ms,rtdf_model");
    assert_eq!(rtdf.len(), 22);
    let hist = csv_body(&dir.path().join("histogram.csv"));
    assert_eq!(hist[0], "a_ms,b_ms,mass");
    let total: f64 = hist[1..].iter().map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn default_analysis_is_populated() {
    let dir = TempDir::new().unwrap();
    assert!(run(&["analyze"], dir.path()).status.success());
    let doc = json(&dir.path().join("analysis.json"));
    for key in ["x", "mu", "defect", "tail_coeff"] {
        let v = doc["analysis"]["solution"][key].as_f64().unwrap();
        assert!(v.is_finite() && v > 0.0, "{key} = {v}");
    }
    assert_eq!(doc["manifest"]["tau"]["source"], "fixed-point");
    assert!(doc["analysis"]["fixed_point"]["tau"].as_f64().is_some());
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let o = run(&["analyze", "--tau", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-defective distribution"));

    assert_eq!(run(&["analyze", "--n", "1"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["analyze", "--bin-ms", "30"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["analyze", "--mode", "maple"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--from", "30", "--to", "20"], dir.path()).status.code(), Some(1));

    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "n_nodes = 20\nwarp_factor = 9\n").unwrap();
    assert_eq!(run(&["analyze", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(1));
    let missing = dir.path().join("missing.conf");
    assert_eq!(run(&["analyze", "--config", missing.to_str().unwrap()], dir.path()).status.code(), Some(3));

    // The output directory cannot be created under a regular file.
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    assert_eq!(run(&["analyze"], &blocker.join("sub")).status.code(), Some(3));
}

#[test]
fn config_file_feeds_parameters() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("p.conf");
    fs::write(&cfg, "# five times shorter slots\nslot_us = 10\nn_nodes = 25\n").unwrap();
    let o = run(&["analyze", "--config", cfg.to_str().unwrap(), "--w", "16"], dir.path());
    assert!(o.status.success());
    let doc = json(&dir.path().join("analysis.json"));
    assert_eq!(doc["manifest"]["params"]["slot_us"], 10);
    assert_eq!(doc["manifest"]["params"]["n_nodes"], 25);
    assert_eq!(doc["manifest"]["params"]["cw_min"], 16);
    assert_eq!(doc["analysis"]["durations"]["d_emp"], 10.0);
}

#[test]
fn simulate_writes_dump_and_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = [&["simulate", "--seed", "5"][..], FAST].concat();
    assert!(run(&args, a.path()).status.success());
    assert!(run(&args, b.path()).status.success());
    for f in ["samples.txt", "sim_rtdf.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let dump = fs::read_to_string(a.path().join("samples.txt")).unwrap();
    assert!(dump.starts_with("# seed = 5\n# n = 20\n# W = 32\n# m = 5\n# samples = 3000\n"));
    assert_eq!(dump.lines().filter(|l| !l.starts_with('#')).count(), 3000);
    assert_eq!(csv_body(&a.path().join("sim_rtdf.csv"))[0], "t_ms,rtdf_sim");

    let mut ja = json(&a.path().join("simulation.json"));
    let mut jb = json(&b.path().join("simulation.json"));
    ja.as_object_mut().unwrap().remove("metadata");
    jb.as_object_mut().unwrap().remove("metadata");
    assert_eq!(ja, jb);
}

#[test]
fn lone_station_simulation() {
    let dir = TempDir::new().unwrap();
    let o = run(&["simulate", "--n", "1", "--w", "2", "--samples", "200"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dump = fs::read_to_string(dir.path().join("samples.txt")).unwrap();
    for line in dump.lines().filter(|l| !l.starts_with('#')) {
        let v: f64 = line.parse().unwrap();
        assert!(v == 0.009412 || v == 0.009462, "{v}");
    }
}

#[test]
fn validate_model_column_ignores_seed() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert!(run(&[&["validate", "--seed", "1"][..], FAST].concat(), a.path()).status.success());
    assert!(run(&[&["validate", "--seed", "2"][..], FAST].concat(), b.path()).status.success());
    let col = |d: &TempDir, i: usize| -> Vec<String> {
        csv_body(&d.path().join("validation.csv")).iter().map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
    };
    assert_eq!(csv_body(&a.path().join("validation.csv"))[0], "t_ms,rtdf_model,rtdf_sim,abs_err");
    assert_eq!(col(&a, 1), col(&b, 1));
    assert_ne!(col(&a, 2), col(&b, 2));

    let report = json(&a.path().join("validation.json"));
    let max = report["report"]["max_abs_error"].as_f64().unwrap();
    let from_rows = csv_body(&a.path().join("validation.csv"))[1..]
        .iter()
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert_eq!(max, from_rows);
    assert_eq!(report["report"]["sample_count"], 3000);
}

#[test]
fn sweep_rows_match_standalone_validate() {
    let dir = TempDir::new().unwrap();
    let o = run(&[&["sweep", "--from", "20", "--to", "30", "--step", "5"][..], FAST].concat(), dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_body(&dir.path().join("sweep.csv"));
    assert_eq!(rows[0], "n_nodes,tau,x,mu,tail_coeff,max_abs_error,worst_t_ms,samples");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("20,") && rows[3].starts_with("30,"));

    let single = TempDir::new().unwrap();
    assert!(run(&[&["validate", "--n", "20"][..], FAST].concat(), single.path()).status.success());
    let report = json(&single.path().join("validation.json"));
    let sweep_err: f64 = rows[1].split(',').nth(5).unwrap().parse().unwrap();
    assert_eq!(sweep_err, report["report"]["max_abs_error"].as_f64().unwrap());
}
