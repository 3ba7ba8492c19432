use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dcf_delay::{BusySlotCountdown, PhyParams, SimConfig, SolverMode, TauSource};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "dcf-delay", version, about = "802.11 DCF MAC access delay: renewal model and slotted simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the renewal model; write the RTDF curve, histogram and a JSON summary.
    Analyze(Common),
    /// Run the slotted DCF simulation; write the raw delays and the empirical RTDF.
    Simulate(Common),
    /// Compare model and simulation on the evaluation grid.
    Validate(Common),
    /// Repeat `validate` over a range of station counts.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
        #[arg(long, default_value_t = 1)]
        step: u32,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// `key = value` parameter file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    /// Use this attempt probability instead of the saturation fixed point.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Initial contention window.
    #[arg(long)]
    pub w: Option<u32>,
    /// Maximum backoff stage.
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, default_value = "exact", value_parser = ["exact", "polynomial"])]
    pub mode: String,
    /// Evaluate the tail of M + D_Suc instead of M.
    #[arg(long)]
    pub shift_by_dsuc: bool,
    /// Simulator only: collisions cost RTS + EIFS.
    #[arg(long)]
    pub collision_eifs: bool,
    /// Simulator only: freeze backoff counters during busy slots.
    #[arg(long)]
    pub freeze_backoff: bool,
    /// Round event probabilities to this many decimals before solving.
    #[arg(long)]
    pub round_probs: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Tagged-station delays per replication.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    #[arg(long, default_value_t = dcf_delay::simulator::DEFAULT_WARMUP_SLOTS)]
    pub warmup_slots: u64,
    /// Histogram bin width and RTDF grid spacing.
    #[arg(long, default_value_t = dcf_delay::metrics::DEFAULT_GRID_STEP_MS)]
    pub bin_ms: u64,
    #[arg(long)]
    pub horizon_ms: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Everything that determines a run's output, echoed into every file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub params: PhyParams,
    pub tau: TauSource,
    pub mode: SolverMode,
    pub shift_by_dsuc: bool,
    pub collision_eifs: bool,
    pub busy_countdown: BusySlotCountdown,
    pub round_probs: Option<u32>,
    pub seed: u64,
    pub samples_per_replication: usize,
    pub replications: usize,
    pub warmup_slots: u64,
    pub bin_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<[u32; 3]>,
}

impl Common {
    pub fn resolve(&self, command: &'static str) -> Result<RunManifest, CliError> {
        let mut params = PhyParams::table1();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            params = params.apply_config(&text)?;
        }
        if let Some(n) = self.n {
            params.n_nodes = n;
        }
        if let Some(w) = self.w {
            params.cw_min = w;
        }
        if let Some(m) = self.m {
            params.max_stage = m;
        }
        if let Some(h) = self.horizon_ms {
            params.horizon_ms = h;
        }
        if command == "simulate" {
            params.validate_for_simulation()?;
        } else {
            params.validate()?;
        }

        let tau = match self.tau {
            Some(tau) if !(0.0..=1.0).contains(&tau) => {
                return Err(CliError::Config(format!("--tau must lie in [0, 1], got {tau}")))
            }
            Some(tau) => TauSource::Explicit { tau },
            None => TauSource::FixedPoint,
        };
        if self.bin_ms == 0 || !params.horizon_ms.is_multiple_of(self.bin_ms) {
            return Err(CliError::Config(format!(
                "--bin-ms {} must be positive and divide the horizon {} ms",
                self.bin_ms, params.horizon_ms
            )));
        }
        if self.samples == 0 || self.replications == 0 {
            return Err(CliError::Config("--samples and --replications must be >= 1".into()));
        }

        Ok(RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            params,
            tau,
            mode: self.mode.parse()?,
            shift_by_dsuc: self.shift_by_dsuc,
            collision_eifs: self.collision_eifs,
            busy_countdown: if self.freeze_backoff { BusySlotCountdown::Freeze } else { BusySlotCountdown::Decrement },
            round_probs: self.round_probs,
            seed: self.seed,
            samples_per_replication: self.samples,
            replications: self.replications,
            warmup_slots: self.warmup_slots,
            bin_ms: self.bin_ms,
            sweep: None,
        })
    }
}

impl RunManifest {
    pub fn analysis_options(&self) -> dcf_delay::AnalysisOptions {
        dcf_delay::AnalysisOptions {
            tau: self.tau,
            mode: self.mode,
            shift_by_dsuc: self.shift_by_dsuc,
            round_probs: self.round_probs,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            seed: self.seed,
            target_samples: self.samples_per_replication,
            replications: self.replications,
            warmup_slots: self.warmup_slots,
            collision_eifs: self.collision_eifs,
            busy_countdown: self.busy_countdown,
        }
    }
}
