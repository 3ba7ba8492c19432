//! Slotted Monte Carlo model of saturated DCF stations.
//!
//! Time advances in virtual slots. In each slot every station whose
//! backoff counter is zero transmits:
//!
//! * nobody transmits: the slot is empty and lasts `d_emp`;
//! * one station transmits: success, lasting `d_suc`; the winner starts a
//!   fresh packet at stage 0;
//! * two or more transmit: collision, lasting `d_col`; every collider
//!   moves up one backoff stage (capped at `max_stage`, the packet is
//!   never dropped).
//!
//! Transmitters redraw a counter uniformly from `[0, 2^stage * W - 1]`.
//! Everyone else ticks down once per virtual slot unless
//! [`BusySlotCountdown::Freeze`] is selected.
//! Station 0 is the tagged station. Under saturation its next packet
//! reaches the head of the queue the moment its previous one succeeds, so
//! each access delay runs from one tagged success to the next and
//! includes the final `d_suc`.
//!
//! Replication `r` uses a `ChaCha8Rng` seeded with `seed + r` through
//! `SeedableRng::seed_from_u64`; counters are drawn with
//! `Rng::random_range`, which is unbiased. Both are pinned by `Cargo.lock`.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::renewal::{RtdfCurve, RtdfPoint};
use crate::timing::{derive_durations, DelayDurations, PhyParams};

pub const DEFAULT_WARMUP_SLOTS: u64 = 10_000;

/// What non-transmitting stations do with their counters in a busy slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BusySlotCountdown {
    /// Counters tick once per virtual slot, busy or not, as in the
    /// saturation Markov chain.
    Decrement,
    /// Counters only tick in empty slots (802.11 counter freezing).
    Freeze,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    /// Tagged-station delays to collect per replication.
    pub target_samples: usize,
    pub replications: usize,
    pub warmup_slots: u64,
    /// Charge `rts + eifs` instead of `d_col` for collision slots.
    pub collision_eifs: bool,
    pub busy_countdown: BusySlotCountdown,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 1,
            target_samples: 100_000,
            replications: 1,
            warmup_slots: DEFAULT_WARMUP_SLOTS,
            collision_eifs: false,
            busy_countdown: BusySlotCountdown::Decrement,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_samples < 1 {
            return invalid("target_samples must be >= 1");
        }
        if self.replications < 1 {
            return invalid("replications must be >= 1");
        }
        Ok(())
    }
}

/// Backoff stage and remaining counter of one station.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StationState {
    pub stage: u32,
    pub backoff: u32,
}

impl StationState {
    fn window(stage: u32, cw_min: u32) -> u32 {
        cw_min << stage
    }

    fn fresh(rng: &mut impl Rng, cw_min: u32) -> Self {
        StationState { stage: 0, backoff: rng.random_range(0..cw_min) }
    }

    fn redraw(&mut self, rng: &mut impl Rng, cw_min: u32) {
        self.backoff = rng.random_range(0..Self::window(self.stage, cw_min));
    }
}

/// Slot outcome tallies for one replication, warm-up included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlotTally {
    pub slots: u64,
    pub idle: u64,
    pub success: u64,
    pub collision: u64,
    /// Slots in which the tagged station transmitted.
    pub tagged_attempts: u64,
    /// Virtual time covered by all slots, microseconds.
    pub elapsed_us: u64,
}

impl SlotTally {
    /// Idle, success and collision slots account for every slot.
    pub fn is_partition(&self) -> bool {
        self.idle + self.success + self.collision == self.slots
    }

    pub fn attempt_rate(&self) -> f64 {
        self.tagged_attempts as f64 / self.slots as f64
    }
}

/// Identifies the run that produced a sample set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub seed: u64,
    pub n_nodes: u32,
    pub cw_min: u32,
    pub max_stage: u32,
    /// FNV-1a of the parameter configuration text, hex.
    pub params_digest: String,
    pub count: usize,
}

/// Tagged-station access delays, concatenated in replication order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelaySamples {
    /// Seconds.
    pub delays: Vec<f64>,
    pub metadata: SampleMetadata,
    /// One entry per replication, in replication order.
    pub tallies: Vec<SlotTally>,
}

impl DelaySamples {
    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    /// Writes the `#` metadata header and one delay per line.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        let m = &self.metadata;
        writeln!(out, "# seed = {}", m.seed)?;
        writeln!(out, "# n = {}", m.n_nodes)?;
        writeln!(out, "# W = {}", m.cw_min)?;
        writeln!(out, "# m = {}", m.max_stage)?;
        writeln!(out, "# samples = {}", m.count)?;
        writeln!(out, "# params_digest = {}", m.params_digest)?;
        for d in &self.delays {
            // `{:?}` prints the shortest string that round-trips.
            writeln!(out, "{d:?}")?;
        }
        Ok(())
    }
}

pub fn params_digest(params: &PhyParams) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in params.to_config_string().bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

struct SlotCosts {
    idle: u64,
    success: u64,
    collision: u64,
}

fn slot_costs(params: &PhyParams, durations: &DelayDurations, cfg: &SimConfig) -> Result<SlotCosts> {
    if derive_durations(params) != *durations {
        return Err(Error::DurationMismatch);
    }
    let collision = if cfg.collision_eifs {
        params.rts_us + params.eifs_us
    } else {
        durations.d_col as u64
    };
    Ok(SlotCosts { idle: durations.d_emp as u64, success: durations.d_suc as u64, collision })
}

/// One replication; strictly sequential and deterministic in `seed`.
fn run_replication(params: &PhyParams, costs: &SlotCosts, cfg: &SimConfig, seed: u64) -> (Vec<f64>, SlotTally) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cw = params.cw_min;
    let mut stations: Vec<StationState> =
        (0..params.n_nodes).map(|_| StationState::fresh(&mut rng, cw)).collect();
    let mut tally = SlotTally::default();
    let mut delays = Vec::with_capacity(cfg.target_samples);
    let mut now_us: u64 = 0;
    let mut last_success: Option<u64> = None;
    let mut transmitters: Vec<usize> = Vec::with_capacity(params.n_nodes as usize);

    while delays.len() < cfg.target_samples {
        let recording = tally.slots >= cfg.warmup_slots;
        tally.slots += 1;
        transmitters.clear();
        transmitters.extend(stations.iter().enumerate().filter(|(_, s)| s.backoff == 0).map(|(i, _)| i));
        if transmitters.first() == Some(&0) {
            tally.tagged_attempts += 1;
        }

        match transmitters.len() {
            0 => {
                tally.idle += 1;
                now_us += costs.idle;
                stations.iter_mut().for_each(|s| s.backoff -= 1);
                continue;
            }
            1 => {
                tally.success += 1;
                now_us += costs.success;
                let winner = transmitters[0];
                stations[winner].stage = 0;
                if winner == 0 && recording {
                    if let Some(start) = last_success {
                        delays.push((now_us - start) as f64 * 1e-6);
                    }
                    last_success = Some(now_us);
                }
            }
            _ => {
                tally.collision += 1;
                now_us += costs.collision;
                for &i in &transmitters {
                    let s = &mut stations[i];
                    s.stage = (s.stage + 1).min(params.max_stage);
                }
            }
        }

        if cfg.busy_countdown == BusySlotCountdown::Decrement {
            stations.iter_mut().filter(|s| s.backoff > 0).for_each(|s| s.backoff -= 1);
        }
        for &i in &transmitters {
            stations[i].redraw(&mut rng, cw);
        }
    }
    tally.elapsed_us = now_us;
    (delays, tally)
}

/// Runs `cfg.replications` independent replications (in parallel) and
/// merges their delays in replication order.
pub fn run_simulation(params: &PhyParams, durations: &DelayDurations, cfg: &SimConfig) -> Result<DelaySamples> {
    params.validate_for_simulation()?;
    cfg.validate()?;
    let costs = slot_costs(params, durations, cfg)?;

    let runs: Vec<(Vec<f64>, SlotTally)> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| run_replication(params, &costs, cfg, cfg.seed.wrapping_add(r)))
        .collect();

    let mut delays = Vec::with_capacity(cfg.target_samples * cfg.replications);
    let mut tallies = Vec::with_capacity(runs.len());
    for (d, t) in runs {
        delays.extend(d);
        tallies.push(t);
    }
    Ok(DelaySamples {
        metadata: SampleMetadata {
            seed: cfg.seed,
            n_nodes: params.n_nodes,
            cw_min: params.cw_min,
            max_stage: params.max_stage,
            params_digest: params_digest(params),
            count: delays.len(),
        },
        delays,
        tallies,
    })
}

/// Fraction of samples strictly greater than each evaluation time.
pub fn empirical_rtdf(samples: &DelaySamples, eval_times_ms: &[f64]) -> Result<RtdfCurve> {
    if samples.delays.is_empty() {
        return Err(Error::EmptySamples);
    }
    if eval_times_ms.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("evaluation times must be strictly increasing");
    }
    let mut sorted = samples.delays.clone();
    sorted.sort_by(f64::total_cmp);
    let total = sorted.len() as f64;
    let points = eval_times_ms
        .iter()
        .map(|&t_ms| {
            let t = t_ms * 1e-3;
            let at_or_below = sorted.partition_point(|&d| d <= t);
            RtdfPoint { t_ms, value: (sorted.len() - at_or_below) as f64 / total }
        })
        .collect();
    Ok(RtdfCurve { points })
}
