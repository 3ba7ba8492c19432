//! Analytical and simulated MAC-layer access delay for saturated IEEE
//! 802.11 DCF networks using the RTS/CTS handshake.
//!
//! The analytical side treats the delay seen by a tagged station as a
//! terminating renewal process: [`timing`] derives the channel event
//! durations, [`probabilities`] the per-slot event probabilities (and
//! the saturation attempt probability), and [`renewal`] solves for the
//! exponential tail and bins it. [`simulator`] runs a slotted DCF model
//! to produce empirical delays, and [`metrics`] compares both.

// `!(a > b)` comparisons reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod metrics;
pub mod probabilities;
pub mod renewal;
pub mod simulator;
pub mod timing;

pub use analysis::{analyze, Analysis, AnalysisOptions, TauSource};
pub use error::{Error, Result};
pub use metrics::{compare, eval_grid, model_rtdf, ValidationReport};
pub use probabilities::{
    bianchi_fixed_point, enumeration_oracle, event_probabilities, AttemptProbabilities, BianchiSolution,
    EventProbabilities,
};
pub use renewal::{
    compute_mu, delay_histogram, solve_transform_root_exact, solve_transform_root_polynomial, tail_probability,
    DelayHistogram, HistogramBin, PolynomialRoot, RenewalSolution, RtdfCurve, RtdfPoint, SolverMode,
};
pub use simulator::{
    empirical_rtdf, run_simulation, BusySlotCountdown, DelaySamples, SampleMetadata, SimConfig, SlotTally,
    StationState,
};
pub use timing::{compute_delay_durations, compute_simulation_durations, DelayDurations, PhyParams};
