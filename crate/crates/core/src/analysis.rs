//! End-to-end analytical pipeline: parameters to delay tail.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::probabilities::{
    bianchi_fixed_point, event_probabilities, AttemptProbabilities, BianchiSolution, EventProbabilities,
};
use crate::renewal::{RenewalSolution, SolverMode};
use crate::timing::{compute_delay_durations, DelayDurations, PhyParams};

/// Residual tolerance for the attempt-probability fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-12;

/// Where the per-slot attempt probability comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum TauSource {
    /// Saturation fixed point for the configured `W`, `m`, `n`.
    FixedPoint,
    /// Given directly, shared by sender and neighbours.
    Explicit { tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub tau: TauSource,
    pub mode: SolverMode,
    /// Evaluate the tail of `M + D_Suc` instead of `M`.
    pub shift_by_dsuc: bool,
    /// Round event probabilities to this many decimals before solving.
    pub round_probs: Option<u32>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { tau: TauSource::FixedPoint, mode: SolverMode::Exact, shift_by_dsuc: false, round_probs: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub durations: DelayDurations,
    pub attempt: AttemptProbabilities,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<BianchiSolution>,
    pub probabilities: EventProbabilities,
    pub solution: RenewalSolution,
}

pub fn analyze(params: &PhyParams, opts: &AnalysisOptions) -> Result<Analysis> {
    let durations = compute_delay_durations(params)?;
    let (tau, fixed_point) = match opts.tau {
        TauSource::FixedPoint => {
            let s = bianchi_fixed_point(params.cw_min, params.max_stage, params.n_nodes, FIXED_POINT_TOL)?;
            (s.tau, Some(s))
        }
        TauSource::Explicit { tau } => (tau, None),
    };
    let attempt = AttemptProbabilities::uniform(tau, params.n_nodes)?;
    let mut probabilities = event_probabilities(&attempt)?;
    if let Some(digits) = opts.round_probs {
        probabilities = probabilities.rounded(digits);
    }
    let mut solution = RenewalSolution::solve(&probabilities, &durations, opts.mode)?;
    if opts.shift_by_dsuc {
        solution = solution.with_shift(durations.d_suc * 1e-6);
    }
    Ok(Analysis { durations, attempt, fixed_point, probabilities, solution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn worked_example_through_pipeline() {
        let opts = AnalysisOptions {
            tau: TauSource::Explicit { tau: 0.05 },
            mode: SolverMode::Polynomial,
            round_probs: Some(4),
            ..AnalysisOptions::default()
        };
        let a = analyze(&PhyParams::table1(), &opts).unwrap();
        assert!((a.solution.t_root.unwrap() - 1.000261721).abs() < 1e-8);
        assert!((a.solution.x - 5.234).abs() < 1e-3);
    }

    #[test]
    fn silent_network_is_non_defective() {
        let opts = AnalysisOptions { tau: TauSource::Explicit { tau: 0.0 }, ..AnalysisOptions::default() };
        assert!(matches!(analyze(&PhyParams::table1(), &opts), Err(Error::NonDefective(_))));
    }

    #[test]
    fn default_pipeline_is_populated() {
        let a = analyze(&PhyParams::table1(), &AnalysisOptions::default()).unwrap();
        let s = a.solution;
        for v in [s.x, s.mu, s.defect, s.tail_coeff] {
            assert!(v.is_finite() && v > 0.0);
        }
        assert!(a.fixed_point.is_some());
        let shifted = analyze(
            &PhyParams::table1(),
            &AnalysisOptions { shift_by_dsuc: true, ..AnalysisOptions::default() },
        )
        .unwrap();
        assert_eq!(shifted.solution.shift_s, 9412e-6);
    }
}
