//! Model-versus-simulation comparison on a common time grid.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::renewal::{RenewalSolution, RtdfCurve, RtdfPoint};

pub const DEFAULT_GRID_STEP_MS: u64 = 10;

/// `0, step, 2*step, ..., horizon` in milliseconds.
pub fn eval_grid(step_ms: u64, horizon_ms: u64) -> Result<Vec<f64>> {
    if step_ms == 0 {
        return invalid("grid step must be strictly positive");
    }
    Ok((0..=horizon_ms / step_ms).map(|i| (i * step_ms) as f64).collect())
}

/// Evaluates the analytical tail on each time of the grid (ms).
pub fn model_rtdf(sol: &RenewalSolution, eval_times_ms: &[f64]) -> Result<RtdfCurve> {
    if eval_times_ms.windows(2).any(|w| !(w[1] > w[0])) || eval_times_ms.iter().any(|&t| t < 0.0) {
        return invalid("evaluation times must be nonnegative and strictly increasing");
    }
    let points = eval_times_ms
        .iter()
        .map(|&t_ms| RtdfPoint { t_ms, value: sol.tail(t_ms * 1e-3) })
        .collect();
    Ok(RtdfCurve { points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub model_curve: RtdfCurve,
    pub sim_curve: RtdfCurve,
    pub max_abs_error: f64,
    /// Grid time at which the largest error occurs.
    pub worst_t_ms: f64,
    pub n_nodes: u32,
    pub sample_count: usize,
    pub seed: u64,
}

impl ValidationReport {
    /// `(t_ms, model, sim, |model - sim|)` per grid point.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.model_curve
            .points
            .iter()
            .zip(&self.sim_curve.points)
            .map(|(m, s)| (m.t_ms, m.value, s.value, (m.value - s.value).abs()))
    }
}

/// Largest pointwise gap between two curves on the same grid.
pub fn max_abs_error(a: &RtdfCurve, b: &RtdfCurve) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("{} points vs {}", a.len(), b.len())));
    }
    let mut worst = (0.0f64, a.points.first().map_or(0.0, |p| p.t_ms));
    for (p, q) in a.points.iter().zip(&b.points) {
        if p.t_ms != q.t_ms {
            return Err(Error::GridMismatch(format!("{} ms vs {} ms", p.t_ms, q.t_ms)));
        }
        let err = (p.value - q.value).abs();
        if err > worst.0 {
            worst = (err, p.t_ms);
        }
    }
    Ok(worst)
}

/// Builds the report; the metadata fields are filled in by the caller.
pub fn compare(model: RtdfCurve, sim: RtdfCurve) -> Result<ValidationReport> {
    let (max_abs_error, worst_t_ms) = max_abs_error(&model, &sim)?;
    Ok(ValidationReport {
        model_curve: model,
        sim_curve: sim,
        max_abs_error,
        worst_t_ms,
        n_nodes: 0,
        sample_count: 0,
        seed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::SolverMode;
    use proptest::prelude::*;

    fn curve(values: &[f64]) -> RtdfCurve {
        RtdfCurve {
            points: values
                .iter()
                .enumerate()
                .map(|(i, &value)| RtdfPoint { t_ms: 10.0 * i as f64, value })
                .collect(),
        }
    }

    fn solution(x: f64, tail_coeff: f64) -> RenewalSolution {
        RenewalSolution { x, mu: 1.0, defect: 0.1, tail_coeff, shift_s: 0.0, mode: SolverMode::Exact, t_root: None }
    }

    #[test]
    fn grid_layout() {
        let g = eval_grid(10, 200).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[20], 200.0);
        assert!(eval_grid(0, 200).is_err());
    }

    #[test]
    fn worked_example_curve() {
        // x = 5.234 and the tilted mean evaluated there (50-digit reference).
        let c = 0.978_632_614_344_358_5;
        let sol = solution(5.234, c);
        let curve = model_rtdf(&sol, &[0.0, 100.0, 200.0]).unwrap();
        let v: Vec<f64> = curve.values().collect();
        assert!((v[0] - c).abs() < 1e-15);
        assert!((v[1] - 0.579_842_378_763_182_9).abs() < 1e-12);
        assert!((v[2] - 0.343_558_123_121_614_3).abs() < 1e-12);
        assert!(model_rtdf(&sol, &[10.0, 5.0]).is_err());
    }

    #[test]
    fn compare_basics() {
        let a = curve(&[1.0, 0.5, 0.2]);
        let r = compare(a.clone(), a.clone()).unwrap();
        assert_eq!(r.max_abs_error, 0.0);

        let b = curve(&[1.0, 0.51, 0.2]);
        let r = compare(a.clone(), b).unwrap();
        assert!((r.max_abs_error - 0.01).abs() < 1e-15);
        assert_eq!(r.worst_t_ms, 10.0);
        assert_eq!(r.rows().count(), 3);

        assert!(compare(a.clone(), curve(&[1.0])).is_err());
        let mut shifted = a.clone();
        shifted.points[1].t_ms = 11.0;
        assert!(matches!(compare(a, shifted), Err(Error::GridMismatch(_))));
    }

    proptest! {
        #[test]
        fn model_curves_are_valid(x in 0.01f64..100.0, c in 0.0f64..3.0, shift in 0.0f64..0.05) {
            let sol = solution(x, c).with_shift(shift);
            let curve = model_rtdf(&sol, &eval_grid(10, 200).unwrap()).unwrap();
            prop_assert!(curve.check_invariants().is_ok());
        }

        #[test]
        fn error_is_symmetric(a in prop::collection::vec(0.0f64..=1.0, 21), b in prop::collection::vec(0.0f64..=1.0, 21)) {
            let (ca, cb) = (curve(&a), curve(&b));
            prop_assert_eq!(max_abs_error(&ca, &cb).unwrap().0, max_abs_error(&cb, &ca).unwrap().0);
            prop_assert_eq!(max_abs_error(&ca, &ca).unwrap().0, 0.0);
        }
    }
}
