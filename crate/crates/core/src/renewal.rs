//! Terminating renewal model of the MAC access delay.
//!
//! Every slot the tagged station observes either a non-terminating event
//! (empty, neighbour success, collision, busy) with weight `P_i` and
//! duration `D_i`, or its own successful transmission, which ends the
//! process. The inter-renewal law is therefore defective with defect
//! `P_Own`, and the delay tail behaves like `c * exp(-x t)` where `x` is
//! the positive root of `sum_i P_i exp(x D_i) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::probabilities::EventProbabilities;
use crate::timing::DelayDurations;

/// Residual the root solvers drive `|g|` below.
pub const ROOT_RESIDUAL: f64 = 1e-12;
/// Residual above which a returned root is treated as a failure.
pub const ROOT_RESIDUAL_LIMIT: f64 = 1e-10;
/// Maximum number of bracket doublings plus bisection steps.
pub const ROOT_ITERATION_CAP: usize = 200;
/// `exp` overflows past this argument.
const EXP_ARG_LIMIT: f64 = 700.0;

/// How the transform equation is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    /// Bracket the transcendental equation directly.
    Exact,
    /// Round durations to whole slots and solve the resulting polynomial
    /// in `t = exp(x * slot)`.
    Polynomial,
}

impl std::str::FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolverMode::Exact),
            "polynomial" => Ok(SolverMode::Polynomial),
            other => invalid(format!("unknown solver mode `{other}` (expected exact or polynomial)")),
        }
    }
}

/// Finds the root of an increasing function with `f(lo) < 0`.
///
/// The upper end starts at `hi` and doubles until `f` turns positive or
/// `hi` passes `hi_limit`; the bracket is then bisected until it cannot
/// shrink further. Returns the best point and its residual.
fn bracketed_root(f: impl Fn(f64) -> f64, lo: f64, mut hi: f64, hi_limit: f64) -> Result<(f64, f64)> {
    let mut iterations = 0;
    while f(hi) <= 0.0 {
        iterations += 1;
        if hi >= hi_limit || iterations >= ROOT_ITERATION_CAP {
            return Err(Error::BracketFailure(hi));
        }
        hi = (hi * 2.0).min(hi_limit);
    }

    let mut lo = lo;
    let mut best = (lo, f(lo).abs());
    while iterations < ROOT_ITERATION_CAP {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = f(mid);
        if g.abs() < best.1 {
            best = (mid, g.abs());
        }
        if g == 0.0 {
            break;
        }
        if g > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let hi_res = f(hi).abs();
    if hi_res < best.1 {
        best = (hi, hi_res);
    }
    if best.1 > ROOT_RESIDUAL_LIMIT {
        return Err(Error::NonConvergence { iterations, residual: best.1 });
    }
    Ok(best)
}

fn check_defective(probs: &EventProbabilities) -> Result<()> {
    if !(probs.p_own > 0.0) {
        return Err(Error::NonDefective(probs.p_own));
    }
    let weights = probs.renewal_weights();
    if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return invalid(format!("event probabilities must lie in [0, 1]: {probs:?}"));
    }
    if weights.iter().sum::<f64>() >= 1.0 {
        // Rounded inputs can leave no mass for termination.
        return Err(Error::NonDefective(1.0 - weights.iter().sum::<f64>()));
    }
    Ok(())
}

/// Left-hand side of the transform equation minus one, `x` in 1/s.
pub fn transform_residual(probs: &EventProbabilities, durations: &DelayDurations, x: f64) -> f64 {
    probs
        .renewal_weights()
        .iter()
        .zip(durations.as_seconds())
        .map(|(p, d)| p * (x * d).exp())
        .sum::<f64>()
        - 1.0
}

/// Positive root `x` (1/s) of `sum_i P_i exp(x D_i) = 1`.
pub fn solve_transform_root_exact(probs: &EventProbabilities, durations: &DelayDurations) -> Result<f64> {
    check_defective(probs)?;
    let d_max = durations.as_seconds().into_iter().fold(0.0, f64::max);
    if !(d_max > 0.0) {
        return invalid("delay durations must be positive");
    }
    let (x, _) = bracketed_root(
        |x| transform_residual(probs, durations, x),
        0.0,
        1.0,
        EXP_ARG_LIMIT / d_max,
    )?;
    Ok(x)
}

/// Root `t > 1` of `sum_i c_i t^k_i = 1` for nonnegative coefficients.
pub fn solve_slot_polynomial(terms: &[(f64, u32)]) -> Result<f64> {
    if terms.iter().any(|(c, _)| !(*c >= 0.0)) {
        return invalid("polynomial coefficients must be nonnegative");
    }
    let constant: f64 = terms.iter().filter(|(_, k)| *k == 0).map(|(c, _)| c).sum();
    let total: f64 = terms.iter().map(|(c, _)| c).sum();
    if total >= 1.0 {
        return Err(Error::NonDefective(1.0 - total));
    }
    let k_max = terms.iter().filter(|(c, _)| *c > 0.0).map(|(_, k)| *k).max().unwrap_or(0);
    if k_max == 0 || constant >= 1.0 {
        return Err(Error::BracketFailure(1.0));
    }
    let poly = |t: f64| terms.iter().map(|(c, k)| c * t.powi(*k as i32)).sum::<f64>() - 1.0;
    let t_limit = (EXP_ARG_LIMIT / f64::from(k_max)).exp();
    let (t, _) = bracketed_root(poly, 1.0, 2.0f64.min(t_limit), t_limit)?;
    Ok(t)
}

/// Slot-rounded exponents and the root of the resulting polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialRoot {
    pub t_root: f64,
    /// Transform root recovered as `ln(t_root) / slot`, 1/s.
    pub x: f64,
    /// Whole-slot exponents for empty, success, collision, busy.
    pub exponents: [u32; 4],
    /// Two or more durations rounded to the same exponent and their
    /// coefficients were added together.
    pub merged: bool,
}

/// Round-half-up of `duration / slot`.
pub fn slot_exponent(duration_us: f64, slot_us: f64) -> u32 {
    (duration_us / slot_us + 0.5).floor() as u32
}

/// Solves the transform equation after rounding each duration to whole
/// slots, substituting `t = exp(x * slot)`.
pub fn solve_transform_root_polynomial(
    probs: &EventProbabilities,
    durations: &DelayDurations,
    slot_us: f64,
) -> Result<PolynomialRoot> {
    check_defective(probs)?;
    if !(slot_us > 0.0) {
        return invalid("slot must be strictly positive");
    }
    let exponents = durations.as_array().map(|d| slot_exponent(d, slot_us));
    let mut terms: Vec<(f64, u32)> = Vec::with_capacity(4);
    let mut merged = false;
    for (p, k) in probs.renewal_weights().into_iter().zip(exponents) {
        match terms.iter_mut().find(|(_, existing)| *existing == k) {
            Some(term) => {
                term.0 += p;
                merged = true;
            }
            None => terms.push((p, k)),
        }
    }
    let t_root = solve_slot_polynomial(&terms)?;
    Ok(PolynomialRoot { t_root, x: t_root.ln() / (slot_us * 1e-6), exponents, merged })
}

/// Tilted mean `sum_i D_i P_i exp(x D_i)`, in seconds.
pub fn compute_mu(probs: &EventProbabilities, durations: &DelayDurations, x: f64) -> f64 {
    probs
        .renewal_weights()
        .iter()
        .zip(durations.as_seconds())
        .map(|(p, d)| d * p * (x * d).exp())
        .sum()
}

/// Parameters of the exponential delay tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalSolution {
    /// Transform root, 1/s.
    pub x: f64,
    /// Tilted mean, s.
    pub mu: f64,
    /// Termination mass `1 - F(inf)`, equal to `P_Own`.
    pub defect: f64,
    /// `defect / (x * mu)`.
    pub tail_coeff: f64,
    /// Constant added to every delay before the tail applies, s.
    #[serde(default)]
    pub shift_s: f64,
    pub mode: SolverMode,
    /// Root in `t = exp(x * slot)` when solved in polynomial mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_root: Option<f64>,
}

impl RenewalSolution {
    /// Solves for `x` with the requested mode, then derives `mu` and the
    /// tail coefficient. Polynomial mode rounds with the empty-slot
    /// duration as the slot length.
    pub fn solve(probs: &EventProbabilities, durations: &DelayDurations, mode: SolverMode) -> Result<Self> {
        let (x, t_root) = match mode {
            SolverMode::Exact => (solve_transform_root_exact(probs, durations)?, None),
            SolverMode::Polynomial => {
                let root = solve_transform_root_polynomial(probs, durations, durations.d_emp)?;
                (root.x, Some(root.t_root))
            }
        };
        let mu = compute_mu(probs, durations, x);
        if !(x > 0.0 && mu > 0.0) {
            return Err(Error::NonConvergence { iterations: 0, residual: f64::NAN });
        }
        Ok(RenewalSolution {
            x,
            mu,
            defect: probs.p_own,
            tail_coeff: probs.p_own / (x * mu),
            shift_s: 0.0,
            mode,
            t_root,
        })
    }

    /// Evaluates the tail as `P(M + shift > t)`; use `D_Suc` to count the
    /// tagged station's own final transmission in the delay.
    pub fn with_shift(mut self, shift_s: f64) -> Self {
        self.shift_s = shift_s;
        self
    }

    /// `P(delay > t)` for `t` in seconds.
    pub fn tail(&self, t_s: f64) -> f64 {
        let t = t_s - self.shift_s;
        if t < 0.0 {
            return 1.0;
        }
        (self.tail_coeff * (-self.x * t).exp()).min(1.0)
    }
}

/// `P(M > t)` for `t` in seconds, clamped to 1 where the asymptotic
/// form overshoots near the origin.
pub fn tail_probability(sol: &RenewalSolution, t_s: f64) -> f64 {
    sol.tail(t_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtdfPoint {
    pub t_ms: f64,
    pub value: f64,
}

/// Right-tail distribution function `P(delay > t)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RtdfCurve {
    pub points: Vec<RtdfPoint>,
}

impl RtdfCurve {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.t_ms)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Strictly increasing times; nonincreasing values inside `[0, 1]`.
    pub fn check_invariants(&self) -> Result<()> {
        for p in &self.points {
            if !(0.0..=1.0).contains(&p.value) {
                return invalid(format!("RTDF value {} at {} ms outside [0, 1]", p.value, p.t_ms));
            }
        }
        for w in self.points.windows(2) {
            if !(w[1].t_ms > w[0].t_ms) {
                return invalid(format!("RTDF times not increasing at {} ms", w[1].t_ms));
            }
            if w[1].value > w[0].value {
                return invalid(format!("RTDF increases at {} ms", w[1].t_ms));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub a_ms: f64,
    pub b_ms: f64,
    pub mass: f64,
}

/// Delay mass per interval, plus the mass beyond the last edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayHistogram {
    pub bins: Vec<HistogramBin>,
    pub tail_mass: f64,
}

impl DelayHistogram {
    pub fn total_mass(&self) -> f64 {
        self.bins.iter().map(|b| b.mass).sum::<f64>() + self.tail_mass
    }
}

/// Bins the delay law on `[0, horizon]`: the first bin is
/// `1 - P(M > c)`, later bins `P(M > a) - P(M > b)`.
pub fn delay_histogram(sol: &RenewalSolution, bin_width_ms: u64, horizon_ms: u64) -> Result<DelayHistogram> {
    if bin_width_ms == 0 {
        return invalid("bin width must be strictly positive");
    }
    if horizon_ms == 0 || !horizon_ms.is_multiple_of(bin_width_ms) {
        return invalid(format!(
            "horizon {horizon_ms} ms must be a positive multiple of the bin width {bin_width_ms} ms"
        ));
    }
    let tail_at = |ms: u64| sol.tail(ms as f64 * 1e-3);
    let bins = (0..horizon_ms / bin_width_ms)
        .map(|i| {
            let (a, b) = (i * bin_width_ms, (i + 1) * bin_width_ms);
            let upper = if a == 0 { 1.0 } else { tail_at(a) };
            HistogramBin { a_ms: a as f64, b_ms: b as f64, mass: upper - tail_at(b) }
        })
        .collect();
    Ok(DelayHistogram { bins, tail_mass: tail_at(horizon_ms) })
}
