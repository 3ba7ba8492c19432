//! Slot event probabilities and the saturation fixed point for the
//! per-slot attempt probability.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest station count the brute-force enumeration accepts.
pub const MAX_ENUMERATION_NODES: u32 = 20;

/// Bisection steps allowed before the fixed point is declared divergent.
pub const FIXED_POINT_ITERATION_CAP: usize = 200;

/// Per-slot transmission attempt probabilities of the tagged sender and of
/// each of its `n_nodes - 1` neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttemptProbabilities {
    pub tau_tr: f64,
    pub tau_nb: f64,
    pub n_nodes: u32,
}

impl AttemptProbabilities {
    pub fn new(tau_tr: f64, tau_nb: f64, n_nodes: u32) -> Result<Self> {
        let a = AttemptProbabilities { tau_tr, tau_nb, n_nodes };
        a.validate()?;
        Ok(a)
    }

    /// Sender and neighbours share one attempt probability.
    pub fn uniform(tau: f64, n_nodes: u32) -> Result<Self> {
        Self::new(tau, tau, n_nodes)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau_tr", self.tau_tr), ("tau_nb", self.tau_nb)] {
            if !(0.0..=1.0).contains(&v) {
                return invalid(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.n_nodes < 2 {
            return invalid(format!("n_nodes must be >= 2, got {}", self.n_nodes));
        }
        Ok(())
    }
}

/// Probabilities of the five things the tagged station can see in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventProbabilities {
    /// Nobody transmits.
    pub p_emp: f64,
    /// Exactly one neighbour transmits, the sender is silent.
    pub p_suc: f64,
    /// Only the sender transmits; this terminates the delay.
    pub p_own: f64,
    /// The sender and exactly one neighbour transmit.
    pub p_col: f64,
    /// Any other slot with two or more transmitters.
    pub p_bus: f64,
}

impl EventProbabilities {
    pub fn sum(&self) -> f64 {
        self.p_emp + self.p_suc + self.p_own + self.p_col + self.p_bus
    }

    /// Rounds every field to `digits` decimals, as hand calculations do.
    ///
    /// The result generally no longer sums to one; the renewal solvers
    /// accept it because they only use the individual weights.
    pub fn rounded(&self, digits: u32) -> Self {
        let scale = 10f64.powi(digits as i32);
        let r = |v: f64| (v * scale).round() / scale;
        EventProbabilities {
            p_emp: r(self.p_emp),
            p_suc: r(self.p_suc),
            p_own: r(self.p_own),
            p_col: r(self.p_col),
            p_bus: r(self.p_bus),
        }
    }

    /// Weights of the non-terminating events, ordered like
    /// [`crate::DelayDurations::as_array`]: empty, success, collision, busy.
    pub fn renewal_weights(&self) -> [f64; 4] {
        [self.p_emp, self.p_suc, self.p_col, self.p_bus]
    }
}

/// Closed-form slot event probabilities.
pub fn event_probabilities(attempt: &AttemptProbabilities) -> Result<EventProbabilities> {
    attempt.validate()?;
    let AttemptProbabilities { tau_tr, tau_nb, n_nodes } = *attempt;
    let neighbours = f64::from(n_nodes - 1);
    let idle_nb = (1.0 - tau_nb).powi(n_nodes as i32 - 1);
    let one_nb = neighbours * tau_nb * (1.0 - tau_nb).powi(n_nodes as i32 - 2);

    let p_emp = (1.0 - tau_tr) * idle_nb;
    let p_suc = (1.0 - tau_tr) * one_nb;
    let p_own = tau_tr * idle_nb;
    let p_col = tau_tr * one_nb;
    let p_bus = (1.0 - p_emp - p_own - p_suc - p_col).max(0.0);
    Ok(EventProbabilities { p_emp, p_suc, p_own, p_col, p_bus })
}

/// Brute-force event probabilities: enumerates every transmit/silent
/// pattern of `n_nodes` stations (station 0 is the sender), weights it by
/// its Bernoulli probability and classifies it. A collision is the sender
/// plus exactly one neighbour; every other pattern with two or more
/// transmitters counts as busy.
///
/// Independent of [`event_probabilities`]; used to cross-check it.
pub fn enumeration_oracle(tau: f64, n_nodes: u32) -> Result<EventProbabilities> {
    if !(0.0..=1.0).contains(&tau) {
        return invalid(format!("tau must lie in [0, 1], got {tau}"));
    }
    if n_nodes == 0 || n_nodes > MAX_ENUMERATION_NODES {
        return invalid(format!(
            "enumeration needs 1 <= n_nodes <= {MAX_ENUMERATION_NODES}, got {n_nodes}"
        ));
    }
    // Patterns are tallied exactly per (sender, transmitter count) class;
    // the weights of a class are equal, so each class is multiplied once.
    let n = n_nodes as usize;
    let mut tally = vec![[0u64; 2]; n + 1];
    for pattern in 0u32..(1 << n_nodes) {
        tally[pattern.count_ones() as usize][(pattern & 1) as usize] += 1;
    }
    let mut acc = EventProbabilities { p_emp: 0.0, p_suc: 0.0, p_own: 0.0, p_col: 0.0, p_bus: 0.0 };
    for (transmitters, by_sender) in tally.iter().enumerate() {
        let weight = tau.powi(transmitters as i32) * (1.0 - tau).powi((n - transmitters) as i32);
        for (sender, &count) in by_sender.iter().enumerate() {
            let slot = match (sender == 1, transmitters) {
                (_, 0) => &mut acc.p_emp,
                (true, 1) => &mut acc.p_own,
                (true, 2) => &mut acc.p_col,
                (false, 1) => &mut acc.p_suc,
                _ => &mut acc.p_bus,
            };
            *slot += count as f64 * weight;
        }
    }
    Ok(acc)
}

/// Attempt probability and conditional collision probability at the
/// saturation fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BianchiSolution {
    pub tau: f64,
    pub p_cond: f64,
    pub residual: f64,
}

/// Conditional collision probability seen by a transmitting station.
pub fn conditional_collision(tau: f64, n_nodes: u32) -> f64 {
    1.0 - (1.0 - tau).powi(n_nodes as i32 - 1)
}

/// Attempt probability implied by a conditional collision probability.
/// The stage sum is accumulated term by term so `2P = 1` is harmless.
pub fn attempt_from_collision(p_cond: f64, cw_min: u32, max_stage: u32) -> f64 {
    let w = f64::from(cw_min);
    let mut stage_sum = 0.0;
    let mut term = 1.0;
    for _ in 0..max_stage {
        stage_sum += term;
        term *= 2.0 * p_cond;
    }
    2.0 / (1.0 + w + p_cond * w * stage_sum)
}

/// Solves the coupled attempt/collision equations for `tau` by bisection.
///
/// `tau - attempt_from_collision(conditional_collision(tau))` is negative
/// at 0 and positive at 1 and increasing in between, so bisection always
/// converges; plain substitution oscillates for realistic parameters.
pub fn bianchi_fixed_point(cw_min: u32, max_stage: u32, n_nodes: u32, tol: f64) -> Result<BianchiSolution> {
    if cw_min < 2 {
        return invalid(format!("cw_min must be >= 2, got {cw_min}"));
    }
    if n_nodes < 1 {
        return invalid("n_nodes must be >= 1");
    }
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let gap = |tau: f64| tau - attempt_from_collision(conditional_collision(tau, n_nodes), cw_min, max_stage);

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = (f64::INFINITY, 0.5);
    for _ in 0..FIXED_POINT_ITERATION_CAP {
        let mid = 0.5 * (lo + hi);
        let g = gap(mid);
        if g.abs() < best.0 {
            best = (g.abs(), mid);
        }
        if g == 0.0 || mid <= lo || mid >= hi {
            break;
        }
        if g > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (residual, tau) = best;
    if residual >= tol {
        return Err(Error::NonConvergence { iterations: FIXED_POINT_ITERATION_CAP, residual });
    }
    Ok(BianchiSolution { tau, p_cond: conditional_collision(tau, n_nodes), residual })
}
