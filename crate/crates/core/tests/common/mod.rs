//! Reference evaluators that share no code with the library solvers.

#![allow(dead_code)]

/// Bisection on an increasing function for a fixed number of halvings.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) < 0.0 && f(hi) > 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..300 {
        let mid = lo + (hi - lo) / 2.0;
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo + (hi - lo) / 2.0
}

/// `(weight, duration_us)` pairs.
pub fn transform_root(terms: &[(f64, f64)]) -> f64 {
    let g = |x: f64| {
        let mut acc = -1.0;
        for &(p, d) in terms {
            acc += p * (x * d / 1e6).exp();
        }
        acc
    };
    let mut hi = 1.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    bisect(g, 0.0, hi)
}

/// `(coefficient, exponent)` pairs; root above 1.
pub fn polynomial_root(terms: &[(f64, i32)]) -> f64 {
    bisect(|t| terms.iter().map(|&(c, k)| c * t.powi(k)).sum::<f64>() - 1.0, 1.0, 2.0)
}

/// Tilted mean in seconds.
pub fn tilted_mean(terms: &[(f64, f64)], x: f64) -> f64 {
    terms.iter().map(|&(p, d)| (d / 1e6) * p * (x * d / 1e6).exp()).sum()
}

/// Saturation fixed point with the stage sum written out literally.
pub fn saturation_tau(w: u32, m: u32, n: u32) -> f64 {
    let w = w as f64;
    let rhs = |tau: f64| {
        let p = 1.0 - (1.0 - tau).powi(n as i32 - 1);
        let sum: f64 = (0..m).map(|i| 2f64.powi(i as i32) * p.powi(i as i32)).sum();
        2.0 / (1.0 + w + p * w * sum)
    };
    bisect(|t| t - rhs(t), 0.0, 1.0)
}
