//! Sieve and entropy calculators for the sparse regression model.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::posterior::cardinality_log_prior;
use crate::error::{ensure_positive, Error, Result};
use crate::rng;
use crate::stat::special::ln_binomial;
use crate::stat::ErrorEstimate;

/// Analytic bound on the prior mass outside the sieve, with a Monte Carlo
/// estimate of the true mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SieveMassReport {
    /// `2 e^{−A M0 s0 log p} + 2 M0 s0 e^{−n²/(2τ²)}`.
    pub bound: f64,
    pub mc: ErrorEstimate,
}

/// `Π{|S| > M0 s0 or ‖β‖_∞ > n}`: analytic bound plus a prior-sampling
/// estimate.
#[allow(clippy::too_many_arguments)]
pub fn sieve_mass_bound(
    p: usize,
    a: f64,
    tau2: f64,
    s0: usize,
    m0: f64,
    n: usize,
    reps: u64,
    seed: u64,
) -> Result<SieveMassReport> {
    ensure_positive("A", a)?;
    ensure_positive("tau2", tau2)?;
    if !(m0 >= 1.0) || s0 == 0 || n == 0 || p < 2 || reps == 0 {
        return Err(Error::invalid(
            "sieve",
            "need M0 >= 1, s0 >= 1, n >= 1, p >= 2 and reps >= 1",
        ));
    }
    let card = m0 * s0 as f64;
    let nf = n as f64;
    let bound =
        2.0 * (-a * card * (p as f64).ln()).exp() + 2.0 * card * (-nf * nf / (2.0 * tau2)).exp();

    let log_probs = cardinality_log_prior(p, a, p);
    let mut cdf = Vec::with_capacity(log_probs.len());
    let mut acc = 0.0;
    for lp in &log_probs {
        acc += lp.exp();
        cdf.push(acc);
    }
    let tau = tau2.sqrt();
    let hits: u64 = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, r);
            let u: f64 = g.random::<f64>() * acc;
            let k = cdf.partition_point(|&c| c < u).min(p);
            if k as f64 > card {
                return 1;
            }
            // which coordinates are active does not affect membership
            let outside = (0..k).any(|_| (tau * g.sample::<f64, _>(StandardNormal)).abs() > nf);
            outside as u64
        })
        .sum();
    Ok(SieveMassReport {
        bound,
        mc: ErrorEstimate::from_counts(hits, reps),
    })
}

/// `log C(p, M0 s0) + M0 s0 · log(3 ‖X‖_∞ s0 n / ε_n)`: log of the bound on
/// the `√n ε_n`-covering number of the sieve in `‖·‖₂`.
pub fn entropy_bound_highdim(
    p: usize,
    x_inf: f64,
    s0: usize,
    m0: usize,
    eps_n: f64,
    n: usize,
) -> Result<f64> {
    ensure_positive("x_inf", x_inf)?;
    ensure_positive("eps_n", eps_n)?;
    if s0 == 0 || m0 == 0 || n == 0 {
        return Err(Error::invalid("entropy", "need s0, M0, n >= 1"));
    }
    let card = (m0 * s0).min(p);
    Ok(ln_binomial(p as u64, card as u64)
        + (m0 * s0) as f64 * (3.0 * x_inf * s0 as f64 * n as f64 / eps_n).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::cover_mean_set;

    #[test]
    fn second_term_vanishes() {
        let small = sieve_mass_bound(50, 1.0, 1.0, 2, 2.0, 1, 100, 1)
            .unwrap()
            .bound;
        let large = sieve_mass_bound(50, 1.0, 1.0, 2, 2.0, 40, 100, 1)
            .unwrap()
            .bound;
        assert!((large - 2.0 * 50f64.powf(-4.0)).abs() < 1e-18);
        assert!(small > large);
    }

    #[test]
    fn mc_mass_below_bound() {
        let mut g = rng::stream(9, 0);
        for i in 0..20u64 {
            let p = g.random_range(2..40usize);
            let a = g.random_range(0.05..1.0);
            let tau2 = g.random_range(0.1..4.0);
            let s0 = g.random_range(1..3usize);
            let n = g.random_range(1..4usize);
            let r = sieve_mass_bound(p, a, tau2, s0, 1.0, n, 4000, i).unwrap();
            assert!(r.mc.estimate <= r.bound + 3.0 * r.mc.std_error, "{r:?}");
        }
    }

    #[test]
    fn entropy_formula_and_monotonicity() {
        let v = entropy_bound_highdim(20, 1.5, 2, 3, 0.1, 100).unwrap();
        let exact = ln_binomial(20, 6) + 6.0 * (3.0 * 1.5 * 2.0 * 100.0 / 0.1f64).ln();
        assert!((v - exact).abs() < 1e-12);
        let mut prev = f64::NEG_INFINITY;
        for m0 in 1..5 {
            let b = entropy_bound_highdim(20, 1.5, 2, m0, 0.1, 100).unwrap();
            assert!(b > prev);
            prev = b;
        }
    }

    #[test]
    fn explicit_cover_respects_bound() {
        // sieve {X_S β : |S| ≤ 1, ‖β‖_∞ ≤ n}, p = 4; one-dimensional grids in
        // β_j of radius ε/‖X‖_∞ give √n ε balls in ‖·‖₂ since ‖X_j‖₂ ≤ √n ‖X‖_∞
        let (p, n, x_inf) = (4usize, 6usize, 1.0);
        let eps = 0.5;
        let per_column = cover_mean_set(1, n as f64, eps / x_inf).unwrap().len();
        let count = p * per_column + 1;
        let bound = entropy_bound_highdim(p, x_inf, 1, 1, eps, n).unwrap();
        assert!((count as f64).ln() <= bound, "{count} vs {}", bound.exp());
    }
}
