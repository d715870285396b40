use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SigmaPriorSpec;
use crate::error::{ensure_positive, Error, Result};
use crate::rng::{self, StreamRng};
use crate::stat::fit::{ols, LinearFit};
use crate::stat::point::metric_d_sq_unchecked;
use crate::stat::{ErrorEstimate, ParamPoint};

/// One posterior draw of `(μ, σ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSample {
    pub mu: Vec<f64>,
    pub sigma: f64,
}

/// Fraction of draws at metric distance at least `M·ε_n` from the truth.
pub fn contraction_diagnostic(
    samples: &[PosteriorSample],
    truth: &ParamPoint,
    eps_n: f64,
    m: f64,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid(
            "samples",
            "need at least one posterior draw",
        ));
    }
    ensure_positive("eps_n", eps_n)?;
    ensure_positive("M", m)?;
    let radius_sq = (m * eps_n).powi(2);
    let mut bad = 0usize;
    for s in samples {
        if s.mu.len() != truth.n() {
            return Err(Error::DimensionMismatch {
                expected: truth.n(),
                actual: s.mu.len(),
            });
        }
        if metric_d_sq_unchecked(&s.mu, s.sigma, truth.mu(), truth.sigma()) >= radius_sq {
            bad += 1;
        }
    }
    Ok(bad as f64 / samples.len() as f64)
}

/// OLS of `log error` on `log n`.
pub fn fit_rate_exponent(n_values: &[u64], error_values: &[f64]) -> Result<LinearFit> {
    if n_values.len() < 3 {
        return Err(Error::invalid("n_values", "need at least 3 points"));
    }
    if let Some(bad) = error_values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::invalid(
            "error_values",
            format!("must be positive, found {bad}"),
        ));
    }
    let x: Vec<f64> = n_values.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = error_values.iter().map(|v| v.ln()).collect();
    ols(&x, &y)
}

/// Draws a mean vector from the prior on `μ`.
pub trait MeanPriorSampler: Sync {
    fn sample_mean(&self, rng: &mut StreamRng) -> Vec<f64>;
}

impl<F> MeanPriorSampler for F
where
    F: Fn(&mut StreamRng) -> Vec<f64> + Sync,
{
    fn sample_mean(&self, rng: &mut StreamRng) -> Vec<f64> {
        self(rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorMassEstimate {
    pub mass: ErrorEstimate,
    /// No draw landed in the box: the mass is below Monte Carlo resolution.
    pub below_resolution: bool,
}

/// Monte Carlo estimate of `Π{‖μ − μ0‖² ≤ n ε², |σ² − σ0²| ≤ σ0 ε}` under
/// independent priors on `μ` and `σ²`.
pub fn prior_mass_d_box(
    mu_prior: &dyn MeanPriorSampler,
    sigma_prior: &SigmaPriorSpec,
    truth: &ParamPoint,
    eps: f64,
    reps: u64,
    seed: u64,
) -> Result<PriorMassEstimate> {
    ensure_positive("eps", eps)?;
    sigma_prior.validate()?;
    if reps == 0 {
        return Err(Error::invalid("reps", "must be at least 1"));
    }
    let n = truth.n();
    let s0 = truth.sigma() * truth.sigma();
    let mean_radius = n as f64 * eps * eps;
    let var_radius = truth.sigma() * eps;
    let hits: Result<u64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, r);
            let mu = mu_prior.sample_mean(&mut g);
            if mu.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: mu.len(),
                });
            }
            let s2 = sigma_prior.sample(&mut g);
            let sq: f64 = mu
                .iter()
                .zip(truth.mu())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            Ok(u64::from(
                sq <= mean_radius && (s2 - s0).abs() <= var_radius,
            ))
        })
        .sum();
    let hits = hits?;
    Ok(PriorMassEstimate {
        mass: ErrorEstimate::from_counts(hits, reps),
        below_resolution: hits == 0,
    })
}

/// Draws a vector of i.i.d. `N(0, tau2)` entries; a convenient mean prior.
pub fn iid_gaussian_mean(n: usize, tau2: f64) -> impl Fn(&mut StreamRng) -> Vec<f64> + Sync {
    let sd = tau2.sqrt();
    move |g: &mut StreamRng| {
        (0..n)
            .map(|_| sd * g.sample::<f64, _>(rand_distr::StandardNormal))
            .collect()
    }
}
