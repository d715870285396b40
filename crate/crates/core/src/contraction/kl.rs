//! Kullback-Leibler divergence and second-order variation between
//! `N_n(μ0, σ0² I)` and `N_n(μ, σ² I)`.

use crate::error::{Error, Result};
use crate::stat::ParamPoint;

fn parts(truth: &ParamPoint, point: &ParamPoint) -> Result<(f64, f64, f64)> {
    if truth.n() != point.n() {
        return Err(Error::DimensionMismatch {
            expected: truth.n(),
            actual: point.n(),
        });
    }
    let sq: f64 = truth
        .mu()
        .iter()
        .zip(point.mu())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let ratio = (truth.sigma() / point.sigma()).powi(2);
    Ok((truth.n() as f64, sq, ratio))
}

/// `K = (n/2) log(σ²/σ0²) − (n/2)(1 − σ0²/σ²) + ‖μ − μ0‖² / (2σ²)`.
pub fn kl_divergence(truth: &ParamPoint, point: &ParamPoint) -> Result<f64> {
    let (n, sq, ratio) = parts(truth, point)?;
    // −log r − (1 − r) ≥ 0 with r = σ0²/σ²; ln_1p keeps it accurate near r = 1
    let w = ratio - 1.0;
    let variance_term = w - w.ln_1p();
    let k = 0.5 * n * variance_term + sq / (2.0 * point.sigma() * point.sigma());
    Ok(k.max(0.0))
}

/// `V = (n/2)(1 − σ0²/σ²)² + σ0² ‖μ − μ0‖² / σ⁴`.
pub fn kl_variation(truth: &ParamPoint, point: &ParamPoint) -> Result<f64> {
    let (n, sq, ratio) = parts(truth, point)?;
    let s2 = point.sigma() * point.sigma();
    Ok(0.5 * n * (1.0 - ratio).powi(2) + truth.sigma().powi(2) * sq / (s2 * s2))
}
