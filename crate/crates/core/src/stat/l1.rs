//! L1-norm concentration of standard Gaussian vectors.

use rayon::prelude::*;

use super::fit::{ols, LinearFit};
use super::point::fill_standard_normal;
use crate::error::{Error, Result};
use crate::rng;

/// `E‖z‖₁ = n√(2/π)` for `z ~ N_n(0, I)`.
pub fn expected_l1_norm(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    Ok(n as f64 * (2.0 / std::f64::consts::PI).sqrt())
}

/// Draws `reps` values of `‖z‖₁` with `z ~ N_n(0, I)`; rep `r` uses stream `r`.
pub fn sample_l1_norms(n: usize, reps: usize, seed: u64) -> Vec<f64> {
    (0..reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, r| {
                let mut g = rng::stream(seed, r as u64);
                fill_standard_normal(&mut g, buf);
                buf.iter().map(|v| v.abs()).sum()
            },
        )
        .collect()
}

/// Empirical tail frequencies of `|‖z‖₁ − E‖z‖₁| > t` on a grid of `t`.
#[derive(Debug, Clone)]
pub struct L1TailProfile {
    pub n: usize,
    pub reps: usize,
    pub t: Vec<f64>,
    pub frequency: Vec<f64>,
}

impl L1TailProfile {
    pub fn from_samples(n: usize, norms: &[f64], t_grid: &[f64]) -> Result<Self> {
        let centre = expected_l1_norm(n)?;
        let frequency = t_grid
            .iter()
            .map(|&t| {
                norms.iter().filter(|&&v| (v - centre).abs() > t).count() as f64
                    / norms.len() as f64
            })
            .collect();
        Ok(Self {
            n,
            reps: norms.len(),
            t: t_grid.to_vec(),
            frequency,
        })
    }

    /// Regression of log-frequency on `t²/n` over grid points with at least
    /// one exceedance. The negated slope is an empirical sub-Gaussian constant.
    pub fn decay_fit(&self) -> Result<LinearFit> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .t
            .iter()
            .zip(&self.frequency)
            .filter(|(_, &f)| f > 0.0)
            .map(|(&t, &f)| (t * t / self.n as f64, f.ln()))
            .unzip();
        ols(&x, &y)
    }
}
