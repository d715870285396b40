//! Simulated contraction of the spline posterior on a grid of sample sizes.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::uniform_design_points;
use super::posterior::{
    empirical_l2_norm, eps_n_spline, posterior_over_j, sample_f_posterior, SplineModel,
};
use super::truth::{HolderFamily, HolderTruth};
use crate::contraction::{fit_rate_exponent, ConditionId, ConditionReport, Relation};
use crate::error::{ensure_positive, Error, Result};
use crate::highdim::experiment::median;
use crate::rng::{self, derive_seed};
use crate::stat::LinearFit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignKind {
    /// `x_i = (i − ½)/n`.
    Grid,
    /// i.i.d. uniform on `[0, 1]`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplineExperimentConfig {
    pub family: HolderFamily,
    pub alpha: f64,
    pub sigma0: f64,
    pub model: SplineModel,
    pub design: DesignKind,
    /// Bad-set multiplier: mass of `{d > M ε_n}` is reported.
    pub m: f64,
    pub draws: usize,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for SplineExperimentConfig {
    fn default() -> Self {
        Self {
            family: HolderFamily::Sinusoid,
            alpha: 2.0,
            sigma0: 1.0,
            model: SplineModel::default(),
            design: DesignKind::Grid,
            m: 10.0,
            draws: 500,
            n_grid: vec![128, 256, 512, 1024, 2048],
            replicates: 10,
            seed: 20_240_604,
        }
    }
}

impl SplineExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("sigma0", self.sigma0)?;
        ensure_positive("M", self.m)?;
        HolderTruth::new(self.family, self.alpha)?;
        self.model.validate()?;
        if self.alpha > (self.model.q + 1) as f64 {
            return Err(Error::invalid(
                "alpha",
                format!("needs q + 1 ≥ α, q = {}", self.model.q),
            ));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "n_grid",
                "must be nonempty and strictly increasing",
            ));
        }
        if self.n_grid[0] < self.model.j_max.max(2) {
            return Err(Error::invalid(
                "n_grid",
                format!("sizes must be at least j_max = {}", self.model.j_max),
            ));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates", "must be at least 1"));
        }
        if self.draws == 0 {
            return Err(Error::invalid("draws", "must be at least 1"));
        }
        Ok(())
    }
}

/// Whether `slack · ((log n)/n)^{2α} ≤ σ0² ≤ n / log n`.
pub fn spline_variance_window(
    alpha: f64,
    n: usize,
    sigma0_sq: f64,
    slack: f64,
) -> Result<ConditionReport> {
    ensure_positive("alpha", alpha)?;
    ensure_positive("sigma0_sq", sigma0_sq)?;
    ensure_positive("slack", slack)?;
    if n < 2 {
        return Err(Error::invalid("n", "must be at least 2"));
    }
    let nf = n as f64;
    let lower = slack * (nf.ln() / nf).powf(2.0 * alpha);
    Ok(ConditionReport::new(
        ConditionId::SplineVarianceWindow,
        Relation::Within { lower },
        sigma0_sq,
        nf / nf.ln(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineRow {
    pub n: usize,
    pub replicate: usize,
    /// Posterior median of `‖f − f0‖_n + |σ − σ0|`.
    pub median_d_error: f64,
    /// Posterior median of `‖f − f0‖_n`.
    pub median_f_error: f64,
    pub eps_n: f64,
    /// Posterior mass of `{d > M ε_n}`.
    pub bad_mass: f64,
    pub posterior_mode_j: usize,
    pub window_satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineSummary {
    pub n: usize,
    pub eps_n: f64,
    pub median_d_error: f64,
    pub median_f_error: f64,
    pub mean_bad_mass: f64,
    pub max_bad_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineResult {
    pub rows: Vec<SplineRow>,
    pub summary: Vec<SplineSummary>,
    /// Slope of log median `‖f − f0‖_n` on log n.
    pub rate_fit: Option<LinearFit>,
    /// Slope of log median `‖f − f0‖_n + |σ − σ0|` on log n.
    pub d_rate_fit: Option<LinearFit>,
}

fn run_replicate(
    config: &SplineExperimentConfig,
    truth: &HolderTruth,
    ni: usize,
    n: usize,
    replicate: usize,
) -> Result<SplineRow> {
    let seed = derive_seed(config.seed, &[ni as u64, replicate as u64]);
    let mut g = rng::stream(seed, 0);
    let mut xs = match config.design {
        DesignKind::Grid => uniform_design_points(n),
        DesignKind::Random => (0..n).map(|_| g.random::<f64>()).collect(),
    };
    if config.design == DesignKind::Random {
        xs.sort_by(f64::total_cmp);
    }
    let f0 = truth.eval_many(&xs);
    let y: Vec<f64> = f0
        .iter()
        .map(|m| m + config.sigma0 * g.sample::<f64, _>(StandardNormal))
        .collect();
    let post = posterior_over_j(&y, &xs, &config.model)?;
    let draws = sample_f_posterior(&post, config.draws, derive_seed(seed, &[1]))?;
    let eps_n = eps_n_spline(config.sigma0, n, config.alpha)?;
    let radius_sq = (config.m * eps_n).powi(2);
    let mut f_err = Vec::with_capacity(draws.len());
    let mut d_err = Vec::with_capacity(draws.len());
    let mut bad = 0usize;
    for d in &draws {
        let diff: Vec<f64> = d.fvals.iter().zip(&f0).map(|(a, b)| a - b).collect();
        let fe = empirical_l2_norm(&diff)?;
        let se = (d.sigma - config.sigma0).abs();
        if fe * fe + se * se > radius_sq {
            bad += 1;
        }
        f_err.push(fe);
        d_err.push(fe + se);
    }
    let window = spline_variance_window(
        config.alpha,
        n,
        config.sigma0 * config.sigma0,
        (n as f64).ln(),
    )?;
    Ok(SplineRow {
        n,
        replicate,
        median_d_error: median(&mut d_err),
        median_f_error: median(&mut f_err),
        eps_n,
        bad_mass: bad as f64 / draws.len() as f64,
        posterior_mode_j: post.mode(),
        window_satisfied: window.satisfied,
    })
}

/// Simulates data on the `n` grid, computes the exact posterior over `J` and
/// summarises the posterior error relative to `ε_n`.
pub fn contraction_experiment_spline(config: &SplineExperimentConfig) -> Result<SplineResult> {
    config.validate()?;
    let truth = HolderTruth::new(config.family, config.alpha)?;
    let tasks: Vec<(usize, usize, usize)> = config
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(ni, &n)| (0..config.replicates).map(move |r| (ni, n, r)))
        .collect();
    let rows = tasks
        .into_par_iter()
        .map(|(ni, n, r)| run_replicate(config, &truth, ni, n, r))
        .collect::<Result<Vec<_>>>()?;
    let summary: Vec<SplineSummary> = rows
        .chunks(config.replicates)
        .map(|chunk| {
            let mut d: Vec<f64> = chunk.iter().map(|r| r.median_d_error).collect();
            let mut f: Vec<f64> = chunk.iter().map(|r| r.median_f_error).collect();
            let bad: Vec<f64> = chunk.iter().map(|r| r.bad_mass).collect();
            SplineSummary {
                n: chunk[0].n,
                eps_n: chunk[0].eps_n,
                median_d_error: median(&mut d),
                median_f_error: median(&mut f),
                mean_bad_mass: bad.iter().sum::<f64>() / bad.len() as f64,
                max_bad_mass: bad.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect();
    let (rate_fit, d_rate_fit) = if summary.len() >= 3 {
        let ns: Vec<u64> = summary.iter().map(|s| s.n as u64).collect();
        let fe: Vec<f64> = summary.iter().map(|s| s.median_f_error).collect();
        let de: Vec<f64> = summary.iter().map(|s| s.median_d_error).collect();
        (
            Some(fit_rate_exponent(&ns, &fe)?),
            Some(fit_rate_exponent(&ns, &de)?),
        )
    } else {
        (None, None)
    };
    Ok(SplineResult {
        rows,
        summary,
        rate_fit,
        d_rate_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SplineExperimentConfig {
        SplineExperimentConfig {
            model: SplineModel {
                j_max: 14,
                ..SplineModel::default()
            },
            draws: 100,
            n_grid: vec![64, 256, 1024],
            replicates: 3,
            ..SplineExperimentConfig::default()
        }
    }

    #[test]
    fn deterministic_and_shaped() {
        let c = quick();
        let a = contraction_experiment_spline(&c).unwrap();
        assert_eq!(a, contraction_experiment_spline(&c).unwrap());
        assert_eq!(a.rows.len(), 9);
        assert_eq!(a.summary.len(), 3);
        assert!(a
            .rows
            .iter()
            .all(|r| r.window_satisfied && (4..=14).contains(&r.posterior_mode_j)));
    }

    #[test]
    fn error_decreases_in_n() {
        let r = contraction_experiment_spline(&quick()).unwrap();
        for w in r.summary.windows(2) {
            assert!(w[1].median_f_error < w[0].median_f_error);
        }
        assert!(r.rate_fit.unwrap().slope < 0.0);
    }

    #[test]
    fn random_design_runs() {
        let c = SplineExperimentConfig {
            design: DesignKind::Random,
            n_grid: vec![64],
            replicates: 1,
            ..quick()
        };
        let r = contraction_experiment_spline(&c).unwrap();
        assert!(r.rate_fit.is_none());
        assert!(r.rows[0].median_f_error > 0.0);
    }

    #[test]
    fn window_examples() {
        assert!(
            spline_variance_window(2.0, 1000, 1.0, 1000f64.ln())
                .unwrap()
                .satisfied
        );
        assert!(
            !spline_variance_window(2.0, 1000, 200.0, 1.0)
                .unwrap()
                .satisfied
        );
        assert!(
            !spline_variance_window(0.5, 100, 1e-3, 100f64.ln())
                .unwrap()
                .satisfied
        );
    }

    #[test]
    fn rejects_bad_config() {
        for c in [
            SplineExperimentConfig {
                alpha: 5.0,
                ..quick()
            },
            SplineExperimentConfig {
                n_grid: vec![10],
                ..quick()
            },
            SplineExperimentConfig {
                n_grid: vec![256, 128],
                ..quick()
            },
            SplineExperimentConfig {
                draws: 0,
                ..quick()
            },
        ] {
            assert!(contraction_experiment_spline(&c).is_err());
        }
    }
}
