use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mcmc::{mcmc_posterior, HighDimDraw, McmcSettings};
use super::model::{simulate_response, uniform_design, HighDimModel, HighDimTruth};
use super::posterior::eps_n_highdim;
use crate::contraction::{fit_rate_exponent, SigmaPriorSpec};
use crate::error::{ensure_positive, Error, Result};
use crate::rng::{self, derive_seed};
use crate::stat::LinearFit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HighDimExperimentConfig {
    pub p: usize,
    pub s0: usize,
    /// Magnitude of the nonzero true coefficients.
    pub signal: f64,
    pub sigma0: f64,
    /// Design entries are uniform on `[−design_bound, design_bound]`.
    pub design_bound: f64,
    pub a: f64,
    pub tau2: f64,
    pub sigma_prior: SigmaPriorSpec,
    /// Bad-set multiplier: mass of `{d > M ε_n}` is reported.
    pub m: f64,
    pub mcmc: McmcSettings,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for HighDimExperimentConfig {
    fn default() -> Self {
        Self {
            p: 100,
            s0: 3,
            signal: 1.0,
            sigma0: 1.0,
            design_bound: 3f64.sqrt(),
            a: 1.0,
            tau2: 1.0,
            sigma_prior: SigmaPriorSpec::default(),
            m: 10.0,
            mcmc: McmcSettings::default(),
            n_grid: vec![200, 400, 800, 1600],
            replicates: 10,
            seed: 20_240_603,
        }
    }
}

impl HighDimExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::invalid("p", "must be at least 2"));
        }
        if self.s0 == 0 || self.s0 > self.p {
            return Err(Error::invalid("s0", format!("must lie in 1..={}", self.p)));
        }
        for (name, v) in [
            ("signal", self.signal),
            ("sigma0", self.sigma0),
            ("design_bound", self.design_bound),
            ("A", self.a),
            ("tau2", self.tau2),
            ("M", self.m),
        ] {
            ensure_positive(name, v)?;
        }
        self.sigma_prior.validate()?;
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "n_grid",
                "must be nonempty and strictly increasing",
            ));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates", "must be at least 1"));
        }
        if !self.mcmc.draw_parameters {
            return Err(Error::invalid(
                "mcmc.draw_parameters",
                "the experiment needs parameter draws",
            ));
        }
        self.mcmc.validate(self.n_grid[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighDimRow {
    pub n: usize,
    pub replicate: usize,
    /// Posterior median of `n^{−1/2}‖X(β − β0)‖₂ + |σ − σ0|`.
    pub median_d_error: f64,
    pub mean_d_error: f64,
    pub eps_n: f64,
    /// Posterior mass of `{d > M ε_n}`.
    pub bad_mass: f64,
    /// Posterior frequency of the true support.
    pub support_hit: f64,
    pub acceptance_rate: f64,
    pub ess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighDimSummary {
    pub n: usize,
    pub eps_n: f64,
    /// Median over replicates of the per-replicate posterior median error.
    pub median_d_error: f64,
    pub ratio: f64,
    pub mean_bad_mass: f64,
    pub max_bad_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighDimResult {
    pub rows: Vec<HighDimRow>,
    pub summary: Vec<HighDimSummary>,
    /// `max/min` over the grid of `median error / ε_n`.
    pub ratio_spread: f64,
    /// Slope of log median error on log n.
    pub rate_fit: Option<LinearFit>,
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// `(n^{−1/2}‖X(β − β0)‖₂, |σ − σ0|)` via the Gram matrix.
fn draw_errors(model: &HighDimModel, truth: &HighDimTruth, draw: &HighDimDraw) -> (f64, f64) {
    let mut idx: Vec<usize> = draw
        .support
        .iter()
        .chain(truth.support())
        .copied()
        .collect();
    idx.sort_unstable();
    idx.dedup();
    let delta: Vec<f64> = idx
        .iter()
        .map(|&j| {
            let b = draw
                .support
                .iter()
                .position(|&s| s == j)
                .map_or(0.0, |pos| draw.beta[pos]);
            b - truth.beta0()[j]
        })
        .collect();
    let gram = model.gram();
    let mut q = 0.0;
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            q += delta[a] * gram[(i, j)] * delta[b];
        }
    }
    (
        (q.max(0.0) / model.n() as f64).sqrt(),
        (draw.sigma - truth.sigma0).abs(),
    )
}

fn run_replicate(
    config: &HighDimExperimentConfig,
    ni: usize,
    n: usize,
    replicate: usize,
) -> Result<HighDimRow> {
    let seed = derive_seed(config.seed, &[ni as u64, replicate as u64]);
    let mut g = rng::stream(seed, 0);
    let x = uniform_design(n, config.p, config.design_bound, &mut g)?;
    let truth = HighDimTruth::leading(config.p, config.s0, config.signal, config.sigma0)?;
    let y = simulate_response(&x, &truth, &mut g)?;
    let model = HighDimModel::new(x, config.a, config.tau2, config.sigma_prior.clone())?;
    let out = mcmc_posterior(&y, &model, &config.mcmc, derive_seed(seed, &[1]))?;
    let eps_n = eps_n_highdim(config.sigma0, truth.s0(), config.p, n)?;
    let radius_sq = (config.m * eps_n).powi(2);
    let mut errors = Vec::with_capacity(out.draws.len());
    let mut bad = 0usize;
    let mut hits = 0usize;
    for d in &out.draws {
        let (pred, sd) = draw_errors(&model, &truth, d);
        errors.push(pred + sd);
        if pred * pred + sd * sd > radius_sq {
            bad += 1;
        }
        if d.support == truth.support() {
            hits += 1;
        }
    }
    let count = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / count;
    Ok(HighDimRow {
        n,
        replicate,
        median_d_error: median(&mut errors),
        mean_d_error: mean,
        eps_n,
        bad_mass: bad as f64 / count,
        support_hit: hits as f64 / count,
        acceptance_rate: out.acceptance_rate,
        ess: out.ess,
    })
}

/// Simulates data on the `n` grid, runs the sampler and summarises the
/// posterior error relative to `ε_n`.
pub fn contraction_experiment_highdim(config: &HighDimExperimentConfig) -> Result<HighDimResult> {
    config.validate()?;
    let tasks: Vec<(usize, usize, usize)> = config
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(ni, &n)| (0..config.replicates).map(move |r| (ni, n, r)))
        .collect();
    let rows = tasks
        .into_par_iter()
        .map(|(ni, n, r)| run_replicate(config, ni, n, r))
        .collect::<Result<Vec<_>>>()?;

    let summary: Vec<HighDimSummary> = rows
        .chunks(config.replicates)
        .map(|chunk| {
            let mut med: Vec<f64> = chunk.iter().map(|r| r.median_d_error).collect();
            let m = median(&mut med);
            let bad: Vec<f64> = chunk.iter().map(|r| r.bad_mass).collect();
            HighDimSummary {
                n: chunk[0].n,
                eps_n: chunk[0].eps_n,
                median_d_error: m,
                ratio: m / chunk[0].eps_n,
                mean_bad_mass: bad.iter().sum::<f64>() / bad.len() as f64,
                max_bad_mass: bad.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect();
    let ratios: Vec<f64> = summary.iter().map(|s| s.ratio).collect();
    let ratio_spread = ratios.iter().copied().fold(0.0, f64::max)
        / ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let rate_fit = if summary.len() >= 3 {
        let ns: Vec<u64> = summary.iter().map(|s| s.n as u64).collect();
        let es: Vec<f64> = summary.iter().map(|s| s.median_d_error).collect();
        Some(fit_rate_exponent(&ns, &es)?)
    } else {
        None
    };
    Ok(HighDimResult {
        rows,
        summary,
        ratio_spread,
        rate_fit,
    })
}
