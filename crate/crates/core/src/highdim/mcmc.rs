//! Metropolis–Hastings over supports with add, delete and swap moves, and
//! conditional draws of `(σ², β_S)` given the support.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{HighDimModel, PreparedData};
use super::posterior::support_log_prior;
use crate::error::{Error, Result};
use crate::marginal::{LinearEvidence, Sigma2Sampler};
use crate::rng::{self, derive_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcSettings {
    pub iterations: usize,
    pub burn_in: usize,
    /// Keep every `thin`-th post-burn-in state.
    pub thin: usize,
    pub max_card: usize,
    /// Draw `(σ, β_S)` at kept states; supports alone otherwise.
    pub draw_parameters: bool,
}

impl Default for McmcSettings {
    fn default() -> Self {
        Self {
            iterations: 6000,
            burn_in: 2000,
            thin: 4,
            max_card: 15,
            draw_parameters: true,
        }
    }
}

impl McmcSettings {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::invalid("burn_in", "must be smaller than iterations"));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin", "must be at least 1"));
        }
        if self.max_card > n {
            return Err(Error::invalid(
                "max_card",
                format!("{} exceeds n = {n}", self.max_card),
            ));
        }
        Ok(())
    }
}

/// One kept state: the support, the coefficients on it (in support order)
/// and the noise standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighDimDraw {
    pub support: Vec<usize>,
    pub beta: Vec<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcOutput {
    /// Supports of all post-burn-in states (unthinned).
    pub supports: Vec<Vec<usize>>,
    pub draws: Vec<HighDimDraw>,
    pub acceptance_rate: f64,
    /// Effective sample size of the `|S|` trace.
    pub ess: f64,
}

impl McmcOutput {
    pub fn support_frequencies(&self) -> BTreeMap<Vec<usize>, f64> {
        let mut out = BTreeMap::new();
        let w = 1.0 / self.supports.len() as f64;
        for s in &self.supports {
            *out.entry(s.clone()).or_insert(0.0) += w;
        }
        out
    }
}

/// Effective sample size by Geyer's initial positive sequence.
pub fn effective_sample_size(trace: &[f64]) -> f64 {
    let m = trace.len();
    if m < 4 {
        return m as f64;
    }
    let mean = trace.iter().sum::<f64>() / m as f64;
    let c0 = trace.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64;
    if c0 <= 0.0 {
        return m as f64;
    }
    let acf = |lag: usize| -> f64 {
        (0..m - lag)
            .map(|i| (trace[i] - mean) * (trace[i + lag] - mean))
            .sum::<f64>()
            / (m as f64 * c0)
    };
    let mut sum = 0.0;
    let mut lag = 0;
    while lag + 1 < m / 2 {
        let pair = acf(lag) + acf(lag + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        lag += 2;
    }
    let tau = (2.0 * sum - 1.0).max(1.0);
    m as f64 / tau
}

struct Cache<'a> {
    data: PreparedData<'a>,
    log_post: HashMap<Vec<usize>, f64>,
    conditionals: HashMap<Vec<usize>, (LinearEvidence, Sigma2Sampler)>,
}

const CONDITIONAL_CACHE_LIMIT: usize = 4096;

impl Cache<'_> {
    fn log_posterior(&mut self, s: &[usize]) -> Result<f64> {
        if let Some(&v) = self.log_post.get(s) {
            return Ok(v);
        }
        let v = support_log_prior(s.len(), self.data.model.p(), self.data.model.a)
            + self.data.log_marginal(s)?;
        self.log_post.insert(s.to_vec(), v);
        Ok(v)
    }

    fn conditional(&mut self, s: &[usize]) -> Result<&(LinearEvidence, Sigma2Sampler)> {
        if !self.conditionals.contains_key(s) {
            if self.conditionals.len() >= CONDITIONAL_CACHE_LIMIT {
                self.conditionals.clear();
            }
            let ev = self.data.evidence(s)?;
            let sampler = ev.sigma2_sampler(&self.data.model.sigma_prior)?;
            self.conditionals.insert(s.to_vec(), (ev, sampler));
        }
        Ok(&self.conditionals[s])
    }
}

/// Runs one chain started from the empty support.
pub fn mcmc_posterior(
    y: &[f64],
    model: &HighDimModel,
    settings: &McmcSettings,
    seed: u64,
) -> Result<McmcOutput> {
    settings.validate(model.n())?;
    let p = model.p();
    let max_card = settings.max_card.min(p);
    let mut cache = Cache {
        data: model.prepare(y)?,
        log_post: HashMap::new(),
        conditionals: HashMap::new(),
    };
    let mut moves = rng::stream(derive_seed(seed, &[0]), 0);
    let mut params = rng::stream(derive_seed(seed, &[1]), 0);

    let mut current: Vec<usize> = Vec::new();
    let mut current_lp = cache.log_posterior(&current)?;
    let mut accepted = 0usize;
    let kept = settings.iterations - settings.burn_in;
    let mut supports = Vec::with_capacity(kept);
    let mut draws = Vec::new();

    for it in 0..settings.iterations {
        let k = current.len();
        let kind = moves.random_range(0..3u8);
        // proposal and log q(S'→S)/q(S→S')
        let proposal = match kind {
            0 if k < max_card => {
                let mut r = moves.random_range(0..p - k);
                let mut j = 0;
                // r-th index not in the (sorted) support
                for &s in &current {
                    if s <= r + j {
                        j += 1;
                    } else {
                        break;
                    }
                }
                r += j;
                let mut next = current.clone();
                let pos = next.partition_point(|&v| v < r);
                next.insert(pos, r);
                Some((next, ((p - k) as f64 / (k + 1) as f64).ln()))
            }
            1 if k > 0 => {
                let mut next = current.clone();
                next.remove(moves.random_range(0..k));
                Some((next, (k as f64 / (p - k + 1) as f64).ln()))
            }
            2 if k > 0 && k < p => {
                let mut next = current.clone();
                let out = next.remove(moves.random_range(0..k));
                let mut r = moves.random_range(0..p - k);
                let mut j = 0;
                for &s in &current {
                    if s <= r + j {
                        j += 1;
                    } else {
                        break;
                    }
                }
                r += j;
                debug_assert_ne!(r, out);
                let pos = next.partition_point(|&v| v < r);
                next.insert(pos, r);
                Some((next, 0.0))
            }
            _ => None,
        };
        if let Some((next, log_q)) = proposal {
            let lp = cache.log_posterior(&next)?;
            let log_ratio = lp - current_lp + log_q;
            let u: f64 = moves.random();
            if log_ratio >= 0.0 || u.ln() < log_ratio {
                current = next;
                current_lp = lp;
                accepted += 1;
            }
        }
        if it >= settings.burn_in {
            supports.push(current.clone());
            if settings.draw_parameters && (it - settings.burn_in).is_multiple_of(settings.thin) {
                let (ev, sampler) = cache.conditional(&current)?;
                let s2 = sampler.sample(&mut params);
                let beta = ev.sample_coefficients(s2, &mut params);
                draws.push(HighDimDraw {
                    support: current.clone(),
                    beta,
                    sigma: s2.sqrt(),
                });
            }
        }
    }
    let trace: Vec<f64> = supports.iter().map(|s| s.len() as f64).collect();
    Ok(McmcOutput {
        ess: effective_sample_size(&trace),
        supports,
        draws,
        acceptance_rate: accepted as f64 / settings.iterations as f64,
    })
}
