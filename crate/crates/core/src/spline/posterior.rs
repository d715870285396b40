//! Exact posterior over the basis dimension and conditional draws of the
//! regression function.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::SplineBasisSpec;
use crate::contraction::SigmaPriorSpec;
use crate::error::{ensure_positive, Error, Result};
use crate::marginal::LinearEvidence;
use crate::rng::{self, derive_seed};
use crate::stat::special::log_sum_exp;

/// Largest supported `J_max`.
pub const MAX_J: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplineModel {
    pub a: f64,
    pub tau2: f64,
    pub j_max: usize,
    pub q: usize,
    pub sigma_prior: SigmaPriorSpec,
}

impl Default for SplineModel {
    fn default() -> Self {
        Self {
            a: 1.0,
            tau2: 1.0,
            j_max: 30,
            q: 3,
            sigma_prior: SigmaPriorSpec::default(),
        }
    }
}

impl SplineModel {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("A", self.a)?;
        ensure_positive("tau2", self.tau2)?;
        if self.j_max < self.q + 1 {
            return Err(Error::invalid(
                "j_max",
                format!("must be at least q + 1 = {}", self.q + 1),
            ));
        }
        if self.j_max > MAX_J {
            return Err(Error::invalid("j_max", format!("must not exceed {MAX_J}")));
        }
        self.sigma_prior.validate()
    }

    pub fn dimensions(&self) -> std::ops::RangeInclusive<usize> {
        self.q + 1..=self.j_max
    }
}

/// Unnormalised `log Π{J = j} = −A j log j`.
pub fn dimension_log_prior(j: usize, a: f64) -> f64 {
    let j = j as f64;
    -a * j * j.ln()
}

/// Normalised `log Π{J = j}` for `j` in `lo..=hi`.
pub fn dimension_log_prior_normalized(lo: usize, hi: usize, a: f64) -> Vec<f64> {
    let raw: Vec<f64> = (lo..=hi).map(|j| dimension_log_prior(j, a)).collect();
    let z = log_sum_exp(&raw);
    raw.into_iter().map(|v| v - z).collect()
}

/// Per-dimension conditional model.
#[derive(Debug, Clone)]
pub struct DimensionConditional {
    pub j: usize,
    pub log_prior: f64,
    pub log_marginal: f64,
    pub probability: f64,
    basis: DMatrix<f64>,
    evidence: LinearEvidence,
}

impl DimensionConditional {
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn evidence(&self) -> &LinearEvidence {
        &self.evidence
    }
}

#[derive(Debug, Clone)]
pub struct SplinePosterior {
    pub conditionals: Vec<DimensionConditional>,
    sigma_prior: SigmaPriorSpec,
}

impl SplinePosterior {
    pub fn probabilities(&self) -> Vec<(usize, f64)> {
        self.conditionals
            .iter()
            .map(|c| (c.j, c.probability))
            .collect()
    }

    pub fn mode(&self) -> usize {
        self.conditionals
            .iter()
            .max_by(|a, b| a.probability.total_cmp(&b.probability).then(b.j.cmp(&a.j)))
            .map(|c| c.j)
            .expect("nonempty")
    }

    pub fn sigma_prior(&self) -> &SigmaPriorSpec {
        &self.sigma_prior
    }
}

/// Exact posterior over `J ∈ {q+1, …, J_max}` for data `(xs, y)`.
pub fn posterior_over_j(y: &[f64], xs: &[f64], model: &SplineModel) -> Result<SplinePosterior> {
    model.validate()?;
    if y.len() != xs.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: y.len(),
        });
    }
    let n = y.len();
    if model.j_max > n {
        return Err(Error::invalid(
            "j_max",
            format!("{} exceeds n = {n}", model.j_max),
        ));
    }
    let yv = DVector::from_column_slice(y);
    let yty = yv.dot(&yv);
    let js: Vec<usize> = model.dimensions().collect();
    let priors = dimension_log_prior_normalized(model.q + 1, model.j_max, model.a);
    let mut conditionals = js
        .par_iter()
        .zip(priors.par_iter())
        .map(|(&j, &log_prior)| {
            let spec = SplineBasisSpec::with_dimension(model.q, j)?;
            let basis = spec.basis_matrix(xs)?;
            let gram = basis.transpose() * &basis;
            let bty = basis.transpose() * &yv;
            let evidence = LinearEvidence::new(n, yty, &gram, &bty, model.tau2)?;
            let log_marginal = evidence.log_evidence(&model.sigma_prior)?;
            Ok(DimensionConditional {
                j,
                log_prior,
                log_marginal,
                probability: 0.0,
                basis,
                evidence,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lp: Vec<f64> = conditionals
        .iter()
        .map(|c| c.log_prior + c.log_marginal)
        .collect();
    let z = log_sum_exp(&lp);
    for (c, l) in conditionals.iter_mut().zip(lp) {
        c.probability = (l - z).exp();
    }
    Ok(SplinePosterior {
        conditionals,
        sigma_prior: model.sigma_prior.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineDraw {
    pub j: usize,
    pub fvals: Vec<f64>,
    pub sigma: f64,
}

/// Draws `J` from its posterior, then `(σ², β_J)` from their conditionals.
pub fn sample_f_posterior(
    posterior: &SplinePosterior,
    draws: usize,
    seed: u64,
) -> Result<Vec<SplineDraw>> {
    if draws == 0 {
        return Err(Error::invalid("draws", "must be at least 1"));
    }
    let mut g = rng::stream(derive_seed(seed, &[0]), 0);
    let cum: Vec<f64> = posterior
        .conditionals
        .iter()
        .scan(0.0, |acc, c| {
            *acc += c.probability;
            Some(*acc)
        })
        .collect();
    let total = *cum.last().expect("nonempty");
    let picks: Vec<usize> = (0..draws)
        .map(|_| {
            let u = g.random::<f64>() * total;
            cum.partition_point(|&c| c <= u).min(cum.len() - 1)
        })
        .collect();
    let mut counts = vec![0usize; cum.len()];
    for &k in &picks {
        counts[k] += 1;
    }
    // one sampler per dimension that was actually drawn, each on its own stream
    let per_dim: Vec<Vec<SplineDraw>> = counts
        .par_iter()
        .enumerate()
        .map(|(k, &count)| {
            if count == 0 {
                return Ok(Vec::new());
            }
            let c = &posterior.conditionals[k];
            let sampler = c.evidence.sigma2_sampler(&posterior.sigma_prior)?;
            let mut r = rng::stream(derive_seed(seed, &[1, c.j as u64]), 0);
            (0..count)
                .map(|_| {
                    let s2 = sampler.sample(&mut r);
                    let beta = c.evidence.sample_coefficients(s2, &mut r);
                    let f = &c.basis * DVector::from_vec(beta);
                    Ok(SplineDraw {
                        j: c.j,
                        fvals: f.iter().copied().collect(),
                        sigma: s2.sqrt(),
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    // restore the order in which dimensions were picked
    let mut iters: Vec<std::vec::IntoIter<SplineDraw>> =
        per_dim.into_iter().map(Vec::into_iter).collect();
    Ok(picks
        .into_iter()
        .map(|k| iters[k].next().expect("one draw per pick"))
        .collect())
}

/// `sqrt(n⁻¹ Σ f_i²)`.
pub fn empirical_l2_norm(fvals: &[f64]) -> Result<f64> {
    if fvals.is_empty() {
        return Err(Error::invalid("fvals", "need at least one value"));
    }
    Ok((fvals.iter().map(|v| v * v).sum::<f64>() / fvals.len() as f64).sqrt())
}

/// `((σ0² log n)/n)^{α/(2α+1)}`.
pub fn eps_n_spline(sigma0: f64, n: usize, alpha: f64) -> Result<f64> {
    ensure_positive("sigma0", sigma0)?;
    ensure_positive("alpha", alpha)?;
    if n < 2 {
        return Err(Error::invalid("n", "must be at least 2"));
    }
    let nf = n as f64;
    Ok((sigma0 * sigma0 * nf.ln() / nf).powf(alpha / (2.0 * alpha + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::basis::uniform_design_points;
    use rand_distr::StandardNormal;

    fn data(n: usize, seed: u64, f: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let xs = uniform_design_points(n);
        let mut g = rng::stream(seed, 0);
        let y = xs
            .iter()
            .map(|&x| f(x) + 0.3 * g.sample::<f64, _>(StandardNormal))
            .collect();
        (xs, y)
    }

    #[test]
    fn prior_examples() {
        assert_eq!(dimension_log_prior(1, 2.0), 0.0);
        assert!((dimension_log_prior(2, 1.0) + 2.0 * 2f64.ln()).abs() < 1e-15);
        let p = dimension_log_prior_normalized(1, 25, 0.7);
        assert!((p.iter().map(|v| v.exp()).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_examples() {
        let e = eps_n_spline(1.0, 1000, 2.0).unwrap();
        // (6.9078e-3)^0.4 = exp(0.4 · −4.97509) = 0.136689
        assert!((e - 0.136689).abs() < 1e-6, "{e}");
        assert!(eps_n_spline(2.0, 1000, 2.0).unwrap() > e);
        let limit = (1000f64.ln() / 1000.0).sqrt();
        let mut prev = f64::INFINITY;
        for alpha in [0.5, 1.0, 2.0, 8.0, 64.0, 1e6] {
            let v = eps_n_spline(1.0, 1000, alpha).unwrap();
            assert!(v < prev && v > limit);
            prev = v;
        }
        assert!((prev - limit).abs() < 1e-5);
    }

    #[test]
    fn l2_norm_examples() {
        assert_eq!(empirical_l2_norm(&[-2.0; 7]).unwrap(), 2.0);
        assert_eq!(empirical_l2_norm(&[0.0; 3]).unwrap(), 0.0);
        let v = [0.3, -1.2, 2.0, 0.1];
        let l2 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((l2 - 2.0 * empirical_l2_norm(&v).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn representable_truth_concentrates() {
        // a cubic spline with J* = 8
        let spec = SplineBasisSpec::with_dimension(3, 8).unwrap();
        let beta = [0.0, 1.0, -1.0, 0.5, 1.5, -0.5, 0.8, 0.0];
        let f = |x: f64| {
            spec.eval(x)
                .unwrap()
                .iter()
                .zip(&beta)
                .map(|(a, b)| a * b)
                .sum::<f64>()
        };
        for seed in 0..3 {
            let (xs, y) = data(2000, seed, f);
            let post = posterior_over_j(
                &y,
                &xs,
                &SplineModel {
                    j_max: 20,
                    ..SplineModel::default()
                },
            )
            .unwrap();
            let total: f64 = post.probabilities().iter().map(|p| p.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!((post.mode() as i64 - 8).abs() <= 2, "mode {}", post.mode());
        }
    }

    #[test]
    fn vanishing_slab_returns_prior() {
        let xs = uniform_design_points(40);
        let model = SplineModel {
            tau2: 1e-14,
            j_max: 12,
            ..SplineModel::default()
        };
        let post = posterior_over_j(&[0.0; 40], &xs, &model).unwrap();
        let prior = dimension_log_prior_normalized(4, 12, 1.0);
        for (c, lp) in post.conditionals.iter().zip(prior) {
            assert!((c.probability - lp.exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn draws_average_to_model_mean() {
        let (xs, y) = data(60, 4, |x| (6.0 * x).sin());
        let post = posterior_over_j(
            &y,
            &xs,
            &SplineModel {
                j_max: 10,
                ..SplineModel::default()
            },
        )
        .unwrap();
        let draws = sample_f_posterior(&post, 4000, 9).unwrap();
        assert_eq!(draws, sample_f_posterior(&post, 4000, 9).unwrap());
        // E[f | y] = Σ_J P(J|y) B_J E[β_J | y, J], with E[β|y,J] = E_σ²[mean(σ²)]
        let mut g = rng::stream(77, 0);
        let mut expected = vec![0.0; 60];
        for c in &post.conditionals {
            let sampler = c.evidence().sigma2_sampler(post.sigma_prior()).unwrap();
            let m = 4000;
            let mut avg = DVector::zeros(c.j);
            for _ in 0..m {
                avg += DVector::from_vec(c.evidence().coefficient_mean(sampler.sample(&mut g)));
            }
            let f = c.basis() * (avg / m as f64);
            for i in 0..60 {
                expected[i] += c.probability * f[i];
            }
        }
        for i in (0..60).step_by(7) {
            let vals: Vec<f64> = draws.iter().map(|d| d.fvals[i]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let sd =
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
            assert!(
                (mean - expected[i]).abs() < 4.0 * sd / (vals.len() as f64).sqrt() + 1e-3,
                "i={i}"
            );
        }
    }

    #[test]
    fn degenerate_posterior_single_dimension() {
        let (xs, y) = data(30, 1, |x| x);
        let post = posterior_over_j(
            &y,
            &xs,
            &SplineModel {
                j_max: 4,
                ..SplineModel::default()
            },
        )
        .unwrap();
        assert_eq!(post.conditionals.len(), 1);
        assert!(sample_f_posterior(&post, 50, 1)
            .unwrap()
            .iter()
            .all(|d| d.j == 4));
    }
}
