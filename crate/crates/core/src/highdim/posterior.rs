use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::HighDimModel;
use crate::error::{ensure_positive, Error, Result};
use crate::stat::special::{ln_binomial, log_sum_exp};

/// Largest number of supports [`exact_posterior`] will enumerate.
pub const ENUMERATION_BUDGET: f64 = 1e6;

/// Unnormalised `log Π{S}` for `|S| = size`: `−log C(p, |S|) − A |S| log p`.
pub fn support_log_prior(size: usize, p: usize, a: f64) -> f64 {
    -ln_binomial(p as u64, size as u64) - a * size as f64 * (p as f64).ln()
}

/// `log Σ_S Π{S}` over supports of size at most `max_card`.
pub fn support_log_normalizer(p: usize, a: f64, max_card: usize) -> f64 {
    let terms: Vec<f64> = (0..=max_card.min(p))
        .map(|k| -a * k as f64 * (p as f64).ln())
        .collect();
    log_sum_exp(&terms)
}

/// Normalised probabilities of `|S| = 0..=max_card`.
pub fn cardinality_log_prior(p: usize, a: f64, max_card: usize) -> Vec<f64> {
    let z = support_log_normalizer(p, a, max_card);
    (0..=max_card.min(p))
        .map(|k| -a * k as f64 * (p as f64).ln() - z)
        .collect()
}

/// `log ∫ N_n(y; 0, σ² I + τ² X_S X_Sᵀ) g(σ²) dσ²`.
pub fn marginal_log_likelihood(support: &[usize], y: &[f64], model: &HighDimModel) -> Result<f64> {
    if support.len() > model.n() {
        return Err(Error::invalid(
            "support",
            format!("|S| = {} exceeds n = {}", support.len(), model.n()),
        ));
    }
    let mut s = support.to_vec();
    s.sort_unstable();
    s.dedup();
    model.prepare(y)?.log_marginal(&s)
}

/// Posterior probabilities over supports, keyed by sorted index sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPosterior {
    pub probabilities: BTreeMap<Vec<usize>, f64>,
    pub max_card: usize,
}

impl SupportPosterior {
    pub fn probability(&self, support: &[usize]) -> f64 {
        self.probabilities.get(support).copied().unwrap_or(0.0)
    }

    pub fn mode(&self) -> &[usize] {
        self.probabilities
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(s, _)| s.as_slice())
            .expect("nonempty posterior")
    }

    /// Posterior inclusion probability of each coordinate.
    pub fn inclusion(&self, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; p];
        for (s, &w) in &self.probabilities {
            for &j in s {
                out[j] += w;
            }
        }
        out
    }

    /// `½ Σ |P(S) − Q(S)|`.
    pub fn total_variation(&self, other: &BTreeMap<Vec<usize>, f64>) -> f64 {
        let mut tv = 0.0;
        for (s, &w) in &self.probabilities {
            tv += (w - other.get(s).copied().unwrap_or(0.0)).abs();
        }
        for (s, &w) in other {
            if !self.probabilities.contains_key(s) {
                tv += w;
            }
        }
        0.5 * tv
    }
}

/// All `k`-subsets of `0..p` in lexicographic order.
pub fn combinations(p: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > p {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < p - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Number of supports of size at most `max_card`.
pub fn enumeration_size(p: usize, max_card: usize) -> f64 {
    (0..=max_card.min(p))
        .map(|k| ln_binomial(p as u64, k as u64).exp())
        .sum()
}

/// Exact posterior over every support with `|S| ≤ max_card`.
pub fn exact_posterior(
    y: &[f64],
    model: &HighDimModel,
    max_card: usize,
) -> Result<SupportPosterior> {
    let p = model.p();
    let max_card = max_card.min(p);
    if max_card > model.n() {
        return Err(Error::invalid(
            "max_card",
            format!("{max_card} exceeds n = {}", model.n()),
        ));
    }
    let size = enumeration_size(p, max_card);
    if size > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "support enumeration",
            required: size,
            limit: ENUMERATION_BUDGET,
        });
    }
    let data = model.prepare(y)?;
    let supports: Vec<Vec<usize>> = (0..=max_card).flat_map(|k| combinations(p, k)).collect();
    let log_post = supports
        .par_iter()
        .map(|s| Ok(support_log_prior(s.len(), p, model.a) + data.log_marginal(s)?))
        .collect::<Result<Vec<f64>>>()?;
    let z = log_sum_exp(&log_post);
    let probabilities = supports
        .into_iter()
        .zip(log_post)
        .map(|(s, lp)| (s, (lp - z).exp()))
        .collect();
    Ok(SupportPosterior {
        probabilities,
        max_card,
    })
}

/// `σ0 √(s0 log p / n)`.
pub fn eps_n_highdim(sigma0: f64, s0: usize, p: usize, n: usize) -> Result<f64> {
    ensure_positive("sigma0", sigma0)?;
    if s0 == 0 || p < 2 || n == 0 {
        return Err(Error::invalid("eps_n", "need s0 >= 1, p >= 2 and n >= 1"));
    }
    Ok(sigma0 * (s0 as f64 * (p as f64).ln() / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::SigmaPriorSpec;
    use crate::highdim::model::{simulate_response, uniform_design, HighDimTruth};
    use crate::rng;
    use nalgebra::DMatrix;

    #[test]
    fn prior_examples() {
        assert_eq!(support_log_prior(0, 7, 1.3), 0.0);
        assert!((support_log_prior(1, 3, 1.0) + 2.0 * 3f64.ln()).abs() < 1e-14);
        for p in 1..=12 {
            let z = support_log_normalizer(p, 0.7, p);
            let total: f64 = (0..=p)
                .flat_map(|k| combinations(p, k))
                .map(|s| (support_log_prior(s.len(), p, 0.7) - z).exp())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "p={p}: {total}");
        }
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(4, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }

    fn setup(n: usize, p: usize, seed: u64) -> (HighDimModel, Vec<f64>) {
        let mut g = rng::stream(seed, 0);
        let x = uniform_design(n, p, 3f64.sqrt(), &mut g).unwrap();
        let mut beta = vec![0.0; p];
        beta[0] = 1.0;
        let truth = HighDimTruth::new(beta, 1.0).unwrap();
        let y = simulate_response(&x, &truth, &mut g).unwrap();
        (
            HighDimModel::new(x, 1.0, 1.0, SigmaPriorSpec::default()).unwrap(),
            y,
        )
    }

    #[test]
    fn row_permutation_invariance() {
        let (m, y) = setup(30, 4, 3);
        let a = marginal_log_likelihood(&[0, 2], &y, &m).unwrap();
        let perm: Vec<usize> = (0..30).rev().collect();
        let x2 = DMatrix::from_fn(30, 4, |i, j| m.x()[(perm[i], j)]);
        let y2: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let m2 = HighDimModel::new(x2, 1.0, 1.0, SigmaPriorSpec::default()).unwrap();
        let b = marginal_log_likelihood(&[2, 0], &y2, &m2).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn strong_signal_mode() {
        for seed in 0..20 {
            let (m, y) = setup(200, 2, seed);
            let post = exact_posterior(&y, &m, 2).unwrap();
            assert_eq!(post.mode(), &[0]);
            let total: f64 = post.probabilities.values().sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn vanishing_slab_returns_prior() {
        let (x, _) = (
            uniform_design(20, 4, 1.0, &mut rng::stream(1, 0)).unwrap(),
            (),
        );
        let m = HighDimModel::new(x, 0.8, 1e-14, SigmaPriorSpec::default()).unwrap();
        let post = exact_posterior(&[0.0; 20], &m, 4).unwrap();
        let z = support_log_normalizer(4, 0.8, 4);
        for (s, &w) in &post.probabilities {
            assert!((w - (support_log_prior(s.len(), 4, 0.8) - z).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn relabeling_invariance() {
        let (m, y) = setup(40, 4, 5);
        let post = exact_posterior(&y, &m, 3).unwrap();
        let perm = [2usize, 0, 3, 1];
        let x2 = DMatrix::from_fn(40, 4, |i, j| m.x()[(i, perm[j])]);
        let m2 = HighDimModel::new(x2, 1.0, 1.0, SigmaPriorSpec::default()).unwrap();
        let post2 = exact_posterior(&y, &m2, 3).unwrap();
        for (s, &w) in &post2.probabilities {
            let mut mapped: Vec<usize> = s.iter().map(|&j| perm[j]).collect();
            mapped.sort_unstable();
            assert!((post.probability(&mapped) - w).abs() < 1e-9);
        }
    }

    #[test]
    fn budget_guard() {
        let x = DMatrix::from_element(30, 60, 1.0);
        let m = HighDimModel::new(x, 1.0, 1.0, SigmaPriorSpec::default()).unwrap();
        assert!(matches!(
            exact_posterior(&[0.0; 30], &m, 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn rate_examples() {
        let e = eps_n_highdim(1.0, 2, 100, 1000).unwrap();
        assert!((e - (2.0 * 100f64.ln() / 1000.0).sqrt()).abs() < 1e-15);
        assert!((e - 0.09597).abs() < 5e-5);
        assert!((eps_n_highdim(3.0, 2, 100, 1000).unwrap() - 3.0 * e).abs() < 1e-15);
        assert!((eps_n_highdim(1.0, 2, 100, 4000).unwrap() - e / 2.0).abs() < 1e-15);
    }
}
