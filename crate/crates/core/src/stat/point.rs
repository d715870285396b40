use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// A `(mean vector, standard deviation)` pair of the Gaussian model
/// `y ~ N_n(mu, sigma² I_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    mu: Vec<f64>,
    sigma: f64,
}

impl ParamPoint {
    pub fn new(mu: Vec<f64>, sigma: f64) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::invalid("mu", "mean vector must be nonempty"));
        }
        if let Some(bad) = mu.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "mu",
                format!("entries must be finite, found {bad}"),
            ));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(
                "sigma",
                format!("must be positive and finite, got {sigma}"),
            ));
        }
        Ok(Self { mu, sigma })
    }

    /// `(c, …, c)` of length `n` with standard deviation `sigma`.
    pub fn constant(n: usize, c: f64, sigma: f64) -> Result<Self> {
        Self::new(vec![c; n], sigma)
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn into_parts(self) -> (Vec<f64>, f64) {
        (self.mu, self.sigma)
    }
}

/// An observation vector `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub y: Vec<f64>,
}

impl Observation {
    pub fn new(y: Vec<f64>) -> Self {
        Self { y }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

impl From<Vec<f64>> for Observation {
    fn from(y: Vec<f64>) -> Self {
        Self { y }
    }
}

fn check_same_n(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::DimensionMismatch {
            expected: a,
            actual: b,
        })
    } else {
        Ok(())
    }
}

/// `d((μ1,σ1),(μ2,σ2)) = sqrt(n⁻¹‖μ1 − μ2‖² + |σ1 − σ2|²)`.
pub fn metric_d(a: &ParamPoint, b: &ParamPoint) -> Result<f64> {
    check_same_n(a.n(), b.n())?;
    Ok(metric_d_sq_unchecked(&a.mu, a.sigma, &b.mu, b.sigma).sqrt())
}

pub(crate) fn metric_d_sq_unchecked(mu_a: &[f64], sigma_a: f64, mu_b: &[f64], sigma_b: f64) -> f64 {
    let sq: f64 = mu_a.iter().zip(mu_b).map(|(x, y)| (x - y) * (x - y)).sum();
    let ds = sigma_a - sigma_b;
    sq / mu_a.len() as f64 + ds * ds
}

/// Draws `y` from `N_n(truth.mu, truth.sigma² I)` using `rng`.
pub fn sample_observation_with<R: Rng + ?Sized>(truth: &ParamPoint, rng: &mut R) -> Observation {
    let y = truth
        .mu
        .iter()
        .map(|m| m + truth.sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Observation { y }
}

/// Draws `y` from `N_n(truth.mu, truth.sigma² I)`; deterministic in `seed`.
pub fn sample_observation(truth: &ParamPoint, seed: u64) -> Observation {
    let mut rng = rng::stream(seed, 0);
    sample_observation_with(truth, &mut rng)
}

/// Fills `out` with i.i.d. standard normals.
pub fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(mu: Vec<f64>, sigma: f64) -> ParamPoint {
        ParamPoint::new(mu, sigma).unwrap()
    }

    #[test]
    fn metric_examples() {
        let z = pt(vec![0.0; 4], 1.0);
        assert_eq!(metric_d(&z, &z).unwrap(), 0.0);
        assert!((metric_d(&pt(vec![1.0; 4], 1.0), &z).unwrap() - 1.0).abs() < 1e-15);
        let d = metric_d(&pt(vec![3.0, 4.0], 2.0), &pt(vec![0.0, 0.0], 1.0)).unwrap();
        assert!((d - 13.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn metric_rejects_mismatch() {
        let err = metric_d(&pt(vec![0.0; 3], 1.0), &pt(vec![0.0; 4], 1.0)).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 3,
                actual: 4
            }
        );
    }

    #[test]
    fn invalid_points_are_rejected() {
        assert!(ParamPoint::new(vec![], 1.0).is_err());
        assert!(ParamPoint::new(vec![f64::NAN], 1.0).is_err());
        assert!(ParamPoint::new(vec![0.0], 0.0).is_err());
        assert!(ParamPoint::new(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let truth = pt(vec![1.0, -2.0, 3.0], 0.5);
        assert_eq!(
            sample_observation(&truth, 11),
            sample_observation(&truth, 11)
        );
        assert_ne!(
            sample_observation(&truth, 11),
            sample_observation(&truth, 12)
        );
    }

    #[test]
    fn sample_mean_is_unbiased() {
        let n = 50;
        let reps = 2000;
        let truth = pt((0..n).map(|i| i as f64 * 0.1).collect(), 2.0);
        let mut total = 0.0;
        for r in 0..reps {
            let y = sample_observation(&truth, r);
            total += y.y.iter().zip(truth.mu()).map(|(a, b)| a - b).sum::<f64>();
        }
        let mean = total / (n * reps as usize) as f64;
        assert!(mean.abs() < 3.0 * 2.0 / ((n * reps as usize) as f64).sqrt());
    }

    #[test]
    fn sample_variance_matches() {
        let truth = pt(vec![0.0; 1000], 1.0);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let reps = 10_000u64;
        for r in 0..reps {
            for v in sample_observation(&truth, r).y {
                sum += v;
                sum_sq += v * v;
            }
        }
        let m = (reps * 1000) as f64;
        let var = sum_sq / m - (sum / m).powi(2);
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    fn point_strategy(n: usize) -> impl Strategy<Value = ParamPoint> {
        (prop::collection::vec(-10.0..10.0f64, n), 0.01..10.0f64).prop_map(|(mu, s)| pt(mu, s))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn metric_axioms(a in point_strategy(6), b in point_strategy(6), c in point_strategy(6)) {
            let ab = metric_d(&a, &b).unwrap();
            let ba = metric_d(&b, &a).unwrap();
            let ac = metric_d(&a, &c).unwrap();
            let cb = metric_d(&c, &b).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-12);
            prop_assert_eq!(metric_d(&a, &a).unwrap(), 0.0);
            prop_assert!(ab <= ac + cb + 1e-12);
        }

        #[test]
        fn metric_is_scaled_euclidean(a in point_strategy(9), b in point_strategy(9)) {
            let scale = (9.0f64).sqrt().recip();
            let mut sq = (a.sigma() - b.sigma()).powi(2);
            for (x, y) in a.mu().iter().zip(b.mu()) {
                sq += (scale * x - scale * y).powi(2);
            }
            prop_assert!((metric_d(&a, &b).unwrap() - sq.sqrt()).abs() <= 1e-12);
        }
    }
}
