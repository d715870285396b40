use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::contraction::SigmaPriorSpec;
use crate::error::{ensure_positive, Error, Result};
use crate::marginal::LinearEvidence;
use crate::rng::StreamRng;

/// Sparse linear regression `y = Xβ + σ e` with a support prior, a Gaussian
/// slab and a prior on `σ²`.
#[derive(Debug, Clone)]
pub struct HighDimModel {
    x: DMatrix<f64>,
    gram: DMatrix<f64>,
    x_inf: f64,
    pub a: f64,
    pub tau2: f64,
    pub sigma_prior: SigmaPriorSpec,
}

impl HighDimModel {
    pub fn new(x: DMatrix<f64>, a: f64, tau2: f64, sigma_prior: SigmaPriorSpec) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::invalid(
                "X",
                "design must have at least one row and one column",
            ));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "X",
                format!("entries must be finite, found {bad}"),
            ));
        }
        ensure_positive("A", a)?;
        ensure_positive("tau2", tau2)?;
        sigma_prior.validate()?;
        let gram = x.transpose() * &x;
        let x_inf = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            x,
            gram,
            x_inf,
            a,
            tau2,
            sigma_prior,
        })
    }

    pub fn from_rows(
        rows: &[Vec<f64>],
        a: f64,
        tau2: f64,
        sigma_prior: SigmaPriorSpec,
    ) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
        Self::new(x, a, tau2, sigma_prior)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `max |X_ij|`.
    pub fn x_inf_norm(&self) -> f64 {
        self.x_inf
    }

    pub fn prepare<'a>(&'a self, y: &[f64]) -> Result<PreparedData<'a>> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: y.len(),
            });
        }
        let yv = DVector::from_column_slice(y);
        Ok(PreparedData {
            model: self,
            yty: yv.dot(&yv),
            xty: self.x.transpose() * yv,
        })
    }
}

/// A model together with the sufficient statistics `yᵀy` and `Xᵀy` of one
/// data set.
#[derive(Debug, Clone)]
pub struct PreparedData<'a> {
    pub model: &'a HighDimModel,
    pub yty: f64,
    pub xty: DVector<f64>,
}

impl PreparedData<'_> {
    /// Evidence object of the model restricted to `support` (sorted, distinct).
    pub fn evidence(&self, support: &[usize]) -> Result<LinearEvidence> {
        let p = self.model.p();
        if let Some(&bad) = support.iter().find(|&&j| j >= p) {
            return Err(Error::invalid(
                "support",
                format!("index {bad} out of range for p = {p}"),
            ));
        }
        let k = support.len();
        let gram = DMatrix::from_fn(k, k, |i, j| self.model.gram[(support[i], support[j])]);
        let xty = DVector::from_fn(k, |i, _| self.xty[support[i]]);
        LinearEvidence::new(self.model.n(), self.yty, &gram, &xty, self.model.tau2)
    }

    pub fn log_marginal(&self, support: &[usize]) -> Result<f64> {
        self.evidence(support)?
            .log_evidence(&self.model.sigma_prior)
    }
}

/// True coefficients and noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighDimTruth {
    beta0: Vec<f64>,
    support: Vec<usize>,
    pub sigma0: f64,
}

impl HighDimTruth {
    pub fn new(beta0: Vec<f64>, sigma0: f64) -> Result<Self> {
        ensure_positive("sigma0", sigma0)?;
        if let Some(bad) = beta0.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "beta0",
                format!("entries must be finite, found {bad}"),
            ));
        }
        let support: Vec<usize> = (0..beta0.len()).filter(|&j| beta0[j] != 0.0).collect();
        if support.is_empty() {
            return Err(Error::invalid("beta0", "the true support must be nonempty"));
        }
        Ok(Self {
            beta0,
            support,
            sigma0,
        })
    }

    /// `value` on the first `s0` coordinates with alternating signs.
    pub fn leading(p: usize, s0: usize, value: f64, sigma0: f64) -> Result<Self> {
        if s0 == 0 || s0 > p {
            return Err(Error::invalid(
                "s0",
                format!("must lie in 1..={p}, got {s0}"),
            ));
        }
        let beta0 = (0..p)
            .map(|j| {
                if j < s0 {
                    if j % 2 == 0 {
                        value
                    } else {
                        -value
                    }
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(beta0, sigma0)
    }

    pub fn beta0(&self) -> &[f64] {
        &self.beta0
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn s0(&self) -> usize {
        self.support.len()
    }

    pub fn beta_inf_norm(&self) -> f64 {
        self.beta0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `n × p` design with i.i.d. uniform entries on `[−bound, bound]`.
pub fn uniform_design(n: usize, p: usize, bound: f64, rng: &mut StreamRng) -> Result<DMatrix<f64>> {
    ensure_positive("design_bound", bound)?;
    if n == 0 || p == 0 {
        return Err(Error::invalid("design", "n and p must be positive"));
    }
    Ok(DMatrix::from_fn(n, p, |_, _| {
        bound * (2.0 * rng.random::<f64>() - 1.0)
    }))
}

/// `y = X β0 + σ0 e`.
pub fn simulate_response(
    x: &DMatrix<f64>,
    truth: &HighDimTruth,
    rng: &mut StreamRng,
) -> Result<Vec<f64>> {
    if x.ncols() != truth.beta0.len() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            actual: truth.beta0.len(),
        });
    }
    let mean = x * DVector::from_column_slice(&truth.beta0);
    Ok(mean
        .iter()
        .map(|m| m + truth.sigma0 * rng.sample::<f64, _>(StandardNormal))
        .collect())
}
