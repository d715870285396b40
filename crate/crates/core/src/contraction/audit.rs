//! Checks of the variance-prior conditions and of the admissible windows for
//! inverse-gamma and half-Cauchy priors.

use serde::{Deserialize, Serialize};

use super::SigmaPriorSpec;
use crate::error::{ensure_positive, Error, Result};
use crate::stat::fit::ols;

/// Upper quantile bounding the grid used to estimate the Lipschitz constant.
pub const LIPSCHITZ_UPPER_QUANTILE: f64 = 0.9999;
const LIPSCHITZ_LOWER_QUANTILE: f64 = 1e-12;
const LIPSCHITZ_GRID: usize = 20_000;
/// Allowed shortfall of the fitted tail exponent below 1.
pub const TAIL_SLACK: f64 = 0.02;
const TAIL_DECADES: usize = 12;
const TAIL_FIT_DECADES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    Lipschitz,
    PolynomialTail,
    DensityFloor,
    InverseGammaWindow,
    HalfCauchyWindow,
    SplineVarianceWindow,
    RateSeparation,
    RateLowerBound,
}

impl ConditionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionId::Lipschitz => "lipschitz",
            ConditionId::PolynomialTail => "polynomial_tail",
            ConditionId::DensityFloor => "density_floor",
            ConditionId::InverseGammaWindow => "inverse_gamma_window",
            ConditionId::HalfCauchyWindow => "half_cauchy_window",
            ConditionId::SplineVarianceWindow => "spline_variance_window",
            ConditionId::RateSeparation => "rate_separation",
            ConditionId::RateLowerBound => "rate_lower_bound",
        }
    }
}

/// The inequality a report checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≤ rhs`
    AtMost,
    /// `lhs ≥ rhs`
    AtLeast,
    /// `lower ≤ lhs ≤ rhs`
    Within { lower: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub id: ConditionId,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// Signed slack; nonnegative exactly when satisfied.
    pub margin: f64,
}

impl ConditionReport {
    pub fn new(id: ConditionId, relation: Relation, lhs: f64, rhs: f64) -> Self {
        let margin = match relation {
            Relation::AtMost => rhs - lhs,
            Relation::AtLeast => lhs - rhs,
            Relation::Within { lower } => (lhs - lower).min(rhs - lhs),
        };
        let satisfied = match relation {
            Relation::AtMost => lhs <= rhs,
            Relation::AtLeast => lhs >= rhs,
            Relation::Within { lower } => lower <= lhs && lhs <= rhs,
        };
        Self {
            id,
            relation,
            lhs,
            rhs,
            satisfied,
            margin,
        }
    }
}

/// Lipschitz constant of `g`: maximum `|g′|` over a log-spaced grid up to the
/// 0.9999 quantile, or the largest segment slope for a table.
pub fn lipschitz_constant(spec: &SigmaPriorSpec) -> Result<f64> {
    spec.validate()?;
    if let SigmaPriorSpec::Tabulated { s, g } = spec {
        let inner = s
            .windows(2)
            .zip(g.windows(2))
            .map(|(sw, gw)| ((gw[1] - gw[0]) / (sw[1] - sw[0])).abs())
            .fold(0.0, f64::max);
        // a jump to zero at either edge of the table
        let lo_edge = if s[0] > 0.0 && g[0] > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        let hi_edge = if g[g.len() - 1] > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        return Ok(inner.max(lo_edge).max(hi_edge));
    }
    let lo = spec.quantile(LIPSCHITZ_LOWER_QUANTILE).ln();
    let hi = spec.quantile(LIPSCHITZ_UPPER_QUANTILE).ln();
    let max = (0..LIPSCHITZ_GRID)
        .map(|i| {
            let v = lo + (hi - lo) * i as f64 / (LIPSCHITZ_GRID - 1) as f64;
            spec.derivative(v.exp()).abs()
        })
        .fold(0.0, f64::max);
    Ok(max)
}

/// Fitted decay exponent `κ` of `Π{σ² > t} ≈ c t^{−κ}` over the top decades of
/// a tail grid; `∞` for compactly supported tables.
pub fn tail_exponent(spec: &SigmaPriorSpec) -> Result<f64> {
    spec.validate()?;
    let (_, sup_hi) = spec.support();
    if sup_hi.is_finite() {
        return Ok(f64::INFINITY);
    }
    let start = spec.quantile(0.99).max(1.0);
    let per_decade = 4;
    let total = TAIL_DECADES * per_decade;
    let fit_from = total - TAIL_FIT_DECADES * per_decade;
    let (x, y): (Vec<f64>, Vec<f64>) = (fit_from..=total)
        .map(|i| {
            let t = start * 10f64.powf(i as f64 / per_decade as f64);
            (t.ln(), ln_survival(spec, t))
        })
        .unzip();
    if y.iter().any(|v| !v.is_finite()) {
        return Ok(f64::INFINITY);
    }
    Ok(-ols(&x, &y)?.slope)
}

fn ln_survival(spec: &SigmaPriorSpec, t: f64) -> f64 {
    match spec {
        SigmaPriorSpec::InverseGamma { a, b } => {
            let sv = spec.survival(t);
            if sv > 1e-280 {
                sv.ln()
            } else {
                // P(a, x) ~ x^a / Γ(a + 1) as x → 0
                a * (b / t).ln() - statrs::function::gamma::ln_gamma(a + 1.0)
            }
        }
        _ => spec.survival(t).ln(),
    }
}

/// Lipschitz, polynomial-tail and density-floor reports for `spec` at the
/// true standard deviation `sigma0` and rate `eps_n`.
pub fn audit_sigma_prior(
    spec: &SigmaPriorSpec,
    sigma0: f64,
    eps_n: f64,
) -> Result<Vec<ConditionReport>> {
    ensure_positive("sigma0", sigma0)?;
    ensure_positive("eps_n", eps_n)?;
    let lipschitz = lipschitz_constant(spec)?;
    let tail = tail_exponent(spec)?;
    let floor = spec.density(sigma0 * sigma0);
    Ok(vec![
        ConditionReport::new(
            ConditionId::Lipschitz,
            Relation::AtMost,
            lipschitz,
            f64::MAX,
        ),
        ConditionReport::new(
            ConditionId::PolynomialTail,
            Relation::AtLeast,
            tail,
            1.0 - TAIL_SLACK,
        ),
        ConditionReport::new(
            ConditionId::DensityFloor,
            Relation::AtLeast,
            floor,
            2.0 * lipschitz * sigma0 * eps_n,
        ),
    ])
}

/// `Π{|σ² − σ0²| ≤ σ0 ε}` from the prior CDF.
pub fn sigma_box_mass(spec: &SigmaPriorSpec, sigma0: f64, eps: f64) -> f64 {
    let s0 = sigma0 * sigma0;
    let half = sigma0 * eps;
    spec.cdf(s0 + half) - spec.cdf((s0 - half).max(0.0))
}

/// Default slack converting an asymptotic `≪` into a finite-n inequality.
pub fn default_slack(n: u64) -> f64 {
    (n as f64).ln()
}

fn check_window_inputs(xi: f64, n: u64, sigma0_sq: f64, slack: f64) -> Result<()> {
    if !(xi > 0.0 && xi < 0.5) {
        return Err(Error::invalid(
            "xi",
            format!("must lie in (0, 1/2), got {xi}"),
        ));
    }
    if n < 2 {
        return Err(Error::invalid("n", "must be at least 2"));
    }
    ensure_positive("sigma0_sq", sigma0_sq)?;
    ensure_positive("slack", slack)
}

/// Whether `b/(ξ log n) ≤ σ0² ≤ n^{ξ/(a+2)} / slack`.
pub fn example_window_inverse_gamma(
    a: f64,
    b: f64,
    xi: f64,
    n: u64,
    sigma0_sq: f64,
    slack: f64,
) -> Result<ConditionReport> {
    ensure_positive("a", a)?;
    ensure_positive("b", b)?;
    check_window_inputs(xi, n, sigma0_sq, slack)?;
    let nf = n as f64;
    let lower = b / (xi * nf.ln());
    let upper = nf.powf(xi / (a + 2.0)) / slack;
    Ok(ConditionReport::new(
        ConditionId::InverseGammaWindow,
        Relation::Within { lower },
        sigma0_sq,
        upper,
    ))
}

/// Whether `σ0² ≤ n^{ξ/2} / slack`. The scale `r` does not enter the window.
pub fn example_window_half_cauchy(
    r: f64,
    xi: f64,
    n: u64,
    sigma0_sq: f64,
    slack: f64,
) -> Result<ConditionReport> {
    ensure_positive("r", r)?;
    check_window_inputs(xi, n, sigma0_sq, slack)?;
    let upper = (n as f64).powf(xi / 2.0) / slack;
    Ok(ConditionReport::new(
        ConditionId::HalfCauchyWindow,
        Relation::AtMost,
        sigma0_sq,
        upper,
    ))
}

/// Rate sequences on an `n` grid, with the premises they must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionConfig {
    pub n: Vec<u64>,
    pub eps_n: Vec<f64>,
    pub sigma0_n: Vec<f64>,
    /// Exponent with `σ0² > n^{−B}`.
    pub b: f64,
    pub m: f64,
    pub xi: f64,
}

impl ContractionConfig {
    /// Per grid point: `n ε² / σ0² ≥ log n`, plus one report that `ε/σ0` is
    /// nonincreasing along the grid.
    pub fn check(&self) -> Result<Vec<ConditionReport>> {
        let len = self.n.len();
        if self.eps_n.len() != len || self.sigma0_n.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: self.eps_n.len().min(self.sigma0_n.len()),
            });
        }
        let mut out = Vec::with_capacity(len + 1);
        for i in 0..len {
            let n = self.n[i] as f64;
            let ratio = self.eps_n[i] / self.sigma0_n[i];
            out.push(ConditionReport::new(
                ConditionId::RateLowerBound,
                Relation::AtLeast,
                n * ratio * ratio,
                n.ln(),
            ));
        }
        let ratios: Vec<f64> = self
            .eps_n
            .iter()
            .zip(&self.sigma0_n)
            .map(|(e, s)| e / s)
            .collect();
        let worst_increase = ratios
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(ConditionReport::new(
            ConditionId::RateSeparation,
            Relation::AtMost,
            if worst_increase.is_finite() {
                worst_increase
            } else {
                0.0
            },
            0.0,
        ));
        Ok(out)
    }
}
