//! Priors on the variance `σ²`.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::error::{ensure_positive, Error, Result};
use crate::stat::special::gamma_pq;

/// Minimum number of nodes for a tabulated density.
pub const MIN_TABULATED_NODES: usize = 16;
/// Tolerance on the total mass of a tabulated density.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-4;

/// Density `g` of `σ²` on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SigmaPriorSpec {
    /// `g(s) ∝ s^{−a−1} e^{−b/s}`.
    InverseGamma { a: f64, b: f64 },
    /// `g(s) = 2r / (π (r² + s²))`.
    HalfCauchy { r: f64 },
    /// Piecewise-linear density through `(s[i], g[i])`, zero outside the grid.
    Tabulated { s: Vec<f64>, g: Vec<f64> },
}

impl Default for SigmaPriorSpec {
    fn default() -> Self {
        SigmaPriorSpec::InverseGamma { a: 1.0, b: 1.0 }
    }
}

impl SigmaPriorSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SigmaPriorSpec::InverseGamma { a, b } => {
                ensure_positive("a", *a)?;
                ensure_positive("b", *b)
            }
            SigmaPriorSpec::HalfCauchy { r } => ensure_positive("r", *r),
            SigmaPriorSpec::Tabulated { s, g } => {
                if s.len() != g.len() {
                    return Err(Error::Tabulation(format!(
                        "{} abscissae but {} density values",
                        s.len(),
                        g.len()
                    )));
                }
                if s.len() < MIN_TABULATED_NODES {
                    return Err(Error::Tabulation(format!(
                        "insufficient grid resolution: {} nodes, need at least {MIN_TABULATED_NODES}",
                        s.len()
                    )));
                }
                if s[0] < 0.0
                    || s.windows(2).any(|w| !(w[1] > w[0]))
                    || s.iter().any(|v| !v.is_finite())
                {
                    return Err(Error::Tabulation(
                        "abscissae must be finite, nonnegative and strictly increasing".into(),
                    ));
                }
                if g.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::Tabulation(
                        "density values must be finite and nonnegative".into(),
                    ));
                }
                let mass = self.total_mass();
                if (mass - 1.0).abs() > NORMALIZATION_TOLERANCE {
                    return Err(Error::Tabulation(format!(
                        "density integrates to {mass}, not 1"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Total mass; exact for the parametric families, trapezoidal for tables.
    pub fn total_mass(&self) -> f64 {
        match self {
            SigmaPriorSpec::Tabulated { s, g } => s
                .windows(2)
                .zip(g.windows(2))
                .map(|(sw, gw)| 0.5 * (sw[1] - sw[0]) * (gw[0] + gw[1]))
                .sum(),
            _ => 1.0,
        }
    }

    /// Builds a normalized table from unnormalized density values.
    pub fn tabulate(s: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        let raw = SigmaPriorSpec::Tabulated { s, g };
        let mass = raw.total_mass();
        if !(mass > 0.0) {
            return Err(Error::Tabulation("density has zero mass".into()));
        }
        let SigmaPriorSpec::Tabulated { s, g } = raw else {
            unreachable!()
        };
        let spec = SigmaPriorSpec::Tabulated {
            s,
            g: g.into_iter().map(|v| v / mass).collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Support `(lo, hi)`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            SigmaPriorSpec::Tabulated { s, .. } => (s[0], s[s.len() - 1]),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn density(&self, s: f64) -> f64 {
        match self {
            SigmaPriorSpec::Tabulated { s: xs, g } => {
                if s < xs[0] || s > xs[xs.len() - 1] {
                    return 0.0;
                }
                let i = segment(xs, s);
                let w = (s - xs[i]) / (xs[i + 1] - xs[i]);
                g[i] + w * (g[i + 1] - g[i])
            }
            _ => {
                if s <= 0.0 {
                    0.0
                } else {
                    self.ln_density(s).exp()
                }
            }
        }
    }

    pub fn ln_density(&self, s: f64) -> f64 {
        if s <= 0.0 || !s.is_finite() {
            return f64::NEG_INFINITY;
        }
        match self {
            SigmaPriorSpec::InverseGamma { a, b } => {
                a * b.ln() - ln_gamma(*a) - (a + 1.0) * s.ln() - b / s
            }
            SigmaPriorSpec::HalfCauchy { r } => (2.0 * r / PI).ln() - (r * r + s * s).ln(),
            SigmaPriorSpec::Tabulated { .. } => self.density(s).ln(),
        }
    }

    /// `g′(s)`; for tables, the slope of the segment containing `s`.
    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            SigmaPriorSpec::InverseGamma { a, b } => {
                if s <= 0.0 {
                    0.0
                } else {
                    self.density(s) * (b / (s * s) - (a + 1.0) / s)
                }
            }
            SigmaPriorSpec::HalfCauchy { r } => {
                let den = r * r + s * s;
                -4.0 * r * s / (PI * den * den)
            }
            SigmaPriorSpec::Tabulated { s: xs, g } => {
                if s < xs[0] || s > xs[xs.len() - 1] {
                    return 0.0;
                }
                let i = segment(xs, s);
                (g[i + 1] - g[i]) / (xs[i + 1] - xs[i])
            }
        }
    }

    /// `Π{σ² ≤ t}`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            SigmaPriorSpec::InverseGamma { a, b } => {
                let x = b / t;
                if x.is_finite() {
                    gamma_pq(*a, x).map(|(_, q)| q).unwrap_or(0.0)
                } else {
                    0.0
                }
            }
            SigmaPriorSpec::HalfCauchy { r } => 2.0 / PI * (t / r).atan(),
            SigmaPriorSpec::Tabulated { s: xs, g } => {
                if t <= xs[0] {
                    return 0.0;
                }
                let mut acc = 0.0;
                for i in 0..xs.len() - 1 {
                    if t >= xs[i + 1] {
                        acc += 0.5 * (xs[i + 1] - xs[i]) * (g[i] + g[i + 1]);
                    } else {
                        let h = t - xs[i];
                        let slope = (g[i + 1] - g[i]) / (xs[i + 1] - xs[i]);
                        acc += h * g[i] + 0.5 * slope * h * h;
                        break;
                    }
                }
                acc.min(1.0)
            }
        }
    }

    /// `Π{σ² > t}`, computed without cancellation for the parametric families.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match self {
            SigmaPriorSpec::InverseGamma { a, b } => {
                let x = b / t;
                if x.is_finite() {
                    gamma_pq(*a, x).map(|(p, _)| p).unwrap_or(1.0)
                } else {
                    1.0
                }
            }
            SigmaPriorSpec::HalfCauchy { r } => 2.0 / PI * (r / t).atan(),
            SigmaPriorSpec::Tabulated { .. } => (1.0 - self.cdf(t)).max(0.0),
        }
    }

    /// Smallest `t` with `cdf(t) ≥ p`, by bisection on `log t` where no closed
    /// form is available.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self {
            SigmaPriorSpec::HalfCauchy { r } => r * (PI * p / 2.0).tan(),
            SigmaPriorSpec::Tabulated { s: xs, .. } => {
                bisect(|t| self.cdf(t) - p, xs[0], xs[xs.len() - 1])
            }
            SigmaPriorSpec::InverseGamma { .. } => {
                let mut hi = 1.0f64;
                while self.cdf(hi) < p && hi < 1e300 {
                    hi *= 16.0;
                }
                bisect(|v| self.cdf(v.exp()) - p, -690.0, hi.ln()).exp()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SigmaPriorSpec::InverseGamma { a, b } => {
                let gamma = Gamma::new(*a, 1.0 / b).expect("validated shape and scale");
                1.0 / gamma.sample(rng)
            }
            _ => self.quantile(rng.random::<f64>()),
        }
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }
}

fn segment(xs: &[f64], s: f64) -> usize {
    match xs.binary_search_by(|v| v.total_cmp(&s)) {
        Ok(i) => i.min(xs.len() - 2),
        Err(i) => i.saturating_sub(1).min(xs.len() - 2),
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
    }
    hi
}
