//! Evidence of the conjugate-slab Gaussian linear model with a general prior
//! on the noise variance.
//!
//! For `y = Xβ + e`, `β ~ N_k(0, τ² I)`, `e ~ N_n(0, σ² I)`, the marginal of
//! `y` given `σ²` is `N_n(0, σ² I + τ² X Xᵀ)`. With the eigendecomposition
//! `XᵀX = V Λ Vᵀ` and `c = Vᵀ Xᵀ y` this density only needs `yᵀy`, `Λ` and
//! `c`, so each evaluation is `O(k)`. The remaining one-dimensional integral
//! over `σ²` is done on the log scale by adaptive quadrature.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::contraction::SigmaPriorSpec;
use crate::error::{ensure_positive, Error, Result};
use crate::quadrature::integrate;

/// Relative tolerance of the σ²-integral; equals the absolute accuracy of the
/// log evidence.
pub const EVIDENCE_TOLERANCE: f64 = 1e-12;
/// Largest relative error accepted when the integrand is too noisy (large
/// cancelling terms in the log density) to reach [`EVIDENCE_TOLERANCE`].
pub const NOISE_LIMIT: f64 = 1e-8;
const BRACKET_HALF_WIDTH: f64 = 46.0;
const BRACKET_STEP: f64 = 0.25;
const BRACKET_DROP: f64 = 50.0;
const SAMPLER_NODES: usize = 1024;

struct Bracket {
    /// Integration breakpoints in `v`, refined geometrically around the mode.
    breaks: Vec<f64>,
    hmax: f64,
    /// Curvature scale of the log integrand at the mode.
    scale: f64,
}

#[derive(Debug, Clone)]
pub struct LinearEvidence {
    n: usize,
    yty: f64,
    tau2: f64,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    projected: Vec<f64>,
}

impl LinearEvidence {
    /// `gram = XᵀX` (k×k) and `xty = Xᵀy`; `k = 0` is the empty model.
    pub fn new(
        n: usize,
        yty: f64,
        gram: &DMatrix<f64>,
        xty: &DVector<f64>,
        tau2: f64,
    ) -> Result<Self> {
        ensure_positive("tau2", tau2)?;
        if n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        let k = gram.nrows();
        if gram.ncols() != k || xty.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: xty.len(),
            });
        }
        if k > n {
            return Err(Error::invalid(
                "k",
                format!("model dimension {k} exceeds n = {n}"),
            ));
        }
        let (eigenvalues, eigenvectors) = if k == 0 {
            (Vec::new(), DMatrix::zeros(0, 0))
        } else {
            let eig = SymmetricEigen::new(gram.clone());
            (
                eig.eigenvalues.iter().map(|v| v.max(0.0)).collect(),
                eig.eigenvectors,
            )
        };
        let projected = if k == 0 {
            Vec::new()
        } else {
            (eigenvectors.transpose() * xty).iter().copied().collect()
        };
        Ok(Self {
            n,
            yty,
            tau2,
            eigenvalues,
            eigenvectors,
            projected,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `log N_n(y; 0, s I + τ² X Xᵀ)`.
    pub fn log_density_given_sigma2(&self, s: f64) -> f64 {
        let n = self.n as f64;
        let k = self.dim() as f64;
        let ratio = s / self.tau2;
        let mut log_det = (n - k) * s.ln();
        let mut explained = 0.0;
        for (lam, c) in self.eigenvalues.iter().zip(&self.projected) {
            log_det += (s + self.tau2 * lam).ln();
            explained += c * c / (ratio + lam);
        }
        let quad = ((self.yty - explained) / s).max(0.0);
        -0.5 * (n * (2.0 * PI).ln() + log_det + quad)
    }

    fn log_integrand(&self, prior: &SigmaPriorSpec, v: f64) -> f64 {
        let s = v.exp();
        let lg = prior.ln_density(s);
        if lg == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.log_density_given_sigma2(s) + lg + v
    }

    /// Interval in `v = log σ²` holding the integrand mass, and the grid
    /// index of the largest log integrand.
    fn bracket(&self, prior: &SigmaPriorSpec) -> Result<Bracket> {
        let data_scale = if self.yty > 0.0 {
            self.yty / self.n as f64
        } else {
            prior.median()
        };
        let centre = 0.5 * (data_scale.ln() + prior.median().ln());
        let (sup_lo, sup_hi) = prior.support();
        let mut lo = centre - BRACKET_HALF_WIDTH;
        let mut hi = centre + BRACKET_HALF_WIDTH;
        if sup_lo > 0.0 {
            lo = lo.max(sup_lo.ln());
        }
        if sup_hi.is_finite() {
            hi = hi.min(sup_hi.ln());
        }
        let steps = ((hi - lo) / BRACKET_STEP).ceil().max(2.0) as usize;
        let grid: Vec<f64> = (0..=steps)
            .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
            .collect();
        let values: Vec<f64> = grid.iter().map(|&v| self.log_integrand(prior, v)).collect();
        let (imax, &gmax) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty grid");
        if !gmax.is_finite() {
            return Err(Error::Degenerate(
                "log integrand is not finite anywhere on the σ² grid".into(),
            ));
        }
        let edge_lo = values[0] > gmax - BRACKET_DROP && (sup_lo == 0.0 || grid[0] > sup_lo.ln());
        let edge_hi = values[steps] > gmax - BRACKET_DROP && !sup_hi.is_finite();
        if edge_lo || edge_hi {
            return Err(Error::NonConvergence {
                what: "σ² integral",
                detail: "integrand mass reaches the edge of the σ² window (improper posterior?)"
                    .into(),
            });
        }
        let first = values[..=imax]
            .iter()
            .rposition(|&h| h < gmax - BRACKET_DROP)
            .unwrap_or(0);
        let last = values[imax..]
            .iter()
            .position(|&h| h < gmax - BRACKET_DROP)
            .map(|i| i + imax)
            .unwrap_or(steps);

        // refine the mode between the neighbours of the best grid point
        let f = |v: f64| self.log_integrand(prior, v);
        let (mut a, mut b) = (grid[imax.saturating_sub(1)], grid[(imax + 1).min(steps)]);
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - golden * (b - a);
        let mut d = a + golden * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
            if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
                break;
            }
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - golden * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + golden * (b - a);
                fd = f(d);
            }
        }
        let (mode, hmode) = if fc >= fd { (c, fc) } else { (d, fd) };
        let (mode, hmax) = if hmode >= gmax {
            (mode, hmode)
        } else {
            (grid[imax], gmax)
        };

        let lo = grid[first];
        let hi = grid[last];
        // local scale from the curvature at the mode
        let mut delta = 1e-3;
        let mut curvature = 0.0;
        for _ in 0..20 {
            curvature = (f(mode + delta) - 2.0 * hmax + f(mode - delta)) / (delta * delta);
            if -curvature * delta * delta < 1e-2 {
                break;
            }
            delta /= 4.0;
        }
        let scale = if curvature < 0.0 {
            (-1.0 / curvature).sqrt()
        } else {
            BRACKET_STEP
        };
        let scale = scale.clamp(1e-9, (hi - lo).max(1e-9));
        let mut breaks = vec![mode.clamp(lo, hi)];
        let mut w = scale;
        while mode - w > lo {
            breaks.push(mode - w);
            w *= 2.0;
        }
        breaks.push(lo);
        let mut w = scale;
        while mode + w < hi {
            breaks.push(mode + w);
            w *= 2.0;
        }
        breaks.push(hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Ok(Bracket {
            breaks,
            hmax,
            scale,
        })
    }

    /// `log ∫ N_n(y; 0, s I + τ² X Xᵀ) g(s) ds`.
    pub fn log_evidence(&self, prior: &SigmaPriorSpec) -> Result<f64> {
        self.log_evidence_with_tolerance(prior, EVIDENCE_TOLERANCE)
    }

    pub fn log_evidence_with_tolerance(&self, prior: &SigmaPriorSpec, rel_tol: f64) -> Result<f64> {
        let Bracket {
            breaks,
            hmax,
            scale,
        } = self.bracket(prior)?;
        // the integral of the peak-normalised integrand is of order `scale`
        let abs_tol = 1e-2 * rel_tol * scale;
        let mut total = 0.0;
        let mut error = 0.0;
        for w in breaks.windows(2) {
            let r = integrate(
                |v| (self.log_integrand(prior, v) - hmax).exp(),
                w[0],
                w[1],
                abs_tol,
                rel_tol,
            )?;
            total += r.value;
            error += r.error;
        }
        if error > NOISE_LIMIT * total {
            return Err(Error::NonConvergence {
                what: "σ² integral",
                detail: format!("relative error {:e} exceeds {NOISE_LIMIT:e}", error / total),
            });
        }
        if !(total > 0.0) {
            return Err(Error::NonConvergence {
                what: "σ² integral",
                detail: "integral evaluated to zero".into(),
            });
        }
        Ok(hmax + total.ln())
    }

    /// Inverse-CDF sampler for the conditional `σ² | y`.
    pub fn sigma2_sampler(&self, prior: &SigmaPriorSpec) -> Result<Sigma2Sampler> {
        let Bracket { breaks, hmax, .. } = self.bracket(prior)?;
        let per_piece = (SAMPLER_NODES / (breaks.len() - 1)).max(32);
        let mut nodes = vec![breaks[0]];
        for w in breaks.windows(2) {
            for i in 1..=per_piece {
                nodes.push(w[0] + (w[1] - w[0]) * i as f64 / per_piece as f64);
            }
        }
        let dens: Vec<f64> = nodes
            .iter()
            .map(|&v| (self.log_integrand(prior, v) - hmax).exp())
            .collect();
        let mut cdf = Vec::with_capacity(nodes.len());
        cdf.push(0.0);
        for i in 1..nodes.len() {
            let prev = cdf[i - 1];
            cdf.push(prev + 0.5 * (dens[i - 1] + dens[i]) * (nodes[i] - nodes[i - 1]));
        }
        let total = *cdf.last().expect("nonempty");
        if !(total > 0.0) {
            return Err(Error::Degenerate(
                "σ² conditional has no mass on its grid".into(),
            ));
        }
        for c in &mut cdf {
            *c /= total;
        }
        Ok(Sigma2Sampler { nodes, dens, cdf })
    }

    /// Draws `β ~ N(m, Σ)` with `Σ = (XᵀX/s + I/τ²)⁻¹`, `m = Σ Xᵀy / s`.
    pub fn sample_coefficients<R: Rng + ?Sized>(&self, s: f64, rng: &mut R) -> Vec<f64> {
        let k = self.dim();
        if k == 0 {
            return Vec::new();
        }
        let ratio = s / self.tau2;
        let coords: DVector<f64> = DVector::from_iterator(
            k,
            self.eigenvalues
                .iter()
                .zip(&self.projected)
                .map(|(lam, c)| {
                    let mean = c / (lam + ratio);
                    let sd = (s / (lam + ratio)).sqrt();
                    mean + sd * rng.sample::<f64, _>(StandardNormal)
                }),
        );
        (&self.eigenvectors * coords).iter().copied().collect()
    }

    /// Conditional posterior mean of `β` given `σ² = s`.
    pub fn coefficient_mean(&self, s: f64) -> Vec<f64> {
        let k = self.dim();
        if k == 0 {
            return Vec::new();
        }
        let ratio = s / self.tau2;
        let coords = DVector::from_iterator(
            k,
            self.eigenvalues
                .iter()
                .zip(&self.projected)
                .map(|(lam, c)| c / (lam + ratio)),
        );
        (&self.eigenvectors * coords).iter().copied().collect()
    }
}

/// Piecewise-linear inverse-CDF sampler on a log-σ² grid.
#[derive(Debug, Clone)]
pub struct Sigma2Sampler {
    nodes: Vec<f64>,
    dens: Vec<f64>,
    cdf: Vec<f64>,
}

impl Sigma2Sampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let i = match self.cdf.binary_search_by(|c| c.total_cmp(&u)) {
            Ok(i) => i.min(self.cdf.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.cdf.len() - 2),
        };
        // invert the trapezoid CDF inside the cell (linear density in v)
        let h = self.nodes[i + 1] - self.nodes[i];
        let (d0, d1) = (self.dens[i], self.dens[i + 1]);
        let mass = self.cdf[i + 1] - self.cdf[i];
        let target = if mass > 0.0 {
            (u - self.cdf[i]) / mass
        } else {
            0.5
        };
        let frac = if (d1 - d0).abs() < 1e-12 * (d0 + d1) {
            target
        } else {
            let a = (d1 - d0) / 2.0;
            let b = d0;
            let c = -target * (d0 + d1) / 2.0;
            (-b + (b * b - 4.0 * a * c).max(0.0).sqrt()) / (2.0 * a)
        };
        (self.nodes[i] + frac.clamp(0.0, 1.0) * h).exp()
    }

    /// Mean of `σ²` under the gridded conditional.
    pub fn mean(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 1..self.nodes.len() {
            let h = self.nodes[i] - self.nodes[i - 1];
            num += 0.5
                * h
                * (self.dens[i - 1] * self.nodes[i - 1].exp() + self.dens[i] * self.nodes[i].exp());
            den += 0.5 * h * (self.dens[i - 1] + self.dens[i]);
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn dense_log_density(x: &DMatrix<f64>, y: &DVector<f64>, s: f64, tau2: f64) -> f64 {
        let n = y.len();
        let cov = DMatrix::<f64>::identity(n, n) * s + x * x.transpose() * tau2;
        let chol = cov.cholesky().unwrap();
        let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let sol = chol.solve(y);
        -0.5 * (n as f64 * (2.0 * PI).ln() + log_det + y.dot(&sol))
    }

    fn toy(n: usize, k: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut g = rng::stream(seed, 0);
        let x = DMatrix::from_fn(n, k, |_, _| g.random::<f64>() * 2.0 - 1.0);
        let y = DVector::from_fn(n, |_, _| g.sample::<f64, _>(StandardNormal));
        (x, y)
    }

    #[test]
    fn woodbury_form_matches_dense_density() {
        for &(n, k) in &[(6, 0), (6, 2), (10, 4), (5, 5)] {
            let (x, y) = toy(n, k, 2);
            let ev = LinearEvidence::new(
                n,
                y.dot(&y),
                &(x.transpose() * &x),
                &(x.transpose() * &y),
                1.7,
            )
            .unwrap();
            for &s in &[0.05, 0.6, 3.0] {
                let a = ev.log_density_given_sigma2(s);
                let b = dense_log_density(&x, &y, s, 1.7);
                assert!((a - b).abs() < 1e-10, "n={n} k={k} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rank_deficient_design() {
        let (mut x, y) = toy(8, 3, 4);
        let col = x.column(0).clone_owned();
        x.set_column(2, &col);
        let ev = LinearEvidence::new(
            8,
            y.dot(&y),
            &(x.transpose() * &x),
            &(x.transpose() * &y),
            1.0,
        )
        .unwrap();
        let a = ev.log_density_given_sigma2(0.8);
        let b = dense_log_density(&x, &y, 0.8, 1.0);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn concentrated_prior_recovers_known_variance() {
        // σ² prior concentrated at 1: marginal of y for n = p = 1, X = 1, τ² = 1 is N(0, 2)
        let a = 1e7;
        let prior = SigmaPriorSpec::InverseGamma { a, b: a + 1.0 };
        let y = 0.7;
        let ev = LinearEvidence::new(
            1,
            y * y,
            &DMatrix::from_element(1, 1, 1.0),
            &DVector::from_element(1, y),
            1.0,
        )
        .unwrap();
        let expected = -0.5 * (2.0 * PI * 2.0).ln() - y * y / 4.0;
        assert!((ev.log_density_given_sigma2(1.0) - expected).abs() < 1e-14);
        let got = ev.log_evidence(&prior).unwrap();
        assert!((got - expected).abs() < 1e-5, "{got} vs {expected}");
    }

    #[test]
    fn evidence_matches_brute_force_riemann_sum() {
        let (x, y) = toy(12, 3, 8);
        let prior = SigmaPriorSpec::InverseGamma { a: 2.0, b: 1.0 };
        let ev = LinearEvidence::new(
            12,
            y.dot(&y),
            &(x.transpose() * &x),
            &(x.transpose() * &y),
            2.0,
        )
        .unwrap();
        let got = ev.log_evidence(&prior).unwrap();
        let m = 200_000;
        let (lo, hi) = (-12.0f64, 8.0f64);
        let h = (hi - lo) / m as f64;
        let sum: f64 = (0..m)
            .map(|i| {
                let v = lo + (i as f64 + 0.5) * h;
                (dense_log_density(&x, &y, v.exp(), 2.0) + prior.ln_density(v.exp()) + v).exp()
            })
            .sum::<f64>()
            * h;
        assert!((got - sum.ln()).abs() < 1e-6, "{got} vs {}", sum.ln());
    }

    #[test]
    fn tolerance_halving_is_stable() {
        let (x, y) = toy(30, 4, 12);
        let prior = SigmaPriorSpec::HalfCauchy { r: 1.0 };
        let ev = LinearEvidence::new(
            30,
            y.dot(&y),
            &(x.transpose() * &x),
            &(x.transpose() * &y),
            1.0,
        )
        .unwrap();
        let a = ev.log_evidence_with_tolerance(&prior, 1e-10).unwrap();
        let b = ev.log_evidence_with_tolerance(&prior, 5e-11).unwrap();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn improper_posterior_is_reported() {
        let prior = SigmaPriorSpec::HalfCauchy { r: 1.0 };
        let ev =
            LinearEvidence::new(10, 0.0, &DMatrix::zeros(0, 0), &DVector::zeros(0), 1.0).unwrap();
        assert!(ev.log_evidence(&prior).is_err());
        let ig = SigmaPriorSpec::InverseGamma { a: 1.0, b: 1.0 };
        assert!(ev.log_evidence(&ig).unwrap().is_finite());
    }

    #[test]
    fn sigma2_sampler_matches_grid_mean() {
        let (x, y) = toy(40, 2, 3);
        let prior = SigmaPriorSpec::InverseGamma { a: 1.0, b: 1.0 };
        let ev = LinearEvidence::new(
            40,
            y.dot(&y),
            &(x.transpose() * &x),
            &(x.transpose() * &y),
            1.0,
        )
        .unwrap();
        let sampler = ev.sigma2_sampler(&prior).unwrap();
        let mut g = rng::stream(1, 0);
        let draws: Vec<f64> = (0..100_000).map(|_| sampler.sample(&mut g)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let sd =
            (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / draws.len() as f64).sqrt();
        assert!((mean - sampler.mean()).abs() < 4.0 * sd / (draws.len() as f64).sqrt());
    }
}
