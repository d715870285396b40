//! Regression functions of known Hölder smoothness and their spline
//! approximation errors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::basis::SplineBasisSpec;
use crate::error::{ensure_positive, Error, Result};
use crate::stat::{ols, LinearFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolderFamily {
    /// `|x − ½|^α`, `α ∈ (0, 1]`.
    Fractional,
    /// `|x − ½|^α` for non-even `α`, `(x − ½)|x − ½|^{α−1}` for even integer
    /// `α`; smoothness exactly `α` for any `α > 0`.
    Kink,
    /// `sin(2πx)`; smooth of every order.
    Sinusoid,
}

impl HolderFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            HolderFamily::Fractional => "fractional",
            HolderFamily::Kink => "kink",
            HolderFamily::Sinusoid => "sinusoid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderTruth {
    pub family: HolderFamily,
    pub alpha: f64,
    /// Recorded bound on the Hölder norm.
    pub holder_norm: f64,
}

fn is_even_integer(a: f64) -> bool {
    a.fract() == 0.0 && (a as i64) % 2 == 0
}

impl HolderTruth {
    pub fn new(family: HolderFamily, alpha: f64) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        let holder_norm = match family {
            HolderFamily::Fractional => {
                if alpha > 1.0 {
                    return Err(Error::invalid(
                        "alpha",
                        format!("the fractional family needs alpha in (0, 1], got {alpha}"),
                    ));
                }
                1.0
            }
            // the derivative of order ⌈α⌉ − 1 has Hölder constant at most Γ(α + 1)
            HolderFamily::Kink => crate::stat::special::ln_gamma_fn(alpha + 1.0)
                .exp()
                .max(1.0),
            HolderFamily::Sinusoid => (2.0 * std::f64::consts::PI).powf(alpha.ceil()),
        };
        Ok(Self {
            family,
            alpha,
            holder_norm,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = x - 0.5;
        match self.family {
            HolderFamily::Fractional => u.abs().powf(self.alpha),
            HolderFamily::Kink => {
                if is_even_integer(self.alpha) {
                    u * u.abs().powf(self.alpha - 1.0)
                } else {
                    u.abs().powf(self.alpha)
                }
            }
            HolderFamily::Sinusoid => (2.0 * std::f64::consts::PI * x).sin(),
        }
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

pub fn holder_truth(family: HolderFamily, alpha: f64) -> Result<HolderTruth> {
    HolderTruth::new(family, alpha)
}

/// `sup_{x ≠ y} |f(x) − f(y)| / |x − y|^γ` over all pairs of a grid.
pub fn holder_seminorm_on_grid<F: Fn(f64) -> f64>(f: F, gamma: f64, grid: &[f64]) -> f64 {
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut best = 0.0f64;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            let d = (grid[j] - grid[i]).abs();
            if d > 0.0 {
                best = best.max((vals[j] - vals[i]).abs() / d.powf(gamma));
            }
        }
    }
    best
}

/// Points used to fit and to evaluate the sup norm.
pub const APPROXIMATION_GRID: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationCurve {
    pub j: Vec<usize>,
    pub sup_error: Vec<f64>,
    /// Regression of `log error` on `log J`.
    pub fit: Option<LinearFit>,
}

/// Sup-norm error of the discrete least-squares fit of `f` by the degree-`q`
/// basis of each dimension in `j_grid`, both on a uniform grid of
/// [`APPROXIMATION_GRID`] points.
pub fn approximation_error_curve<F: Fn(f64) -> f64>(
    f: F,
    q: usize,
    j_grid: &[usize],
) -> Result<ApproximationCurve> {
    let xs: Vec<f64> = (0..APPROXIMATION_GRID)
        .map(|i| i as f64 / (APPROXIMATION_GRID - 1) as f64)
        .collect();
    let target = DVector::from_iterator(xs.len(), xs.iter().map(|&x| f(x)));
    let mut sup_error = Vec::with_capacity(j_grid.len());
    for &j in j_grid {
        let spec = SplineBasisSpec::with_dimension(q, j)?;
        let b: DMatrix<f64> = spec.basis_matrix(&xs)?;
        let qr = b.clone().qr();
        let rhs = qr.q().transpose() * &target;
        let coef = qr.r().solve_upper_triangular(&rhs).ok_or_else(|| {
            Error::Degenerate(format!("singular least-squares system at J = {j}"))
        })?;
        let resid = &b * coef - &target;
        sup_error.push(resid.amax());
    }
    let fit = if j_grid.len() >= 3 && sup_error.iter().all(|&e| e > 0.0) {
        let lx: Vec<f64> = j_grid.iter().map(|&j| (j as f64).ln()).collect();
        let ly: Vec<f64> = sup_error.iter().map(|e| e.ln()).collect();
        Some(ols(&lx, &ly)?)
    } else {
        None
    };
    Ok(ApproximationCurve {
        j: j_grid.to_vec(),
        sup_error,
        fit,
    })
}

/// Dimensions `q + K + 1` for even interior-knot counts, so that `½` is never
/// a knot and the kink of the test functions always sits mid-cell.
pub fn even_knot_dimensions(q: usize, k_interior: &[usize]) -> Result<Vec<usize>> {
    k_interior
        .iter()
        .map(|&k| {
            if k % 2 != 0 {
                Err(Error::invalid("k_interior", format!("{k} is odd")))
            } else {
                Ok(q + k + 1)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        let t = HolderTruth::new(HolderFamily::Fractional, 1.0).unwrap();
        assert_eq!(t.eval(0.2), 0.3);
        assert!(HolderTruth::new(HolderFamily::Fractional, 1.5).is_err());
        assert!(HolderTruth::new(HolderFamily::Kink, 0.0).is_err());
        let k = HolderTruth::new(HolderFamily::Kink, 2.0).unwrap();
        assert!((k.eval(0.3) + 0.04).abs() < 1e-15);
        assert!((k.eval(0.7) - 0.04).abs() < 1e-15);
        let s = HolderTruth::new(HolderFamily::Sinusoid, 2.0).unwrap();
        assert!((s.eval(0.25) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seminorms() {
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0).collect();
        let lip = HolderTruth::new(HolderFamily::Fractional, 1.0).unwrap();
        assert!((holder_seminorm_on_grid(|x| lip.eval(x), 1.0, &grid) - 1.0).abs() < 1e-12);
        let half = HolderTruth::new(HolderFamily::Fractional, 0.5).unwrap();
        let s = holder_seminorm_on_grid(|x| half.eval(x), 0.5, &grid);
        assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn constant_is_reproduced() {
        let c = approximation_error_curve(|_| 1.7, 3, &[4, 9, 20]).unwrap();
        assert!(c.sup_error.iter().all(|&e| e < 1e-12));
    }

    #[test]
    fn approximation_slopes() {
        let js = even_knot_dimensions(3, &[10, 20, 40, 80, 160]).unwrap();
        for &(family, alpha) in &[
            (HolderFamily::Fractional, 0.5),
            (HolderFamily::Fractional, 1.0),
            (HolderFamily::Kink, 2.0),
        ] {
            let t = HolderTruth::new(family, alpha).unwrap();
            let c = approximation_error_curve(|x| t.eval(x), 3, &js).unwrap();
            let slope = c.fit.unwrap().slope;
            assert!(
                (slope + alpha).abs() <= 0.2,
                "alpha={alpha}: slope {slope}, {:?}",
                c.sup_error
            );
            for w in c.sup_error.windows(2) {
                assert!(w[1] <= 1.1 * w[0]);
            }
        }
        assert!(even_knot_dimensions(3, &[3]).is_err());
    }
}
