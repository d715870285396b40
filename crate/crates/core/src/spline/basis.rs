//! Clamped uniform B-spline bases on `[0, 1]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degree-`q` B-spline basis with `k_interior` uniform interior knots and
/// boundary knots repeated `q + 1` times; dimension `J = q + K + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineBasisSpec {
    q: usize,
    k_interior: usize,
    knots: Vec<f64>,
}

impl SplineBasisSpec {
    pub fn new(q: usize, k_interior: usize) -> Self {
        let mut knots = vec![0.0; q + 1];
        knots.extend((1..=k_interior).map(|i| i as f64 / (k_interior + 1) as f64));
        knots.extend(std::iter::repeat_n(1.0, q + 1));
        Self {
            q,
            k_interior,
            knots,
        }
    }

    /// The basis of dimension `j` and degree `q` (`j ≥ q + 1`).
    pub fn with_dimension(q: usize, j: usize) -> Result<Self> {
        if j < q + 1 {
            return Err(Error::invalid(
                "J",
                format!("dimension {j} is below q + 1 = {}", q + 1),
            ));
        }
        Ok(Self::new(q, j - q - 1))
    }

    pub fn degree(&self) -> usize {
        self.q
    }

    pub fn k_interior(&self) -> usize {
        self.k_interior
    }

    pub fn dim(&self) -> usize {
        self.q + self.k_interior + 1
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Index `μ` of the knot span `[t_μ, t_{μ+1})` containing `x` (the last
    /// nonempty span for `x = 1`).
    fn span(&self, x: f64) -> usize {
        let j = self.dim();
        if x >= 1.0 {
            return j - 1;
        }
        // first index with t > x, minus one, within [q, J − 1]
        let idx = self.knots.partition_point(|&t| t <= x);
        (idx - 1).clamp(self.q, j - 1)
    }

    /// The `q + 1` possibly nonzero values at `x` and the index of the first.
    pub fn eval_local(&self, x: f64) -> Result<(usize, Vec<f64>)> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain {
                value: x,
                domain: "[0, 1]",
            });
        }
        let q = self.q;
        let t = &self.knots;
        let mu = self.span(x);
        let mut n = vec![0.0; q + 1];
        let mut left = vec![0.0; q + 1];
        let mut right = vec![0.0; q + 1];
        n[0] = 1.0;
        for d in 1..=q {
            left[d] = x - t[mu + 1 - d];
            right[d] = t[mu + d] - x;
            let mut saved = 0.0;
            for r in 0..d {
                let temp = n[r] / (right[r + 1] + left[d - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[d - r] * temp;
            }
            n[d] = saved;
        }
        Ok((mu - q, n))
    }

    /// All `J` basis values at `x`.
    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        let (first, local) = self.eval_local(x)?;
        let mut out = vec![0.0; self.dim()];
        out[first..first + local.len()].copy_from_slice(&local);
        Ok(out)
    }

    /// `n × J` matrix with rows `ψ_J(x_i)`.
    pub fn basis_matrix(&self, xs: &[f64]) -> Result<DMatrix<f64>> {
        let mut b = DMatrix::zeros(xs.len(), self.dim());
        for (i, &x) in xs.iter().enumerate() {
            let (first, local) = self.eval_local(x)?;
            for (k, v) in local.into_iter().enumerate() {
                b[(i, first + k)] = v;
            }
        }
        Ok(b)
    }
}

pub fn bspline_basis_eval(spec: &SplineBasisSpec, x: f64) -> Result<Vec<f64>> {
    spec.eval(x)
}

pub fn basis_matrix(spec: &SplineBasisSpec, xs: &[f64]) -> Result<DMatrix<f64>> {
    spec.basis_matrix(xs)
}

/// `n` equally spaced design points `(i − ½)/n`.
pub fn uniform_design_points(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    /// Textbook Cox–de Boor recursion with the 0/0 = 0 convention.
    fn cox_de_boor(t: &[f64], i: usize, q: usize, x: f64, last: bool) -> f64 {
        if q == 0 {
            let inside = t[i] <= x && x < t[i + 1];
            let at_end = last && x == t[i + 1] && t[i] < t[i + 1];
            return if inside || at_end { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = t[i + q] - t[i];
        if d1 > 0.0 {
            v += (x - t[i]) / d1 * cox_de_boor(t, i, q - 1, x, last);
        }
        let d2 = t[i + q + 1] - t[i + 1];
        if d2 > 0.0 {
            v += (t[i + q + 1] - x) / d2 * cox_de_boor(t, i + 1, q - 1, x, last);
        }
        v
    }

    #[test]
    fn matches_textbook_recursion() {
        let mut g = rng::stream(3, 0);
        for q in 0..=4 {
            for k in [0, 1, 4, 7] {
                let spec = SplineBasisSpec::new(q, k);
                let j = spec.dim();
                for _ in 0..50 {
                    let x: f64 = g.random();
                    let v = spec.eval(x).unwrap();
                    for (i, vi) in v.iter().enumerate() {
                        let r = cox_de_boor(spec.knots(), i, q, x, false);
                        assert!((vi - r).abs() < 1e-12, "q={q} k={k} i={i} x={x}");
                    }
                }
                // right end: only the last function is 1
                let v = spec.eval(1.0).unwrap();
                assert!((v[j - 1] - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn piecewise_constant_case() {
        let spec = SplineBasisSpec::new(0, 4);
        assert_eq!(spec.dim(), 5);
        let v = spec.eval(0.5).unwrap();
        assert_eq!(v.iter().filter(|&&x| x == 1.0).count(), 1);
        assert_eq!(v[2], 1.0);
    }

    #[test]
    fn hat_functions_at_knots() {
        let spec = SplineBasisSpec::new(1, 3);
        // knots 0, 0, .25, .5, .75, 1, 1 → hats centred at 0, .25, .5, .75, 1
        assert_eq!(spec.eval(0.5).unwrap(), vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let v = spec.eval(0.3).unwrap();
        assert!((v[1] - 0.8).abs() < 1e-14 && (v[2] - 0.2).abs() < 1e-14);
    }

    #[test]
    fn partition_of_unity_grid() {
        let xs: Vec<f64> = (0..10_000).map(|i| i as f64 / 9_999.0).collect();
        for q in 0..=5 {
            for k in 0..=50 {
                let spec = SplineBasisSpec::new(q, k);
                for &x in &xs {
                    let (_, local) = spec.eval_local(x).unwrap();
                    let s: f64 = local.iter().sum();
                    assert!((1.0 - s).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn matrix_and_domain() {
        let spec = SplineBasisSpec::new(3, 5);
        assert!(spec.eval(1.0001).is_err());
        assert!(spec.basis_matrix(&[0.2, -0.1]).is_err());
        let xs = uniform_design_points(40);
        let b = spec.basis_matrix(&xs).unwrap();
        for i in 0..40 {
            assert!((b.row(i).sum() - 1.0).abs() < 1e-12);
            assert!(b.row(i).iter().filter(|v| **v != 0.0).count() <= 4);
        }
        let c = nalgebra::DVector::from_element(spec.dim(), 2.5);
        assert!((&b * c).iter().all(|v| (v - 2.5).abs() < 1e-12));
        assert!(SplineBasisSpec::with_dimension(3, 3).is_err());
    }

    proptest! {
        #[test]
        fn sup_norm_bounded_by_coefficients(q in 0usize..5, k in 0usize..20, seed in 0u64..1000) {
            let spec = SplineBasisSpec::new(q, k);
            let mut g = rng::stream(seed, 0);
            let beta: Vec<f64> = (0..spec.dim()).map(|_| g.random::<f64>() * 4.0 - 2.0).collect();
            let bmax = beta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let xs = uniform_design_points(200);
            let b = spec.basis_matrix(&xs).unwrap();
            let f = &b * nalgebra::DVector::from_column_slice(&beta);
            prop_assert!(f.iter().all(|v| v.abs() <= bmax + 1e-12));
            prop_assert!(f.norm() <= (200f64).sqrt() * bmax + 1e-9);
        }

        #[test]
        fn local_support(q in 0usize..5, k in 0usize..20, x in 0.0f64..=1.0) {
            let spec = SplineBasisSpec::new(q, k);
            let v = spec.eval(x).unwrap();
            let t = spec.knots();
            for (i, vi) in v.iter().enumerate() {
                prop_assert!(*vi >= 0.0);
                if x < t[i] || x > t[i + q + 1] {
                    prop_assert_eq!(*vi, 0.0);
                }
            }
            prop_assert!(v.iter().filter(|x| **x != 0.0).count() <= q + 1);
        }
    }
}
