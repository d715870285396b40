//! Central and noncentral chi-squared distributions and the tail bounds the
//! local tests rely on.

use serde::{Deserialize, Serialize};

use super::special::{gamma_pq, ln_gamma_fn};
use crate::error::{ensure_positive, Error, Result};

/// Audit record comparing a tail bound with the exact probability it bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub k: u64,
    pub t: f64,
    pub bound: f64,
    pub exact: f64,
}

impl TailBoundReport {
    /// For upper-bound reports (`bound ≥ exact`).
    pub fn dominates(&self) -> bool {
        self.bound >= self.exact
    }
}

fn check_k(k: u64) -> Result<()> {
    if k == 0 {
        Err(Error::invalid("k", "degrees of freedom must be at least 1"))
    } else {
        Ok(())
    }
}

/// `Pr{χ²_k ≤ x}`.
pub fn chi2_cdf(k: u64, x: f64) -> Result<f64> {
    check_k(k)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_pq(k as f64 / 2.0, x / 2.0)?.0)
}

/// `Pr{χ²_k > x}`, computed directly rather than as `1 - cdf`.
pub fn chi2_sf(k: u64, x: f64) -> Result<f64> {
    check_k(k)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    Ok(gamma_pq(k as f64 / 2.0, x / 2.0)?.1)
}

/// `e^{-t}`, which bounds `Pr{χ²_k − k ≥ 2√(kt) + 2t}`.
pub fn chi2_upper_tail_bound(k: u64, t: f64) -> Result<f64> {
    check_k(k)?;
    ensure_positive("t", t)?;
    Ok((-t).exp())
}

/// `e^{-t}`, which bounds `Pr{χ²_k − k ≤ −2√(kt)}`.
pub fn chi2_lower_tail_bound(k: u64, t: f64) -> Result<f64> {
    check_k(k)?;
    ensure_positive("t", t)?;
    Ok((-t).exp())
}

/// Upper deviation point `k + 2√(kt) + 2t` matching [`chi2_upper_tail_bound`].
pub fn upper_deviation_point(k: u64, t: f64) -> f64 {
    let k = k as f64;
    k + 2.0 * (k * t).sqrt() + 2.0 * t
}

/// Lower deviation point `k − 2√(kt)` matching [`chi2_lower_tail_bound`].
pub fn lower_deviation_point(k: u64, t: f64) -> f64 {
    let k = k as f64;
    k - 2.0 * (k * t).sqrt()
}

/// Inverts [`upper_deviation_point`]: the `t` at which `k + 2√(kt) + 2t = x`.
///
/// Returns `None` when `x ≤ k` (no positive solution).
pub fn upper_deviation_t(k: u64, x: f64) -> Option<f64> {
    let k = k as f64;
    if x <= k {
        return None;
    }
    // 2s² + 2√k s − (x − k) = 0 with s = √t
    let s = (-2.0 * k.sqrt() + (4.0 * k + 8.0 * (x - k)).sqrt()) / 4.0;
    Some(s * s)
}

/// `(t/2)^{k/2} e^{−t/2} / Γ(k/2 + 1)`, a lower bound on `Pr{χ²_k ≤ t}`.
pub fn chi2_cdf_lower_bound(k: u64, t: f64) -> Result<f64> {
    check_k(k)?;
    ensure_positive("t", t)?;
    let half_k = k as f64 / 2.0;
    let log_bound = half_k * (t / 2.0).ln() - t / 2.0 - ln_gamma_fn(half_k + 1.0);
    Ok(log_bound.exp().min(1.0))
}

pub fn audit_upper_tail(k: u64, t: f64) -> Result<TailBoundReport> {
    Ok(TailBoundReport {
        k,
        t,
        bound: chi2_upper_tail_bound(k, t)?,
        exact: chi2_sf(k, upper_deviation_point(k, t))?,
    })
}

pub fn audit_lower_tail(k: u64, t: f64) -> Result<TailBoundReport> {
    Ok(TailBoundReport {
        k,
        t,
        bound: chi2_lower_tail_bound(k, t)?,
        exact: chi2_cdf(k, lower_deviation_point(k, t))?,
    })
}

/// Here the relation is reversed: `bound ≤ exact` must hold.
pub fn audit_cdf_lower_bound(k: u64, t: f64) -> Result<TailBoundReport> {
    Ok(TailBoundReport {
        k,
        t,
        bound: chi2_cdf_lower_bound(k, t)?,
        exact: chi2_cdf(k, t)?,
    })
}

/// Relative truncation tolerance of the Poisson mixture.
pub const NONCENTRAL_TOLERANCE: f64 = 1e-10;
const NONCENTRAL_MAX_TERMS: usize = 1_000_000;

/// `Pr{χ²_{k,λ} ≤ x}` for noncentrality `λ`, as a Poisson(λ/2) mixture of
/// central chi-squared CDFs summed outward from the Poisson mode.
pub fn noncentral_chi2_cdf(k: u64, lambda: f64, x: f64) -> Result<f64> {
    check_k(k)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(
            "lambda",
            format!("must be finite and nonnegative, got {lambda}"),
        ));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::OutOfDomain {
            value: x,
            domain: "[0, inf)",
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if lambda == 0.0 {
        return chi2_cdf(k, x);
    }
    let mean = lambda / 2.0;
    let half_x = x / 2.0;
    let half_k = k as f64 / 2.0;
    let log_weight = |j: usize| -> f64 {
        let j = j as f64;
        -mean + j * mean.ln() - ln_gamma_fn(j + 1.0)
    };
    let term = |j: usize| -> Result<f64> { Ok(gamma_pq(half_k + j as f64, half_x)?.0) };

    let mode = mean.floor() as usize;
    let mut total = 0.0;

    // Downward from the mode; weight ratios w_{j-1}/w_j = j/mean ≤ 1 there,
    // and the central CDFs increase as j decreases, so the remainder is at most
    // the geometric tail of the weights.
    let mut j = mode;
    loop {
        let w = log_weight(j).exp();
        total += w * term(j)?;
        if j == 0 {
            break;
        }
        let ratio = j as f64 / mean;
        let remainder = if ratio < 1.0 {
            w * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if remainder < NONCENTRAL_TOLERANCE * total.max(f64::MIN_POSITIVE) || w == 0.0 && j < mode {
            break;
        }
        j -= 1;
        if mode - j > NONCENTRAL_MAX_TERMS {
            return Err(Error::NonConvergence {
                what: "noncentral chi-squared series",
                detail: format!("k = {k}, lambda = {lambda}, x = {x}"),
            });
        }
    }

    // Upward; central CDFs decrease in j, so the remainder is bounded by the
    // weight tail times the current term.
    let mut j = mode + 1;
    loop {
        let w = log_weight(j).exp();
        let c = term(j)?;
        total += w * c;
        let ratio = mean / (j as f64 + 1.0);
        let remainder = if ratio < 1.0 {
            w * c * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if remainder <= NONCENTRAL_TOLERANCE * total.max(f64::MIN_POSITIVE)
            || (c == 0.0 && ratio < 1.0)
        {
            break;
        }
        j += 1;
        if j - mode > NONCENTRAL_MAX_TERMS {
            return Err(Error::NonConvergence {
                what: "noncentral chi-squared series",
                detail: format!("k = {k}, lambda = {lambda}, x = {x}"),
            });
        }
    }
    Ok(total.clamp(0.0, 1.0))
}
