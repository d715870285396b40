//! Monte Carlo estimation of rejection and acceptance probabilities.
//!
//! Replicate `r` always draws its noise vector `z` from stream `r` of the
//! seed, and `y = μ + σ z` is formed for every evaluated parameter point.
//! Errors at different points are therefore computed under common random
//! numbers, and the counts do not depend on thread scheduling.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::local::{LocalTest, RejectionRule};
use crate::error::{Error, Result};
use crate::rng::{self, derive_seed};
use crate::stat::point::fill_standard_normal;
use crate::stat::{ErrorEstimate, ParamPoint};

const BALL_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;

fn check_reps(reps: u64) -> Result<()> {
    if reps == 0 {
        return Err(Error::invalid(
            "reps",
            "at least one replication is required",
        ));
    }
    Ok(())
}

fn check_point<T: RejectionRule + ?Sized>(rule: &T, point: &ParamPoint) -> Result<()> {
    if point.n() != rule.truth().n() {
        return Err(Error::DimensionMismatch {
            expected: rule.truth().n(),
            actual: point.n(),
        });
    }
    Ok(())
}

/// Per-point rejection counts over `reps` replicates under common random
/// numbers.
pub fn rejection_counts<T: RejectionRule + ?Sized>(
    rule: &T,
    points: &[ParamPoint],
    reps: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    check_reps(reps)?;
    for p in points {
        check_point(rule, p)?;
    }
    let n = rule.truth().n();
    let k = points.len();
    let counts = (0..reps)
        .into_par_iter()
        .fold(
            || (vec![0u64; k], vec![0.0; n], vec![0.0; n]),
            |(mut acc, mut z, mut y), r| {
                let mut g = rng::stream(seed, r);
                fill_standard_normal(&mut g, &mut z);
                for (slot, p) in acc.iter_mut().zip(points) {
                    let s = p.sigma();
                    for ((yi, mi), zi) in y.iter_mut().zip(p.mu()).zip(&z) {
                        *yi = mi + s * zi;
                    }
                    *slot += rule.rejects(&y) as u64;
                }
                (acc, z, y)
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(
            || vec![0u64; k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

/// `P_{point}(reject)`.
pub fn mc_rejection_rate<T: RejectionRule + ?Sized>(
    rule: &T,
    point: &ParamPoint,
    reps: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    let hits = rejection_counts(rule, std::slice::from_ref(point), reps, seed)?[0];
    Ok(ErrorEstimate::from_counts(hits, reps))
}

/// Type-I error `E_{μ0,σ0} φ`.
pub fn mc_type1_error<T: RejectionRule + ?Sized>(
    rule: &T,
    reps: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    let truth = rule.truth().clone();
    mc_rejection_rate(rule, &truth, reps, derive_seed(seed, &[EVAL_STREAM]))
}

/// `E_{point}(1 − φ)` at each point, under common random numbers.
pub fn mc_acceptance_profile<T: RejectionRule + ?Sized>(
    rule: &T,
    points: &[ParamPoint],
    reps: u64,
    seed: u64,
) -> Result<Vec<ErrorEstimate>> {
    let counts = rejection_counts(rule, points, reps, derive_seed(seed, &[EVAL_STREAM]))?;
    Ok(counts
        .into_iter()
        .map(|c| ErrorEstimate::from_counts(reps - c, reps))
        .collect())
}

/// Points of the `d`-ball of `radius` around `center`: the center first,
/// then (for a positive radius) the two σ extremes and the mean extreme
/// toward `toward`, then `ball_samples − 1` uniform draws.
pub fn ball_points(
    center: &ParamPoint,
    toward: &ParamPoint,
    radius: f64,
    ball_samples: usize,
    seed: u64,
) -> Result<Vec<ParamPoint>> {
    if ball_samples == 0 {
        return Err(Error::invalid(
            "ball_samples",
            "at least one point is required",
        ));
    }
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::invalid(
            "radius",
            format!("must be finite and nonnegative, got {radius}"),
        ));
    }
    let n = center.n();
    let sqrt_n = (n as f64).sqrt();
    let (mu1, s1) = (center.mu(), center.sigma());
    let mut points = vec![center.clone()];
    if radius == 0.0 {
        points.extend(std::iter::repeat_n(center.clone(), ball_samples - 1));
        return Ok(points);
    }
    points.push(ParamPoint::new(mu1.to_vec(), s1 + radius)?);
    let low = s1 - radius;
    points.push(ParamPoint::new(
        mu1.to_vec(),
        if low > 0.0 { low } else { s1 * 1e-3 },
    )?);
    let diff: Vec<f64> = toward.mu().iter().zip(mu1).map(|(a, b)| a - b).collect();
    let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        let step = (sqrt_n * radius).min(norm);
        let mu = mu1
            .iter()
            .zip(&diff)
            .map(|(m, d)| m + step * d / norm)
            .collect();
        points.push(ParamPoint::new(mu, s1)?);
    }

    let mut g = rng::stream(derive_seed(seed, &[BALL_STREAM]), 0);
    let dim = n + 1;
    let mut dir = vec![0.0; dim];
    let mut accepted = 1;
    let mut attempts = 0usize;
    while accepted < ball_samples {
        attempts += 1;
        if attempts > 1000 * ball_samples {
            return Err(Error::NonConvergence {
                what: "ball sampling",
                detail: "the ball lies almost entirely at sigma <= 0".into(),
            });
        }
        fill_standard_normal(&mut g, &mut dir);
        let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u: f64 = g.random();
        let r = radius * u.powf(1.0 / dim as f64) / len;
        let sigma = s1 + r * dir[n];
        if sigma <= 0.0 {
            continue;
        }
        let mu = mu1
            .iter()
            .zip(&dir)
            .map(|(m, d)| m + sqrt_n * r * d)
            .collect();
        points.push(ParamPoint::new(mu, sigma)?);
        accepted += 1;
    }
    Ok(points)
}

/// `sup` over the `radius`-ball around the alternative of `E(1 − φ)`,
/// approximated on [`ball_points`].
pub fn mc_type2_error_with_radius(
    test: &LocalTest,
    radius: f64,
    reps: u64,
    ball_samples: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    let points = ball_points(test.alt(), test.truth(), radius, ball_samples, seed)?;
    let profile = mc_acceptance_profile(test, &points, reps, seed)?;
    Ok(profile
        .into_iter()
        .fold(None::<ErrorEstimate>, |best, e| match best {
            Some(b) if b.estimate >= e.estimate => Some(b),
            _ => Some(e),
        })
        .expect("nonempty ball"))
}

/// Type-II error over the `ε/6`-ball around the alternative.
pub fn mc_type2_error(
    test: &LocalTest,
    reps: u64,
    ball_samples: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    mc_type2_error_with_radius(test, test.epsilon() / 6.0, reps, ball_samples, seed)
}

/// Mean of `f(z)` over replicates, with its standard error; used by the
/// Gaussian-statistic oracles in tests.
pub fn mc_mean<F>(n: usize, reps: u64, seed: u64, f: F) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_reps(reps)?;
    let (s, s2) = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, r);
            let z: Vec<f64> = (0..n).map(|_| g.sample(StandardNormal)).collect();
            let v = f(&z);
            (v, v * v)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = s / reps as f64;
    let var = (s2 / reps as f64 - m * m).max(0.0);
    Ok((m, (var / reps as f64).sqrt()))
}
