//! Error-decay and union-bound experiments built on the local and global
//! tests.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cover::{cover_interval, cover_mean_set};
use super::global::GlobalTest;
use super::local::{LocalTest, RejectionRule, TestCase, TestConstants};
use super::montecarlo::{
    ball_points, mc_acceptance_profile, mc_type1_error, mc_type2_error, rejection_counts,
};
use crate::error::{ensure_positive, Error, Result};
use crate::rng::derive_seed;
use crate::stat::{metric_d, ols, ErrorEstimate, LinearFit, ParamPoint};

/// How an alternative at distance `ε` from the truth is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `μ1 = μ0 + ε·1`, `σ1 = σ0`.
    Mean,
    /// `μ1 = μ0`, `σ1 = σ0 + ε`.
    SigmaUp,
    /// `μ1 = μ0`, `σ1 = σ0 − ε`.
    SigmaDown,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Mean, Direction::SigmaUp, Direction::SigmaDown];

    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Mean => "mean",
            Direction::SigmaUp => "sigma-up",
            Direction::SigmaDown => "sigma-down",
        }
    }
}

/// An alternative at `d`-distance exactly `epsilon` from `truth`.
pub fn separated_alternative(
    truth: &ParamPoint,
    direction: Direction,
    epsilon: f64,
) -> Result<ParamPoint> {
    let (mu, s) = (truth.mu(), truth.sigma());
    match direction {
        Direction::Mean => ParamPoint::new(mu.iter().map(|m| m + epsilon).collect(), s),
        Direction::SigmaUp => ParamPoint::new(mu.to_vec(), s + epsilon),
        Direction::SigmaDown => ParamPoint::new(mu.to_vec(), s - epsilon),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecayConfig {
    pub n: usize,
    pub sigma0s: Vec<f64>,
    /// Values of `n ε² / σ0²`.
    pub separations: Vec<f64>,
    pub directions: Vec<Direction>,
    pub reps: u64,
    pub ball_samples: usize,
    pub constants: TestConstants,
    pub seed: u64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            n: 400,
            sigma0s: vec![0.1, 1.0, 10.0],
            separations: vec![5.0, 10.0, 20.0, 40.0, 80.0],
            directions: Direction::ALL.to_vec(),
            reps: 10_000,
            ball_samples: 16,
            constants: TestConstants::default(),
            seed: 20_240_601,
        }
    }
}

impl DecayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if self.sigma0s.is_empty() || self.separations.is_empty() || self.directions.is_empty() {
            return Err(Error::invalid(
                "grid",
                "sigma0s, separations and directions must be nonempty",
            ));
        }
        for &s in &self.sigma0s {
            ensure_positive("sigma0", s)?;
        }
        for &x in &self.separations {
            ensure_positive("separation", x)?;
            if x >= self.n as f64 {
                return Err(Error::invalid(
                    "separation",
                    format!(
                        "n eps^2 / sigma0^2 = {x} needs eps >= sigma0 at n = {}",
                        self.n
                    ),
                ));
            }
        }
        if self.reps == 0 || self.ball_samples == 0 {
            return Err(Error::invalid(
                "reps",
                "reps and ball_samples must be positive",
            ));
        }
        self.constants.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub sigma0: f64,
    pub separation: f64,
    pub epsilon: f64,
    pub direction: Direction,
    pub case: TestCase,
    pub type1: ErrorEstimate,
    pub type2: ErrorEstimate,
}

/// Worst case over directions at one `(σ0, separation)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayWorst {
    pub sigma0: f64,
    pub separation: f64,
    pub type1: ErrorEstimate,
    pub type2: ErrorEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub sigma0: f64,
    pub type1: LinearFit,
    pub type2: LinearFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayResult {
    pub rows: Vec<DecayRow>,
    pub worst: Vec<DecayWorst>,
    pub fits: Vec<DecayFit>,
}

fn worse(a: ErrorEstimate, b: ErrorEstimate) -> ErrorEstimate {
    if b.estimate > a.estimate {
        b
    } else {
        a
    }
}

/// Runs type-I and ball type-II estimation for every
/// `(σ0, separation, direction)` and regresses the log worst-case errors
/// (clipped below at `1/reps`) on `n ε² / σ0²`.
pub fn decay_experiment(config: &DecayConfig) -> Result<DecayResult> {
    config.validate()?;
    let n = config.n;
    let mut tasks = Vec::new();
    for (i, &s0) in config.sigma0s.iter().enumerate() {
        for (j, &x) in config.separations.iter().enumerate() {
            for (k, &dir) in config.directions.iter().enumerate() {
                tasks.push((i, j, k, s0, x, dir));
            }
        }
    }
    let rows = tasks
        .into_par_iter()
        .map(|(i, j, k, s0, x, dir)| {
            let truth = ParamPoint::constant(n, 0.0, s0)?;
            let epsilon = s0 * (x / n as f64).sqrt();
            let alt = separated_alternative(&truth, dir, epsilon)?;
            let test = LocalTest::build(&truth, &alt, epsilon, config.constants)?;
            let seed = derive_seed(config.seed, &[i as u64, j as u64, k as u64]);
            Ok(DecayRow {
                sigma0: s0,
                separation: x,
                epsilon,
                direction: dir,
                case: test.case(),
                type1: mc_type1_error(&test, config.reps, seed)?,
                type2: mc_type2_error(&test, config.reps, config.ball_samples, seed)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let nd = config.directions.len();
    let worst: Vec<DecayWorst> = rows
        .chunks(nd)
        .map(|chunk| DecayWorst {
            sigma0: chunk[0].sigma0,
            separation: chunk[0].separation,
            type1: chunk
                .iter()
                .map(|r| r.type1)
                .reduce(worse)
                .expect("nonempty"),
            type2: chunk
                .iter()
                .map(|r| r.type2)
                .reduce(worse)
                .expect("nonempty"),
        })
        .collect();

    let ns = config.separations.len();
    let fits = worst
        .chunks(ns)
        .map(|chunk| {
            let x: Vec<f64> = chunk.iter().map(|w| w.separation).collect();
            let l1: Vec<f64> = chunk.iter().map(|w| w.type1.clipped().ln()).collect();
            let l2: Vec<f64> = chunk.iter().map(|w| w.type2.clipped().ln()).collect();
            Ok(DecayFit {
                sigma0: chunk[0].sigma0,
                type1: ols(&x, &l1)?,
                type2: ols(&x, &l2)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayResult { rows, worst, fits })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlobalConfig {
    pub n: usize,
    pub sigma0: f64,
    pub eps_n: f64,
    pub m: f64,
    /// Sieve mean vectors are `c·1` with `|c| ≤ mean_halfwidth`.
    pub mean_halfwidth: f64,
    /// Sieve standard deviations lie in `(0, sigma_upper]`.
    pub sigma_upper: f64,
    pub max_centers: usize,
    /// Number of covered alternatives at which type-II is checked.
    pub alternatives: usize,
    pub reps: u64,
    pub constants: TestConstants,
    pub seed: u64,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self {
            n: 50,
            sigma0: 1.0,
            eps_n: 0.1,
            m: 7.0,
            mean_halfwidth: 0.5,
            sigma_upper: 1.5,
            max_centers: 200,
            alternatives: 8,
            reps: 10_000,
            constants: TestConstants::default(),
            seed: 20_240_602,
        }
    }
}

impl GlobalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        for (name, v) in [
            ("sigma0", self.sigma0),
            ("eps_n", self.eps_n),
            ("mean_halfwidth", self.mean_halfwidth),
            ("sigma_upper", self.sigma_upper),
        ] {
            ensure_positive(name, v)?;
        }
        if !(self.m > 6.0) {
            return Err(Error::invalid(
                "M",
                format!("must exceed 6, got {}", self.m),
            ));
        }
        if self.m * self.eps_n >= self.sigma0 {
            return Err(Error::EpsilonOutOfRange {
                epsilon: self.m * self.eps_n,
                sigma0: self.sigma0,
            });
        }
        if self.reps == 0 || self.max_centers == 0 {
            return Err(Error::invalid(
                "reps",
                "reps and max_centers must be positive",
            ));
        }
        self.constants.validate()
    }
}

/// Type-II comparison at one covered alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveredAlternative {
    pub component: usize,
    pub point: ParamPoint,
    pub global_type2: ErrorEstimate,
    pub local_type2: ErrorEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalResult {
    pub cover_size: usize,
    pub components: usize,
    pub global_type1: ErrorEstimate,
    pub local_type1: Vec<ErrorEstimate>,
    pub local_type1_sum: f64,
    /// `sqrt(se_global² + Σ se_j²)`.
    pub pooled_std_error: f64,
    pub alternatives: Vec<CoveredAlternative>,
}

/// Product cover of `{c·1 : |c| ≤ w} × (0, T]` with `d`-radius `r`.
pub fn constant_mean_sieve_cover(
    n: usize,
    halfwidth: f64,
    sigma_upper: f64,
    radius: f64,
) -> Result<Vec<ParamPoint>> {
    let r = radius / std::f64::consts::SQRT_2;
    let means = cover_mean_set(1, halfwidth, r)?;
    let sigmas = cover_interval(sigma_upper, r)?;
    let mut out = Vec::with_capacity(means.len() * sigmas.len());
    for m in &means {
        for &s in &sigmas {
            out.push(ParamPoint::constant(n, m[0], s)?);
        }
    }
    Ok(out)
}

/// Builds the global test over a constant-mean sieve and compares its errors
/// with those of its components under common random numbers.
pub fn global_experiment(config: &GlobalConfig) -> Result<GlobalResult> {
    config.validate()?;
    let truth = ParamPoint::constant(config.n, 0.0, config.sigma0)?;
    let radius = config.m * config.eps_n / 6.0;
    let cover =
        constant_mean_sieve_cover(config.n, config.mean_halfwidth, config.sigma_upper, radius)?;
    if cover.len() > config.max_centers {
        return Err(Error::BudgetExceeded {
            what: "sieve cover",
            required: cover.len() as f64,
            limit: config.max_centers as f64,
        });
    }
    let global = GlobalTest::build(&truth, &cover, config.m, config.eps_n, config.constants)?;
    let locals = global.local_tests();
    let type1_seed = derive_seed(config.seed, &[0]);
    let global_type1 = mc_type1_error(&global, config.reps, type1_seed)?;
    let local_type1 = locals
        .iter()
        .map(|t| mc_type1_error(t, config.reps, type1_seed))
        .collect::<Result<Vec<_>>>()?;
    let local_type1_sum = local_type1.iter().map(|e| e.estimate).sum();
    let pooled_std_error = (global_type1.std_error.powi(2)
        + local_type1.iter().map(|e| e.std_error.powi(2)).sum::<f64>())
    .sqrt();

    let k = locals.len();
    let picks: Vec<usize> = if k == 0 {
        Vec::new()
    } else {
        let count = config.alternatives.min(k);
        (0..count).map(|i| i * k / count).collect()
    };
    let alternatives = picks
        .into_iter()
        .enumerate()
        .map(|(a, j)| {
            let seed = derive_seed(config.seed, &[1, a as u64]);
            let local = &locals[j];
            // a random point of the ball around center j, away from the center
            let point = ball_points(local.alt(), &truth, radius, 2, seed)?
                .pop()
                .expect("two points");
            debug_assert!(metric_d(&point, local.alt())? <= radius * (1.0 + 1e-12));
            let g =
                mc_acceptance_profile(&global, std::slice::from_ref(&point), config.reps, seed)?[0];
            let l =
                mc_acceptance_profile(local, std::slice::from_ref(&point), config.reps, seed)?[0];
            Ok(CoveredAlternative {
                component: j,
                point,
                global_type2: g,
                local_type2: l,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GlobalResult {
        cover_size: cover.len(),
        components: k,
        global_type1,
        local_type1,
        local_type1_sum,
        pooled_std_error,
        alternatives,
    })
}

/// Union-bound check computed from raw counts: each replicate rejected by the
/// max test is rejected by at least one component.
pub fn union_bound_counts(global: &GlobalTest, reps: u64, seed: u64) -> Result<(u64, u64)> {
    let truth = global.truth().clone();
    let g = rejection_counts(global, std::slice::from_ref(&truth), reps, seed)?[0];
    let sum = global
        .local_tests()
        .iter()
        .map(|t| rejection_counts(t, std::slice::from_ref(&truth), reps, seed).map(|c| c[0]))
        .sum::<Result<u64>>()?;
    Ok((g, sum))
}
