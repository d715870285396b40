//! Local tests separating the truth from a ball of alternatives, their
//! max-combination over a sieve cover, and Monte Carlo error estimates.

pub mod cover;
pub mod experiment;
pub mod global;
pub mod local;
pub mod montecarlo;

pub use cover::{cover_interval, cover_mean_set, cover_mean_set_size};
pub use experiment::{
    decay_experiment, global_experiment, separated_alternative, DecayConfig, DecayResult,
    Direction, GlobalConfig, GlobalResult,
};
pub use global::GlobalTest;
pub use local::{select_case, LocalTest, RejectionRule, TestCase, TestConstants};
pub use montecarlo::{
    ball_points, mc_acceptance_profile, mc_rejection_rate, mc_type1_error, mc_type2_error,
    mc_type2_error_with_radius,
};

use crate::error::Result;
use crate::stat::{ErrorEstimate, Observation, ParamPoint};

pub fn build_local_test(
    truth: &ParamPoint,
    alt: &ParamPoint,
    epsilon: f64,
    constants: TestConstants,
) -> Result<LocalTest> {
    LocalTest::build(truth, alt, epsilon, constants)
}

pub fn evaluate(test: &LocalTest, y: &Observation) -> Result<bool> {
    test.evaluate(y)
}

pub fn build_global_test(
    truth: &ParamPoint,
    sieve_cover: &[ParamPoint],
    m: f64,
    eps_n: f64,
    constants: TestConstants,
) -> Result<GlobalTest> {
    GlobalTest::build(truth, sieve_cover, m, eps_n, constants)
}

pub fn evaluate_global(g: &GlobalTest, y: &Observation) -> Result<bool> {
    g.evaluate(y)
}

/// Type-I error of the global test.
pub fn mc_global_type1_error(g: &GlobalTest, reps: u64, seed: u64) -> Result<ErrorEstimate> {
    mc_type1_error(g, reps, seed)
}
