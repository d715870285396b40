//! The max-combined test over a cover of the far part of a sieve.

use super::local::{LocalTest, RejectionRule, TestConstants};
use crate::error::{Error, Result};
use crate::stat::{metric_d, Observation, ParamPoint};

/// Fraction of `σ0` above which `M ε_n` is flagged as close to the
/// admissible limit.
pub const NEAR_BOUNDARY_FRACTION: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct GlobalTest {
    truth: ParamPoint,
    centers: Vec<ParamPoint>,
    local_tests: Vec<LocalTest>,
    m: f64,
    eps_n: f64,
    dropped: usize,
}

impl GlobalTest {
    /// Retains every center at distance `≥ M ε_n` from the truth and builds
    /// its local test with `ε = M ε_n`.
    pub fn build(
        truth: &ParamPoint,
        sieve_cover: &[ParamPoint],
        m: f64,
        eps_n: f64,
        constants: TestConstants,
    ) -> Result<Self> {
        if !(m > 6.0) || !m.is_finite() {
            return Err(Error::invalid("M", format!("must exceed 6, got {m}")));
        }
        crate::error::ensure_positive("eps_n", eps_n)?;
        let epsilon = m * eps_n;
        if epsilon >= truth.sigma() {
            return Err(Error::EpsilonOutOfRange {
                epsilon,
                sigma0: truth.sigma(),
            });
        }
        let mut centers = Vec::new();
        let mut local_tests = Vec::new();
        let mut dropped = 0;
        for c in sieve_cover {
            if metric_d(c, truth)? < epsilon {
                dropped += 1;
                continue;
            }
            local_tests.push(LocalTest::build(truth, c, epsilon, constants)?);
            centers.push(c.clone());
        }
        Ok(Self {
            truth: truth.clone(),
            centers,
            local_tests,
            m,
            eps_n,
            dropped,
        })
    }

    pub fn centers(&self) -> &[ParamPoint] {
        &self.centers
    }

    pub fn local_tests(&self) -> &[LocalTest] {
        &self.local_tests
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn eps_n(&self) -> f64 {
        self.eps_n
    }

    /// Cover centers removed for being within `M ε_n` of the truth.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// No component survived filtering; the test never rejects.
    pub fn is_degenerate(&self) -> bool {
        self.local_tests.is_empty()
    }

    pub fn near_boundary(&self) -> bool {
        self.m * self.eps_n > NEAR_BOUNDARY_FRACTION * self.truth.sigma()
    }

    /// Per-component decisions.
    pub fn component_decisions(&self, y: &[f64]) -> Vec<bool> {
        self.local_tests.iter().map(|t| t.rejects(y)).collect()
    }

    pub fn evaluate(&self, y: &Observation) -> Result<bool> {
        if y.len() != self.truth.n() {
            return Err(Error::DimensionMismatch {
                expected: self.truth.n(),
                actual: y.len(),
            });
        }
        Ok(self.rejects(&y.y))
    }
}

impl RejectionRule for GlobalTest {
    fn truth(&self) -> &ParamPoint {
        &self.truth
    }

    fn rejects(&self, y: &[f64]) -> bool {
        self.local_tests.iter().any(|t| t.rejects(y))
    }
}
