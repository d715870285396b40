//! The four-case local test separating a truth from a small ball of
//! alternatives.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::stat::{metric_d, Observation, ParamPoint};

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Threshold multiplier `M0` (large-variance case) and regime split `M1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestConstants {
    pub m0: f64,
    pub m1: f64,
}

impl Default for TestConstants {
    fn default() -> Self {
        Self { m0: 3.0, m1: 12.0 }
    }
}

impl TestConstants {
    pub fn new(m0: f64, m1: f64) -> Result<Self> {
        let c = Self { m0, m1 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("m0", self.m0)?;
        if !(self.m1 > 1.0) || !self.m1.is_finite() {
            return Err(Error::invalid(
                "m1",
                format!("must exceed 1, got {}", self.m1),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestCase {
    /// `σ1 ≥ M1 σ0`: reject on a large squared norm.
    Case1LargeSigma,
    /// Mean separation dominates: reject on the projection onto `μ1 − μ0`.
    Case2MeanDominant,
    /// `σ0 ≤ σ1`, variance dominates: reject on a large L1 norm.
    Case3SigmaAbove,
    /// `σ1 < σ0`, variance dominates: reject on a small L1 norm.
    Case4SigmaBelow,
}

impl TestCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestCase::Case1LargeSigma => "case1",
            TestCase::Case2MeanDominant => "case2",
            TestCase::Case3SigmaAbove => "case3",
            TestCase::Case4SigmaBelow => "case4",
        }
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn select_case(
    truth: &ParamPoint,
    alt: &ParamPoint,
    constants: &TestConstants,
) -> Result<TestCase> {
    if truth.n() != alt.n() {
        return Err(Error::DimensionMismatch {
            expected: truth.n(),
            actual: alt.n(),
        });
    }
    let (s0, s1) = (truth.sigma(), alt.sigma());
    if s1 >= constants.m1 * s0 {
        return Ok(TestCase::Case1LargeSigma);
    }
    let mean_sq = squared_distance(alt.mu(), truth.mu());
    if 7.0 * mean_sq > truth.n() as f64 * (s1 - s0).powi(2) {
        return Ok(TestCase::Case2MeanDominant);
    }
    if s0 <= s1 {
        Ok(TestCase::Case3SigmaAbove)
    } else {
        Ok(TestCase::Case4SigmaBelow)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    SquaredNorm { threshold: f64 },
    Projection { direction: Vec<f64>, threshold: f64 },
    L1Above { threshold: f64 },
    L1AtOrBelow { threshold: f64 },
}

/// Binary test of `H0: (μ0, σ0)` against the `ε/6`-ball around `(μ1, σ1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTest {
    truth: ParamPoint,
    alt: ParamPoint,
    epsilon: f64,
    case: TestCase,
    constants: TestConstants,
    rule: Rule,
}

/// Anything that maps an observation to reject (`true`) / accept.
pub trait RejectionRule: Sync {
    fn truth(&self) -> &ParamPoint;
    fn rejects(&self, y: &[f64]) -> bool;
}

impl LocalTest {
    pub fn build(
        truth: &ParamPoint,
        alt: &ParamPoint,
        epsilon: f64,
        constants: TestConstants,
    ) -> Result<Self> {
        constants.validate()?;
        ensure_positive("epsilon", epsilon)?;
        if epsilon >= truth.sigma() {
            return Err(Error::EpsilonOutOfRange {
                epsilon,
                sigma0: truth.sigma(),
            });
        }
        let distance = metric_d(alt, truth)?;
        // allow the last-bit rounding of a point placed at exactly ε
        if distance < epsilon * (1.0 - 1e-12) {
            return Err(Error::SeparationViolated { distance, epsilon });
        }
        let case = select_case(truth, alt, &constants)?;
        let n = truth.n() as f64;
        let (s0, s1) = (truth.sigma(), alt.sigma());
        let rule = match case {
            TestCase::Case1LargeSigma => Rule::SquaredNorm {
                threshold: constants.m0 * constants.m0 * n,
            },
            TestCase::Case2MeanDominant => {
                let direction: Vec<f64> = alt
                    .mu()
                    .iter()
                    .zip(truth.mu())
                    .map(|(a, b)| a - b)
                    .collect();
                let threshold = direction.iter().map(|v| v * v).sum::<f64>() / 2.0;
                Rule::Projection {
                    direction,
                    threshold,
                }
            }
            TestCase::Case3SigmaAbove => Rule::L1Above {
                threshold: SQRT_2_OVER_PI * (s1 - s0) / 12.0,
            },
            TestCase::Case4SigmaBelow => Rule::L1AtOrBelow {
                threshold: SQRT_2_OVER_PI * (s1 - s0) / 12.0,
            },
        };
        Ok(Self {
            truth: truth.clone(),
            alt: alt.clone(),
            epsilon,
            case,
            constants,
            rule,
        })
    }

    pub fn case(&self) -> TestCase {
        self.case
    }

    pub fn alt(&self) -> &ParamPoint {
        &self.alt
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn constants(&self) -> TestConstants {
        self.constants
    }

    /// Value of the test statistic and the threshold it is compared with.
    pub fn statistic(&self, y: &[f64]) -> (f64, f64) {
        let mu0 = self.truth.mu();
        let s0 = self.truth.sigma();
        match &self.rule {
            Rule::SquaredNorm { threshold } => (squared_distance(y, mu0) / (s0 * s0), *threshold),
            Rule::Projection {
                direction,
                threshold,
            } => {
                let stat = direction
                    .iter()
                    .zip(y.iter().zip(mu0))
                    .map(|(d, (a, b))| d * (a - b))
                    .sum();
                (stat, *threshold)
            }
            Rule::L1Above { threshold } | Rule::L1AtOrBelow { threshold } => {
                let l1: f64 = y.iter().zip(mu0).map(|(a, b)| (a - b).abs()).sum();
                (l1 / y.len() as f64 - SQRT_2_OVER_PI * s0, *threshold)
            }
        }
    }

    /// `true` rejects the truth.
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

impl RejectionRule for LocalTest {
    fn truth(&self) -> &ParamPoint {
        &self.truth
    }

    fn rejects(&self, y: &[f64]) -> bool {
        let (stat, threshold) = self.statistic(y);
        match self.rule {
            Rule::L1AtOrBelow { .. } => stat <= threshold,
            _ => stat > threshold,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(mu: Vec<f64>, s: f64) -> ParamPoint {
        ParamPoint::new(mu, s).unwrap()
    }

    #[test]
    fn case_selection_examples() {
        let c = TestConstants::default();
        let t = pt(vec![0.0; 3], 1.0);
        assert_eq!(
            select_case(&t, &pt(vec![0.0; 3], 2.0 * c.m1), &c).unwrap(),
            TestCase::Case1LargeSigma
        );
        assert_eq!(
            select_case(&t, &pt(vec![0.5, 0.0, 0.0], 1.0), &c).unwrap(),
            TestCase::Case2MeanDominant
        );
        assert_eq!(
            select_case(&t, &pt(vec![0.0; 3], 3.0), &c).unwrap(),
            TestCase::Case3SigmaAbove
        );
        assert_eq!(
            select_case(&t, &pt(vec![0.0; 3], 0.5), &c).unwrap(),
            TestCase::Case4SigmaBelow
        );
    }

    #[test]
    fn build_rejects_bad_inputs() {
        let c = TestConstants::default();
        let t = pt(vec![0.0; 2], 1.0);
        let alt = pt(vec![2.0, 0.0], 1.0);
        assert!(matches!(
            LocalTest::build(&t, &alt, 1.0, c),
            Err(Error::EpsilonOutOfRange { .. })
        ));
        assert!(matches!(
            LocalTest::build(&t, &alt, 1.5, c),
            Err(Error::EpsilonOutOfRange { .. })
        ));
        // d(alt, truth) = ε/2
        let near = pt(vec![0.0; 2], 1.2);
        assert!(matches!(
            LocalTest::build(&t, &near, 0.4, c),
            Err(Error::SeparationViolated { .. })
        ));
        assert!(TestConstants::new(3.0, 1.0).is_err());
        assert!(TestConstants::new(0.0, 5.0).is_err());
    }

    #[test]
    fn case2_evaluation_examples() {
        let t = pt(vec![0.0; 2], 1.0);
        let alt = pt(vec![2.0, 0.0], 1.0);
        let test = LocalTest::build(&t, &alt, 0.5, TestConstants::default()).unwrap();
        assert_eq!(test.case(), TestCase::Case2MeanDominant);
        assert_eq!(test.statistic(&[2.0, 0.0]), (4.0, 2.0));
        assert!(test.evaluate(&Observation::new(vec![2.0, 0.0])).unwrap());
        assert!(!test.evaluate(&Observation::new(vec![0.0, 0.0])).unwrap());
        assert!(test.evaluate(&Observation::new(vec![0.0])).is_err());
    }

    #[test]
    fn case1_boundary_is_strict() {
        let c = TestConstants::default();
        let t = pt(vec![0.0; 4], 1.0);
        let alt = pt(vec![0.0; 4], 20.0);
        let test = LocalTest::build(&t, &alt, 0.5, c).unwrap();
        assert_eq!(test.case(), TestCase::Case1LargeSigma);
        // ‖y‖² = 36 = M0² n
        assert!(!test.evaluate(&Observation::new(vec![3.0; 4])).unwrap());
        assert!(test
            .evaluate(&Observation::new(vec![3.0, 3.0, 3.0, 3.0 + 1e-9]))
            .unwrap());
    }

    #[test]
    fn case3_and_case4_thresholds() {
        let c = TestConstants::default();
        let t = pt(vec![0.0; 2], 1.0);
        let up = LocalTest::build(&t, &pt(vec![0.0; 2], 1.6), 0.5, c).unwrap();
        let down = LocalTest::build(&t, &pt(vec![0.0; 2], 0.4), 0.5, c).unwrap();
        assert_eq!(up.case(), TestCase::Case3SigmaAbove);
        assert_eq!(down.case(), TestCase::Case4SigmaBelow);
        let thr = SQRT_2_OVER_PI * 0.6 / 12.0;
        assert!((up.statistic(&[1.0, -1.0]).1 - thr).abs() < 1e-15);
        assert!((down.statistic(&[1.0, -1.0]).1 + thr).abs() < 1e-15);
        assert!(down.rejects(&[0.0, 0.0]));
        assert!(!up.rejects(&[0.0, 0.0]));
        assert!(up.rejects(&[5.0, -5.0]));
    }

    fn admissible() -> impl Strategy<Value = (ParamPoint, ParamPoint, TestConstants)> {
        (1usize..8, 0.05..5.0f64, 1.01..20.0f64).prop_flat_map(|(n, s0, m1)| {
            (
                prop::collection::vec(-3.0..3.0f64, n),
                prop::collection::vec(-3.0..3.0f64, n),
                0.01..(30.0 * s0),
                Just(s0),
                Just(m1),
            )
                .prop_map(|(mu0, mu1, s1, s0, m1)| {
                    (pt(mu0, s0), pt(mu1, s1), TestConstants { m0: 3.0, m1 })
                })
        })
    }

    proptest! {
        #[test]
        fn case_predicates_partition((t, a, c) in admissible()) {
            let (s0, s1) = (t.sigma(), a.sigma());
            let mean_sq = squared_distance(a.mu(), t.mu());
            let n = t.n() as f64;
            let p1 = s1 >= c.m1 * s0;
            let p2 = !p1 && 7.0 * mean_sq > n * (s1 - s0).powi(2);
            let p3 = !p1 && !p2 && s0 <= s1;
            let p4 = !p1 && !p2 && s1 < s0;
            prop_assert_eq!([p1, p2, p3, p4].iter().filter(|b| **b).count(), 1);
            let expected = if p1 { TestCase::Case1LargeSigma } else if p2 { TestCase::Case2MeanDominant } else if p3 { TestCase::Case3SigmaAbove } else { TestCase::Case4SigmaBelow };
            prop_assert_eq!(select_case(&t, &a, &c).unwrap(), expected);
        }
    }
}
