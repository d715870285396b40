use serde::{Deserialize, Serialize};

/// A Monte Carlo proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub reps: u64,
}

impl ErrorEstimate {
    pub fn from_counts(hits: u64, reps: u64) -> Self {
        assert!(reps > 0, "at least one replication");
        let p = hits as f64 / reps as f64;
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / reps as f64).sqrt(),
            reps,
        }
    }

    /// `max(estimate, 1/reps)`, for log-scale summaries.
    pub fn clipped(&self) -> f64 {
        self.estimate.max(1.0 / self.reps as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_error_is_bounded() {
        for reps in [1u64, 2, 7, 100, 10_000] {
            for hits in 0..=reps.min(100) {
                let e = ErrorEstimate::from_counts(hits, reps);
                assert!(e.std_error <= 0.5 / (reps as f64).sqrt() + 1e-15);
            }
        }
        let one = ErrorEstimate::from_counts(1, 1);
        assert_eq!(one.estimate, 1.0);
        assert_eq!(one.std_error, 0.0);
    }
}
