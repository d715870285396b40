//! Experiment configuration: one TOML document per run, tagged by `kind`.

use serde::{Deserialize, Serialize};

use l2contract::contraction::SigmaPriorSpec;
use l2contract::highdim::HighDimExperimentConfig;
use l2contract::hypothesis::{DecayConfig, GlobalConfig};
use l2contract::spline::SplineExperimentConfig;

use crate::CliError;

/// Variance-prior audit at one `(σ0, n)`, with `ε_n = σ0 n^{−ξ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorAuditConfig {
    pub prior: SigmaPriorSpec,
    pub sigma0: f64,
    pub n: u64,
    pub xi: f64,
}

impl Default for PriorAuditConfig {
    fn default() -> Self {
        Self {
            prior: SigmaPriorSpec::HalfCauchy { r: 1.0 },
            sigma0: 1.0,
            n: 10_000,
            xi: 0.4,
        }
    }
}

impl PriorAuditConfig {
    pub fn eps_n(&self) -> f64 {
        self.sigma0 * (self.n as f64).powf(-self.xi)
    }

    pub fn validate(&self) -> l2contract::Result<()> {
        self.prior.validate()?;
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return Err(invalid(
                "sigma0",
                format!("must be positive, got {}", self.sigma0),
            ));
        }
        if self.n < 2 {
            return Err(invalid("n", "must be at least 2"));
        }
        if !(self.xi > 0.0 && self.xi < 0.5) {
            return Err(invalid(
                "xi",
                format!("must lie in (0, 1/2), got {}", self.xi),
            ));
        }
        Ok(())
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> l2contract::Error {
    l2contract::Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentKind {
    TestErrors,
    GlobalTest,
    PriorAudit,
    Highdim,
    Spline,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::TestErrors,
        ExperimentKind::GlobalTest,
        ExperimentKind::PriorAudit,
        ExperimentKind::Highdim,
        ExperimentKind::Spline,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::TestErrors => "test-errors",
            ExperimentKind::GlobalTest => "global-test",
            ExperimentKind::PriorAudit => "prior-audit",
            ExperimentKind::Highdim => "highdim",
            ExperimentKind::Spline => "spline",
        }
    }

    pub fn default_config(&self) -> ExperimentConfig {
        match self {
            ExperimentKind::TestErrors => ExperimentConfig::TestErrors(DecayConfig::default()),
            ExperimentKind::GlobalTest => ExperimentConfig::GlobalTest(GlobalConfig::default()),
            ExperimentKind::PriorAudit => ExperimentConfig::PriorAudit(PriorAuditConfig::default()),
            ExperimentKind::Highdim => {
                ExperimentConfig::Highdim(HighDimExperimentConfig::default())
            }
            ExperimentKind::Spline => ExperimentConfig::Spline(SplineExperimentConfig::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    TestErrors(DecayConfig),
    GlobalTest(GlobalConfig),
    PriorAudit(PriorAuditConfig),
    Highdim(HighDimExperimentConfig),
    Spline(SplineExperimentConfig),
}

/// Seeds are stored as TOML integers, which are signed 64-bit.
pub const MAX_SEED: u64 = i64::MAX as u64;

impl ExperimentConfig {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentConfig::TestErrors(_) => ExperimentKind::TestErrors,
            ExperimentConfig::GlobalTest(_) => ExperimentKind::GlobalTest,
            ExperimentConfig::PriorAudit(_) => ExperimentKind::PriorAudit,
            ExperimentConfig::Highdim(_) => ExperimentKind::Highdim,
            ExperimentConfig::Spline(_) => ExperimentKind::Spline,
        }
    }

    /// The seed, if the experiment is stochastic.
    pub fn seed(&self) -> Option<u64> {
        match self {
            ExperimentConfig::TestErrors(c) => Some(c.seed),
            ExperimentConfig::GlobalTest(c) => Some(c.seed),
            ExperimentConfig::PriorAudit(_) => None,
            ExperimentConfig::Highdim(c) => Some(c.seed),
            ExperimentConfig::Spline(c) => Some(c.seed),
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::TestErrors(c) => c.seed = seed,
            ExperimentConfig::GlobalTest(c) => c.seed = seed,
            ExperimentConfig::PriorAudit(_) => {}
            ExperimentConfig::Highdim(c) => c.seed = seed,
            ExperimentConfig::Spline(c) => c.seed = seed,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(seed) = self.seed() {
            if seed > MAX_SEED {
                return Err(CliError::Config(format!(
                    "seed {seed} exceeds the largest storable seed {MAX_SEED}"
                )));
            }
        }
        let checked = match self {
            ExperimentConfig::TestErrors(c) => c.validate(),
            ExperimentConfig::GlobalTest(c) => c.validate(),
            ExperimentConfig::PriorAudit(c) => c.validate(),
            ExperimentConfig::Highdim(c) => c.validate(),
            ExperimentConfig::Spline(c) => c.validate(),
        };
        checked.map_err(|e| CliError::Invalid {
            kind: self.kind().as_str(),
            source: e,
        })
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml(&text)
    }
}
