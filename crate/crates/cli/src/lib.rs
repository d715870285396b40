//! Configuration, orchestration and output for the `l2contract` experiments.

pub mod config;
pub mod output;
pub mod rows;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind, PriorAuditConfig};
pub use output::{emit_csv, emit_plot_data, read_csv, write_csv, write_plot_data};
pub use rows::{ResultRow, METRICS};
pub use run::run;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid {kind} configuration: {source}")]
    Invalid {
        kind: &'static str,
        source: l2contract::Error,
    },
    #[error("{kind} experiment failed: {source}")]
    Run {
        kind: &'static str,
        source: l2contract::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Runs `config` on a dedicated pool of `threads` workers; `None` uses the
/// global pool. Results do not depend on the thread count.
pub fn run_with_threads(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<Vec<ResultRow>, CliError> {
    match threads {
        None => run(config),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::ThreadPool(e.to_string()))?
            .install(|| run(config)),
    }
}
