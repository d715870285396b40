//! Sparse high-dimensional linear regression with a support prior, a
//! Gaussian slab and an unknown noise variance.

pub mod bounds;
pub mod experiment;
pub mod mcmc;
pub mod model;
pub mod posterior;

pub use bounds::{entropy_bound_highdim, sieve_mass_bound, SieveMassReport};
pub use experiment::{
    contraction_experiment_highdim, HighDimExperimentConfig, HighDimResult, HighDimRow,
    HighDimSummary,
};
pub use mcmc::{effective_sample_size, mcmc_posterior, HighDimDraw, McmcOutput, McmcSettings};
pub use model::{simulate_response, uniform_design, HighDimModel, HighDimTruth, PreparedData};
pub use posterior::{
    cardinality_log_prior, combinations, eps_n_highdim, exact_posterior, marginal_log_likelihood,
    support_log_normalizer, support_log_prior, SupportPosterior,
};
