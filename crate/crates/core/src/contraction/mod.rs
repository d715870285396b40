//! Kullback-Leibler machinery, variance-prior audits and posterior
//! contraction diagnostics.

pub mod audit;
pub mod diagnostics;
pub mod kl;
pub mod sigma_prior;

pub use audit::{
    audit_sigma_prior, default_slack, example_window_half_cauchy, example_window_inverse_gamma,
    lipschitz_constant, sigma_box_mass, tail_exponent, ConditionId, ConditionReport,
    ContractionConfig, Relation,
};
pub use diagnostics::{
    contraction_diagnostic, fit_rate_exponent, prior_mass_d_box, MeanPriorSampler, PosteriorSample,
    PriorMassEstimate,
};
pub use kl::{kl_divergence, kl_variation};
pub use sigma_prior::SigmaPriorSpec;
