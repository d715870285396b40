//! Foundational numerics shared by the tests and the applications.

pub mod chi2;
pub mod estimate;
pub mod fit;
pub mod l1;
pub mod point;
pub mod special;

pub use chi2::{
    audit_cdf_lower_bound, audit_lower_tail, audit_upper_tail, chi2_cdf, chi2_cdf_lower_bound,
    chi2_lower_tail_bound, chi2_sf, chi2_upper_tail_bound, noncentral_chi2_cdf, TailBoundReport,
};
pub use estimate::ErrorEstimate;
pub use fit::{ols, LinearFit};
pub use l1::expected_l1_norm;
pub use point::{metric_d, sample_observation, sample_observation_with, Observation, ParamPoint};
pub use special::normal_cdf;
