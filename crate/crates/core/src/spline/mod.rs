//! Adaptive B-spline regression with a prior on the basis dimension.

pub mod basis;
pub mod experiment;
pub mod posterior;
pub mod truth;

pub use basis::{basis_matrix, bspline_basis_eval, uniform_design_points, SplineBasisSpec};
pub use experiment::{
    contraction_experiment_spline, spline_variance_window, DesignKind, SplineExperimentConfig,
    SplineResult, SplineRow, SplineSummary,
};
pub use posterior::{
    dimension_log_prior, dimension_log_prior_normalized, empirical_l2_norm, eps_n_spline,
    posterior_over_j, sample_f_posterior, DimensionConditional, SplineDraw, SplineModel,
    SplinePosterior, MAX_J,
};
pub use truth::{
    approximation_error_curve, even_knot_dimensions, holder_seminorm_on_grid, holder_truth,
    ApproximationCurve, HolderFamily, HolderTruth, APPROXIMATION_GRID,
};
