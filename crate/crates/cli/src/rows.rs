//! Result rows and the registry of metric names they may carry.

use serde::{Deserialize, Serialize};

/// Every metric an experiment may report, with a one-line description.
pub const METRICS: &[(&str, &str)] = &[
    ("type1", "type-I error of one local test"),
    (
        "type2",
        "type-II error of one local test over its alternative ball",
    ),
    ("worst_type1", "type-I error, worst case over directions"),
    ("worst_type2", "type-II error, worst case over directions"),
    (
        "decay_slope_type1",
        "slope of log worst type-I error on n eps^2 / sigma0^2",
    ),
    (
        "decay_slope_type2",
        "slope of log worst type-II error on n eps^2 / sigma0^2",
    ),
    ("decay_r2_type1", "R^2 of the type-I decay regression"),
    ("decay_r2_type2", "R^2 of the type-II decay regression"),
    ("cover_size", "number of cover centers"),
    ("components", "local tests kept in the global test"),
    ("global_type1", "type-I error of the global test"),
    ("local_type1", "type-I error of one component test"),
    ("local_type1_sum", "sum of component type-I errors"),
    (
        "global_type2",
        "type-II error of the global test at a covered alternative",
    ),
    (
        "local_type2",
        "type-II error of the covering component at that alternative",
    ),
    ("lipschitz", "margin of the Lipschitz check"),
    ("polynomial_tail", "margin of the polynomial-tail check"),
    ("density_floor", "margin of the density-floor check"),
    (
        "median_d_error",
        "posterior median of the error in the contraction metric",
    ),
    (
        "mean_d_error",
        "posterior mean of the error in the contraction metric",
    ),
    (
        "median_f_error",
        "posterior median of the empirical L2 error of f",
    ),
    ("eps_n", "target contraction rate"),
    ("bad_mass", "posterior mass outside the M eps_n ball"),
    ("support_hit", "posterior frequency of the true support"),
    ("acceptance_rate", "MCMC acceptance rate"),
    ("ess", "effective sample size of the support-size chain"),
    ("posterior_mode_j", "posterior mode of the basis dimension"),
    (
        "window_satisfied",
        "1 when sigma0^2 lies in the variance window",
    ),
    (
        "replicate_median_d_error",
        "median over replicates of median_d_error",
    ),
    (
        "replicate_median_f_error",
        "median over replicates of median_f_error",
    ),
    ("error_to_rate_ratio", "replicate_median_d_error / eps_n"),
    ("mean_bad_mass", "mean over replicates of bad_mass"),
    ("max_bad_mass", "max over replicates of bad_mass"),
    ("ratio_spread", "max / min of error_to_rate_ratio over n"),
    ("rate_slope", "slope of log median error on log n"),
    ("d_rate_slope", "slope of log median metric error on log n"),
];

pub fn is_registered(metric: &str) -> bool {
    METRICS.iter().any(|(m, _)| *m == metric)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    /// Ordered `(key, value)` snapshot of the parameters the row depends on.
    pub params: Vec<(String, String)>,
    pub metric: String,
    pub value: f64,
    pub std_error: Option<f64>,
}

impl ResultRow {
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn param_f64(&self, key: &str) -> Option<f64> {
        self.param(key).and_then(|v| v.parse().ok())
    }

    /// `key=value` pairs joined by `;`.
    pub fn params_string(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Accumulates rows for one experiment, checking metric names as it goes.
pub(crate) struct RowSink {
    experiment: &'static str,
    rows: Vec<ResultRow>,
}

impl RowSink {
    pub(crate) fn new(experiment: &'static str) -> Self {
        Self {
            experiment,
            rows: Vec::new(),
        }
    }

    pub(crate) fn push(
        &mut self,
        params: &[(&str, String)],
        metric: &'static str,
        value: f64,
        std_error: Option<f64>,
    ) {
        assert!(is_registered(metric), "unregistered metric {metric}");
        self.rows.push(ResultRow {
            experiment: self.experiment.to_string(),
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            metric: metric.to_string(),
            value,
            std_error,
        });
    }

    pub(crate) fn finish(self) -> Vec<ResultRow> {
        self.rows
    }
}
