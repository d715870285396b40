//! Dispatch from a configuration to the library pipelines.

use l2contract::contraction::audit_sigma_prior;
use l2contract::highdim::{contraction_experiment_highdim, HighDimExperimentConfig};
use l2contract::hypothesis::{
    decay_experiment, global_experiment, DecayConfig, Direction, GlobalConfig,
};
use l2contract::spline::{contraction_experiment_spline, SplineExperimentConfig};

use crate::config::{ExperimentConfig, PriorAuditConfig};
use crate::rows::{ResultRow, RowSink};
use crate::CliError;

fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn direction(d: Direction) -> &'static str {
    match d {
        Direction::Mean => "mean",
        Direction::SigmaUp => "sigma-up",
        Direction::SigmaDown => "sigma-down",
    }
}

/// Validates `config` and runs the experiment it describes.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    config.validate()?;
    let kind = config.kind().as_str();
    let context = |e: l2contract::Error| CliError::Run { kind, source: e };
    match config {
        ExperimentConfig::TestErrors(c) => test_errors(c).map_err(context),
        ExperimentConfig::GlobalTest(c) => global_test(c).map_err(context),
        ExperimentConfig::PriorAudit(c) => prior_audit(c).map_err(context),
        ExperimentConfig::Highdim(c) => highdim(c).map_err(context),
        ExperimentConfig::Spline(c) => spline(c).map_err(context),
    }
}

fn test_errors(c: &DecayConfig) -> l2contract::Result<Vec<ResultRow>> {
    let r = decay_experiment(c)?;
    let mut sink = RowSink::new("test-errors");
    let n = c.n.to_string();
    for row in &r.rows {
        let p = [
            ("n", n.clone()),
            ("sigma0", num(row.sigma0)),
            ("separation", num(row.separation)),
            ("epsilon", num(row.epsilon)),
            ("direction", direction(row.direction).to_string()),
            ("case", row.case.as_str().to_string()),
        ];
        sink.push(&p, "type1", row.type1.estimate, Some(row.type1.std_error));
        sink.push(&p, "type2", row.type2.estimate, Some(row.type2.std_error));
    }
    for w in &r.worst {
        let epsilon = w.sigma0 * (w.separation / c.n as f64).sqrt();
        let p = [
            ("n", n.clone()),
            ("sigma0", num(w.sigma0)),
            ("separation", num(w.separation)),
            ("epsilon", num(epsilon)),
        ];
        sink.push(&p, "worst_type1", w.type1.estimate, Some(w.type1.std_error));
        sink.push(&p, "worst_type2", w.type2.estimate, Some(w.type2.std_error));
    }
    for f in &r.fits {
        let p = [("n", n.clone()), ("sigma0", num(f.sigma0))];
        sink.push(
            &p,
            "decay_slope_type1",
            f.type1.slope,
            Some(f.type1.slope_se),
        );
        sink.push(
            &p,
            "decay_slope_type2",
            f.type2.slope,
            Some(f.type2.slope_se),
        );
        sink.push(&p, "decay_r2_type1", f.type1.r_squared, None);
        sink.push(&p, "decay_r2_type2", f.type2.r_squared, None);
    }
    Ok(sink.finish())
}

fn global_test(c: &GlobalConfig) -> l2contract::Result<Vec<ResultRow>> {
    let r = global_experiment(c)?;
    let mut sink = RowSink::new("global-test");
    let base = [
        ("n", c.n.to_string()),
        ("sigma0", num(c.sigma0)),
        ("eps_n", num(c.eps_n)),
        ("m", num(c.m)),
    ];
    sink.push(&base, "cover_size", r.cover_size as f64, None);
    sink.push(&base, "components", r.components as f64, None);
    sink.push(
        &base,
        "global_type1",
        r.global_type1.estimate,
        Some(r.global_type1.std_error),
    );
    sink.push(
        &base,
        "local_type1_sum",
        r.local_type1_sum,
        Some(r.pooled_std_error),
    );
    for (i, e) in r.local_type1.iter().enumerate() {
        let mut p = base.to_vec();
        p.push(("component", i.to_string()));
        sink.push(&p, "local_type1", e.estimate, Some(e.std_error));
    }
    for (i, a) in r.alternatives.iter().enumerate() {
        let mut p = base.to_vec();
        p.push(("alternative", i.to_string()));
        p.push(("component", a.component.to_string()));
        sink.push(
            &p,
            "global_type2",
            a.global_type2.estimate,
            Some(a.global_type2.std_error),
        );
        sink.push(
            &p,
            "local_type2",
            a.local_type2.estimate,
            Some(a.local_type2.std_error),
        );
    }
    Ok(sink.finish())
}

fn prior_audit(c: &PriorAuditConfig) -> l2contract::Result<Vec<ResultRow>> {
    let eps_n = c.eps_n();
    let reports = audit_sigma_prior(&c.prior, c.sigma0, eps_n)?;
    let mut sink = RowSink::new("prior-audit");
    for r in reports {
        let p = [
            ("sigma0", num(c.sigma0)),
            ("n", c.n.to_string()),
            ("xi", num(c.xi)),
            ("eps_n", num(eps_n)),
            ("lhs", num(r.lhs)),
            ("rhs", num(r.rhs)),
            ("satisfied", r.satisfied.to_string()),
        ];
        let metric = match r.id.as_str() {
            "lipschitz" => "lipschitz",
            "polynomial_tail" => "polynomial_tail",
            _ => "density_floor",
        };
        sink.push(&p, metric, r.margin, None);
    }
    Ok(sink.finish())
}

fn highdim(c: &HighDimExperimentConfig) -> l2contract::Result<Vec<ResultRow>> {
    let r = contraction_experiment_highdim(c)?;
    let mut sink = RowSink::new("highdim");
    for row in &r.rows {
        let p = [
            ("n", row.n.to_string()),
            ("replicate", row.replicate.to_string()),
        ];
        sink.push(&p, "median_d_error", row.median_d_error, None);
        sink.push(&p, "mean_d_error", row.mean_d_error, None);
        sink.push(&p, "eps_n", row.eps_n, None);
        sink.push(&p, "bad_mass", row.bad_mass, None);
        sink.push(&p, "support_hit", row.support_hit, None);
        sink.push(&p, "acceptance_rate", row.acceptance_rate, None);
        sink.push(&p, "ess", row.ess, None);
    }
    for s in &r.summary {
        let p = [("n", s.n.to_string())];
        sink.push(&p, "eps_n", s.eps_n, None);
        sink.push(&p, "replicate_median_d_error", s.median_d_error, None);
        sink.push(&p, "error_to_rate_ratio", s.ratio, None);
        sink.push(&p, "mean_bad_mass", s.mean_bad_mass, None);
        sink.push(&p, "max_bad_mass", s.max_bad_mass, None);
    }
    sink.push(&[], "ratio_spread", r.ratio_spread, None);
    if let Some(f) = &r.rate_fit {
        sink.push(&[], "rate_slope", f.slope, Some(f.slope_se));
    }
    Ok(sink.finish())
}

fn spline(c: &SplineExperimentConfig) -> l2contract::Result<Vec<ResultRow>> {
    let r = contraction_experiment_spline(c)?;
    let mut sink = RowSink::new("spline");
    for row in &r.rows {
        let p = [
            ("n", row.n.to_string()),
            ("replicate", row.replicate.to_string()),
        ];
        sink.push(&p, "median_d_error", row.median_d_error, None);
        sink.push(&p, "median_f_error", row.median_f_error, None);
        sink.push(&p, "eps_n", row.eps_n, None);
        sink.push(&p, "bad_mass", row.bad_mass, None);
        sink.push(&p, "posterior_mode_j", row.posterior_mode_j as f64, None);
        sink.push(
            &p,
            "window_satisfied",
            f64::from(u8::from(row.window_satisfied)),
            None,
        );
    }
    for s in &r.summary {
        let p = [("n", s.n.to_string())];
        sink.push(&p, "eps_n", s.eps_n, None);
        sink.push(&p, "replicate_median_d_error", s.median_d_error, None);
        sink.push(&p, "replicate_median_f_error", s.median_f_error, None);
        sink.push(&p, "mean_bad_mass", s.mean_bad_mass, None);
        sink.push(&p, "max_bad_mass", s.max_bad_mass, None);
    }
    if let Some(f) = &r.rate_fit {
        sink.push(&[], "rate_slope", f.slope, Some(f.slope_se));
    }
    if let Some(f) = &r.d_rate_fit {
        sink.push(&[], "d_rate_slope", f.slope, Some(f.slope_se));
    }
    Ok(sink.finish())
}
