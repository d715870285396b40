//! CSV and long-format plot-data emission.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::rows::ResultRow;
use crate::CliError;

pub const CSV_HEADER: [&str; 5] = ["experiment", "params", "metric", "value", "std_error"];

/// 17 significant digits: enough to recover every `f64` exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_error(path: &str, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_string(),
            source,
        },
        other => CliError::Config(format!("{path}: malformed CSV: {other:?}")),
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let wrap = |e| csv_error("<csv>", e);
    w.write_record(CSV_HEADER).map_err(wrap)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.params_string(),
            r.metric.clone(),
            format_float(r.value),
            r.std_error.map(format_float).unwrap_or_default(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: "<csv>".into(),
        source: e,
    })
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    write_csv(rows, BufWriter::new(file)).map_err(|e| match e {
        CliError::Io { source, .. } => io_error(path, source),
        other => other,
    })
}

/// Parses a file written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>, CliError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| csv_error("<csv>", e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::Config(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    let parse = |s: &str| -> Result<f64, CliError> {
        s.parse()
            .map_err(|_| CliError::Config(format!("not a number: {s:?}")))
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error("<csv>", e))?;
        let params = if rec[1].is_empty() {
            Vec::new()
        } else {
            rec[1]
                .split(';')
                .map(|kv| {
                    kv.split_once('=')
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .ok_or_else(|| CliError::Config(format!("bad parameter {kv:?}")))
                })
                .collect::<Result<_, _>>()?
        };
        rows.push(ResultRow {
            experiment: rec[0].to_string(),
            params,
            metric: rec[2].to_string(),
            value: parse(&rec[3])?,
            std_error: if rec[4].is_empty() {
                None
            } else {
                Some(parse(&rec[4])?)
            },
        });
    }
    Ok(rows)
}

struct PlotSpec {
    /// Parameter used as abscissa; `None` uses the row position.
    x_key: Option<&'static str>,
    log_x: bool,
    metrics: &'static [&'static str],
    series_keys: &'static [&'static str],
    log_value: bool,
    /// Only rows without this parameter are plotted.
    skip_with: Option<&'static str>,
    comments: &'static [&'static str],
}

fn plot_spec(experiment: &str) -> Option<PlotSpec> {
    Some(match experiment {
        "test-errors" => PlotSpec {
            x_key: Some("separation"),
            log_x: false,
            metrics: &["worst_type1", "worst_type2"],
            series_keys: &["sigma0"],
            log_value: true,
            skip_with: None,
            comments: &["decay_slope_type1", "decay_slope_type2"],
        },
        "global-test" => PlotSpec {
            x_key: Some("alternative"),
            log_x: false,
            metrics: &["global_type2", "local_type2"],
            series_keys: &[],
            log_value: false,
            skip_with: None,
            comments: &["global_type1", "local_type1_sum"],
        },
        "prior-audit" => PlotSpec {
            x_key: None,
            log_x: false,
            metrics: &["lipschitz", "polynomial_tail", "density_floor"],
            series_keys: &[],
            log_value: false,
            skip_with: None,
            comments: &[],
        },
        "highdim" | "spline" => PlotSpec {
            x_key: Some("n"),
            log_x: true,
            metrics: &[
                "replicate_median_d_error",
                "replicate_median_f_error",
                "eps_n",
            ],
            series_keys: &[],
            log_value: true,
            skip_with: Some("replicate"),
            comments: &["rate_slope", "d_rate_slope", "ratio_spread"],
        },
        _ => return None,
    })
}

/// Long-format `(x, series, value)` lines, with summary statistics appended as
/// `#` comment lines.
pub fn write_plot_data<W: Write>(rows: &[ResultRow], mut out: W) -> Result<(), CliError> {
    let io = |e| CliError::Io {
        path: "<plot>".into(),
        source: e,
    };
    writeln!(out, "x,series,value").map_err(io)?;
    let mut comments = Vec::new();
    for (pos, r) in rows.iter().enumerate() {
        let Some(spec) = plot_spec(&r.experiment) else {
            return Err(CliError::Config(format!(
                "no plot layout for experiment {:?}",
                r.experiment
            )));
        };
        if spec.comments.contains(&r.metric.as_str()) {
            let mut line = format!("# {}", r.metric);
            if !r.params.is_empty() {
                line.push_str(&format!(" [{}]", r.params_string()));
            }
            line.push_str(&format!(" = {}", format_float(r.value)));
            if let Some(se) = r.std_error {
                line.push_str(&format!(" (se {})", format_float(se)));
            }
            comments.push(line);
            continue;
        }
        if !spec.metrics.contains(&r.metric.as_str())
            || spec.skip_with.is_some_and(|k| r.param(k).is_some())
        {
            continue;
        }
        let x = match spec.x_key {
            Some(k) => r.param_f64(k).ok_or_else(|| {
                CliError::Config(format!("row for {} lacks numeric {k}", r.metric))
            })?,
            None => pos as f64,
        };
        let x = if spec.log_x { x.ln() } else { x };
        let mut series = r.metric.clone();
        for k in spec.series_keys {
            if let Some(v) = r.param(k) {
                series.push_str(&format!(":{k}={v}"));
            }
        }
        if spec.log_value && r.value <= 0.0 {
            comments.push(format!(
                "# {series} at x = {}: zero estimate omitted",
                format_float(x)
            ));
            continue;
        }
        let value = if spec.log_value {
            r.value.ln()
        } else {
            r.value
        };
        writeln!(out, "{},{series},{}", format_float(x), format_float(value)).map_err(io)?;
    }
    for c in comments {
        writeln!(out, "{c}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn emit_plot_data(rows: &[ResultRow], path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    write_plot_data(rows, BufWriter::new(file)).map_err(|e| match e {
        CliError::Io { source, .. } => io_error(path, source),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(
        experiment: &str,
        params: &[(&str, &str)],
        metric: &str,
        value: f64,
        se: Option<f64>,
    ) -> ResultRow {
        ResultRow {
            experiment: experiment.into(),
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            metric: metric.into(),
            value,
            std_error: se,
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "experiment,params,metric,value,std_error\n"
        );
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let values = [0.1 + 0.2, 1e-310, -7.0, f64::MAX, 2f64.sqrt(), 0.0];
        let rows: Vec<ResultRow> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let se = (i % 2 == 0).then_some(v.abs() / 3.0);
                row(
                    "spline",
                    &[("n", "128"), ("replicate", &i.to_string())],
                    "eps_n",
                    v,
                    se,
                )
            })
            .collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.ends_with('\n'));
        assert!(text.lines().skip(1).all(|l| l.split(',').count() == 5));
        assert_eq!(read_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn decay_plot_has_one_series_per_sigma() {
        let mut rows = Vec::new();
        for s in ["0.1", "1", "10"] {
            for sep in ["5", "10"] {
                rows.push(row(
                    "test-errors",
                    &[("sigma0", s), ("separation", sep)],
                    "worst_type1",
                    0.01,
                    Some(0.001),
                ));
            }
            rows.push(row(
                "test-errors",
                &[("sigma0", s)],
                "decay_slope_type1",
                -0.2,
                Some(0.01),
            ));
        }
        let mut buf = Vec::new();
        write_plot_data(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let series: std::collections::BTreeSet<&str> = text
            .lines()
            .skip(1)
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(series.len(), 3);
        assert_eq!(
            text.lines()
                .filter(|l| l.starts_with("# decay_slope_type1"))
                .count(),
            3
        );
        let last = text.lines().last().unwrap();
        assert!(last.starts_with('#'));
    }

    #[test]
    fn rate_plot_appends_slope_comment() {
        let rows = vec![
            row(
                "spline",
                &[("n", "128"), ("replicate", "0")],
                "median_f_error",
                0.3,
                None,
            ),
            row(
                "spline",
                &[("n", "128")],
                "replicate_median_f_error",
                0.3,
                None,
            ),
            row(
                "spline",
                &[("n", "256")],
                "replicate_median_f_error",
                0.2,
                None,
            ),
            row("spline", &[], "rate_slope", -0.41, Some(0.01)),
        ];
        let mut buf = Vec::new();
        write_plot_data(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4, "{text}");
        assert!(lines[1].starts_with(&format_float(128f64.ln())));
        assert!(lines[3].starts_with(&format!("# rate_slope = {}", format_float(-0.41))));
    }

    #[test]
    fn zero_estimates_become_comments() {
        let rows = vec![row(
            "test-errors",
            &[("sigma0", "1"), ("separation", "80")],
            "worst_type2",
            0.0,
            Some(0.0),
        )];
        let mut buf = Vec::new();
        write_plot_data(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .contains("zero estimate omitted"));
    }
}
