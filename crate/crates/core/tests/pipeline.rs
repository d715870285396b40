use std::io::Cursor;

use rand::Rng;
use rand_distr::StandardNormal;

use l2contract::contraction::SigmaPriorSpec;
use l2contract::data::{read_table, split_response};
use l2contract::highdim::{
    exact_posterior, simulate_response, uniform_design, HighDimModel, HighDimTruth,
};
use l2contract::hypothesis::{global_experiment, GlobalConfig};
use l2contract::rng;
use l2contract::spline::{posterior_over_j, SplineModel};

#[test]
fn delimited_regression_data_drives_the_sparse_posterior() {
    let mut g = rng::stream(3, 0);
    let x = uniform_design(80, 6, 3f64.sqrt(), &mut g).unwrap();
    let truth = HighDimTruth::new(vec![0.0, 1.5, 0.0, -1.0, 0.0, 0.0], 0.5).unwrap();
    let y = simulate_response(&x, &truth, &mut g).unwrap();
    let mut text = String::from("# simulated\nx1\tx2\tx3\tx4\tx5\tx6\ty\n");
    for i in 0..80 {
        let row: Vec<String> = (0..6)
            .map(|j| format!("{:e}", x[(i, j)]))
            .chain([format!("{:e}", y[i])])
            .collect();
        text.push_str(&row.join("\t"));
        text.push('\n');
    }
    let (rows, parsed_y) = split_response(read_table(Cursor::new(text)).unwrap()).unwrap();
    assert_eq!(parsed_y, y);
    let model = HighDimModel::from_rows(&rows, 1.0, 1.0, SigmaPriorSpec::default()).unwrap();
    let post = exact_posterior(&parsed_y, &model, 6).unwrap();
    assert_eq!(post.mode(), truth.support());
}

#[test]
fn delimited_curve_data_drives_the_spline_posterior() {
    let mut g = rng::stream(4, 0);
    let mut text = String::from("x,y\n");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..400 {
        let x = (i as f64 + 0.5) / 400.0;
        let y = (2.0 * std::f64::consts::PI * x).sin() + 0.2 * g.sample::<f64, _>(StandardNormal);
        text.push_str(&format!("{x},{y}\n"));
        xs.push(x);
        ys.push(y);
    }
    let (rows, parsed_y) = split_response(read_table(Cursor::new(text)).unwrap()).unwrap();
    let parsed_x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(parsed_x, xs);
    assert_eq!(parsed_y, ys);
    let post = posterior_over_j(
        &parsed_y,
        &parsed_x,
        &SplineModel {
            j_max: 20,
            ..SplineModel::default()
        },
    )
    .unwrap();
    let mode = post.mode();
    assert!((5..=9).contains(&mode), "mode {mode}");
}

#[test]
fn global_type1_within_component_count_times_worst_component() {
    let config = GlobalConfig {
        reps: 4000,
        ..GlobalConfig::default()
    };
    let r = global_experiment(&config).unwrap();
    let worst = r.local_type1.iter().map(|e| e.estimate).fold(0.0, f64::max);
    let se = r
        .local_type1
        .iter()
        .map(|e| e.std_error)
        .fold(0.0, f64::max);
    let bound = r.components as f64 * worst;
    assert!(
        r.global_type1.estimate
            <= bound + 3.0 * (r.global_type1.std_error + r.components as f64 * se)
    );
    assert!(r.global_type1.estimate >= worst - 3.0 * r.global_type1.std_error);
}

#[test]
fn pipelines_ignore_thread_count() {
    let config = GlobalConfig {
        reps: 2000,
        ..GlobalConfig::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| global_experiment(&config).unwrap())
    };
    assert_eq!(run(1), run(3));
}
