use layered_hill::{
    layered_hill, remove_top_extremes, sample_cloud, top_tuple_values, Constraint, PointCloud, SeededRng,
};
use layered_hill_harness::{
    coverage_experiment, export_normalized_samples, run_experiment, write_coverage_csv, write_report_csv,
    ExperimentConfig, HarnessError, Plan,
};

fn cfg(patch: serde_json::Value) -> ExperimentConfig {
    let mut v = serde_json::json!({
        "model": {"family": "power_law", "alpha": 2.5, "d": 2},
        "n": 2000,
        "beta": 0.5,
        "estimators": [
            {"k": 1, "constraint": {"kind": "always_one"}},
            {"k": 2, "constraint": {"kind": "pair_distance", "radius": 1.0}}
        ],
        "deltas": [0.0, 0.5, 1.0],
        "replications": 20,
        "master_seed": 99,
        "mix_weights": [0.5, 0.5]
    });
    for (k, x) in patch.as_object().unwrap() {
        v[k] = x.clone();
    }
    ExperimentConfig::from_json(&v.to_string()).unwrap()
}

#[test]
fn k1_replicate_is_plain_hill() {
    let c = cfg(serde_json::json!({}));
    let plan = Plan::new(&c).unwrap();
    let rep = plan.run_replicate(3).unwrap();
    let model = c.radial_model().unwrap();
    let cloud = sample_cloud(&model, c.n, &SeededRng::new(c.master_seed, 3), false).unwrap();
    let m = c.m();
    let mut norms = cloud.norms().to_vec();
    norms.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let h = norms[..m].iter().map(|r| (r / norms[m - 1]).ln()).sum::<f64>() / m as f64;
    let got = rep.cells[0][0].as_ref().unwrap();
    assert!((got.h - h).abs() < 1e-12);
    assert!((got.alpha_hat - (2.0 + 1.0 / h)).abs() < 1e-12);
}

#[test]
fn single_replicate_report() {
    let c = cfg(serde_json::json!({"replications": 1}));
    let plan = Plan::new(&c).unwrap();
    let rep = plan.run_replicate(0).unwrap();
    let report = run_experiment(&c, None).unwrap();
    for (e, name) in ["L1", "L2"].iter().enumerate() {
        for (j, &d) in c.deltas.iter().enumerate() {
            let a = rep.cells[e][j].as_ref().unwrap().alpha_hat;
            let row = report.row(name, d).unwrap();
            assert_eq!(row.mean_alpha, a);
            assert!((row.rmse - (a - 2.5).abs()).abs() < 1e-12);
        }
    }
}

#[test]
fn report_invariants() {
    let c = cfg(serde_json::json!({}));
    let plan = Plan::new(&c).unwrap();
    let reps = plan.run_all(None).unwrap();
    let report = layered_hill_harness::aggregate(&plan, &reps);
    assert_eq!(report.rows.len(), 9);
    for row in &report.rows {
        let bias = row.mean_alpha - 2.5;
        assert!(row.rmse * row.rmse - bias * bias >= -1e-12, "{row:?}");
    }
    for (j, &d) in c.deltas.iter().enumerate() {
        let mix: Vec<f64> = reps
            .iter()
            .map(|r| 0.5 * r.cells[0][j].as_ref().unwrap().alpha_hat + 0.5 * r.cells[1][j].as_ref().unwrap().alpha_hat)
            .collect();
        let mean = mix.iter().sum::<f64>() / mix.len() as f64;
        assert!((report.row("Mix", d).unwrap().mean_alpha - mean).abs() < 1e-12);
        assert_eq!(report.row("Mix", d).unwrap().k, None);
    }
    // nested censoring: L1 grows with the missing rate within every replicate
    for r in &reps {
        let a: Vec<f64> = (0..3).map(|j| r.cells[0][j].as_ref().unwrap().alpha_hat).collect();
        assert!(a[0] < a[1] && a[1] < a[2]);
    }
}

#[test]
fn pair_estimator_ignores_isolated_extremes() {
    // the top points sit far apart, so no qualifying pair uses them
    let mut pts: Vec<Vec<f64>> = (0..6).map(|i| vec![100.0 * (i as f64 + 1.0), 50.0 * i as f64]).collect();
    for i in 0..40 {
        let r = 2.0 + 0.1 * i as f64;
        let a = 0.7 * i as f64;
        pts.push(vec![r * a.cos(), r * a.sin()]);
        pts.push(vec![r * a.cos() + 0.3, r * a.sin()]);
    }
    let cloud = PointCloud::new(2, pts).unwrap();
    let c = Constraint::pair_distance(1.0).unwrap();
    let m = 4;
    let values: Vec<f64> = [0usize, 2, 4]
        .iter()
        .map(|&remove| {
            let view = remove_top_extremes(&cloud, remove).unwrap();
            layered_hill(&top_tuple_values(&view, &c, m * m).unwrap(), m).unwrap()
        })
        .collect();
    assert_eq!(values[0], values[1]);
    assert_eq!(values[0], values[2]);
}

#[test]
fn replicate_lands_near_truth() {
    let c = cfg(serde_json::json!({"n": 10000, "replications": 5, "deltas": [0.0]}));
    let report = run_experiment(&c, None).unwrap();
    assert!((report.row("L1", 0.0).unwrap().mean_alpha - 2.5).abs() < 0.15);
}

#[test]
fn worker_count_does_not_change_bytes() {
    let c = cfg(serde_json::json!({}));
    let render = |w| {
        let mut buf = Vec::new();
        write_report_csv(&run_experiment(&c, Some(w)).unwrap(), &mut buf).unwrap();
        buf
    };
    assert_eq!(render(1), render(3));
}

#[test]
fn tiny_gamma_covers_nothing() {
    let c = cfg(serde_json::json!({"gamma": 1e-9}));
    for row in coverage_experiment(&c, None).unwrap() {
        assert_eq!(row.coverage, 0.0, "{row:?}");
    }
}

#[test]
fn coverage_rows_and_csv() {
    let c = cfg(serde_json::json!({"beta": 0.3}));
    let rows = coverage_experiment(&c, None).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.coverage)));
    let mut buf = Vec::new();
    write_coverage_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("estimator,k,delta,coverage\nL1,1,0.0,"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn sample_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    let c = cfg(serde_json::json!({"n": 10000, "beta": 0.3}));
    let samples = export_normalized_samples(&c, &path, Some(2)).unwrap();
    assert_eq!(samples.len(), 2 * 3 * 20);
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["estimator", "k", "delta", "stream_id", "statistic"]
    );
    assert_eq!(rdr.records().count(), samples.len());
    // visible bias of the plain estimator once the top m points are gone;
    // H shrinks, so the statistic moves to the left
    let l1: Vec<f64> = samples
        .iter()
        .filter(|s| s.estimator == "L1" && s.delta == 1.0)
        .map(|s| s.statistic)
        .collect();
    let mean = l1.iter().sum::<f64>() / l1.len() as f64;
    assert!(mean.abs() > 2.0, "{mean}");
}

#[test]
fn starved_cells_are_excluded_not_fatal() {
    let c = cfg(serde_json::json!({
        "n": 30,
        "m": 8,
        "beta": null,
        "deltas": [0.0],
        "estimators": [{"k": 2, "constraint": {"kind": "pair_distance", "radius": 0.01}}],
        "mix_weights": null
    }));
    let plan = Plan::new(&c).unwrap();
    let rep = plan.run_replicate(0).unwrap();
    let err = rep.cells[0][0].as_ref().unwrap_err();
    assert_eq!((err.estimator.as_str(), err.delta, err.stream_id), ("L2", 0.0, 0));
    assert!(matches!(err.source, layered_hill::Error::InsufficientExtremes { .. }));
    let report = run_experiment(&c, None).unwrap();
    assert_eq!(report.rows[0].excluded, 20);
    assert!(report.rows[0].mean_alpha.is_nan());
}

#[test]
fn bad_config_is_reported_as_such() {
    let err = ExperimentConfig::from_json(r#"{"model": {"family": "power_law", "alpha": 2.5, "d": 2}}"#).unwrap_err();
    assert!(matches!(err, HarnessError::Json(_)));
    assert!(err.is_config());
}
