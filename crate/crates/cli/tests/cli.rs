use std::path::Path;
use std::process::{Command, Output};

fn steinlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steinlab"))
        .args(args)
        .env_remove("STEINLAB_THREADS")
        .output()
        .expect("run steinlab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn constants_table() {
    let o = steinlab(&["constants", "--d", "1..3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("d,"), "{header}");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].contains("4.7873"), "{}", rows[0]);
}

#[test]
fn infinite_variance_source_is_rejected() {
    let o = steinlab(&["clt", "--source", "pareto_tail", "--a", "1.5", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("infinite variance"), "{}", stderr(&o));
}

#[test]
fn stochastic_subcommands_need_a_seed() {
    let o = steinlab(&["holder-probe", "--function", "cosine", "--d", "2", "--pairs", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn unknown_function_is_a_validation_error() {
    let o = steinlab(&["solve", "--function", "sine", "--d", "1", "--points", "0"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn json_config_runs_and_reports_bad_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/out.json");
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "subcommand": "raic",
            "params": {"u_grid": [0.01], "tol": 1e-10},
            "output_path": out,
        })
        .to_string(),
    )
    .unwrap();
    let o = steinlab(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["subcommand"], "raic");
    let ratio = doc["rows"][0]["ratio_2pi"].as_f64().unwrap();
    assert!((ratio - 1.0879).abs() < 1e-3, "{ratio}");

    std::fs::write(
        &cfg,
        serde_json::json!({"subcommand": "raic", "params": {"bogus": 1}}).to_string(),
    )
    .unwrap();
    let o = steinlab(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("params.bogus"), "{}", stderr(&o));
}

fn write_points(path: &Path, header: bool, rows: &[[f64; 2]]) {
    let mut text = String::new();
    if header {
        text.push_str("x,y\n");
    }
    for r in rows {
        text.push_str(&format!("{},{}\n", r[0], r[1]));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn w1_between_csv_samples() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_points(&a, true, &[[0.0, 0.0], [1.0, 0.0]]);
    write_points(&b, false, &[[1.0, 3.0], [0.0, 4.0]]);
    let o = steinlab(&["w1", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let value: f64 = text.lines().nth(1).unwrap().split(',').last().unwrap().parse().unwrap();
    // Matching (0,0)→(0,4), (1,0)→(1,3) costs 7; the crossing costs √10 + √17.
    assert!((value - 3.5).abs() < 1e-12, "{text}");
}

#[test]
fn residual_tolerance_breach_exits_with_violation() {
    let o = steinlab(&["residual", "--function", "cosine", "--d", "1", "--points", "0.5", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = steinlab(&["residual", "--function", "cosine", "--d", "1", "--points", "0.5", "--tol", "1e-6"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn repeat_runs_are_byte_identical() {
    let args = ["clt", "--source", "rademacher", "--d", "1", "--n-grid", "4,16,64", "--m", "200", "--reps", "3", "--seed", "5"];
    let a = steinlab(&args);
    let b = steinlab(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}
