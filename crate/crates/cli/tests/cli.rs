use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bmabo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmabo")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth_data(dir: &Path, rows: usize) -> String {
    let path = dir.join("synth.csv").display().to_string();
    let o =
        bmabo(&["synth", "--specs", &fixture("synthetic_models.toml"), "--rows", &rows.to_string(), "--out", &path]);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

fn run_bma(data: &str, out: &Path, extra: &[&str]) -> Output {
    let out = out.display().to_string();
    let specs = fixture("synthetic_models.toml");
    let mut args = vec![
        "run",
        "--data",
        data,
        "--specs",
        &specs,
        "--mode",
        "bma",
        "--runs",
        "3",
        "--iters",
        "3",
        "--seed",
        "42",
        "--gp-restarts",
        "2",
        "--out-dir",
        &out,
    ];
    args.extend_from_slice(extra);
    bmabo(&args)
}

fn read(p: PathBuf) -> Vec<u8> {
    std::fs::read(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn run_writes_all_artifacts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_data(dir.path(), 100);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = run_bma(&data, &a, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(run_bma(&data, &b, &["--workers", "3"]).status.success());

    let results = String::from_utf8(read(a.join("results.csv"))).unwrap();
    assert!(results
        .starts_with("run,seed,status,test_rmse,final_incumbent,n_selected,selected_indices,final_weights,error\n"));
    assert_eq!(results.lines().count(), 4);
    for name in ["results.csv", "weights.csv", "summary.json"] {
        assert_eq!(read(a.join(name)), read(b.join(name)), "{name} differs");
    }

    let manifest: serde_json::Value = serde_json::from_slice(&read(a.join("manifest.json"))).unwrap();
    assert_eq!(manifest["schema"], "bmabo.manifest/1");
    assert_eq!(manifest["config"]["n_init"], 5);
    assert_eq!(manifest["config"]["acq_variant"], "weighted-ei");
    assert_eq!(manifest["seeds"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["data"]["sha256"].as_str().unwrap().len(), 64);

    let summary: serde_json::Value = serde_json::from_slice(&read(a.join("summary.json"))).unwrap();
    assert_eq!(summary["n_runs"], 3);
    assert_eq!(summary["mean_weights"].as_array().unwrap().len(), 3);
}

#[test]
fn initial_design_only_bo_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_data(dir.path(), 40);
    let out = dir.path().join("bo").display().to_string();
    let o = bmabo(&[
        "run",
        "--data",
        &data,
        "--mode",
        "bo",
        "--specs",
        &fixture("single_all14.toml"),
        "--runs",
        "1",
        "--iters",
        "0",
        "--out-dir",
        &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let results = String::from_utf8(read(PathBuf::from(&out).join("results.csv"))).unwrap();
    let row: Vec<&str> = results.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "ok");
    assert!(row[3].parse::<f64>().unwrap() > 0.0);
    assert_eq!(row[5], "5");
    assert!(!PathBuf::from(&out).join("weights.csv").exists());
}

#[test]
fn compare_reports_one_row_per_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_data(dir.path(), 80);
    let a = dir.path().join("a");
    assert!(run_bma(&data, &a, &[]).status.success());
    let results = a.join("results.csv").display().to_string();
    let o = bmabo(&["compare", &results, &results, "--labels", "x", "y"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1].strip_prefix("x,"), lines[2].strip_prefix("y,"));

    let truncated = dir.path().join("truncated.csv");
    std::fs::write(&truncated, "run,seed,status,test_rmse\n0,1,ok,2.0\n").unwrap();
    let o = bmabo(&["compare", &truncated.display().to_string(), &results]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("final_incumbent"), "{}", stderr(&o));
}

#[test]
fn validate_lists_problems() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_data(dir.path(), 437);
    let o = bmabo(&["validate", "--data", &data, "--specs", &fixture("fatigue_models.toml")]);
    assert!(o.status.success(), "{}", stdout(&o));

    let o = bmabo(&["validate", "--data", &data, "--specs", &fixture("fatigue_models.toml"), "--budget", "500"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("budget 500 is not feasible"), "{}", stdout(&o));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[[model]]\nname = \"odd\"\nfeatures = [\"NT\", \"X9\"]\n").unwrap();
    let o = bmabo(&["validate", "--data", &data, "--specs", &bad.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("model `odd` uses feature `X9`"), "{}", stdout(&o));
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o").display().to_string();
    let o = bmabo(&["run", "--data", "/nonexistent.csv", "--out-dir", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent.csv"));

    let data = synth_data(dir.path(), 30);
    let o = bmabo(&["run", "--data", &data, "--specs", &fixture("fatigue_models.toml"), "--out-dir", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
}

#[test]
fn shipped_fixtures_parse() {
    use bmabo::dataset::{load_spec_config, ModelSpec};
    let fatigue = load_spec_config(Path::new(&fixture("fatigue_models.toml"))).unwrap();
    let expected = ModelSpec::nims_models();
    assert_eq!(fatigue.len(), 3);
    for (a, b) in fatigue.iter().zip(&expected) {
        assert_eq!(a.features, b.features);
        assert!((a.prior_weight - 1.0 / 3.0).abs() < 1e-15);
    }
    let all = load_spec_config(Path::new(&fixture("single_all14.toml"))).unwrap();
    assert_eq!(all[0].features, ModelSpec::nims_all().features);
    assert_eq!(load_spec_config(Path::new(&fixture("synthetic_models.toml"))).unwrap().len(), 3);
}
