use std::fs;

use acr::cli::{main_with_args, EXIT_CONFIG, EXIT_OK};

fn acr(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("acr").chain(args.iter().copied()))
}

#[test]
fn sidecar_reproduces_table() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    let first_s = first.to_str().unwrap();
    assert_eq!(acr(&["exp3", "--n", "60,80", "--reps", "12", "--seed", "5", "--a", "0.3", "--out", first_s]), EXIT_OK);

    let sidecar = dir.path().join("first.json");
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sidecar).unwrap()).unwrap();
    assert_eq!(side["config"]["n"], serde_json::json!([60, 80]));
    assert_eq!(side["reports"].as_array().unwrap().len(), 2);

    assert_eq!(
        acr(&["exp3", "--config", sidecar.to_str().unwrap(), "--out", second.to_str().unwrap()]),
        EXIT_OK
    );
    let a = fs::read_to_string(&first).unwrap();
    assert_eq!(a, fs::read_to_string(&second).unwrap());
    assert!(a.starts_with("estimator,n,coef,bias,mse\n"));
    assert_eq!(a.lines().count(), 1 + 2 * 2);
}

#[test]
fn curve_table_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp2.csv");
    assert_eq!(
        acr(&["exp2", "--n", "50", "--reps", "4", "--set", "kernel=\"gaussian\"", "--out", out.to_str().unwrap()]),
        EXIT_OK
    );
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("estimator,n,mise\n"));
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("exp2.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["kernel"], "gaussian");
}

#[test]
fn config_for_other_experiment_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"experiment": 1, "n": 50}"#).unwrap();
    assert_eq!(acr(&["exp2", "--config", cfg.to_str().unwrap()]), EXIT_CONFIG);
    fs::write(&cfg, r#"{"experiment": 2, "unknown_key": 1}"#).unwrap();
    assert_eq!(acr(&["exp2", "--config", cfg.to_str().unwrap()]), EXIT_CONFIG);
}
