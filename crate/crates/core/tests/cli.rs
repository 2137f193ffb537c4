use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use symground::grid::{read_csv, write_csv};

fn symground(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_symground"))
        .arg("--config")
        .arg(&path)
        .arg("--out-dir")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn small_verify_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = symground(
        dir.path(),
        r#"{"command":"verify","domain":{"kind":"line1d","L":8,"n":129},"suite":{"trials":5}}"#,
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("id,trials,min_slack,max_violation,pass"));
    assert_eq!(csv.lines().count(), 17);
    assert_eq!(fs::read_to_string(dir.path().join("out/report.csv")).unwrap(), csv);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["rows"].as_array().unwrap().len(), 16);
}

#[test]
fn rejected_row_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = symground(
        dir.path(),
        r#"{"command":"verify","domain":{"kind":"line1d","L":8,"n":65},
            "suite":{"trials":2,"properties":["conv_symm_I"],"kernels":{"conv_symm_I":{"kind":"box","a":1}}}}"#,
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains(",rejected"));
    assert!(stderr(&o).contains("warning: conv_symm_I"));
}

#[test]
fn harmonic_minimize_reports_unit_energy() {
    let dir = tempfile::tempdir().unwrap();
    let o = symground(
        dir.path(),
        r#"{"command":"minimize","energy":{"potential":{"kind":"quadratic"}},
            "minimizer":{"initializer":{"kind":"gaussian_offset","center":[1.5]}}}"#,
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let e = summary["energy"].as_f64().unwrap();
    assert!((e - 1.0).abs() <= 1e-3, "{e}");
    assert!(summary["symmetry"]["deviation"].as_f64().unwrap() <= 1e-3);
    let trace = fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert!(trace.starts_with("iter,energy,step,mass_residual,symmetry_deviation"));
}

#[test]
fn iteration_cap_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = symground(
        dir.path(),
        r#"{"command":"minimize","energy":{"potential":{"kind":"quadratic"}},"minimizer":{"max_iters":2}}"#,
        &["--quiet"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("warning: no convergence"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for (config, needle) in [
        ("{not json", "error:"),
        (r#"{"command":"kernel-check","kernle":{"kind":"neg_abs"}}"#, "kernle"),
        (r#"{"command":"mean","domain":{"kind":"cylinder","L":4,"n":16,"n_theta":16},"group":{"kind":"rotation_zn","n":4}}"#, "does not act"),
    ] {
        let o = symground(dir.path(), config, &[]);
        assert_eq!(o.status.code(), Some(2), "{config}");
        let err = stderr(&o);
        assert!(err.starts_with("error:") && err.contains(needle), "{err}");
    }
    let missing = Command::new(env!("CARGO_BIN_EXE_symground")).args(["--config", "/nonexistent.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn kernel_check_exit_code_follows_positive_definiteness() {
    let dir = tempfile::tempdir().unwrap();
    let pd = symground(dir.path(), r#"{"command":"kernel-check","kernel":{"kind":"gaussian","sigma":1}}"#, &[]);
    assert_eq!(pd.status.code(), Some(0));
    let boxed = symground(dir.path(), r#"{"command":"kernel-check","kernel":{"kind":"box","a":1}}"#, &[]);
    assert_eq!(boxed.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&boxed)).unwrap();
    assert_eq!(summary["positive_definite"], false);
    let neg_abs = symground(
        dir.path(),
        r#"{"command":"kernel-check","kernel":{"kind":"neg_abs"},"pd_mode":"mean_zero"}"#,
        &[],
    );
    assert_eq!(neg_abs.status.code(), Some(0));
}

#[test]
fn grid_function_outputs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = symground(dir.path(), r#"{"command":"mean","domain":{"kind":"plane2d","L":8,"n":32},"group":{"kind":"rotation_zn","n":4}}"#, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let written = fs::read(dir.path().join("out/state.csv")).unwrap();
    let parsed = read_csv(written.as_slice()).unwrap();
    let mut again = Vec::new();
    write_csv(&parsed, &mut again).unwrap();
    assert_eq!(written, again);

    // feed the mean back through rearrange
    fs::copy(dir.path().join("out/state.csv"), dir.path().join("mean.csv")).unwrap();
    let r = symground(dir.path(), r#"{"command":"rearrange","input":"mean.csv"}"#, &[]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&r)).unwrap();
    let (a, b) = (summary["l2_input"].as_f64().unwrap(), summary["l2_rearranged"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-12 * a);
    assert!(summary["kinetic_rearranged"].as_f64().unwrap() <= summary["kinetic_input"].as_f64().unwrap() * (1.0 + 1e-6));
}

#[test]
fn seed_flag_changes_random_input() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let o = symground(dir.path(), r#"{"command":"rearrange","domain":{"kind":"line1d","L":8,"n":65}}"#, &["--seed", seed]);
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
    };
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}

#[test]
fn positional_command_conflict_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, r#"{"command":"mean"}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_symground")).arg("rearrange").arg("--config").arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("conflicts"));
}
