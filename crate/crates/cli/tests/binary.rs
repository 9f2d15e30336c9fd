use std::path::Path;
use std::process::{Command, Output};

fn tprf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tprf"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const MOLLOW: &str = r#"{"params": {"n_levels": 2, "alpha_mhz": -233, "delta_mhz": 116.5, "omega_mhz": 20, "gamma_mhz": 2.5},
  "grid": {"delay_points": 1024}}"#;

#[test]
fn success_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", MOLLOW);
    let out = dir.path().join("run");
    let o = tprf(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert!(csv.starts_with("# omega_minus_omega_d_over_2pi_MHz, psd\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 1024 - 1);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap())
            .unwrap();
    for key in [
        "params",
        "dressed_frequencies_MHz",
        "steady_populations_dressed",
        "flux_over_gamma",
        "g2_zero",
        "warnings",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn default_stem_is_config_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "scenario.json", MOLLOW);
    assert_eq!(tprf(&["spectrum", "--config", &cfg]).status.code(), Some(0));
    assert!(dir.path().join("scenario.csv").exists());
}

#[test]
fn config_errors_exit_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"params": {"alpha_mhz": -233, "omega_mhz": 1, "gamma_mhz": 2.5}, "grid": {"delay_pts": 5}}"#,
    );
    let o = tprf(&["spectrum", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.delay_pts"));

    let missing = tprf(&["g2", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn empty_sweep_grid_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"params": {"alpha_mhz": -233, "omega_mhz": 20, "gamma_mhz": 2.5},
            "sweep": {"variable": "omega", "values": []}}"#,
    );
    let o = tprf(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep.values"));
}

#[test]
fn undriven_ge_g2_is_physics_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        r#"{"params": {"alpha_mhz": -233, "omega_mhz": 0, "gamma_mhz": 2.5}, "line": "GE"}"#,
    );
    let o = tprf(&["g2", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        r#"{"params": {"alpha_mhz": -233, "omega_mhz": 25, "gamma_mhz": 2.5}, "line": "TPRF",
            "grid": {"delay_points": 512}, "filter": {"kind": "boxcar"}}"#,
    );
    let run = |stem: &str| {
        let out = dir.path().join(stem);
        assert_eq!(
            tprf(&["g2", "--config", &cfg, "--out", out.to_str().unwrap()])
                .status
                .code(),
            Some(0)
        );
        (
            std::fs::read(dir.path().join(format!("{stem}.csv"))).unwrap(),
            std::fs::read(dir.path().join(format!("{stem}.json"))).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn echoed_config_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"params": {"alpha_mhz": -233, "omega_mhz": 34.95, "gamma_mhz": 2.5},
            "sweep": {"variable": "delta", "unit": "normalized", "range": {"start": -3, "stop": 3, "points": 7}}}"#,
    );
    let first = dir.path().join("first");
    assert_eq!(
        tprf(&["sweep", "--config", &cfg, "--out", first.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("first.json")).unwrap())
            .unwrap();
    let echo = write(dir.path(), "echo.json", &summary["config"].to_string());
    let second = dir.path().join("second");
    assert_eq!(
        tprf(&[
            "sweep",
            "--config",
            &echo,
            "--out",
            second.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    for ext in ["csv", "json"] {
        assert_eq!(
            std::fs::read(dir.path().join(format!("first.{ext}"))).unwrap(),
            std::fs::read(dir.path().join(format!("second.{ext}"))).unwrap(),
        );
    }
}

#[test]
fn kernel_file_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "taps.txt", "# boxcar\n1\n1\n1\n1\n");
    let step_ns = 20.0 / (std::f64::consts::TAU * 2.5e6) / 511.0 * 1e9;
    let config = |period: f64| {
        format!(
            r#"{{"params": {{"alpha_mhz": -233, "omega_mhz": 25, "gamma_mhz": 2.5}}, "line": "GE",
                "grid": {{"delay_points": 512}},
                "filter": {{"kind": "file", "path": "taps.txt", "sample_period_ns": {period}}}}}"#
        )
    };
    let good = write(dir.path(), "good.json", &config(step_ns));
    let o = tprf(&["g2", "--config", &good]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("good.csv")).unwrap();
    assert!(csv.starts_with("# tau_ns, g2_normalized, g2_filtered\n"));

    let bad = write(dir.path(), "bad.json", &config(0.7 * step_ns));
    assert_eq!(tprf(&["g2", "--config", &bad]).status.code(), Some(3));
}
