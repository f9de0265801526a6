use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pointdamp"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn undamped_spectrum_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "spectrum", "--a", "1", "--b", "1", "--alpha", "0", "--xi", "0.7071", "--n-max", "8",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let spec = read_json(&dir.path().join("spectrum.json"));
    assert_eq!(spec["eigenvalues"].as_array().unwrap().len(), 16);
    assert!((spec["abscissa"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    assert!(stdout(&o).contains("eigenvalues: 16"));
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn damped_spectrum_is_audited() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["spectrum", "--alpha", "0.05"]);
    assert!(o.status.success());
    let spec = read_json(&dir.path().join("spectrum.json"));
    for e in spec["eigenvalues"].as_array().unwrap() {
        assert!(e["point"]["residual"].as_f64().unwrap() <= 1e-10);
    }
}

#[test]
fn invalid_attachment_point_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["spectrum", "--xi", "1.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("xi"));
}

#[test]
fn unknown_config_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"a": 1.0, "gamma": 3}"#).unwrap();
    let o = run(dir.path(), &["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic_and_replayable() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let d3 = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--alpha", "0.1", "--xi", "0.3", "--n-max", "5"];
    assert!(run(d1.path(), &args).status.success());
    assert!(run(d2.path(), &args).status.success());
    let cfg = d1.path().join("config.json");
    assert!(
        run(d3.path(), &["spectrum", "--config", cfg.to_str().unwrap()])
            .status
            .success()
    );
    let a = std::fs::read(d1.path().join("spectrum.json")).unwrap();
    assert_eq!(a, std::fs::read(d2.path().join("spectrum.json")).unwrap());
    assert_eq!(a, std::fs::read(d3.path().join("spectrum.json")).unwrap());
    assert_eq!(
        std::fs::read(d1.path().join("spectrum.csv")).unwrap(),
        std::fs::read(d3.path().join("spectrum.csv")).unwrap()
    );
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("in.json");
    std::fs::write(&cfg, r#"{"alpha": 0.2, "n_max": 3}"#).unwrap();
    let o = run(
        dir.path(),
        &[
            "spectrum",
            "--config",
            cfg.to_str().unwrap(),
            "--n-max",
            "4",
        ],
    );
    assert!(o.status.success());
    let eff = read_json(&dir.path().join("config.json"));
    assert_eq!(eff["alpha"].as_f64(), Some(0.2));
    assert_eq!(eff["n_max"].as_u64(), Some(4));
}

#[test]
fn sweep_over_zero_damping_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "sweep", "--alphas", "0", "--xis", "0.3,0.6", "--format", "json",
        ],
    );
    assert!(o.status.success());
    let s = read_json(&dir.path().join("sweep.json"));
    for row in s["rows"].as_array().unwrap() {
        assert!((row["abscissa"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    }
}

#[test]
fn sweep_in_b_increases_toward_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["sweep", "--alpha", "0", "--bs", "25,50,100", "--jobs", "2"],
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let ab: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ab.len(), 3);
    assert!(ab[0] < ab[1] && ab[1] < ab[2] && ab[2] < 0.0);
}

#[test]
fn simulate_writes_trajectory_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "simulate", "--alpha", "0.05", "--modes", "4", "--time", "20",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("decay fit within 5% of abscissa: yes"));
    let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,energy,u_t_xi,c1,c2,c3,c4"));
    let s = read_json(&dir.path().join("simulation.json"));
    assert!(s["fitted_omega"].as_f64().unwrap() < 0.0);
}

#[test]
fn eigenfunction_passes_its_residual_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "eigenfunction",
            "--alpha",
            "0.05",
            "--mode",
            "1",
            "--sign",
            "+",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("residual suite within tolerance: yes"));
    let csv = std::fs::read_to_string(dir.path().join("eigenfunction.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1026);
}

#[test]
fn resolvent_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "resolvent",
            "--alpha",
            "0.05",
            "--mu-re",
            "1",
            "--mu-im",
            "1",
        ],
    );
    assert!(o.status.success());
    let r = read_json(&dir.path().join("resolvent.json"));
    assert!(r["diagnostics"]["ode_residual"].as_f64().unwrap() <= 1e-3);
    assert!(r["diagnostics"]["jump_error"].as_f64().unwrap() <= 1e-3);
}

#[test]
fn resolvent_at_an_eigenvalue_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    // -b/2 + i sqrt(4 pi^4 - 1)/2 is an undamped eigenvalue
    let im = (4.0 * std::f64::consts::PI.powi(4) - 1.0).sqrt() / 2.0;
    let o = run(
        dir.path(),
        &[
            "resolvent",
            "--alpha",
            "0",
            "--mu-re",
            "-0.5",
            "--mu-im",
            &im.to_string(),
        ],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn riesz_and_critical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "riesz", "--alpha", "0.05", "--n0", "2", "--n-max", "8", "--grid", "512",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    assert!(read_json(&dir.path().join("riesz.json"))["entries"].is_array());
    let o = run(dir.path(), &["critical", "--b", "10", "--xi", "0.3"]);
    assert!(o.status.success());
    let c = read_json(&dir.path().join("critical.json"));
    assert!((c["critical"]["alpha"].as_f64().unwrap() - 10.331233941133895).abs() < 1e-9);
    let o = run(dir.path(), &["riesz", "--n0", "9", "--n-max", "8"]);
    assert_eq!(o.status.code(), Some(2));
}
