use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bilinear"));
    c.env_remove("BILINEAR_OUT");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

const ATOM_SCENARIO: &str = r#"{
  "model": {"builtin": "well"}, "N": 8,
  "control": {"T": 1.0, "density": {"breakpoints": [0, 0.5, 1], "values": [1.0, -0.5]},
              "atoms": [{"t": 0.3, "w": 0.9}]},
  "simulate": {"samples": 11}
}"#;

#[test]
fn free_evolution_keeps_populations() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.json", r#"{"model": {"builtin": "well"}, "N": 8, "T": 1.0}"#);
    let out = run(dir.path(), &["simulate", "--config", "s.json", "--out", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("o/trajectory.csv"));
    assert_eq!(rows.len(), 101);
    for r in &rows {
        assert_eq!(r.len(), 1 + 8 + 2);
        assert!((r[1] - 1.0).abs() < 1e-14);
        assert!(r[2..9].iter().all(|p| p.abs() < 1e-14));
        assert!((r[9] - 1.0).abs() < 1e-14);
    }
}

#[test]
fn atom_sample_reports_post_kick_state() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.json", ATOM_SCENARIO);
    let out = run(dir.path(), &["simulate", "--config", "s.json", "--out", "o"]);
    assert!(out.status.success());
    write(dir.path(), "none.json", &ATOM_SCENARIO.replace(r#"[{"t": 0.3, "w": 0.9}]"#, "[]"));
    assert!(run(dir.path(), &["simulate", "--config", "none.json", "--out", "p"]).status.success());
    let rows = csv_rows(&dir.path().join("o/trajectory.csv"));
    let plain = csv_rows(&dir.path().join("p/trajectory.csv"));
    let at = rows.iter().position(|r| r[0] == 0.3).expect("atom time sampled");
    assert_eq!(rows[..at], plain[..at]);
    // The sample at the atom already carries the kick.
    let moved: f64 = rows[at][1..9].iter().zip(&plain[at][1..9]).map(|(a, b)| (a - b).abs()).sum();
    assert!(moved > 1e-3, "{moved}");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["atoms"], 1);
    assert_eq!(summary["samples"], 11);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = r#"{
      "model": {"builtin": "well"}, "N": 16, "seed": 11,
      "initial": {"random": {"support": 6}},
      "control": {"T": 1.0, "density": {"breakpoints": [0, 0.25, 0.5, 0.75, 1], "values": [1.2, -0.8, 0.6, -1.4]},
                  "atoms": [{"t": 0.6, "w": -0.4}]},
      "steer": {"path": [1, 2, 3], "n": [8, 16]}
    }"#;
    write(dir.path(), "s.json", scenario);
    let files = [
        ("simulate", "trajectory.csv"),
        ("galerkin-sweep", "sweep.csv"),
        ("steer", "steer.csv"),
    ];
    write(
        dir.path(),
        "sweep.json",
        r#"{"model": {"builtin": "well"}, "N": 8,
          "control": {"T": 1.0, "density": {"breakpoints": [0, 0.5, 1], "values": [1.5, -0.5]}},
          "sweep": {"orders": [8, 16, 32], "N_ref": 48, "samples": 5}}"#,
    );
    for (cmd, file) in files {
        let config = if cmd == "galerkin-sweep" { "sweep.json" } else { "s.json" };
        let mut outputs = Vec::new();
        for (i, threads) in ["1", "4", "1"].iter().enumerate() {
            let o = format!("o{cmd}{i}");
            let out = run(dir.path(), &[cmd, "--config", config, "--out", &o, "--threads", threads]);
            assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
            outputs.push(fs::read(dir.path().join(&o).join(file)).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{cmd} differs across thread counts");
        assert_eq!(outputs[0], outputs[2], "{cmd} differs across runs");
    }
}

#[test]
fn seed_flag_overrides_scenario_seed() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = r#"{"model": {"builtin": "well"}, "N": 8, "T": 0.5, "seed": 1,
      "initial": {"random": {"support": 4}}, "simulate": {"samples": 2}}"#;
    write(dir.path(), "s.json", scenario);
    assert!(run(dir.path(), &["simulate", "--config", "s.json", "--out", "a"]).status.success());
    assert!(run(dir.path(), &["simulate", "--config", "s.json", "--out", "b", "--seed", "2"]).status.success());
    let a = fs::read(dir.path().join("a/trajectory.csv")).unwrap();
    let b = fs::read(dir.path().join("b/trajectory.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn invalid_scenarios_exit_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"model": {"builtin": "well"}, "N": 8, "T": 1.0, "extra": true}"#,
        r#"{"model": {"builtin": "nowhere"}, "N": 8, "T": 1.0}"#,
        r#"{"model": {"builtin": "well"}, "N": 8, "T": 1.0, "initial": {"mode": 9}}"#,
        r#"{"model": {"builtin": "well"}, "N": 8, "control": {"T": 1.0, "atoms": [{"t": 2.0, "w": 1.0}]}}"#,
        r#"{"model": {"builtin": "well"}, "N": 8}"#,
        "not json",
    ];
    for (i, text) in cases.iter().enumerate() {
        write(dir.path(), "bad.json", text);
        let out = run(dir.path(), &["simulate", "--config", "bad.json", "--out", "o"]);
        assert_eq!(out.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = run(dir.path(), &["simulate", "--config", "missing.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn commands_need_their_section() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.json", r#"{"model": {"builtin": "well"}, "N": 8, "T": 1.0}"#);
    for cmd in ["estimate", "galerkin-sweep", "steer"] {
        let out = run(dir.path(), &[cmd, "--config", "s.json", "--out", "o"]);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
    }
}

#[test]
fn estimate_writes_passing_certificate() {
    let dir = tempfile::tempdir().unwrap();
    for (i, (k, s)) in [(1.0, 0.5), (2.0, 1.0), (2.0, 2.0)].iter().enumerate() {
        let scenario = format!(
            r#"{{"model": {{"builtin": "well"}}, "N": 16,
              "control": {{"T": 1.0, "density": {{"breakpoints": [0, 1], "values": [2.0]}}, "atoms": [{{"t": 0.5, "w": 1.5}}]}},
              "estimate": {{"k": {k}, "s": {s}}}}}"#
        );
        write(dir.path(), "e.json", &scenario);
        let o = format!("o{i}");
        let out = run(dir.path(), &["estimate", "--config", "e.json", "--out", &o]);
        assert_eq!(out.status.code(), Some(0));
        let cert: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(&o).join("certificate.json")).unwrap()).unwrap();
        assert_eq!(cert["pass"], true);
        assert!(cert["observed"].as_f64().unwrap() <= cert["bound"].as_f64().unwrap());
        assert_eq!(cert["tv"].as_f64().unwrap(), 3.5);
    }
}

#[test]
fn sweep_decreases_on_the_well() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = r#"{"model": {"builtin": "well"}, "N": 8,
      "control": {"T": 1.0, "density": {"breakpoints": [0, 0.5, 1], "values": [1.0, -1.0]}},
      "sweep": {"orders": [8, 16, 32], "N_ref": 64, "samples": 5}}"#;
    write(dir.path(), "s.json", scenario);
    let out = run(dir.path(), &["galerkin-sweep", "--config", "s.json", "--out", "o"]);
    assert!(out.status.success());
    let rows = csv_rows(&dir.path().join("o/sweep.csv"));
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![8.0, 16.0, 32.0]);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
}

#[test]
fn steering_fidelity_improves_with_repetitions() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = r#"{"model": {"builtin": "well"}, "N": 16, "T": 1.0,
      "steer": {"path": [1, 2], "n": [4, 16, 64]}}"#;
    write(dir.path(), "s.json", scenario);
    let out = run(dir.path(), &["steer", "--config", "s.json", "--out", "o"]);
    assert!(out.status.success());
    let rows = csv_rows(&dir.path().join("o/steer.csv"));
    assert!(rows.windows(2).all(|w| w[1][2] > w[0][2]));
    assert!(rows[2][2] > 0.95);
    let plan: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/steer.json")).unwrap()).unwrap();
    assert_eq!(plan["best_n"], 64);
}

#[test]
fn verify_list_and_unknown_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--list", "--out", "o"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.lines().any(|l| l.starts_with("unitarity")));
    assert!(!dir.path().join("o").exists());
    let out = run(dir.path(), &["verify", "no-such-suite", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_runs_a_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "matrix-elements", "reversibility", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/verify.json")).unwrap()).unwrap();
    assert_eq!(report.as_array().unwrap().len(), 2);
}

#[test]
fn exported_model_round_trips_through_a_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["models", "export", "well", "--n", "8", "--out", "m"]);
    assert!(out.status.success());
    write(
        dir.path(),
        "file.json",
        &ATOM_SCENARIO.replace(r#"{"builtin": "well"}"#, r#"{"file": "m/well.json"}"#),
    );
    write(dir.path(), "builtin.json", ATOM_SCENARIO);
    assert!(run(dir.path(), &["simulate", "--config", "file.json", "--out", "a"]).status.success());
    assert!(run(dir.path(), &["simulate", "--config", "builtin.json", "--out", "b"]).status.success());
    let a = csv_rows(&dir.path().join("a/trajectory.csv"));
    let b = csv_rows(&dir.path().join("b/trajectory.csv"));
    for (x, y) in a.iter().zip(&b) {
        for (p, q) in x.iter().zip(y) {
            assert!((p - q).abs() < 1e-12);
        }
    }
    let out = run(dir.path(), &["models", "export", "nothing", "--out", "m"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_dir_comes_from_environment_when_flag_absent() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .env("BILINEAR_OUT", "from-env")
        .args(["models", "export", "well"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from-env/well.json").exists());
}
