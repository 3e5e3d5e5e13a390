//! End-to-end tests of the command-line harness: file round trips,
//! determinism, exit codes, and the preset machinery.

use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::tempdir;

use uzawa_cli::commands::{cmd_diagnose, cmd_generate, cmd_ns, cmd_solve};
use uzawa_cli::config::{ExperimentConfig, ProblemSpec};
use uzawa_cli::presets::preset;
use uzawa_cli::CliError;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uzawa"))
}

fn synthetic_config_json() -> String {
    r#"{
        "problem": {"type": "synthetic", "n": 10, "m": 4,
                    "target_alpha": 1.2, "skew_strength": 1.0,
                    "d_rank": 1, "seed": 7},
        "runs": [
            {"label": "adaptive", "uzawa": {"algorithm": "exact_uzawa", "tol": 1e-10, "max_iter": 2000}}
        ]
    }"#
    .to_string()
}

#[test]
fn generate_round_trips_bitwise() {
    let dir = tempdir().unwrap();
    let cfg: ExperimentConfig = serde_json::from_str(&synthetic_config_json()).unwrap();
    let out = dir.path().join("gen");
    let paths = cmd_generate(&cfg, &out).unwrap();
    assert_eq!(paths.len(), 5);

    // reload through the files problem and compare with a fresh generation
    let reload = ProblemSpec::Files {
        a: out.join("a.mtx"),
        b: out.join("b.mtx"),
        d: out.join("d.mtx"),
        f: out.join("f.vec"),
        g: out.join("g.vec"),
    };
    let sys1 = cfg.problem.build().unwrap();
    let sys2 = reload.build().unwrap();
    assert_eq!(sys1.a(), sys2.a());
    assert_eq!(sys1.b(), sys2.b());
    assert_eq!(sys1.d(), sys2.d());
    assert_eq!(sys1.f(), sys2.f());
    assert_eq!(sys1.g(), sys2.g());
}

#[test]
fn generate_is_deterministic() {
    let dir = tempdir().unwrap();
    let cfg: ExperimentConfig = serde_json::from_str(&synthetic_config_json()).unwrap();
    let out1 = dir.path().join("g1");
    let out2 = dir.path().join("g2");
    cmd_generate(&cfg, &out1).unwrap();
    cmd_generate(&cfg, &out2).unwrap();
    for name in ["a.mtx", "b.mtx", "d.mtx", "f.vec", "g.vec"] {
        let b1 = fs::read(out1.join(name)).unwrap();
        let b2 = fs::read(out2.join(name)).unwrap();
        assert_eq!(b1, b2, "{name} differs between runs");
    }
}

#[test]
fn generated_oseen_has_expected_row_counts() {
    let dir = tempdir().unwrap();
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{"problem": {"type": "oseen", "grid_n": 8, "nu": 1.0}, "runs": []}"#,
    )
    .unwrap();
    let out = dir.path().join("gen");
    cmd_generate(&cfg, &out).unwrap();
    let a = uzawa::linalg::io::read_matrix_market_file(out.join("a.mtx")).unwrap();
    let b = uzawa::linalg::io::read_matrix_market_file(out.join("b.mtx")).unwrap();
    // 2 * (edge counts) velocity rows; cell count - 1 pressure columns
    assert_eq!(a.n_rows(), 2 * 8 * 7);
    assert_eq!(b.n_rows(), 2 * 8 * 7);
    assert_eq!(b.n_cols(), 8 * 8 - 1);
    let f = uzawa::linalg::io::read_vector_text_file(out.join("f.vec")).unwrap();
    assert_eq!(f.len(), 2 * 8 * 7);
}

#[test]
fn empty_runs_is_a_config_error() {
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{"problem": {"type": "oseen", "grid_n": 8, "nu": 1.0}, "runs": []}"#,
    )
    .unwrap();
    let dir = tempdir().unwrap();
    match cmd_solve(&cfg, dir.path()) {
        Err(CliError::Config(msg)) => assert!(msg.contains("no runs configured")),
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn solve_writes_traces_and_summary() {
    let dir = tempdir().unwrap();
    let cfg: ExperimentConfig = serde_json::from_str(&synthetic_config_json()).unwrap();
    let out = dir.path().join("solve");
    let summary = cmd_solve(&cfg, &out).unwrap();
    assert_eq!(summary.rows.len(), 1);
    assert!(!summary.any_solver_failure());
    assert!(out.join("adaptive.jsonl").exists());
    assert!(out.join("adaptive.csv").exists());
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(csv.lines().count() == 2);
    // iteration count in the summary equals the trace record count - 1
    let trace = fs::read_to_string(out.join("adaptive.jsonl")).unwrap();
    let iters: usize = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(trace.lines().count(), iters + 1);
}

#[test]
fn diagnose_reports_and_respects_cap() {
    // a symmetric problem (zero wind) must report alpha = 1
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{"problem": {"type": "oseen", "grid_n": 8, "nu": 1.0,
                         "wind": {"constant": {"wx": 0.0, "wy": 0.0}}},
            "runs": []}"#,
    )
    .unwrap();
    let value = cmd_diagnose(&cfg, None).unwrap();
    let report = &value["report"];
    assert!((report["alpha"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    // beta_k = (kappa_k - 1)/(kappa_k + 1) exactly
    for k in 1..=3 {
        let kappa = report[format!("kappa{k}")].as_f64().unwrap();
        let beta = report[format!("beta{k}")].as_f64().unwrap();
        assert_eq!(beta, (kappa - 1.0) / (kappa + 1.0));
    }
    assert!(value["verdicts"].as_array().unwrap().len() >= 2);

    // a tiny cap produces the explained partial report
    let mut capped = cfg;
    capped.dense_cap = Some(4);
    let value = cmd_diagnose(&capped, None).unwrap();
    assert!(value["report"].is_null());
    assert!(value["explanation"]
        .as_str()
        .unwrap()
        .contains("dense workspace limit"));
}

#[test]
fn diagnose_measures_synthetic_target_alpha() {
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{"problem": {"type": "synthetic", "n": 20, "m": 6,
                         "target_alpha": 2.0, "skew_strength": 1.0,
                         "d_rank": 0, "seed": 3}, "runs": []}"#,
    )
    .unwrap();
    let value = cmd_diagnose(&cfg, None).unwrap();
    let alpha = value["report"]["alpha"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&alpha), "alpha = {alpha}");
}

#[test]
fn ns_with_unit_outer_tol_does_one_picard_step() {
    let dir = tempdir().unwrap();
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{
            "problem": {"type": "oseen", "grid_n": 8, "nu": 1.0},
            "runs": [{"label": "adaptive",
                      "uzawa": {"algorithm": "inexact_uzawa", "tol": 1e-8}}],
            "picard": {"outer_tol": 1.0, "max_picard": 10},
            "export_fields": true
        }"#,
    )
    .unwrap();
    let summary = cmd_ns(&cfg, dir.path()).unwrap();
    assert_eq!(summary.rows[0].picard_iters, 1);
    assert!(dir.path().join("adaptive_picard.csv").exists());
    for name in ["u.csv", "v.csv", "p.csv"] {
        assert!(dir.path().join("adaptive_fields").join(name).exists());
    }
}

#[test]
fn binary_exit_codes() {
    // missing config/preset -> configuration error (1)
    let out = bin().arg("solve").output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // unknown preset -> 1
    let out = bin().args(["solve", "--preset", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // preset of the wrong command kind -> 1
    let out = bin().args(["ns", "--preset", "figure1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // unreadable config -> 3
    let out = bin()
        .args(["solve", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // a healthy run -> 0
    let dir = tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, synthetic_config_json()).unwrap();
    let out = bin()
        .args(["solve", "--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Strip the wall-clock column, the one nondeterministic field.
fn strip_wall(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .map(|l| {
            if let Some(pos) = l.find(",\"wall_ns\"") {
                &l[..pos]
            } else if let Some(pos) = l.rfind(',') {
                &l[..pos]
            } else {
                l
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn preset_runs_are_reproducible_modulo_wall_clock() {
    // a scaled-down version of the residual-curve experiment: same problem
    // family, two preconditioners, small grid
    let cfg_json = r#"{
        "problem": {"type": "oseen", "grid_n": 8, "nu": 1.0,
                     "pressure_fix": "project_constants"},
        "runs": [
            {"label": "jacobi", "uzawa": {"algorithm": "inexact_uzawa",
                "a_precond": {"kind": "jacobi"}, "tol": 1e-6, "max_iter": 20000}},
            {"label": "ic", "uzawa": {"algorithm": "inexact_uzawa",
                "a_precond": {"kind": "ic_droptol", "droptol": 0.1}, "tol": 1e-6, "max_iter": 20000}}
        ]
    }"#;
    let cfg: ExperimentConfig = serde_json::from_str(cfg_json).unwrap();
    let dir = tempdir().unwrap();
    let out1 = dir.path().join("r1");
    let out2 = dir.path().join("r2");
    cmd_solve(&cfg, &out1).unwrap();
    cmd_solve(&cfg, &out2).unwrap();
    for label in ["jacobi", "ic"] {
        for ext in ["jsonl", "csv"] {
            let f1 = strip_wall(&out1.join(format!("{label}.{ext}")));
            let f2 = strip_wall(&out2.join(format!("{label}.{ext}")));
            assert_eq!(f1, f2, "{label}.{ext} not reproducible");
        }
    }
}

#[test]
fn presets_are_defined_and_well_formed() {
    for name in ["figure1", "table1", "table2", "table3", "figure2"] {
        let p = preset(name).unwrap();
        assert!(!p.configs.is_empty(), "{name} has no configs");
        for (_, cfg) in &p.configs {
            cfg.validate(true).unwrap();
        }
    }
    assert!(preset("table9").is_err());
}
