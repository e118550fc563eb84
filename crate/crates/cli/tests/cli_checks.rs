//! Schema, round-trip, determinism and exit-code checks for the command
//! line front end.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn blockade() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blockade"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("blockade_cli_{name}_{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

const LIBRARY_NAMES: &[&str] = &[
    "fig2a_arp",
    "fig2b_stirap_delta0",
    "fig2c_stirap_delta200",
    "fig3bc_loading",
    "fig4c_double_stirap_noswitch",
    "fig4d_double_stirap_switch",
    "fig4e_double_arp_flip",
    "fig7a_interference",
    "fig7b_interference_noswitch",
    "fig7c_rabi_ratio",
    "fig7d_cnot_truth_table",
];

#[test]
fn shipped_scenarios_validate() {
    for name in LIBRARY_NAMES {
        let out = blockade().args(["validate", name]).output().unwrap();
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn list_scenarios_names_all() {
    let out = blockade().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in LIBRARY_NAMES {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn empty_file_is_a_parse_error() {
    let dir = tmp_dir("empty");
    let path = dir.join("empty.json");
    fs::write(&path, "").unwrap();
    let out = blockade()
        .args(["validate", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("parse error"), "stderr: {err}");
}

#[test]
fn unknown_keys_are_hard_errors() {
    let dir = tmp_dir("unknown_key");
    let path = dir.join("bad.json");
    fs::write(
        &path,
        r#"{ "name": "x", "kind": "poisson", "poisson": { "nbar": 5.0 }, "frobnicate": 1 }"#,
    )
    .unwrap();
    let out = blockade()
        .args(["validate", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("frobnicate"), "stderr: {err}");
}

#[test]
fn protocol_and_schedule_are_mutually_exclusive() {
    let dir = tmp_dir("exclusive");
    let path = dir.join("both.json");
    fs::write(
        &path,
        r#"{
  "name": "both",
  "kind": "simulate",
  "protocol": { "name": "arp_single", "n_list": [1] },
  "schedule": { "segments": [] },
  "basis": { "levels": [["g0", "r0"]], "n_atoms": [1] }
}"#,
    )
    .unwrap();
    let out = blockade()
        .args(["validate", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mutually exclusive"), "stderr: {err}");
}

#[test]
fn unknown_protocol_name_rejected() {
    let dir = tmp_dir("unknown_proto");
    let path = dir.join("bad.json");
    fs::write(
        &path,
        r#"{ "name": "x", "kind": "simulate", "protocol": { "name": "warp_drive", "n_list": [1] } }"#,
    )
    .unwrap();
    let out = blockade()
        .args(["validate", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warp_drive"));
}

/// Every shipped scenario round-trips: parse → serialize → parse yields an
/// identical Scenario.
#[test]
fn shipped_scenarios_roundtrip() {
    use blockade_cli::scenario::{library_scenario, Scenario};
    for name in LIBRARY_NAMES {
        let text = library_scenario(name).expect("shipped scenario");
        let parsed = Scenario::parse(text).unwrap();
        let serialized = serde_json::to_string_pretty(&parsed).unwrap();
        let reparsed = Scenario::parse(&serialized).unwrap();
        assert_eq!(parsed, reparsed, "{name}");
    }
}

/// Byte-identical CSV for repeated runs of the same scenario.
#[test]
fn deterministic_csv_output() {
    let dir = tmp_dir("determinism");
    let scenario = dir.join("tiny.json");
    fs::write(
        &scenario,
        r#"{
  "name": "tiny",
  "kind": "simulate",
  "protocol": { "name": "arp_single", "n_list": [1, 2] },
  "output": { "sample_dt_us": 0.1, "plot": false }
}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.join(sub);
        let out = blockade()
            .args([
                "run",
                scenario.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
                "--no-plot",
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push(fs::read(out_dir.join("tiny.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "CSV output differs between runs");
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tmp_dir("unwritable");
    let scenario = dir.join("tiny.json");
    fs::write(
        &scenario,
        r#"{
  "name": "tiny",
  "kind": "poisson",
  "poisson": { "nbar": 5.0, "n_max": 5 },
  "output": { "plot": false }
}"#,
    )
    .unwrap();
    // A path under /proc is not writable.
    let out = blockade()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            "/proc/blockade_forbidden",
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn raw_schedule_scenario_runs() {
    let dir = tmp_dir("raw_schedule");
    let scenario = dir.join("raw.json");
    fs::write(
        &scenario,
        r#"{
  "name": "raw",
  "description": "resonant pi pulse on one atom, written as a raw schedule",
  "kind": "simulate",
  "basis": { "levels": [["g0", "r0"]], "n_atoms": [1] },
  "schedule": {
    "segments": [
      {
        "ensemble": 0,
        "from": "g0",
        "to": "r0",
        "envelope": { "kind": "constant", "omega_mhz": 1.0 },
        "phase_rad": 0.0,
        "window_us": [0.0, 0.5]
      }
    ]
  },
  "output": { "sample_dt_us": 0.05, "plot": true }
}"#,
    )
    .unwrap();
    let out_dir = dir.join("out");
    let out = blockade()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(out_dir.join("raw.csv")).unwrap();
    // Final sample of a π pulse: full excitation.
    let last = csv.lines().last().unwrap();
    let p1: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((p1 - 1.0).abs() < 1e-8, "P1 = {p1}");
    assert!(out_dir.join("raw_excitation.svg").exists());
    // Validate subcommand agrees.
    let ok = blockade()
        .args(["validate", scenario.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(ok.status.success());
}

#[test]
fn gate_protocol_scenario_runs() {
    let dir = tmp_dir("gate_proto");
    let scenario = dir.join("load.json");
    fs::write(
        &scenario,
        r#"{
  "name": "load",
  "kind": "protocol",
  "protocol": { "name": "load_single_atom", "n_list": [3] },
  "output": { "sample_dt_us": 0.1, "plot": false }
}"#,
    )
    .unwrap();
    let out_dir = dir.join("out");
    let out = blockade()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(out_dir.join("load.csv")).unwrap();
    let success_line = csv
        .lines()
        .find(|l| l.starts_with("# loading_success_N3"))
        .expect("loading success metadata");
    let value: f64 = success_line
        .split('=')
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(value > 0.99, "loading success {value}");
}

#[test]
fn tol_flag_is_echoed() {
    let dir = tmp_dir("tolflag");
    let scenario = dir.join("tiny.json");
    fs::write(
        &scenario,
        r#"{
  "name": "tiny",
  "kind": "poisson",
  "poisson": { "nbar": 5.0, "n_max": 5 },
  "output": { "plot": false }
}"#,
    )
    .unwrap();
    let out_dir = dir.join("out");
    let out = blockade()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--tol",
            "1e-9",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(out_dir.join("tiny.csv")).unwrap();
    assert!(csv.contains("# rtol = 1e-9"), "{csv}");
}
