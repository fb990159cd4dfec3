use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use spectrans::formats::parse_coo;
use spectrans_core::{LatticeDomain, PotentialSpec, SparseHermitianOperator};

const SMALL: &str = r#"
[green-check]
triples = 40
wronskian_pairs = 10
resolvent_triples = 6

[kls-exponent]
n_max = 20000
seeds = { count = 8, base = 3 }

[stark-envelope]
energies = [0.0]
x_max = 2000.0
"#;

fn spectrans(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectrans")).args(args).env("SPECTRANS_OUT", out).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Artifact directory printed on the last stdout line.
fn artifact_dir(out: &Output) -> PathBuf {
    PathBuf::from(String::from_utf8_lossy(&out.stdout).lines().last().expect("stdout").trim())
}

#[test]
fn tables_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    for experiment in ["green-check", "kls-exponent"] {
        let runs: Vec<Output> = ["1", "2"]
            .iter()
            .map(|jobs| spectrans(&[experiment, "--config", cfg.to_str().unwrap(), "--jobs", jobs], &tmp.path().join(format!("j{jobs}"))))
            .collect();
        let dirs: Vec<PathBuf> = runs.iter().map(artifact_dir).collect();
        assert_eq!(dirs[0].file_name(), dirs[1].file_name(), "run id is derived from the config");
        let a = fs::read(dirs[0].join("data.csv")).unwrap();
        let b = fs::read(dirs[1].join("data.csv")).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{experiment}: data.csv differs between --jobs 1 and 2");

        let summary: Value = serde_json::from_slice(&fs::read(dirs[0].join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["experiment"], experiment);
        assert!(summary["gates"].as_array().is_some_and(|g| !g.is_empty()));
        assert_eq!(summary["all_passed"].as_bool().unwrap(), runs[0].status.code() == Some(0));
    }
}

#[test]
fn seed_override_changes_run_id_and_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let base = spectrans(&["kls-exponent", "--config", cfg.to_str().unwrap()], tmp.path());
    let other = spectrans(&["kls-exponent", "--config", cfg.to_str().unwrap(), "--seed-override", "77"], tmp.path());
    let (a, b) = (artifact_dir(&base), artifact_dir(&other));
    assert_ne!(a, b);
    assert_ne!(fs::read(a.join("data.csv")).unwrap(), fs::read(b.join("data.csv")).unwrap());
}

#[test]
fn passing_and_failing_gates_set_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = write_config(tmp.path(), "ok.toml", SMALL);
    let out = spectrans(&["stark-envelope", "--config", ok.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS slope E=0"));

    let bad = write_config(tmp.path(), "bad.toml", &format!("{SMALL}target = 0.5\n"));
    let out = spectrans(&["stark-envelope", "--config", bad.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL slope E=0"));
    let summary: Value = serde_json::from_slice(&fs::read(artifact_dir(&out).join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["all_passed"], false);
    assert!(summary["failed_gates"].as_array().unwrap().iter().any(|g| g == "slope E=0"));
}

#[test]
fn configuration_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.toml", "[growth]\nenergy_count = 3\nfrobnicate = 1\n"),
        ("syntax.toml", "[growth\n"),
        ("range.toml", "[growth]\nr_min = 100.0\nr_max = 10.0\n"),
        ("empty-seeds.toml", "[kls-exponent]\nseeds = []\n"),
    ];
    for (name, text) in cases {
        let cfg = write_config(tmp.path(), name, text);
        let experiment = if name == "empty-seeds.toml" { "kls-exponent" } else { "growth" };
        let out = spectrans(&[experiment, "--config", cfg.to_str().unwrap()], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn numerical_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    // the light cone leaves a 60-site half-line long before T = 100
    let text = r#"
[[transport.case]]
name = "short"
domain = { kind = "half-line", length = 60 }
potential = { kind = "free" }
t_first = 10.0
t_last = 100.0
t_count = 5
"#;
    let cfg = write_config(tmp.path(), "cone.toml", text);
    let out = spectrans(&["transport", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn export_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "export.toml", "[export]\ndomain = { kind = \"spiral\", turns = 3 }\npotential = { kind = \"anderson\", disorder = 2.0 }\nseed = 9\n");
    let out = spectrans(&["export", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = artifact_dir(&out);
    assert!(dir.starts_with(tmp.path().join("export")));

    let domain = LatticeDomain::build_spiral(3).unwrap();
    let op = SparseHermitianOperator::assemble(&domain, &PotentialSpec::Anderson { disorder: 2.0, seed: 9 }).unwrap();
    let text = fs::read_to_string(dir.join("operator.coo")).unwrap();
    assert!(text.starts_with("1 1 "), "indices are 1-based on disk");
    let parsed = parse_coo(&text).unwrap();
    let mut expected: Vec<(usize, usize, f64)> = op.triplets().collect();
    expected.sort_by_key(|e| (e.0, e.1));
    assert_eq!(parsed.len(), expected.len());
    for (a, b) in parsed.iter().zip(&expected) {
        assert_eq!((a.0, a.1), (b.0, b.1));
        assert_eq!(a.2.to_bits(), b.2.to_bits());
    }

    let desc: Value = serde_json::from_slice(&fs::read(dir.join("domain.json")).unwrap()).unwrap();
    assert_eq!(desc["generator"], "spiral");
    assert_eq!(desc["parameters"]["turns"], 3);
    assert_eq!(desc["sites"], domain.len());
    assert_eq!(desc["edges"], domain.edge_count());
}
