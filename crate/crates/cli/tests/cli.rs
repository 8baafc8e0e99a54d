use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: [&str; 4] = ["--override", "trials_per_cell=6", "--override", "resamples=300"];

fn smithian(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smithian"))
        .args(args)
        .env_remove("SMITHIAN_OUT_DIR")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn run_small(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    args.extend(extra);
    let o = smithian(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    fs::read(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

#[test]
fn run_writes_every_artifact() {
    let dir = TempDir::new().unwrap();
    run_small(dir.path(), &[]);
    for name in ["trials.csv", "stats.json", "figure2.csv", "manifest.json"] {
        assert!(dir.path().join(name).is_file(), "missing {name}");
    }
    assert!(!dir.path().join("trace.csv").exists());
    let trials = String::from_utf8(read(dir.path().join("trials.csv"))).unwrap();
    assert_eq!(trials.lines().count(), 1 + 3 * 5 * 6);
    let figure = String::from_utf8(read(dir.path().join("figure2.csv"))).unwrap();
    assert_eq!(figure.lines().next().unwrap(), "cost,condition,mean_reward,ci_low,ci_high,upper_bound");
    assert_eq!(figure.lines().count(), 1 + 15);
}

#[test]
fn manifest_materializes_every_default() {
    let dir = TempDir::new().unwrap();
    run_small(dir.path(), &["--seed", "31"]);
    let manifest: serde_json::Value = serde_json::from_slice(&read(dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "run");
    let plan = &manifest["plan"];
    for key in
        ["conditions", "costs", "trials_per_cell", "master_seed", "alpha", "discount", "max_steps", "shooting", "solver", "stats_seed", "resamples", "ci_level"]
    {
        assert!(!plan[key].is_null(), "manifest lacks {key}");
    }
    for key in ["belief_points", "expansion_rounds", "max_backups", "tolerance", "seed"] {
        assert!(!plan["solver"][key].is_null(), "manifest lacks solver.{key}");
    }
    assert_eq!(plan["master_seed"], 31);
    assert_eq!(plan["trials_per_cell"], 6);
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let first = TempDir::new().unwrap();
    run_small(first.path(), &["--seed", "5"]);
    let second = TempDir::new().unwrap();
    let manifest = first.path().join("manifest.json");
    let o = smithian(&["run", "--plan", manifest.to_str().unwrap(), "--out", second.path().to_str().unwrap(), "--jobs", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["trials.csv", "stats.json", "figure2.csv"] {
        assert_eq!(read(first.path().join(name)), read(second.path().join(name)), "{name} differs");
    }
}

#[test]
fn stats_reproduces_the_run_report() {
    let dir = TempDir::new().unwrap();
    run_small(dir.path(), &[]);
    let original = read(dir.path().join("stats.json"));
    fs::remove_file(dir.path().join("stats.json")).unwrap();
    let o = smithian(&["stats", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(dir.path().join("stats.json")), original);

    let figure = read(dir.path().join("figure2.csv"));
    fs::remove_file(dir.path().join("figure2.csv")).unwrap();
    assert!(smithian(&["plot-data", "--out", dir.path().to_str().unwrap()]).status.success());
    assert_eq!(read(dir.path().join("figure2.csv")), figure);
}

#[test]
fn stats_seed_changes_only_the_intervals() {
    let dir = TempDir::new().unwrap();
    run_small(dir.path(), &[]);
    let before: serde_json::Value = serde_json::from_slice(&read(dir.path().join("stats.json"))).unwrap();
    let o = smithian(&["stats", "--out", dir.path().to_str().unwrap(), "--override", "stats_seed=99"]);
    assert!(o.status.success());
    let after: serde_json::Value = serde_json::from_slice(&read(dir.path().join("stats.json"))).unwrap();
    assert_eq!(before["anova"], after["anova"]);
    assert_ne!(before["cells"], after["cells"]);
}

#[test]
fn trace_reports_signal_diagnostics() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = smithian(&["trace", "--condition", "pragmatic", "--cost", "-5", "--seed", "7", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(read(dir.path().join("trace.csv"))).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    for col in ["svi_point", "svi_no_point", "p_point", "signal", "belief_before", "belief_after"] {
        assert!(header.contains(&col), "missing {col}");
    }
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.starts_with("pragmatic,-5.0,7,")));
    let manifest: serde_json::Value = serde_json::from_slice(&read(dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["trace"]["seed"], 7);

    let again = TempDir::new().unwrap();
    smithian(&["trace", "--condition", "pragmatic", "--cost", "-5", "--seed", "7", "--out", again.path().to_str().unwrap()]);
    assert_eq!(read(again.path().join("trace.csv")), text.into_bytes());
}

#[test]
fn run_trace_flag_writes_trace_file() {
    let dir = TempDir::new().unwrap();
    run_small(dir.path(), &["--trace"]);
    let text = String::from_utf8(read(dir.path().join("trace.csv"))).unwrap();
    assert!(text.lines().next().unwrap().contains("svi_point"));
}

#[test]
fn solve_caches_policies_for_later_runs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(smithian(&["solve", "--out", out, "--override", "costs=-2,-4"]).status.success());
    let files: Vec<String> = fs::read_dir(dir.path().join("policies"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(files.len(), 2);
    assert!(files.iter().all(|f| f.starts_with("v1-") && f.ends_with(".json")));

    let mut args = vec!["run", "--out", out, "--override", "costs=-2,-4"];
    args.extend(SMALL);
    let o = smithian(&args);
    assert!(o.status.success());
    let log = String::from_utf8_lossy(&o.stderr);
    assert_eq!(log.matches("reusing").count(), 2, "{log}");
    assert!(!log.contains("solving"), "{log}");

    // different solver settings must not hit the same entries
    let o = smithian(&["solve", "--out", out, "--override", "costs=-2,-4", "--override", "solver.seed=1"]);
    assert!(o.status.success());
    assert_eq!(fs::read_dir(dir.path().join("policies")).unwrap().count(), 4);
}

#[test]
fn out_dir_defaults_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_smithian"))
        .args(["trace", "--condition", "baseline", "--cost", "-3", "-q"])
        .env("SMITHIAN_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("trace.csv").is_file());
}

#[test]
fn unknown_override_key_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = smithian(&["run", "--out", dir.path().to_str().unwrap(), "--override", "temperature=3"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("temperature"));
    for key in ["alpha", "discount", "shooting", "trials_per_cell", "solver.belief_points"] {
        assert!(err.contains(key), "valid keys not listed: {err}");
    }
    assert!(err.contains("Usage"));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn malformed_input_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(smithian(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(smithian(&["run", "--out", out, "--override", "alpha"]).status.code(), Some(1));
    assert_eq!(smithian(&["run", "--out", out, "--override", "alpha=-1"]).status.code(), Some(1));
    assert_eq!(smithian(&["trace", "--condition", "telepathic", "--cost", "-1", "--out", out]).status.code(), Some(1));

    let plan = dir.path().join("bad.plan");
    fs::write(&plan, "costs = -1, -3\nnot_a_key = 4\n").unwrap();
    assert_eq!(smithian(&["solve", "--plan", plan.to_str().unwrap(), "--out", out]).status.code(), Some(1));

    // missing input is a runtime failure
    let o = smithian(&["stats", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials.csv"));
    assert!(smithian(&["--help"]).status.success());
}

#[test]
fn key_value_plan_files_are_accepted() {
    let dir = TempDir::new().unwrap();
    let plan = dir.path().join("tiny.plan");
    fs::write(&plan, "# two costs, two conditions\nconditions = baseline, pragmatic\ncosts = -1, -9\ntrials_per_cell = 4\nresamples = 100\n").unwrap();
    let out = dir.path().join("out");
    let o = smithian(&["run", "--plan", plan.to_str().unwrap(), "--out", out.to_str().unwrap(), "-q"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stderr.is_empty(), "quiet run logged: {}", String::from_utf8_lossy(&o.stderr));
    let trials = String::from_utf8(read(out.join("trials.csv"))).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 2 * 4);
}
