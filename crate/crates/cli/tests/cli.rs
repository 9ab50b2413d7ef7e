use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use palmshift_cli::{from_json_line, Outcome, CSV_HEADER};

fn experiments() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments")
}

fn palmshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_palmshift"))
        .args(args)
        .env_remove("PALMSHIFT_THREADS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL_FLOW: &str = r#"
experiment = "mass-flow"
model.kind = "euclidean"
window.kind = "interval"
window.lo = -20.0
window.hi = 20.0
shift.kind = "nearest_neighbor"
n_samples = 2000
seed = 9
"#;

#[test]
fn mass_flow_example_means_near_one() {
    let path = experiments().join("mass_flow_right_neighbor.toml");
    let out = palmshift(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let r = from_json_line(text.trim_end()).unwrap();
    assert_eq!(r.kind, "mass-flow");
    assert_eq!(r.seed, 42);
    assert_eq!(r.statistics.len(), 2);
    for s in &r.statistics {
        assert_eq!(s.verdict, Outcome::Consistent);
        assert!((0.97..=1.03).contains(&s.estimate), "{s:?}");
    }
}

#[test]
fn same_seed_gives_identical_bytes_for_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "flow.toml", SMALL_FLOW);
    let cfg = cfg.to_str().unwrap();
    let a = palmshift(&["run", cfg, "--threads", "1"]);
    let b = palmshift(&["run", cfg, "--threads", "4"]);
    let c = Command::new(env!("CARGO_BIN_EXE_palmshift"))
        .args(["run", cfg])
        .env("PALMSHIFT_THREADS", "3")
        .output()
        .unwrap();
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "flow.toml", SMALL_FLOW);
    let cfg = cfg.to_str().unwrap();
    let base = palmshift(&["run", cfg]);
    let other = palmshift(&["run", cfg, "--seed", "10"]);
    assert_ne!(base.stdout, other.stdout);
    let r = from_json_line(String::from_utf8(other.stdout).unwrap().trim_end()).unwrap();
    assert_eq!(r.seed, 10);
    assert_eq!(r.config["seed"], "10");
}

#[test]
fn csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "flow.toml", SMALL_FLOW);
    let out_path = dir.path().join("report.csv");
    let out = palmshift(&[
        "run",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("flow,modular_inverse_image,"));
    assert!(lines[1].ends_with(",consistent,0,2000,9"));
}

#[test]
fn json_lines_parse_back_and_timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.toml", SMALL_FLOW);
    write(dir.path(), "b.toml", &SMALL_FLOW.replace("seed = 9", "seed = 8\nname = \"second\""));
    write(dir.path(), "ignored.txt", "not a config");
    let out = palmshift(&["run", dir.path().to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let records: Vec<_> = text.lines().map(|l| from_json_line(l).unwrap()).collect();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].name, "a");
    assert_eq!(records[1].name, "second");
    assert!(records.iter().all(|r| r.duration_secs.is_none()));
    for (line, r) in text.lines().zip(&records) {
        assert_eq!(palmshift_cli::to_json_line(r), line);
    }
    let timed = palmshift(&["run", dir.path().to_str().unwrap(), "--timing"]);
    let first = String::from_utf8(timed.stdout).unwrap();
    assert!(from_json_line(first.lines().next().unwrap()).unwrap().duration_secs.is_some());
}

#[test]
fn inconsistent_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "strip.toml",
        r#"
experiment = "mecke"
model.kind = "ax_b"
window.kind = "cone"
window.slope = 1.5
window.a_lo = 0.2
window.a_hi = 1000.0
shift.kind = "strip"
shift.delta = 0.1
shift.a_max = 100.0
n_samples = 5000
seed = 5
"#,
    );
    let out = palmshift(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = from_json_line(String::from_utf8(out.stdout).unwrap().trim_end()).unwrap();
    assert!(r.statistics.iter().any(|s| s.verdict == Outcome::Fail));
}

#[test]
fn config_errors_exit_two_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown_key.toml", format!("{SMALL_FLOW}\nshift.delta = 0.1\n"), "shift.delta"),
        ("bad_kind.toml", SMALL_FLOW.replace("mass-flow", "mass-flux"), "mass-flux"),
        ("bad_combo.toml", SMALL_FLOW.replace("nearest_neighbor", "strip\nshift.delta = 0.1"), "shift"),
        ("no_shift.toml", SMALL_FLOW.replace("shift.kind = \"nearest_neighbor\"", ""), "shift.kind"),
        ("syntax.toml", "experiment = ".to_string(), "syntax.toml"),
    ];
    for (name, text, needle) in cases {
        let cfg = write(dir.path(), name, &text);
        let out = palmshift(&["run", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(needle), "{name}: {err}");
    }
    let missing = palmshift(&["run", "/nonexistent/palmshift.toml"]);
    assert_eq!(missing.status.code(), Some(2));
    let usage = palmshift(&["run"]);
    assert_eq!(usage.status.code(), Some(2));
    let bad_format = palmshift(&["run", "x.toml", "--format", "xml"]);
    assert_eq!(bad_format.status.code(), Some(2));
}

#[test]
fn every_shipped_experiment_parses() {
    for path in palmshift_cli::config_paths(&experiments()).unwrap() {
        palmshift_cli::load_spec(&path, None).unwrap();
    }
}

#[test]
fn every_experiment_kind_runs_through_the_library() {
    let mut kinds = std::collections::BTreeSet::new();
    for path in palmshift_cli::config_paths(&experiments()).unwrap() {
        let mut spec = palmshift_cli::load_spec(&path, None).unwrap();
        spec.n_samples = 200;
        let r = palmshift_cli::run(&spec).unwrap();
        assert!(!r.statistics.is_empty(), "{}", path.display());
        kinds.insert(r.kind);
    }
    assert_eq!(kinds.len(), palmshift_cli::ExperimentKind::ALL.len());
}
