//! End-to-end tests of the command-line driver: exit codes, output
//! schemas, determinism, and config merging.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cubicdist"))
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn meta(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn charfn_origin_row_is_exactly_one() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .current_dir(dir.path())
        .args([
            "charfn",
            "--cutoff-prime",
            "2000",
            "--grid-radius",
            "1",
            "--grid-step",
            "1",
            "--out",
            "cf.csv",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let csv = read(dir.path(), "cf.csv");
    assert_eq!(csv.lines().next(), Some("y1,y2,re,im,tail_bound"));
    assert_eq!(csv.lines().count(), 1 + 9);
    let origin = csv.lines().find(|l| l.starts_with("0,0,")).unwrap();
    let fields: Vec<f64> = origin.split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(fields[2], 1.0);
    assert_eq!(fields[3], 0.0);

    let side = meta(dir.path(), "cf.meta.json");
    assert_eq!(side["subcommand"], "charfn");
    assert_eq!(side["config"]["cutoff_prime"], 2000);
    assert_eq!(side["config"]["case"], 2);
    assert!(side["budgets"]["max_product_tail_bound"].as_f64().unwrap() > 0.0);
    assert!(side["version"].as_str().unwrap().contains('.'));
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "sample",
        "--cutoff-prime",
        "1000",
        "--draws",
        "300",
        "--seed",
        "7",
        "--out",
        "s.csv",
    ];
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let status = bin().current_dir(d.path()).args(args).status().unwrap();
        assert_eq!(status.code(), Some(0));
    }
    assert_eq!(read(d1.path(), "s.csv"), read(d2.path(), "s.csv"));
    assert_eq!(read(d1.path(), "s.meta.json"), read(d2.path(), "s.meta.json"));
    assert_eq!(read(d1.path(), "s.csv").lines().count(), 1 + 300);
}

#[test]
fn different_seeds_disagree() {
    let dir = tempfile::tempdir().unwrap();
    for (seed, name) in [("7", "a.csv"), ("8", "b.csv")] {
        let status = bin()
            .current_dir(dir.path())
            .args([
                "sample",
                "--cutoff-prime",
                "1000",
                "--draws",
                "50",
                "--seed",
                seed,
                "--out",
                name,
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    assert_ne!(read(dir.path(), "a.csv"), read(dir.path(), "b.csv"));
}

#[test]
fn invalid_case_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .args(["charfn", "--case", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("case"));
}

#[test]
fn capacity_overflow_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .args(["charfn", "--cutoff-prime", "50000000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"sigma": 0.9, "case": 1, "cutoff_prime": 2000, "grid_radius": 1.0, "grid_step": 1.0}"#,
    )
    .unwrap();
    let status = bin()
        .current_dir(dir.path())
        .args([
            "charfn",
            "--config",
            "run.json",
            "--sigma",
            "1.1",
            "--out",
            "cf.csv",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let side = meta(dir.path(), "cf.meta.json");
    assert_eq!(side["config"]["sigma"], 1.1);
    assert_eq!(side["config"]["case"], 1);
    assert_eq!(side["config"]["cutoff_prime"], 2000);
}

#[test]
fn unknown_config_field_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.json"), r#"{"sgima": 1.0}"#).unwrap();
    let out = bin()
        .current_dir(dir.path())
        .args(["charfn", "--config", "run.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn decay_window_reports_zero_violations() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .current_dir(dir.path())
        .args([
            "decay",
            "--sigma",
            "0.75",
            "--y-abs",
            "10000",
            "--cutoff-prime",
            "2000",
            "--out",
            "dec.csv",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(dir.path(), "dec.csv");
    assert!(csv.lines().any(|l| l == "violations,0"));
    let side = meta(dir.path(), "dec.meta.json");
    assert_eq!(side["budgets"]["violations"], 0);
    assert_eq!(side["report"]["passed"], true);
    assert!(side["report"]["examined"].as_u64().unwrap() > 0);
}

#[test]
fn count_tracks_the_derived_constant() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .current_dir(dir.path())
        .args(["count", "--family-bound", "20000", "--out", "cnt.csv"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(dir.path(), "cnt.csv");
    assert_eq!(csv.lines().next(), Some("bound,ratio"));
    assert!(csv.lines().count() > 3);
    let side = meta(dir.path(), "cnt.meta.json");
    assert!(side["budgets"]["relative_error_vs_derived"].as_f64().unwrap() < 0.01);
}

#[test]
fn sweep_is_rigorous_beyond_sigma_one() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .current_dir(dir.path())
        .args([
            "sweep",
            "--family-bound",
            "3000",
            "--cutoff-prime",
            "2000",
            "--out",
            "sw.csv",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(dir.path(), "sw.csv");
    assert_eq!(csv.lines().next(), Some("a,b,norm,re,im,truncation_error"));
    assert!(csv.lines().count() > 5);
    let side = meta(dir.path(), "sw.meta.json");
    assert_eq!(side["budgets"]["heuristic"], false);
    assert!(side["budgets"]["max_truncation_error"].as_f64().unwrap() > 0.0);
}

#[test]
fn density_mass_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .current_dir(dir.path())
        .args(["density", "--cutoff-prime", "2000", "--out", "den.csv"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(dir.path(), "den.csv");
    assert_eq!(csv.lines().next(), Some("x1,x2,density"));
    assert_eq!(csv.lines().count(), 1 + 65 * 65);
    let side = meta(dir.path(), "den.meta.json");
    assert!(side["budgets"]["mass_defect"].as_f64().unwrap() < 1e-2);
    assert!(side["budgets"]["max_imag_residue"].as_f64().unwrap() < 1e-8);
}

#[test]
fn compare_stays_within_sampling_noise() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .current_dir(dir.path())
        .args([
            "compare",
            "--cutoff-prime",
            "2000",
            "--draws",
            "20000",
            "--out",
            "cmp.csv",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let side = meta(dir.path(), "cmp.meta.json");
    assert!(side["report"]["sup_abs_diff"].as_f64().unwrap() < 0.05);
    assert_eq!(side["report"]["skipped"], 0);
}

#[test]
fn check_mode_prints_outcomes_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .args(["count", "--check"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[PASS] smoothed-count"));
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("charfn"));
    assert!(stdout.contains("--cutoff-prime"));
}

#[test]
fn missing_subcommand_exits_one() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
