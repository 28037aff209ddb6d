use std::path::Path;
use std::process::Command;

use magcgo::config::ExperimentConfig;

fn magcgo(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_magcgo")).args(args).arg("--out").arg(out).output().expect("spawn magcgo")
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn passing_subcommand_exits_zero_with_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = magcgo(&["euclid-map"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("verdicts.json")).unwrap()).unwrap();
    assert_eq!(v["subcommand"], "euclid-map");
    assert_eq!(v["passed"], true);
    assert_eq!(v["verdicts"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(out.join("euclid_laplacians.csv")).unwrap();
    assert!(csv.starts_with("function,point,euclidean,warped,abs_diff\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 5);
}

#[test]
fn failing_verdict_exits_one_and_keeps_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = magcgo(&["dbar-check"], &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(out.join("dbar_errors.csv").exists());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("verdicts.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn malformed_config_exits_two_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    for (i, text) in ["[experiment]\nseed = \"x\"\n", "[nope]\n", "[recover]\ngrid = [12, 12]\n", "not toml ==="].iter().enumerate() {
        let cfg = tmp.path().join(format!("bad{i}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let o = magcgo(&["euclid-map", "--config", cfg.to_str().unwrap()], &out);
        assert_eq!(o.status.code(), Some(2), "case {i}");
        assert!(!out.exists(), "case {i} wrote artifacts");
    }
    let o = magcgo(&["euclid-map", "--config", tmp.path().join("missing.toml").to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    let o = magcgo(&["euclid-map", "--grid-scale", "-1"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_subcommand_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = magcgo(&["solve-everything"], &tmp.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
    assert!(magcgo_cli::run("solve-everything", &ExperimentConfig::default()).is_err());
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "[experiment]\nseed = 3\n[recover]\nwrite_operator = false\n").unwrap();
    let a = tmp.path().join("a");
    magcgo(&["recover-q", "--config", cfg.to_str().unwrap(), "--seed", "11"], &a);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("verdicts.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 11);
    assert!(!a.join("recover_operator_matrix.csv").exists());
    let b = tmp.path().join("b");
    magcgo(&["recover-q", "--config", cfg.to_str().unwrap()], &b);
    assert_ne!(std::fs::read(a.join("recover_lcurve.csv")).unwrap(), std::fs::read(b.join("recover_lcurve.csv")).unwrap());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "[experiment]\nseed = 5\n[recover]\ngrid = [8, 8, 4]\nlambda_min = -6\nlambda_max = 5\nprofiles = 3\n").unwrap();
    for sub in ["recover-q", "mollify-rates", "advect"] {
        let a = tmp.path().join(format!("{sub}-a"));
        let b = tmp.path().join(format!("{sub}-b"));
        magcgo(&[sub, "--config", cfg.to_str().unwrap()], &a);
        magcgo(&[sub, "--config", cfg.to_str().unwrap()], &b);
        assert_eq!(files(&a), files(&b), "{sub}");
    }
}

#[test]
fn in_process_runner_matches_binary_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    magcgo(&["euclid-map"], &out);
    let art = magcgo_cli::run("euclid-map", &ExperimentConfig::default()).unwrap();
    for (name, bytes) in &art.files {
        assert_eq!(&std::fs::read(out.join(name)).unwrap(), bytes, "{name}");
    }
}
