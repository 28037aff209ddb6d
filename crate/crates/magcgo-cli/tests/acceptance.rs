//! Acceptance run with default configuration: one line per criterion.
//! Runs without the libtest harness so the lines are never captured.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use magcgo::config::ExperimentConfig;
use magcgo_cli::{run, Artifacts};

/// Criteria recorded as known deviations in the decisions ledger.
const KNOWN: [usize; 2] = [2, 11];

struct Line {
    id: usize,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn judge(art: &Artifacts, prefix: &str) -> (bool, usize) {
    let vs: Vec<_> = art.verdicts.iter().filter(|v| v.anchor.starts_with(prefix)).collect();
    assert!(!vs.is_empty(), "no verdict under '{prefix}'");
    (vs.iter().all(|v| v.passed), vs.len())
}

fn all(art: &Artifacts, prefixes: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in prefixes {
        let (pass, n) = judge(art, p);
        ok &= pass;
        parts.push(format!("{p}: {n} {}", if pass { "ok" } else { "failing" }));
    }
    (ok, parts.join("; "))
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
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

fn main() {
    let cfg = ExperimentConfig::default();
    let mut lines = Vec::new();

    let t0 = Instant::now();
    let cgo = run("cgo-build", &cfg).expect("cgo-build");
    let cgo_secs = t0.elapsed().as_secs_f64();
    let (p, d) = all(&cgo, &["eikonal exactness"]);
    lines.push(Line { id: 1, title: "eikonal exactness on all chart presets", passed: p, detail: d });

    let dbar = run("dbar-check", &cfg).expect("dbar-check");
    let ratios: Vec<String> = dbar.verdicts.iter().map(|v| format!("{}", v.details["ratios"])).collect();
    let (p, _) = all(&dbar, &["Cauchy transform sup-error halving ratio"]);
    lines.push(Line { id: 2, title: "dbar solver halving ratio in [1.7, 2.3]", passed: p, detail: format!("ratios {}", ratios.join(" ")) });

    let moll = run("mollify-rates", &cfg).expect("mollify-rates");
    let (p, d) = all(&moll, &["mollifier"]);
    lines.push(Line { id: 3, title: "mollifier ladders", passed: p, detail: d });

    let (p, _) = judge(&cgo, "transport residual refinement order");
    let orders = &cgo.verdict("transport residual refinement order").unwrap().details["orders"];
    lines.push(Line { id: 4, title: "transport residual order >= 0.8", passed: p, detail: format!("orders {orders}") });

    let r = cgo.verdict("remainder H1_scl norm over h^(1/2)").unwrap();
    lines.push(Line {
        id: 5,
        title: "remainder H1_scl / h^(1/2) strictly decreasing",
        passed: r.passed && cgo_secs <= 600.0,
        detail: format!("ratios {} ({cgo_secs:.0}s for the full cgo-build)", r.details["ratios"]),
    });

    let m = cgo.verdict("manufactured remainder solve relative L2 error").unwrap();
    lines.push(Line { id: 6, title: "manufactured remainder error <= 1e-6", passed: m.passed, detail: format!("{}", m.details["errors_by_sign"]) });

    let carl = run("carleman-check", &cfg).expect("carleman-check");
    let (p, d) = all(&carl, &["boundary Carleman minimum ratio (zero)", "boundary Carleman minimum ratio (rough)"]);
    lines.push(Line { id: 7, title: "boundary Carleman ratio >= 0.01", passed: p, detail: d });
    let (p, d) = all(&carl, &["interior Carleman maximum ratio"]);
    lines.push(Line { id: 8, title: "interior Carleman ratio bounded within 2x", passed: p, detail: d });

    let id = run("identity", &cfg).expect("identity");
    let (p, d) = all(&id, &["Green formula residual order"]);
    lines.push(Line { id: 9, title: "Green residual order >= 1.8", passed: p, detail: d });
    let (p, d) = all(&id, &["integral identity against boundary terms", "unmeasured", "magnetic limit functional"]);
    lines.push(Line { id: 10, title: "gauge suite identity, boundary ladders, functionals", passed: p, detail: d });

    let rec = run("recover-q", &cfg).expect("recover-q");
    let (p, d) = all(&rec, &["electric data map smallest singular value", "synthetic electric potential recovery", "noisy-data L-curve"]);
    let err = &rec.verdict("synthetic electric potential recovery relative L2 error").unwrap().details["relative_error"];
    lines.push(Line { id: 11, title: "electric recovery error <= 0.10 and sigma_min > 0", passed: p, detail: format!("{d}; relative error {err}") });

    let eu = run("euclid-map", &cfg).expect("euclid-map");
    let (p, d) = all(&eu, &["Euclidean Laplacian", "conformal factor"]);
    lines.push(Line { id: 12, title: "log-polar coordinate change", passed: p, detail: d });

    let adv = run("advect", &cfg).expect("advect");
    let (p, d) = all(&adv, &["advection operator", "advection pair zero certificate"]);
    lines.push(Line { id: 13, title: "advection reduction and zero certificate", passed: p, detail: d });

    let tmp = tempfile::tempdir().unwrap();
    let small = tmp.path().join("small.toml");
    std::fs::write(&small, "[cgo]\nh_list = [0.4, 0.2]\n").unwrap();
    let mut same = true;
    let mut checked = Vec::new();
    for sub in ["mollify-rates", "dbar-check", "cgo-build", "recover-q", "euclid-map", "advect"] {
        let dirs: Vec<_> = ["a", "b"].iter().map(|s| tmp.path().join(format!("{sub}-{s}"))).collect();
        for d in &dirs {
            let st = Command::new(env!("CARGO_BIN_EXE_magcgo"))
                .args([sub, "--config", small.to_str().unwrap(), "--out", d.to_str().unwrap()])
                .output()
                .unwrap();
            assert!(matches!(st.status.code(), Some(0 | 1)), "{sub}: {}", String::from_utf8_lossy(&st.stderr));
        }
        same &= tree(&dirs[0]) == tree(&dirs[1]);
        checked.push(sub);
    }
    lines.push(Line { id: 14, title: "byte-identical artifacts across runs", passed: same, detail: checked.join(",") });

    println!();
    let mut unexpected = Vec::new();
    for l in &lines {
        let status = match (l.passed, KNOWN.contains(&l.id)) {
            (true, _) => "PASS".to_string(),
            (false, true) => "FAIL (known: see decisions)".to_string(),
            (false, false) => {
                unexpected.push(l.id);
                "FAIL".to_string()
            }
        };
        println!("criterion {:>2} {status}: {} [{}]", l.id, l.title, l.detail);
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
