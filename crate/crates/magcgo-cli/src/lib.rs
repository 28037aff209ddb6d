//! Subcommand runners. Each runner computes everything in memory and returns
//! the artifact bytes plus its verdicts; nothing touches the output directory
//! until a run has finished.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use magcgo::carleman::{boundary_samples, carleman_check_boundary, carleman_check_interior, interior_samples, CarlemanCheck, WeightLimits};
use magcgo::cgo::{
    build_amplitude, cgo_chart, cgo_ladder, eikonal_residual, manufactured_remainder_error, transport_residual, CgoParams, LadderSetup,
    RemainderMode,
};
use magcgo::config::ExperimentConfig;
use magcgo::dbar::{manufactured_order, CellRule};
use magcgo::geometry::logpolar::{euclidean_laplacian_at, laplace_beltrami_at, to_euclidean, warped_sphere_metric};
use magcgo::geometry::{advection_to_magnetic, l2_norm, log_polar_map, CylinderChart, ScalarField};
use magcgo::identity::{advection_certificate, gauge_suite, green_residual, GaugeSetup};
use magcgo::mollify::{corpus, rate_chart, rate_study_lp, Extension, MollifierKernel, Region};
use magcgo::presets::{bump_q, vector_field, Coefficients, Profile};
use magcgo::recover::{
    assemble_data_operator, lambda_ladder, log_ladder, recover_q, synthetic_recovery, Regularizer, RecoverySetup,
};
use magcgo::report::{observed_orders, ConvergenceReport, Trend};
use magcgo::{LabError, Result, C64};

pub const SUBCOMMANDS: [&str; 8] = ["mollify-rates", "dbar-check", "cgo-build", "carleman-check", "identity", "recover-q", "euclid-map", "advect"];
pub const PRESETS: [&str; 3] = ["flat-cylinder", "exp-warp", "log-polar-image"];

/// One judged claim. `anchor` names the statement it tests.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub anchor: String,
    pub passed: bool,
    pub details: Value,
}

impl Verdict {
    fn new(anchor: &str, passed: bool, details: Value) -> Self {
        Verdict { anchor: anchor.to_string(), passed, details }
    }

    fn from_report(anchor: &str, r: &ConvergenceReport) -> Self {
        Verdict::new(anchor, r.verdict, json!({ "params": r.params, "norms": r.norms, "ratios": r.ratios, "report": r.verdict_json() }))
    }
}

/// In-memory result of one subcommand.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub files: BTreeMap<String, Vec<u8>>,
    pub verdicts: Vec<Verdict>,
    /// Measured quantities that are reported but not judged.
    pub notes: BTreeMap<String, Value>,
}

impl Artifacts {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, anchor: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.anchor == anchor)
    }

    fn csv(&mut self, name: &str, text: String) {
        self.files.insert(name.to_string(), text.into_bytes());
    }

    fn summary(&self, subcommand: &str, cfg: &ExperimentConfig) -> Value {
        json!({
            "subcommand": subcommand,
            "passed": self.passed(),
            "seed": cfg.experiment.seed,
            "grid_scale": cfg.experiment.grid_scale,
            "chart": cfg.experiment.chart,
            "verdicts": self.verdicts,
            "notes": self.notes,
        })
    }

    /// Writes every file and `verdicts.json` into `out`.
    pub fn write(&self, out: &Path, subcommand: &str, cfg: &ExperimentConfig) -> std::io::Result<()> {
        std::fs::create_dir_all(out)?;
        for (name, bytes) in &self.files {
            std::fs::write(out.join(name), bytes)?;
        }
        let text = serde_json::to_string_pretty(&self.summary(subcommand, cfg)).map_err(std::io::Error::other)?;
        std::fs::write(out.join("verdicts.json"), text + "\n")
    }
}

fn io(e: std::fmt::Error) -> LabError {
    LabError::Io(e.to_string())
}

fn e17(x: f64) -> String {
    format!("{x:.17e}")
}

fn scaled_nodes(n: usize, s: f64) -> usize {
    (((n - 1) as f64) * s).round().max(2.0) as usize + 1
}

fn reports_csv(rows: &[(&str, &ConvergenceReport)]) -> Result<String> {
    let mut t = String::from("group,ladder,param,norm,normalized_ratio\n");
    for (group, r) in rows {
        for ((p, n), q) in r.params.iter().zip(&r.norms).zip(&r.ratios) {
            writeln!(t, "{group},{},{},{},{}", r.name, e17(*p), e17(*n), e17(*q)).map_err(io)?;
        }
    }
    Ok(t)
}

pub fn run(subcommand: &str, cfg: &ExperimentConfig) -> Result<Artifacts> {
    match subcommand {
        "mollify-rates" => mollify_rates(cfg),
        "dbar-check" => dbar_check(cfg),
        "cgo-build" => cgo_build(cfg),
        "carleman-check" => carleman_check(cfg),
        "identity" => identity(cfg),
        "recover-q" => recover(cfg),
        "euclid-map" => euclid_map(cfg),
        "advect" => advect(cfg),
        other => Err(LabError::Config(format!("unknown subcommand '{other}'"))),
    }
}

pub fn mollify_rates(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let c = &cfg.mollify;
    let chart = rate_chart(scaled_nodes(c.nodes, cfg.experiment.grid_scale))?;
    let f = corpus(&c.corpus).ok_or_else(|| LabError::Config(format!("unknown rate corpus '{}'", c.corpus)))?;
    let f = ScalarField::from_real(&chart, f);
    let st = rate_study_lp(&chart, &f, c.p, &c.tau_list, &MollifierKernel::bump(), &Extension::reflect(c.tau_max), &Region::Chart)?;
    let mut art = Artifacts::default();
    let reports = st.reports();
    art.csv("mollify_rates.csv", reports_csv(&reports.iter().map(|r| (c.corpus.as_str(), *r)).collect::<Vec<_>>())?);
    let anchors = [
        "mollifier approximation ladder |f_tau - f|_p / tau",
        "mollifier Hessian ladder tau |D2 f_tau|_p",
        "mollifier first-derivative sup bound",
        "mollifier second-derivative sup bound",
    ];
    for (a, r) in anchors.iter().zip(reports) {
        art.verdicts.push(Verdict::from_report(a, r));
    }
    Ok(art)
}

fn cell_rule(name: &str) -> Result<CellRule> {
    match name {
        "centered" => Ok(CellRule::Centered),
        "anchored" => Ok(CellRule::Anchored),
        _ => Err(LabError::Config(format!("unknown cell rule '{name}'"))),
    }
}

pub fn dbar_check(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let c = &cfg.dbar;
    let base = ((c.grids[0] as f64) * cfg.experiment.grid_scale).round().max(4.0) as usize;
    let grids: Vec<usize> = (0..c.grids.len()).map(|k| base << k).collect();
    let rule = cell_rule(&c.rule)?;
    let mut art = Artifacts::default();
    let mut t = String::from("corpus,rule,intervals,sup_error,error_ratio\n");
    let other = if c.rule == "centered" { "anchored" } else { "centered" };
    for name in &c.corpus {
        for (rname, r) in [(c.rule.as_str(), rule), (other, cell_rule(other)?)] {
            let rep = manufactured_order(name, &grids, r, c.ratio_min, c.ratio_max)?;
            for (k, n) in grids.iter().enumerate() {
                let ratio = if k == 0 { String::new() } else { e17(rep.norms[k - 1] / rep.norms[k]) };
                writeln!(t, "{name},{rname},{n},{},{ratio}", e17(rep.norms[k])).map_err(io)?;
            }
            let ratios: Vec<f64> = rep.norms.windows(2).map(|w| w[0] / w[1]).collect();
            if rname == c.rule {
                art.verdicts.push(Verdict::new(
                    &format!("Cauchy transform sup-error halving ratio ({name})"),
                    rep.verdict,
                    json!({ "rule": rname, "intervals": grids, "sup_errors": rep.norms, "ratios": ratios, "band": [c.ratio_min, c.ratio_max] }),
                ));
            } else {
                art.notes.insert(format!("halving ratios with the {rname} rule ({name})"), json!(ratios));
            }
        }
    }
    art.csv("dbar_errors.csv", t);
    Ok(art)
}

fn remainder_mode(name: &str) -> Result<RemainderMode> {
    match name {
        "minnorm" => Ok(RemainderMode::MinNorm),
        "dirichlet" => Ok(RemainderMode::Dirichlet),
        _ => Err(LabError::Config(format!("unknown remainder mode '{name}'"))),
    }
}

pub fn cgo_build(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let c = &cfg.cgo;
    let gs = cfg.experiment.grid_scale;
    let preset = cfg.experiment.chart.as_str();
    let coeffs = Coefficients::preset(&c.coefficients)?;
    let mut art = Artifacts::default();

    let mut eik = BTreeMap::new();
    for p in PRESETS {
        let ch = CylinderChart::preset(p, [scaled_nodes(17, gs), scaled_nodes(33, gs), 9])?;
        eik.insert(p.to_string(), eikonal_residual(&ch)?);
    }
    let worst = eik.values().cloned().fold(0.0, f64::max);
    art.verdicts.push(Verdict::new("eikonal exactness of the phase x1 + i r", worst <= c.eikonal_tol, json!({ "max_abs": eik, "tol": c.eikonal_tol })));

    let setup = LadderSetup {
        preset: preset.to_string(),
        coefficients: coeffs.clone(),
        grid_scale: gs,
        n_theta: c.n_theta,
        kappa: c.kappa,
        sign: 1.0,
        lambda: c.lambda,
        remainder: remainder_mode(&c.remainder)?,
    };
    let lad = cgo_ladder(&setup, &c.h_list)?;
    let keys: Vec<&String> = lad.ledgers[0].keys().collect();
    let mut t = String::from("h");
    for k in &keys {
        t.push(',');
        t.push_str(k);
    }
    t.push('\n');
    for (h, l) in lad.hs.iter().zip(&lad.ledgers) {
        t.push_str(&e17(*h));
        for k in &keys {
            t.push(',');
            t.push_str(&e17(l[*k]));
        }
        t.push('\n');
    }
    art.csv("cgo_ledger.csv", t);
    art.csv("cgo_ladders.csv", reports_csv(&lad.reports.iter().map(|r| (c.coefficients.as_str(), r)).collect::<Vec<_>>())?);
    for r in &lad.reports {
        let anchor = if r.name == "r_h1_scl" { "remainder H1_scl norm over h^(1/2)".to_string() } else { format!("CGO norm ladder {}", r.name) };
        art.verdicts.push(Verdict::from_report(&anchor, r));
    }

    let mut steps = Vec::new();
    let mut norms = Vec::new();
    for &s in &c.transport_scales {
        let ch = cgo_chart(preset, c.transport_h, s * gs, c.n_theta)?;
        let mut p = CgoParams::new(&ch, c.transport_h, 1.0);
        p.kappa = c.kappa;
        p.lambda = c.lambda;
        let amp = build_amplitude(&ch, &coeffs.one_form(&ch), &coeffs.extensions(p.tau()), &p)?;
        norms.push(l2_norm(&ch, &transport_residual(&ch, &amp)?));
        steps.push(ch.step(0));
    }
    let orders = observed_orders(&steps, &norms);
    let mut t = String::from("grid_step,transport_residual_l2\n");
    for (s, n) in steps.iter().zip(&norms) {
        writeln!(t, "{},{}", e17(*s), e17(*n)).map_err(io)?;
    }
    art.csv("cgo_transport.csv", t);
    art.verdicts.push(Verdict::new(
        "transport residual refinement order",
        orders.iter().all(|o| *o >= c.transport_order_min),
        json!({ "steps": steps, "norms": norms, "orders": orders, "min_order": c.transport_order_min }),
    ));

    let ch = cgo_chart(preset, c.manufactured_h, gs, c.n_theta)?;
    let mut errs = Vec::new();
    for s in [1.0, -1.0] {
        errs.push(manufactured_remainder_error(&ch, &coeffs.one_form(&ch), &coeffs.potential(&ch), c.manufactured_h, s)?);
    }
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    art.verdicts.push(Verdict::new(
        "manufactured remainder solve relative L2 error",
        worst <= c.manufactured_tol,
        json!({ "errors_by_sign": { "+1": errs[0], "-1": errs[1] }, "tol": c.manufactured_tol, "grid": ch.shape() }),
    ));
    Ok(art)
}

fn carleman_rows(t: &mut String, coeffs: &str, kind: &str, chk: &CarlemanCheck) -> Result<()> {
    for r in &chk.rows {
        let eps = if r.eps.is_nan() { String::new() } else { e17(r.eps) };
        writeln!(t, "{coeffs},{kind},{},{eps},{},{},{}x{}x{}", e17(r.h), e17(r.ratio), r.n_samples, r.grid[0], r.grid[1], r.grid[2]).map_err(io)?;
    }
    Ok(())
}

pub fn carleman_check(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let c = &cfg.carleman;
    let gs = cfg.experiment.grid_scale;
    let seed = cfg.experiment.seed;
    let scale = |g: [usize; 3]| [scaled_nodes(g[0], gs), scaled_nodes(g[1], gs), g[2]];
    let limits = WeightLimits { ratio: c.eps_ratio, eps_max: c.eps_max };
    let mut art = Artifacts::default();
    let mut t = String::from("coefficients,check,h,eps,ratio,n_samples,grid\n");
    for name in &c.coefficients {
        let co = Coefficients::preset(name)?;
        let ch = CylinderChart::preset(&cfg.experiment.chart, scale(c.grid))?;
        let h_min = c.h_list.iter().cloned().fold(f64::INFINITY, f64::min);
        let samples = boundary_samples(&ch, c.samples, seed, h_min);
        let b = carleman_check_boundary(&ch, &co.one_form(&ch), &co.potential(&ch), &c.h_list, c.eps, 1.0, &samples, limits, c.threshold)?;
        carleman_rows(&mut t, name, "boundary", &b)?;
        let mut v = Verdict::from_report(&format!("boundary Carleman minimum ratio ({name})"), &b.report);
        v.details["threshold"] = json!(c.threshold);
        v.details["rejected_samples"] = json!(b.rejected);
        art.verdicts.push(v);

        let ch = CylinderChart::preset(&cfg.experiment.chart, scale(c.interior_grid))?;
        let h_min = c.interior_h_list.iter().cloned().fold(f64::INFINITY, f64::min);
        let samples = interior_samples(&ch, c.samples, seed, h_min, c.interior_collar);
        let i = carleman_check_interior(&ch, &co.one_form(&ch), &co.potential(&ch), &c.interior_h_list, 1.0, &samples)?;
        carleman_rows(&mut t, name, "interior", &i)?;
        art.verdicts.push(Verdict::from_report(&format!("interior Carleman maximum ratio within 2x ({name})"), &i.report));
    }
    art.csv("carleman_ratios.csv", t);
    Ok(art)
}

/// Smooth complex test fields of the Green residual corpus.
pub fn green_fields(ch: &CylinderChart) -> (ScalarField, ScalarField) {
    (
        ScalarField::from_fn(ch, |x| C64::new((x[0] + x[1]).cos(), x[2] * x[1])),
        ScalarField::from_fn(ch, |x| C64::new(x[0] * x[1], (x[2] - x[0]).sin())),
    )
}

pub fn identity(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let c = &cfg.identity;
    let gs = cfg.experiment.grid_scale;
    let mut art = Artifacts::default();

    let co = Coefficients::preset("smooth")?;
    let mut t = String::from("preset,grid,residual\n");
    for p in PRESETS {
        let mut steps = Vec::new();
        let mut res = Vec::new();
        for &n in &c.green_levels {
            let g = c.green_base.map(|b| ((b * n) as f64 * gs).round() as usize + 1);
            let ch = CylinderChart::preset(p, g)?;
            let (u, v) = green_fields(&ch);
            let r = green_residual(&ch, &co.one_form(&ch), &co.potential(&ch), &u, &v)?;
            writeln!(t, "{p},{}x{}x{},{}", g[0], g[1], g[2], e17(r)).map_err(io)?;
            steps.push(ch.step(0));
            res.push(r);
        }
        let rep = ConvergenceReport::new(&format!("Green residual ({p})"), steps, res, 2.0, Trend::Order { min: c.green_order_min, max: f64::INFINITY })?;
        art.verdicts.push(Verdict::from_report(&format!("Green formula residual order ({p})"), &rep));
    }
    art.csv("identity_green.csv", t);

    let mut rungs = String::from("scenario,h,grid,lhs_re,lhs_im,rhs_re,rhs_im,relative_gap,h_abs_j,h_abs_k,gamma_part,potential_path_gap\n");
    let mut funcs = String::from("scenario,lambda,profile_center,relative_value\n");
    for sc in &c.scenarios {
        let mut setup = GaugeSetup::new(&cfg.experiment.chart, sc);
        setup.grid_scale = gs;
        setup.n_theta = c.n_theta;
        setup.collar = c.collar;
        setup.probe_lambdas = lambda_ladder(c.probe_lambda_min, c.probe_lambda_max);
        setup.probe_profiles = c.probe_profiles;
        setup.gauge_tol = c.gauge_tol;
        setup.closed_tol = c.closed_tol;
        let suite = gauge_suite(&setup, &c.h_list)?;
        for r in &suite.rungs {
            writeln!(
                rungs,
                "{sc},{},{}x{}x{},{},{},{},{},{},{},{},{},{}",
                e17(r.h),
                r.grid[0],
                r.grid[1],
                r.grid[2],
                e17(r.lhs[0]),
                e17(r.lhs[1]),
                e17(r.rhs[0]),
                e17(r.rhs[1]),
                e17(r.relative_gap),
                e17(r.h_abs_j),
                e17(r.h_abs_k),
                e17(r.gamma_part),
                e17(r.potential_path_gap)
            )
            .map_err(io)?;
        }
        for (l, center, v) in &suite.functionals {
            writeln!(funcs, "{sc},{},{},{}", e17(*l), e17(*center), e17(*v)).map_err(io)?;
        }
        let finest = suite.rungs.last().expect("nonempty ladder");
        art.verdicts.push(Verdict::new(
            &format!("integral identity against boundary terms at the finest h ({sc})"),
            finest.relative_gap <= c.identity_tol,
            json!({ "h": finest.h, "relative_gap": finest.relative_gap, "all_rungs": suite.rungs.iter().map(|r| r.relative_gap).collect::<Vec<_>>(), "tol": c.identity_tol }),
        ));
        art.verdicts.push(Verdict::from_report(&format!("{} ({sc})", suite.j_report.name), &suite.j_report));
        art.verdicts.push(Verdict::from_report(&format!("{} ({sc})", suite.k_report.name), &suite.k_report));
        let fmax = suite.functional_max();
        art.verdicts.push(Verdict::new(
            &format!("magnetic limit functional over the probe family ({sc})"),
            fmax <= c.functional_tol,
            json!({ "max_relative": fmax, "probes": suite.functionals.len(), "tol": c.functional_tol }),
        ));
    }
    art.csv("identity_rungs.csv", rungs);
    art.csv("identity_functionals.csv", funcs);
    Ok(art)
}

pub fn recover(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let c = &cfg.recover;
    let setup = RecoverySetup {
        preset: cfg.experiment.chart.clone(),
        grid: c.grid,
        lambdas: lambda_ladder(c.lambda_min, c.lambda_max),
        n_profiles: c.profiles,
        reg: c.reg,
        noise: c.noise,
        l_curve_regs: log_ladder(c.l_curve_min, c.l_curve_max, c.l_curve_count),
        seed: cfg.experiment.seed,
    };
    let run = synthetic_recovery(&setup, bump_q)?;
    let mut art = Artifacts::default();
    let mut buf = Vec::new();
    run.estimate.write_csv(&mut buf)?;
    art.files.insert("recover_estimate.csv".into(), buf);
    let mut buf = Vec::new();
    run.noisy_curve.write_csv(&mut buf)?;
    art.files.insert("recover_lcurve.csv".into(), buf);
    let mut t = String::from("index,singular_value\n");
    for (k, s) in run.injectivity.singular_values.iter().enumerate() {
        writeln!(t, "{k},{}", e17(*s)).map_err(io)?;
    }
    art.csv("recover_singular_values.csv", t);
    if c.write_operator {
        let dir = std::env::temp_dir().join(format!("magcgo-op-{}-{}", std::process::id(), cfg.experiment.seed));
        std::fs::create_dir_all(&dir)?;
        let paths = run.op.write_triple(&dir, "recover_operator");
        let paths = paths.and_then(|ps| {
            ps.iter()
                .map(|p| Ok((p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p)?)))
                .collect::<Result<Vec<_>>>()
        });
        let _ = std::fs::remove_dir_all(&dir);
        for (name, bytes) in paths? {
            art.files.insert(name, bytes);
        }
    }
    let inj = &run.injectivity;
    art.verdicts.push(Verdict::new(
        "electric data map smallest singular value",
        inj.sigma_min > 0.0,
        json!({ "sigma_min": inj.sigma_min, "sigma_max": inj.sigma_max, "condition": inj.condition, "rank": inj.rank, "nullity": inj.nullity, "rows": inj.rows, "cols": inj.cols }),
    ));
    let err = run.clean.relative_error.unwrap_or(f64::INFINITY);
    art.verdicts.push(Verdict::new(
        "synthetic electric potential recovery relative L2 error",
        err <= c.error_tol,
        json!({ "relative_error": err, "tol": c.error_tol, "reg": c.reg, "residual_norm": run.clean.residual_norm }),
    ));
    art.verdicts.push(Verdict::new(
        "noisy-data L-curve monotonicity",
        run.noisy_curve.is_monotone(),
        json!({ "noise": c.noise, "points": run.noisy_curve.points.len(), "best_relative_error": run.noisy_curve.best().and_then(|b| b.relative_error) }),
    ));
    Ok(art)
}

/// Test functions of the coordinate-change check.
pub fn euclid_function(name: &str) -> Result<fn([f64; 3]) -> f64> {
    let f: fn([f64; 3]) -> f64 = match name {
        "x3" => |x| x[2],
        "x1sq-x3-plus-x2" => |x| x[0] * x[0] * x[2] + x[1],
        "norm-sq" => |x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2],
        "exp-x1-sin-x2" => |x| (0.5 * x[0]).exp() * x[1].sin(),
        _ => return Err(LabError::Config(format!("unknown euclid test function '{name}'"))),
    };
    Ok(f)
}

pub fn euclid_map(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let c = &cfg.euclid;
    let mapped = log_polar_map(&c.points)?;
    let mut art = Artifacts::default();
    let mut t = String::from("x1,x2,x3,y1,polar,azimuth,warp,norm_sq\n");
    let mut warp_gap: f64 = 0.0;
    for (x, y) in c.points.iter().zip(&mapped) {
        let n2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        warp_gap = warp_gap.max((y.warp - n2).abs() / n2).max(((2.0 * y.y1).exp() - y.warp).abs() / y.warp);
        writeln!(t, "{},{},{},{},{},{},{},{}", e17(x[0]), e17(x[1]), e17(x[2]), e17(y.y1), e17(y.polar), e17(y.azimuth), e17(y.warp), e17(n2)).map_err(io)?;
    }
    art.csv("euclid_points.csv", t);
    let mut t = String::from("function,point,euclidean,warped,abs_diff\n");
    let mut worst: f64 = 0.0;
    for name in &c.functions {
        let u = euclid_function(name)?;
        for (k, (x, y)) in c.points.iter().zip(&mapped).enumerate() {
            let le = euclidean_laplacian_at(&u, *x, 1e-3);
            let uy = |p: [f64; 3]| u(to_euclidean(p));
            let lg = laplace_beltrami_at(&warped_sphere_metric, &uy, y.coords(), 1e-3);
            worst = worst.max((le - lg).abs());
            writeln!(t, "{name},{k},{},{},{}", e17(le), e17(lg), e17((le - lg).abs())).map_err(io)?;
        }
    }
    art.csv("euclid_laplacians.csv", t);
    art.verdicts.push(Verdict::new(
        "Euclidean Laplacian vs warped Laplace-Beltrami agreement",
        worst <= c.tol,
        json!({ "max_abs_diff": worst, "tol": c.tol, "points": c.points.len(), "functions": c.functions }),
    ));
    let exact = 4.0 * f64::EPSILON;
    art.verdicts.push(Verdict::new(
        "conformal factor c = exp(2 y1) at the probes",
        warp_gap <= exact,
        json!({ "max_relative_gap": warp_gap, "tol": exact }),
    ));
    Ok(art)
}

pub fn advect(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let c = &cfg.advect;
    let gs = cfg.experiment.grid_scale;
    let g = [scaled_nodes(c.grid[0], gs), scaled_nodes(c.grid[1], gs), c.grid[2]];
    let chart = CylinderChart::preset(&cfg.experiment.chart, g)?;
    let x1 = vector_field(&c.field, &chart)?;
    let x2 = if c.second.is_empty() { x1.clone() } else { vector_field(&c.second, &chart)? };
    let probe = ScalarField::from_real(&chart, |p| (p[0] + p[1]).sin() * (3.0 * p[2]).cos());
    let cert = advection_certificate(&chart, &x1, &x2, &probe, c.closed_tol)?;
    let mut art = Artifacts::default();
    art.verdicts.push(Verdict::new(
        "advection operator equals its magnetic form",
        cert.operator_gap <= c.operator_tol,
        json!({ "relative_l2_gap": cert.operator_gap, "tol": c.operator_tol }),
    ));
    art.verdicts.push(Verdict::new(
        "advection pair zero certificate",
        cert.certificate() <= c.certificate_tol,
        json!({ "phi_max": cert.phi_max, "dirichlet_max": cert.dirichlet_max, "closedness": cert.closedness, "tol": c.certificate_tol }),
    ));

    // recovery of the induced q-difference on the recovery grid
    let rc = &cfg.recover;
    let rchart = CylinderChart::preset(&cfg.experiment.chart, rc.grid)?;
    let rx1 = vector_field(&c.field, &rchart)?;
    let rx2 = if c.second.is_empty() { rx1.clone() } else { vector_field(&c.second, &rchart)? };
    let dq = advection_to_magnetic(&rchart, &rx1)?.1.sub(&advection_to_magnetic(&rchart, &rx2)?.1);
    let op = assemble_data_operator(&rchart, &lambda_ladder(rc.lambda_min, rc.lambda_max), &Profile::family(&rchart, rc.profiles))?;
    let data = op.apply(&dq)?;
    let (est, diag) = recover_q(&rchart, &op, &data, Regularizer::Tikhonov { reg: rc.reg }, Some(&dq))?;
    art.notes.insert(
        "recovered q-difference of the advection pair".into(),
        json!({ "dq_max": dq.max_abs(), "estimate_max": est.max_abs(), "relative_error": diag.relative_error, "residual_norm": diag.residual_norm }),
    );
    let mut buf = Vec::new();
    cert.dq.write_csv(&mut buf)?;
    art.files.insert("advect_dq.csv".into(), buf);
    let mut buf = Vec::new();
    est.write_csv(&mut buf)?;
    art.files.insert("advect_recovered_dq.csv".into(), buf);
    Ok(art)
}
