//! CGO solutions u = e^{−sρ/h}(a + r) with ρ = x1 + i r.
//!
//! The transport equation does not depend on the branch s, so the phase is
//! always Φ_τ = −½ K ∗ ((A_τ)_1 + i (A_τ)_r). A solution paired against one
//! built from A1 is built from −A2 (see [`paired`]).

use std::collections::BTreeMap;

use crate::dbar::{phase_correction, CellRule};
use crate::error::{LabError, Result};
use crate::geometry::{
    codifferential, differential, h1_scl_norm, inner, l2_norm, laplace_beltrami, lp_norm, pointwise_norm, CylinderChart, OneForm, ScalarField,
};
use crate::linsolve::{min_norm_solve, solve_general, Csr, SolveInfo};
use crate::mollify::{extend, hat_stencil, mollify_patch, Extension, MollifierKernel, Patch};
use crate::presets::{Coefficients, Profile};
use crate::report::{ConvergenceReport, Trend};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// How the remainder equation is closed at the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemainderMode {
    /// r = 0 on ∂M, square interior system.
    Dirichlet,
    /// Interior equations only; the solution of least weighted L² norm.
    MinNorm,
}

#[derive(Clone, Debug)]
pub struct CgoParams {
    pub h: f64,
    /// τ = κ √h
    pub kappa: f64,
    pub sign: f64,
    pub lambda: f64,
    pub profile: Profile,
    pub rule: CellRule,
    pub remainder: RemainderMode,
    pub tol: f64,
}

impl CgoParams {
    pub fn new(chart: &CylinderChart, h: f64, sign: f64) -> Self {
        CgoParams {
            h,
            kappa: 1.0,
            sign,
            lambda: 0.0,
            profile: Profile::default_for(chart),
            rule: CellRule::Centered,
            remainder: RemainderMode::MinNorm,
            tol: 1e-10,
        }
    }

    pub fn tau(&self) -> f64 {
        self.kappa * self.h.sqrt()
    }

    fn validate(&self, chart: &CylinderChart) -> Result<()> {
        if !(self.h > 0.0 && self.h <= 0.5) {
            return Err(LabError::Parameter(format!("h must lie in (0, 0.5], got {}", self.h)));
        }
        if self.sign != 1.0 && self.sign != -1.0 {
            return Err(LabError::Parameter(format!("sign must be ±1, got {}", self.sign)));
        }
        if !(self.kappa > 0.0) {
            return Err(LabError::Parameter(format!("kappa must be positive, got {}", self.kappa)));
        }
        self.profile.check(chart)
    }
}

/// ρ = x1 + i r.
pub fn rho(chart: &CylinderChart) -> ScalarField {
    ScalarField::from_fn(chart, |x| C64::new(x[0], x[1]))
}

/// max |⟨dρ, dρ⟩_g| over the nodes.
pub fn eikonal_residual(chart: &CylinderChart) -> Result<f64> {
    let d = differential(chart, &rho(chart))?;
    Ok(inner(chart, &d, &d)?.max_abs())
}

/// e^{−sρ/h}.
pub fn weight(chart: &CylinderChart, h: f64, sign: f64) -> ScalarField {
    rho(chart).map(|z| (-sign * z / h).exp())
}

/// a₀ = e^{iλ(x1 + i r)}.
pub fn holomorphic_factor(chart: &CylinderChart, lambda: f64) -> ScalarField {
    rho(chart).map(|z| (I * lambda * z).exp())
}

/// ∂̄ = ½(∂_1 + i ∂_r) by the chart difference operators.
pub fn dbar_chart(chart: &CylinderChart, f: &ScalarField) -> Result<ScalarField> {
    chart.same_grid(f.shape)?;
    let d1 = chart.derivative_operator(0).mul_vec(&f.data);
    let dr = chart.derivative_operator(1).mul_vec(&f.data);
    ScalarField::from_vec(chart, d1.iter().zip(&dr).map(|(a, b)| 0.5 * (a + I * b)).collect())
}

/// Amplitude a = |g|^{−1/4} c^{1/2} e^{iΦ_τ} a₀ b(θ) with everything it was built from.
#[derive(Clone, Debug)]
pub struct Amplitude {
    pub h: f64,
    pub tau: f64,
    pub sign: f64,
    pub lambda: f64,
    pub profile: Profile,
    pub a: ScalarField,
    pub phase: ScalarField,
    pub a_tau: OneForm,
}

fn joint_box(chart: &CylinderChart, exts: &[Extension], radius: [usize; 3]) -> ([isize; 3], [usize; 3]) {
    let s = chart.shape();
    let mut m = [0usize; 3];
    for e in exts {
        let em = e.margin(chart);
        for a in 0..3 {
            m[a] = m[a].max(em[a]);
        }
    }
    let lo = [-((m[0] + radius[0]) as isize), -((m[1] + radius[1]) as isize), 0];
    let shape = [s[0] + 2 * (m[0] + radius[0]), s[1] + 2 * (m[1] + radius[1]), s[2]];
    (lo, shape)
}

/// Builds the amplitude: A_τ by mollifying the extension of A with τ = κ√h,
/// Φ_τ from the ∂̄ solve on the support of A_τ, then the closed-form factors.
pub fn build_amplitude(chart: &CylinderChart, a: &OneForm, exts: &[Extension; 3], params: &CgoParams) -> Result<Amplitude> {
    chart.same_grid(a.shape)?;
    params.validate(chart)?;
    let tau = params.tau();
    let st = hat_stencil(&MollifierKernel::bump(), tau, [0, 1, 2].map(|k| chart.step(k)));
    let (lo, shape) = joint_box(chart, &exts[..2], st.radius);
    let p1 = mollify_patch(chart, &a.component(0), &st, &exts[0], lo, shape)?;
    let pr = mollify_patch(chart, &a.component(1), &st, &exts[1], lo, shape)?;
    let pt = mollify_patch(chart, &a.component(2), &st, &exts[2], [0, 0, 0], chart.shape())?;
    let a_tau = OneForm::from_components([p1.to_chart(chart)?, pr.to_chart(chart)?, pt.to_chart(chart)?]);
    let phase = phase_correction(chart, &p1, &pr, 1.0, params.rule)?;
    let amp = closed_form_amplitude(chart, &phase, params.lambda, &params.profile);
    Ok(Amplitude { h: params.h, tau, sign: params.sign, lambda: params.lambda, profile: params.profile, a: amp, phase, a_tau })
}

/// c^{−1/4} r^{−1/2} e^{iΦ} e^{iλ(x1 + i r)} b(θ), which equals |g|^{−1/4} c^{1/2} e^{iΦ} a₀ b.
pub fn closed_form_amplitude(chart: &CylinderChart, phase: &ScalarField, lambda: f64, profile: &Profile) -> ScalarField {
    let mut out = ScalarField::zeros(chart);
    for m in 0..chart.len() {
        let x = chart.coords(m);
        let pre = chart.c()[m].powf(-0.25) / x[1].sqrt() * profile.eval(chart, x[2]);
        out.data[m] = (I * phase.data[m] + I * lambda * C64::new(x[0], x[1])).exp() * pre;
    }
    out
}

/// 4∂̄a + (∂̄ log(|g|/c²)) a + 2i((A_τ)_1 + i(A_τ)_r) a with |g|/c² = c r².
pub fn transport_residual(chart: &CylinderChart, amp: &Amplitude) -> Result<ScalarField> {
    let da = dbar_chart(chart, &amp.a)?;
    let mut out = ScalarField::zeros(chart);
    for m in 0..chart.len() {
        let x = chart.coords(m);
        let c = chart.c()[m];
        let gc = chart.warp.gradient(x[0], x[1], x[2]);
        let dlog = 0.5 * C64::new(gc[0] / c, gc[1] / c + 2.0 / x[1]);
        let at = amp.a_tau.comp[0][m] + I * amp.a_tau.comp[1][m];
        out.data[m] = 4.0 * da.data[m] + (dlog + 2.0 * I * at) * amp.a.data[m];
    }
    Ok(out)
}

/// The source v of the remainder equation, termwise.
#[derive(Clone, Debug)]
pub struct RemainderSource {
    pub v: ScalarField,
    /// (name, term) with v = −Σ term.
    pub terms: Vec<(&'static str, ScalarField)>,
    /// L² norms of v and of each term.
    pub norms: BTreeMap<String, f64>,
}

/// v = −(−h²Δa − 2ih²⟨A, da⟩ + 2ish⟨A − A_τ, dρ⟩a + ih²(d*A)a + h²(⟨A, A⟩ + q)a).
/// For s = +1 this is the familiar display; s = −1 flips the regularization term.
pub fn remainder_source(chart: &CylinderChart, a: &OneForm, q: &ScalarField, amp: &Amplitude, h: f64) -> Result<RemainderSource> {
    if (amp.h - h).abs() > 1e-14 * h.max(1.0) {
        return Err(LabError::Parameter(format!("amplitude was built for h = {}, not {h}", amp.h)));
    }
    chart.same_grid(a.shape)?;
    chart.same_grid(q.shape)?;
    let u = &amp.a;
    let h2 = h * h;
    let lap = laplace_beltrami(chart, u)?;
    let adu = inner(chart, a, &differential(chart, u)?)?;
    let dsa = codifferential(chart, a)?;
    let aa = inner(chart, a, a)?;
    let mut reg = ScalarField::zeros(chart);
    for m in 0..chart.len() {
        let d1 = a.comp[0][m] - amp.a_tau.comp[0][m];
        let dr = a.comp[1][m] - amp.a_tau.comp[1][m];
        reg.data[m] = 2.0 * I * amp.sign * h * (d1 + I * dr) / chart.c()[m] * u.data[m];
    }
    let terms = vec![
        ("laplacian", lap.scale_re(-h2)),
        ("magnetic_transport", adu.scale(-2.0 * I * h2)),
        ("regularization", reg),
        ("codifferential", dsa.mul(u).scale(I * h2)),
        ("potential", aa.add(q).mul(u).scale_re(h2)),
    ];
    let mut v = ScalarField::zeros(chart);
    for (_, t) in &terms {
        v = v.sub(t);
    }
    let mut norms = BTreeMap::new();
    norms.insert("v".to_string(), l2_norm(chart, &v));
    for (n, t) in &terms {
        norms.insert(n.to_string(), l2_norm(chart, t));
    }
    Ok(RemainderSource { v, terms, norms })
}

/// Matrix of e^{sρ/h} h² L_{A,q} e^{−sρ/h}:
/// −h²Δ + 2sh⟨dρ, d·⟩ + sh(Δρ) − 2ih²⟨A, d·⟩ + 2ish⟨A, dρ⟩ + ih²(d*A) + h²(⟨A, A⟩ + q).
pub fn conjugated_operator(chart: &CylinderChart, a: &OneForm, q: &ScalarField, h: f64, sign: f64) -> Result<Csr<C64>> {
    chart.same_grid(a.shape)?;
    chart.same_grid(q.shape)?;
    let n = chart.len();
    let h2 = h * h;
    let rh = rho(chart);
    let lap_rho = laplace_beltrami(chart, &rh)?;
    let dsa = codifferential(chart, a)?;
    let aa = inner(chart, a, a)?;
    let mut trips: Vec<(usize, usize, C64)> = Vec::with_capacity(n * 20);
    let lap = chart.laplacian_operator();
    for m in 0..n {
        let (c, v) = lap.row(m);
        for (&j, &x) in c.iter().zip(v) {
            trips.push((m, j, C64::new(-h2 * x, 0.0)));
        }
    }
    for axis in 0..3 {
        let d = chart.derivative_operator(axis);
        for m in 0..n {
            let gi = chart.ginv(axis)[m];
            let mut coef = -2.0 * I * h2 * gi * a.comp[axis][m];
            if axis == 0 {
                coef += 2.0 * sign * h * gi;
            } else if axis == 1 {
                coef += 2.0 * sign * h * gi * I;
            }
            if coef == C64::new(0.0, 0.0) {
                continue;
            }
            let (c, v) = d.row(m);
            for (&j, &x) in c.iter().zip(v) {
                trips.push((m, j, coef * x));
            }
        }
    }
    for m in 0..n {
        let adrho = (a.comp[0][m] + I * a.comp[1][m]) / chart.c()[m];
        let diag = sign * h * lap_rho.data[m] + 2.0 * I * sign * h * adrho + I * h2 * dsa.data[m] + h2 * (aa.data[m] + q.data[m]);
        trips.push((m, m, diag));
    }
    Ok(Csr::from_triplets(n, n, trips))
}

#[derive(Clone, Debug)]
pub struct RemainderSolve {
    pub r: ScalarField,
    pub h1_scl: f64,
    pub info: SolveInfo,
    /// ‖P r − v‖ / ‖v‖ on the interior rows.
    pub residual: f64,
}

/// Solves the conjugated remainder equation on the interior nodes.
pub fn solve_remainder(
    chart: &CylinderChart,
    a: &OneForm,
    q: &ScalarField,
    h: f64,
    sign: f64,
    v: &ScalarField,
    mode: RemainderMode,
    tol: f64,
) -> Result<RemainderSolve> {
    chart.same_grid(v.shape)?;
    let n = chart.len();
    let p = conjugated_operator(chart, a, q, h, sign)?;
    let rows: Vec<usize> = (0..n).filter(|&m| !chart.on_boundary(m)).collect();
    let rhs: Vec<C64> = rows.iter().map(|&m| v.data[m]).collect();
    let mut r = ScalarField::zeros(chart);
    let info = if rhs.iter().all(|x| *x == C64::new(0.0, 0.0)) {
        SolveInfo { iterations: 0, relative_residual: 0.0, method: "trivial" }
    } else {
        match mode {
            RemainderMode::Dirichlet => {
                let mut cols = vec![None; n];
                for (k, &m) in rows.iter().enumerate() {
                    cols[m] = Some(k);
                }
                let pi = p.restrict(&rows, &cols, rows.len());
                let (x, info) = solve_general(&pi, &rhs, tol)?;
                for (k, &m) in rows.iter().enumerate() {
                    r.data[m] = x[k];
                }
                info
            }
            RemainderMode::MinNorm => {
                let cols: Vec<Option<usize>> = (0..n).map(Some).collect();
                let pi = p.restrict(&rows, &cols, n);
                let (x, info) = min_norm_solve(&pi, &chart.volume_weights(), &rhs, tol, 50_000)?;
                r.data = x;
                info
            }
        }
    };
    let pr = p.mul_vec(&r.data);
    let num: f64 = rows.iter().map(|&m| (pr[m] - v.data[m]).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = rows.iter().map(|&m| v.data[m].norm_sqr()).sum::<f64>().sqrt();
    let residual = if den > 0.0 { num / den } else { num };
    let h1_scl = h1_scl_norm(chart, &r, h)?;
    Ok(RemainderSolve { r, h1_scl, info, residual })
}

/// Manufactured remainder r* = (1 + ix₁/2)·Πsin(πt_k), t the normalized coordinates; zero on ∂M.
pub fn manufactured_remainder(chart: &CylinderChart) -> ScalarField {
    let ax = chart.axes;
    let pi = std::f64::consts::PI;
    ScalarField::from_fn(chart, |x| {
        let s: f64 = (0..3).map(|k| (pi * (x[k] - ax[k].min) / ax[k].length()).sin()).product();
        C64::new(s, 0.5 * s * x[0])
    })
}

/// Relative L² error of the Dirichlet remainder solve with right-hand side P r*.
pub fn manufactured_remainder_error(chart: &CylinderChart, a: &OneForm, q: &ScalarField, h: f64, sign: f64) -> Result<f64> {
    let rstar = manufactured_remainder(chart);
    let p = conjugated_operator(chart, a, q, h, sign)?;
    let v = ScalarField::from_vec(chart, p.mul_vec(&rstar.data))?;
    let sol = solve_remainder(chart, a, q, h, sign, &v, RemainderMode::Dirichlet, 1e-12)?;
    Ok(l2_norm(chart, &sol.r.sub(&rstar)) / l2_norm(chart, &rstar))
}

/// Names of the eight amplitude/phase/remainder bounds, with the power of h
/// each is normalized by and the trend the bound predicts.
pub const LEDGER_BOUNDS: [(&str, f64, bool); 8] = [
    ("a_sup", 0.0, false),
    ("grad_a_sup", -0.5, false),
    ("lap_a_sup", -1.0, false),
    ("a_l2", 0.0, false),
    ("grad_a_l2", 0.0, false),
    ("lap_a_l2", -0.5, true),
    ("phase_error_l3", 0.5, true),
    ("r_h1_scl", 0.5, true),
];

#[derive(Clone, Debug)]
pub struct CgoSolution {
    pub h: f64,
    pub tau: f64,
    pub sign: f64,
    pub lambda: f64,
    pub profile: Profile,
    pub amplitude: ScalarField,
    pub phase: ScalarField,
    /// Phase of the unmollified (extended) A.
    pub phase_reference: ScalarField,
    pub a_tau: OneForm,
    pub source: ScalarField,
    pub remainder: ScalarField,
    pub solve: SolveInfo,
    pub ledger: BTreeMap<String, f64>,
}

impl CgoSolution {
    /// a + r.
    pub fn envelope(&self) -> ScalarField {
        self.amplitude.add(&self.remainder)
    }

    /// u = e^{−sρ/h}(a + r).
    pub fn field(&self, chart: &CylinderChart) -> ScalarField {
        weight(chart, self.h, self.sign).mul(&self.envelope())
    }

    pub fn ledger_json(&self) -> serde_json::Value {
        serde_json::json!({
            "h": self.h,
            "tau": self.tau,
            "sign": self.sign,
            "lambda": self.lambda,
            "profile": self.profile,
            "solver": { "method": self.solve.method, "iterations": self.solve.iterations, "relative_residual": self.solve.relative_residual },
            "norms": self.ledger,
        })
    }
}

/// Φ of the unmollified extension of A.
pub fn reference_phase(chart: &CylinderChart, a: &OneForm, exts: &[Extension; 3], rule: CellRule) -> Result<ScalarField> {
    let p1 = extend(chart, &a.component(0), &exts[0])?;
    let pr = extend(chart, &a.component(1), &exts[1])?;
    let (lo, shape) = joint_box(chart, &exts[..2], [0; 3]);
    let crop = |p: &Patch| {
        let mut out = Patch::zeros(lo, shape);
        for lin in 0..out.data.len() {
            out.data[lin] = p.get(out.node(lin));
        }
        out
    };
    phase_correction(chart, &crop(&p1), &crop(&pr), 1.0, rule)
}

/// Amplitude, source and remainder with the norm ledger.
pub fn build_cgo(chart: &CylinderChart, a: &OneForm, exts: &[Extension; 3], q: &ScalarField, params: &CgoParams) -> Result<CgoSolution> {
    let amp = build_amplitude(chart, a, exts, params)?;
    let src = remainder_source(chart, a, q, &amp, params.h)?;
    let sol = solve_remainder(chart, a, q, params.h, params.sign, &src.v, params.remainder, params.tol)?;
    let phase_reference = reference_phase(chart, a, exts, params.rule)?;
    let h = params.h;

    let u = &amp.a;
    let abs: Vec<f64> = u.data.iter().map(|v| v.norm()).collect();
    let grad = pointwise_norm(chart, &differential(chart, u)?);
    let lap = laplace_beltrami(chart, u)?;
    let sup = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let l2 = |v: &[f64]| chart.volume_weights().iter().zip(v).map(|(w, x)| w * x * x).sum::<f64>().sqrt();
    let mut ledger = BTreeMap::new();
    ledger.insert("a_sup".to_string(), sup(&abs));
    ledger.insert("grad_a_sup".to_string(), sup(&grad));
    ledger.insert("lap_a_sup".to_string(), lap.max_abs());
    ledger.insert("a_l2".to_string(), l2(&abs));
    ledger.insert("grad_a_l2".to_string(), l2(&grad));
    ledger.insert("lap_a_l2".to_string(), l2_norm(chart, &lap));
    ledger.insert("phase_error_l3".to_string(), lp_norm(chart, &amp.phase.sub(&phase_reference), 3.0));
    ledger.insert("r_h1_scl".to_string(), sol.h1_scl);
    ledger.insert("transport_residual_l2".to_string(), l2_norm(chart, &transport_residual(chart, &amp)?));
    ledger.insert("remainder_residual".to_string(), sol.residual);
    for (k, v) in &src.norms {
        ledger.insert(format!("source_{k}_l2"), *v);
    }
    Ok(CgoSolution {
        h,
        tau: amp.tau,
        sign: params.sign,
        lambda: params.lambda,
        profile: params.profile,
        amplitude: amp.a,
        phase: amp.phase,
        phase_reference,
        a_tau: amp.a_tau,
        source: src.v,
        remainder: sol.r,
        solve: sol.info,
        ledger,
    })
}

/// build_cgo from catalogue coefficients (extension margin τ).
pub fn build_cgo_from(chart: &CylinderChart, coeffs: &Coefficients, params: &CgoParams) -> Result<CgoSolution> {
    let a = coeffs.one_form(chart);
    let q = coeffs.potential(chart);
    build_cgo(chart, &a, &coeffs.extensions(params.tau()), &q, params)
}

/// The pair used in the integral identity: u1 = e^{ρ/h}(a1 + r1) from (A1, q1)
/// and u2 = e^{−ρ/h}(a2 + r2) from (−A2, q2), so that Φ1 + Φ2 = −½K∗(δ1 + iδ_r), δ = A1 − A2.
pub fn paired(
    chart: &CylinderChart,
    first: (&OneForm, &[Extension; 3], &ScalarField),
    second: (&OneForm, &[Extension; 3], &ScalarField),
    params: &CgoParams,
) -> Result<(CgoSolution, CgoSolution)> {
    let mut p1 = params.clone();
    p1.sign = -1.0;
    let mut p2 = params.clone();
    p2.sign = 1.0;
    let u1 = build_cgo(chart, first.0, first.1, first.2, &p1)?;
    let neg = second.0.scale(C64::new(-1.0, 0.0));
    let neg_exts = second.1.clone().map(negate_extension);
    let u2 = build_cgo(chart, &neg, &neg_exts, second.2, &p2)?;
    Ok((u1, u2))
}

fn negate_extension(e: Extension) -> Extension {
    use crate::mollify::ExtensionRule;
    match e.rule {
        ExtensionRule::Reflect => e,
        ExtensionRule::Analytic(f) => Extension::analytic(e.tau_max, move |x| -f(x)),
        ExtensionRule::WithCutoff(f) => Extension::with_cutoff(e.tau_max, move |x, chi| -f(x, chi)),
    }
}

/// A chart preset resolved for semiclassical parameter h: x1 and r spacing at
/// most h/(4·grid_scale), `n_theta` nodes across θ.
pub fn cgo_chart(preset: &str, h: f64, grid_scale: f64, n_theta: usize) -> Result<CylinderChart> {
    if !(grid_scale > 0.0) {
        return Err(LabError::Parameter(format!("grid scale must be positive, got {grid_scale}")));
    }
    let probe = CylinderChart::preset(preset, [3, 3, 3])?;
    let target = h / (4.0 * grid_scale);
    let n = |a: usize| (probe.axes[a].length() / target - 1e-9).ceil() as usize + 1;
    CylinderChart::preset(preset, [n(0), n(1), n_theta])
}

/// The measured ladder over h, one solution per rung on its own grid.
#[derive(Clone, Debug)]
pub struct CgoLadder {
    pub hs: Vec<f64>,
    pub ledgers: Vec<BTreeMap<String, f64>>,
    pub reports: Vec<ConvergenceReport>,
}

impl CgoLadder {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.verdict)
    }

    pub fn report(&self, name: &str) -> Option<&ConvergenceReport> {
        self.reports.iter().find(|r| r.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct LadderSetup {
    pub preset: String,
    pub coefficients: Coefficients,
    pub grid_scale: f64,
    pub n_theta: usize,
    pub kappa: f64,
    pub sign: f64,
    pub lambda: f64,
    pub remainder: RemainderMode,
}

impl LadderSetup {
    pub fn new(preset: &str, coefficients: Coefficients) -> Self {
        LadderSetup {
            preset: preset.to_string(),
            coefficients,
            grid_scale: 1.0,
            n_theta: 9,
            kappa: 1.0,
            sign: 1.0,
            lambda: 0.0,
            remainder: RemainderMode::MinNorm,
        }
    }
}

pub fn cgo_ladder(setup: &LadderSetup, hs: &[f64]) -> Result<CgoLadder> {
    let mut ledgers = Vec::new();
    for &h in hs {
        let chart = cgo_chart(&setup.preset, h, setup.grid_scale, setup.n_theta)?;
        let mut p = CgoParams::new(&chart, h, setup.sign);
        p.kappa = setup.kappa;
        p.lambda = setup.lambda;
        p.remainder = setup.remainder;
        ledgers.push(build_cgo_from(&chart, &setup.coefficients, &p)?.ledger);
    }
    let mut reports = Vec::new();
    let col = |k: &str| ledgers.iter().map(|l: &BTreeMap<String, f64>| l[k]).collect::<Vec<_>>();
    for (name, power, little_o) in LEDGER_BOUNDS {
        let trend = if little_o { Trend::Decreasing } else { Trend::Bounded { factor: 2.0 } };
        reports.push(ConvergenceReport::new(name, hs.to_vec(), col(name), power, trend)?);
    }
    reports.push(ConvergenceReport::new("source_v_l2", hs.to_vec(), col("source_v_l2"), 1.5, Trend::Decreasing)?);
    Ok(CgoLadder { hs: hs.to_vec(), ledgers, reports })
}
