//! Radial mollification on the coordinate box, with the extension that
//! makes fields compactly supported and the rate ladders that go with it.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::geometry::{covariant_derivative, CylinderChart, OneForm, ScalarField, Tensor};
use crate::quad::{composite, gauss_legendre};
use crate::report::{ConvergenceReport, Trend};
use crate::C64;

const PROFILE_SAMPLES: usize = 257;

/// Ψ(x) = C exp(−1/(1−|x|²)) on the unit ball of ℝ³.
#[derive(Clone, Debug, PartialEq)]
pub struct MollifierKernel {
    /// Ψ at ρ = k/(len−1), k = 0..len.
    pub profile: Vec<f64>,
    pub support: f64,
    pub normalization: f64,
}

fn bump(rho: f64) -> f64 {
    if rho >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - rho * rho)).exp()
    }
}

fn radial_rule() -> Vec<(f64, f64)> {
    composite(0.0, 1.0, 64, 10)
}

impl MollifierKernel {
    pub fn bump() -> Self {
        let mass: f64 = radial_rule().iter().map(|(r, w)| w * 4.0 * std::f64::consts::PI * r * r * bump(*r)).sum();
        let normalization = 1.0 / mass;
        let profile = (0..PROFILE_SAMPLES).map(|k| normalization * bump(k as f64 / (PROFILE_SAMPLES - 1) as f64)).collect();
        MollifierKernel { profile, support: 1.0, normalization }
    }

    /// Ψ as a function of |x|.
    pub fn radial(&self, rho: f64) -> f64 {
        self.normalization * bump(rho / self.support)
    }

    /// Ψ_τ(z) = τ^{-3} Ψ(z/τ).
    pub fn scaled(&self, z: [f64; 3], tau: f64) -> f64 {
        let rho = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt() / tau;
        self.radial(rho) / (tau * tau * tau)
    }

    /// ∫ Ψ by radial quadrature.
    pub fn mass(&self) -> f64 {
        radial_rule().iter().map(|(r, w)| w * 4.0 * std::f64::consts::PI * r * r * self.radial(*r)).sum()
    }

    /// ‖∇Ψ‖_{L¹}, the Young constant for τ‖∇(f∗Ψ_τ)‖_∞ ≤ ‖f‖_∞ ‖∇Ψ‖_{L¹}.
    pub fn gradient_l1(&self) -> f64 {
        radial_rule()
            .iter()
            .map(|(r, w)| {
                let d = if *r >= 1.0 { 0.0 } else { self.radial(*r) * 2.0 * r / (1.0 - r * r).powi(2) };
                w * 4.0 * std::f64::consts::PI * r * r * d
            })
            .sum()
    }
}

/// How a chart field is continued outside the box before mollification.
#[derive(Clone)]
pub enum ExtensionRule {
    /// Even reflection across every face.
    Reflect,
    /// Evaluate a globally defined function.
    Analytic(Arc<dyn Fn([f64; 3]) -> C64 + Send + Sync>),
    /// A globally defined function that applies the cutoff itself; it receives
    /// the point and χ as a function. Used when the extension must stay exact
    /// (e.g. a gradient d(χφ) rather than χ dφ).
    WithCutoff(CutoffAware),
}

pub type CutoffAware = Arc<dyn Fn([f64; 3], &dyn Fn([f64; 3]) -> f64) -> C64 + Send + Sync>;

impl std::fmt::Debug for ExtensionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtensionRule::Reflect => write!(f, "Reflect"),
            ExtensionRule::Analytic(_) => write!(f, "Analytic"),
            ExtensionRule::WithCutoff(_) => write!(f, "WithCutoff"),
        }
    }
}

/// Extension rule plus the cutoff χ: 1 up to distance `tau_max` from the box grown
/// by one grid step per axis (the interpolant reaches one cell further), 0 beyond
/// `2 tau_max` from that grown box, C^∞ in between.
#[derive(Clone, Debug)]
pub struct Extension {
    pub rule: ExtensionRule,
    pub tau_max: f64,
}

impl Extension {
    pub fn reflect(tau_max: f64) -> Self {
        Extension { rule: ExtensionRule::Reflect, tau_max }
    }

    pub fn analytic(tau_max: f64, f: impl Fn([f64; 3]) -> C64 + Send + Sync + 'static) -> Self {
        Extension { rule: ExtensionRule::Analytic(Arc::new(f)), tau_max }
    }

    pub fn with_cutoff(tau_max: f64, f: impl Fn([f64; 3], &dyn Fn([f64; 3]) -> f64) -> C64 + Send + Sync + 'static) -> Self {
        Extension { rule: ExtensionRule::WithCutoff(Arc::new(f)), tau_max }
    }

    /// Margin in nodes beyond which the extension vanishes.
    pub fn margin(&self, chart: &CylinderChart) -> [usize; 3] {
        [0, 1, 2].map(|a| ((2.0 * self.tau_max + chart.step(a)) / chart.step(a)).ceil() as usize)
    }

    /// χ at an arbitrary point.
    pub fn chi(&self, chart: &CylinderChart, x: [f64; 3]) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            let ax = chart.axes[a];
            let d = ((ax.min - x[a]).max(x[a] - ax.max) - chart.step(a)).max(0.0);
            s += d * d;
        }
        cutoff(s.sqrt(), self.tau_max)
    }
}

/// χ as a function of the coordinate distance to the box.
pub fn cutoff(dist: f64, tau_max: f64) -> f64 {
    if dist <= tau_max {
        return 1.0;
    }
    if dist >= 2.0 * tau_max {
        return 0.0;
    }
    let t = (dist - tau_max) / tau_max;
    let psi = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    psi(1.0 - t) / (psi(1.0 - t) + psi(t))
}

/// Samples on a box of grid nodes indexed relative to the chart (index 0 is the
/// chart's first node; negative indices lie outside).
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub lo: [isize; 3],
    pub shape: [usize; 3],
    pub data: Vec<C64>,
}

impl Patch {
    pub fn zeros(lo: [isize; 3], shape: [usize; 3]) -> Self {
        Patch { lo, shape, data: vec![C64::new(0.0, 0.0); shape.iter().product()] }
    }

    pub fn index(&self, ix: [isize; 3]) -> Option<usize> {
        let mut lin = 0usize;
        for a in 0..3 {
            let k = ix[a] - self.lo[a];
            if k < 0 || k >= self.shape[a] as isize {
                return None;
            }
            lin = lin * self.shape[a] + k as usize;
        }
        Some(lin)
    }

    /// Value at a node, zero outside the patch.
    pub fn get(&self, ix: [isize; 3]) -> C64 {
        self.index(ix).map_or(C64::new(0.0, 0.0), |m| self.data[m])
    }

    pub fn node(&self, lin: usize) -> [isize; 3] {
        let k = lin % self.shape[2];
        let j = (lin / self.shape[2]) % self.shape[1];
        let i = lin / (self.shape[1] * self.shape[2]);
        [self.lo[0] + i as isize, self.lo[1] + j as isize, self.lo[2] + k as isize]
    }

    /// Restriction to the chart nodes.
    pub fn to_chart(&self, chart: &CylinderChart) -> Result<ScalarField> {
        let s = chart.shape();
        let mut data = Vec::with_capacity(chart.len());
        for i in 0..s[0] {
            for j in 0..s[1] {
                for k in 0..s[2] {
                    let m = self
                        .index([i as isize, j as isize, k as isize])
                        .ok_or_else(|| LabError::Window("patch does not cover the chart".into()))?;
                    data.push(self.data[m]);
                }
            }
        }
        ScalarField::from_vec(chart, data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Coordinates of a (possibly exterior) node.
pub fn node_coords(chart: &CylinderChart, ix: [isize; 3]) -> [f64; 3] {
    [0, 1, 2].map(|a| chart.axes[a].min + ix[a] as f64 * chart.step(a))
}

/// Coordinate distance from a node to the chart box.
pub fn distance_to_box(chart: &CylinderChart, ix: [isize; 3]) -> f64 {
    let x = node_coords(chart, ix);
    let mut s = 0.0;
    for a in 0..3 {
        let ax = chart.axes[a];
        let d = (ax.min - x[a]).max(x[a] - ax.max).max(0.0);
        s += d * d;
    }
    s.sqrt()
}

fn fold(i: isize, n: usize) -> usize {
    let p = 2 * (n as isize - 1);
    let k = i.rem_euclid(p);
    (if k > n as isize - 1 { p - k } else { k }) as usize
}

/// The compactly supported extension of a chart field.
pub fn extend(chart: &CylinderChart, f: &ScalarField, ext: &Extension) -> Result<Patch> {
    chart.same_grid(f.shape)?;
    if !(ext.tau_max > 0.0) {
        return Err(LabError::Parameter("extension cutoff must be positive".into()));
    }
    let m = ext.margin(chart);
    let s = chart.shape();
    let lo = [0, 1, 2].map(|a| -(m[a] as isize));
    let shape = [0, 1, 2].map(|a| s[a] + 2 * m[a]);
    let mut p = Patch::zeros(lo, shape);
    for lin in 0..p.data.len() {
        let ix = p.node(lin);
        let x = node_coords(chart, ix);
        let chi = ext.chi(chart, x);
        if chi == 0.0 {
            continue;
        }
        let inside = (0..3).all(|a| ix[a] >= 0 && ix[a] < s[a] as isize);
        let v = match &ext.rule {
            ExtensionRule::Reflect => f.data[chart.idx(fold(ix[0], s[0]), fold(ix[1], s[1]), fold(ix[2], s[2]))],
            _ if inside => f.data[chart.idx(ix[0] as usize, ix[1] as usize, ix[2] as usize)],
            ExtensionRule::Analytic(g) => g(x),
            ExtensionRule::WithCutoff(g) => {
                p.data[lin] = g(x, &|y| ext.chi(chart, y));
                continue;
            }
        };
        p.data[lin] = v * chi;
    }
    Ok(p)
}

/// Discrete convolution weights w(d) = ∫ Ψ_τ(z) Π_a hat(z_a/h_a − d_a) dz, i.e. the exact
/// convolution of the piecewise multilinear interpolant. Renormalized to unit sum.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub tau: f64,
    pub radius: [usize; 3],
    pub offsets: Vec<[isize; 3]>,
    pub weights: Vec<f64>,
}

fn axis_rule(h: f64, d: isize, tau: f64, gl: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    let c = h * d as f64;
    let mut out = Vec::new();
    for (a, b) in [(c - h, c), (c, c + h)] {
        let (a, b) = (a.max(-tau), b.min(tau));
        if b <= a {
            continue;
        }
        let segs = ((b - a) / (tau / 3.0)).ceil().max(1.0) as usize;
        let len = (b - a) / segs as f64;
        for s in 0..segs {
            let lo = a + s as f64 * len;
            for (x, w) in gl.0.iter().zip(&gl.1) {
                let z = lo + 0.5 * len * (x + 1.0);
                let hat = 1.0 - (z / h - d as f64).abs();
                out.push((z * z, 0.5 * len * w * hat.max(0.0)));
            }
        }
    }
    out
}

pub fn hat_stencil(kernel: &MollifierKernel, tau: f64, steps: [f64; 3]) -> Stencil {
    let gl = gauss_legendre(6);
    let radius = [0, 1, 2].map(|a| (tau / steps[a]).ceil() as usize);
    let tau2 = tau * tau;
    let scale = 1.0 / (tau * tau * tau);
    let mut octant = Vec::new();
    for d0 in 0..=radius[0] as isize {
        let q0 = axis_rule(steps[0], d0, tau, &gl);
        for d1 in 0..=radius[1] as isize {
            let q1 = axis_rule(steps[1], d1, tau, &gl);
            for d2 in 0..=radius[2] as isize {
                let q2 = axis_rule(steps[2], d2, tau, &gl);
                let mut s = 0.0;
                for (z0, w0) in &q0 {
                    for (z1, w1) in &q1 {
                        let r01 = z0 + z1;
                        if r01 >= tau2 {
                            continue;
                        }
                        let w01 = w0 * w1;
                        for (z2, w2) in &q2 {
                            let r = r01 + z2;
                            if r < tau2 {
                                s += w01 * w2 * kernel.radial((r / tau2).sqrt());
                            }
                        }
                    }
                }
                if s > 0.0 {
                    octant.push(([d0, d1, d2], s * scale));
                }
            }
        }
    }
    let mut offsets = Vec::new();
    let mut weights = Vec::new();
    for (d, w) in octant {
        for s0 in [1, -1] {
            for s1 in [1, -1] {
                for s2 in [1, -1] {
                    if (d[0] == 0 && s0 < 0) || (d[1] == 0 && s1 < 0) || (d[2] == 0 && s2 < 0) {
                        continue;
                    }
                    offsets.push([d[0] * s0, d[1] * s1, d[2] * s2]);
                    weights.push(w);
                }
            }
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Stencil { tau, radius, offsets, weights }
}

/// Convolves a patch (zero outside) with the stencil, producing values on the requested box.
pub fn convolve(input: &Patch, st: &Stencil, out_lo: [isize; 3], out_shape: [usize; 3]) -> Patch {
    // zero-padded copy covering out ⊕ radius so the inner loop uses flat offsets
    let plo = [0, 1, 2].map(|a| out_lo[a] - st.radius[a] as isize);
    let pshape = [0, 1, 2].map(|a| out_shape[a] + 2 * st.radius[a]);
    let n: usize = pshape.iter().product();
    let real = input.data.iter().all(|v| v.im == 0.0);
    let mut re = vec![0.0; n];
    let mut im = if real { Vec::new() } else { vec![0.0; n] };
    for lin in 0..n {
        let k = lin % pshape[2];
        let j = (lin / pshape[2]) % pshape[1];
        let i = lin / (pshape[1] * pshape[2]);
        let v = input.get([plo[0] + i as isize, plo[1] + j as isize, plo[2] + k as isize]);
        re[lin] = v.re;
        if !real {
            im[lin] = v.im;
        }
    }
    let s1 = pshape[2] as isize;
    let s0 = (pshape[1] * pshape[2]) as isize;
    let flat: Vec<(isize, f64)> = st.offsets.iter().zip(&st.weights).map(|(d, w)| (d[0] * s0 + d[1] * s1 + d[2], *w)).collect();
    let mut out = Patch::zeros(out_lo, out_shape);
    let r = st.radius.map(|v| v as isize);
    let conv = |src: &[f64], base: isize| flat.iter().map(|(o, w)| w * src[(base + o) as usize]).sum::<f64>();
    for lin in 0..out.data.len() {
        let k = (lin % out_shape[2]) as isize;
        let j = ((lin / out_shape[2]) % out_shape[1]) as isize;
        let i = (lin / (out_shape[1] * out_shape[2])) as isize;
        let base = (i + r[0]) * s0 + (j + r[1]) * s1 + (k + r[2]);
        let vr = conv(&re, base);
        let vi = if real { 0.0 } else { conv(&im, base) };
        out.data[lin] = C64::new(vr, vi);
    }
    out
}

/// Rejects τ outside (0, min(tau_max, half the largest chart extent)].
pub fn check_tau(chart: &CylinderChart, tau: f64, ext: &Extension) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(LabError::Parameter(format!("mollification radius must be positive, got {tau}")));
    }
    let extent = chart.axes.iter().map(|a| a.length()).fold(0.0, f64::max);
    if tau >= 0.5 * extent {
        return Err(LabError::Parameter(format!("mollification radius {tau} is not below half the chart extent {extent}")));
    }
    if tau > ext.tau_max * (1.0 + 1e-12) {
        return Err(LabError::Parameter(format!("mollification radius {tau} exceeds the extension margin {}", ext.tau_max)));
    }
    Ok(())
}

fn stencil_for(chart: &CylinderChart, kernel: &MollifierKernel, tau: f64) -> Stencil {
    hat_stencil(kernel, tau, [0, 1, 2].map(|a| chart.step(a)))
}

/// f ∗ Ψ_τ on the chart nodes.
pub fn mollify(chart: &CylinderChart, f: &ScalarField, tau: f64, kernel: &MollifierKernel, ext: &Extension) -> Result<ScalarField> {
    check_tau(chart, tau, ext)?;
    let st = stencil_for(chart, kernel, tau);
    let p = extend(chart, f, ext)?;
    convolve(&p, &st, [0, 0, 0], chart.shape()).to_chart(chart)
}

/// f ∗ Ψ_τ on an arbitrary node box (used for the ∂̄ window).
pub fn mollify_patch(
    chart: &CylinderChart,
    f: &ScalarField,
    st: &Stencil,
    ext: &Extension,
    out_lo: [isize; 3],
    out_shape: [usize; 3],
) -> Result<Patch> {
    check_tau(chart, st.tau, ext)?;
    let p = extend(chart, f, ext)?;
    Ok(convolve(&p, st, out_lo, out_shape))
}

/// Node box holding the full support of the mollified extension.
pub fn support_box(chart: &CylinderChart, st: &Stencil, ext: &Extension) -> ([isize; 3], [usize; 3]) {
    let m = ext.margin(chart);
    let s = chart.shape();
    let lo = [0, 1, 2].map(|a| -((m[a] + st.radius[a]) as isize));
    let shape = [0, 1, 2].map(|a| s[a] + 2 * (m[a] + st.radius[a]));
    (lo, shape)
}

/// Componentwise mollification A_τ of a 1-form.
pub fn regularize_one_form(chart: &CylinderChart, a: &OneForm, tau: f64, kernel: &MollifierKernel, exts: &[Extension; 3]) -> Result<OneForm> {
    chart.same_grid(a.shape)?;
    let st = stencil_for(chart, kernel, tau);
    let mut comps = Vec::with_capacity(3);
    for c in 0..3 {
        check_tau(chart, tau, &exts[c])?;
        let f = a.component(c);
        if f.max_abs() == 0.0 && matches!(exts[c].rule, ExtensionRule::Reflect) {
            comps.push(f);
            continue;
        }
        comps.push(convolve(&extend(chart, &f, &exts[c])?, &st, [0, 0, 0], chart.shape()).to_chart(chart)?);
    }
    let [x, y, z]: [ScalarField; 3] = comps.try_into().expect("three components");
    Ok(OneForm::from_components([x, y, z]))
}

/// Reflection extensions for all three components.
pub fn reflect_all(tau_max: f64) -> [Extension; 3] {
    [Extension::reflect(tau_max), Extension::reflect(tau_max), Extension::reflect(tau_max)]
}

/// Where the ladder norms are measured.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Chart,
    /// Nodes at coordinate distance ≥ the given value from every face.
    Interior(f64),
}

impl Region {
    pub fn nodes(&self, chart: &CylinderChart) -> Vec<usize> {
        match self {
            Region::Chart => (0..chart.len()).collect(),
            Region::Interior(d) => (0..chart.len())
                .filter(|&m| {
                    let x = chart.coords(m);
                    (0..3).all(|a| x[a] - chart.axes[a].min >= d - 1e-12 && chart.axes[a].max - x[a] >= d - 1e-12)
                })
                .collect(),
        }
    }
}

/// L^p norm (p = ∞ allowed) of pointwise values over a node subset, volume measure.
pub fn lp_on(chart: &CylinderChart, vals: &[f64], p: f64, nodes: &[usize]) -> f64 {
    if p.is_infinite() {
        return nodes.iter().map(|&m| vals[m].abs()).fold(0.0, f64::max);
    }
    let w = chart.volume_weights();
    nodes.iter().map(|&m| w[m] * vals[m].abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// The four ladders of a rate study.
#[derive(Clone, Debug)]
pub struct RateStudy {
    /// ‖f_τ − f‖_p / τ, decreasing.
    pub approximation: ConvergenceReport,
    /// τ ‖∇²f_τ‖_p, decreasing.
    pub hessian: ConvergenceReport,
    /// τ^k ‖∇^k f_τ‖_∞ for k = 1, 2, bounded by twice the first rung.
    pub sup: Vec<ConvergenceReport>,
}

impl RateStudy {
    pub fn reports(&self) -> Vec<&ConvergenceReport> {
        let mut v = vec![&self.approximation, &self.hessian];
        v.extend(self.sup.iter());
        v
    }

    pub fn passed(&self) -> bool {
        self.reports().iter().all(|r| r.verdict)
    }
}

fn check_ladder(taus: &[f64]) -> Result<()> {
    if taus.is_empty() || taus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::Parameter(format!("tau list must strictly decrease: {taus:?}")));
    }
    Ok(())
}

fn study(chart: &CylinderChart, name: &str, p: f64, taus: &[f64], nodes: &[usize], mut rung: impl FnMut(f64) -> Result<(Vec<f64>, Tensor)>) -> Result<RateStudy> {
    let mut approx = Vec::new();
    let mut hess = Vec::new();
    let mut sup1 = Vec::new();
    let mut sup2 = Vec::new();
    for &tau in taus {
        let (diff, t0) = rung(tau)?;
        approx.push(lp_on(chart, &diff, p, nodes));
        let t1 = covariant_derivative(chart, &t0)?;
        let t2 = covariant_derivative(chart, &t1)?;
        let n1 = t1.pointwise_norm(chart);
        let n2 = t2.pointwise_norm(chart);
        hess.push(lp_on(chart, &n2, p, nodes));
        sup1.push(lp_on(chart, &n1, f64::INFINITY, nodes));
        sup2.push(lp_on(chart, &n2, f64::INFINITY, nodes));
    }
    let t = taus.to_vec();
    Ok(RateStudy {
        approximation: ConvergenceReport::new(&format!("{name}: |f_tau - f|_p / tau"), t.clone(), approx, 1.0, Trend::Decreasing)?,
        hessian: ConvergenceReport::new(&format!("{name}: tau |D2 f_tau|_p"), t.clone(), hess, -1.0, Trend::Decreasing)?,
        sup: vec![
            ConvergenceReport::new(&format!("{name}: tau |D f_tau|_inf"), t.clone(), sup1, -1.0, Trend::Bounded { factor: 2.0 })?,
            ConvergenceReport::new(&format!("{name}: tau^2 |D2 f_tau|_inf"), t, sup2, -2.0, Trend::Bounded { factor: 2.0 })?,
        ],
    })
}

/// Mollifier ladders for a scalar field over a strictly decreasing τ list.
pub fn rate_study_lp(
    chart: &CylinderChart,
    f: &ScalarField,
    p: f64,
    taus: &[f64],
    kernel: &MollifierKernel,
    ext: &Extension,
    region: &Region,
) -> Result<RateStudy> {
    check_ladder(taus)?;
    let nodes = region.nodes(chart);
    study(chart, "scalar", p, taus, &nodes, |tau| {
        let ft = mollify(chart, f, tau, kernel, ext)?;
        let diff: Vec<f64> = ft.data.iter().zip(&f.data).map(|(a, b)| (a - b).norm()).collect();
        Ok((diff, Tensor::scalar(&ft)))
    })
}

/// Ladders for A_τ in L^n with n = 3 (approximation and ∇² in L³, ∇^k in L^∞).
pub fn one_form_rates(chart: &CylinderChart, a: &OneForm, taus: &[f64], kernel: &MollifierKernel, exts: &[Extension; 3], region: &Region) -> Result<RateStudy> {
    check_ladder(taus)?;
    let nodes = region.nodes(chart);
    study(chart, "one-form", 3.0, taus, &nodes, |tau| {
        let at = regularize_one_form(chart, a, tau, kernel, exts)?;
        let diff = crate::geometry::pointwise_norm(chart, &at.sub(a));
        Ok((diff, Tensor::one_form(&at)))
    })
}

/// Built-in test functions of the rate corpus.
pub fn corpus(name: &str) -> Option<fn([f64; 3]) -> f64> {
    let f: fn([f64; 3]) -> f64 = match name {
        "smooth" => |x| (2.0 * x[0]).sin() * x[1].cos(),
        "kinked" => |x| (x[0] - 0.5).abs(),
        "plateau" => |x| (2.0 * (x[0] - 0.3)).clamp(0.0, 0.6),
        "smoothed-step" => |x| 0.5 * (1.0 + ((x[0] - 0.5) / 0.05).tanh()),
        _ => return None,
    };
    Some(f)
}

pub const CORPUS: [&str; 4] = ["smooth", "kinked", "plateau", "smoothed-step"];

/// Chart used by the rate ladders: fine in x1, coarse across.
pub fn rate_chart(n1: usize) -> Result<CylinderChart> {
    use crate::geometry::{Axis, Warp};
    use std::f64::consts::FRAC_PI_6;
    CylinderChart::new(Axis::new(0.0, 1.0, n1), Axis::new(1.0, 3.0, 5), Axis::new(-FRAC_PI_6, FRAC_PI_6, 5), Warp::Constant(1.0))
        .map(|c| c.named("rate-study"))
}
