//! Magnetic Green formula, gauge potentials, the partial-data integral
//! identity with its boundary terms, and the two limit functionals.

use std::sync::Arc;

use crate::cgo::{cgo_chart, holomorphic_factor, paired, reference_phase, rho, CgoParams, CgoSolution, RemainderMode};
use crate::dbar::CellRule;
use crate::error::{LabError, Result};
use crate::geometry::{
    boundary_split, differential, exterior_derivative, flat, inner, integrate_flat, integrate_volume, l2_norm, magnetic_apply,
    normal_component, normal_derivative, sharp, trace, advection_apply, advection_to_magnetic, BoundaryField, BoundaryRegion,
    CylinderChart, OneForm, ScalarField, Subset, VectorField, FACES,
};
use crate::linsolve::{solve_general, Csr};
use crate::mollify::Extension;
use crate::presets::{bump_q, Coefficients, Point, Profile};
use crate::report::{ConvergenceReport, Trend};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// |(L_{A,q}u, v) − (u, L_{Ā,q̄}v) − boundary terms| with the sesquilinear volume pairing;
/// the boundary side is −∫(∂_ν u + i⟨A,ν⟩u) v̄ + ∫ u conj(∂_ν v + i⟨Ā,ν⟩v).
pub fn green_residual(chart: &CylinderChart, a: &OneForm, q: &ScalarField, u: &ScalarField, v: &ScalarField) -> Result<f64> {
    Ok(green_sides(chart, a, q, u, v)?.residual())
}

/// Both sides of the magnetic Green formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenSides {
    pub volume: C64,
    pub boundary: C64,
}

impl GreenSides {
    pub fn residual(&self) -> f64 {
        (self.volume - self.boundary).norm()
    }
}

pub fn green_sides(chart: &CylinderChart, a: &OneForm, q: &ScalarField, u: &ScalarField, v: &ScalarField) -> Result<GreenSides> {
    for s in [u.shape, v.shape, q.shape, a.shape] {
        chart.same_grid(s)?;
    }
    let abar = a.map(|z| z.conj());
    let qbar = q.conj();
    let lu = magnetic_apply(chart, a, q, u)?;
    let lv = magnetic_apply(chart, &abar, &qbar, v)?;
    let volume = integrate_volume(chart, &lu.mul(&v.conj()))? - integrate_volume(chart, &u.mul(&lv.conj()))?;

    let an = normal_component(chart, a)?;
    let abn = normal_component(chart, &abar)?;
    let (tu, tv) = (trace(chart, u)?, trace(chart, v)?);
    let nu = normal_derivative(chart, u)?.add(&an.mul(&tu).scale(I));
    let nv = normal_derivative(chart, v)?.add(&abn.mul(&tv).scale(I));
    let integrand = nu.zip(&tv, |x, y| -x * y.conj()).add(&tu.zip(&nv, |x, y| x * y.conj()));
    let boundary = boundary_integral(chart, &integrand, None);
    Ok(GreenSides { volume, boundary })
}

fn boundary_integral(chart: &CylinderChart, f: &BoundaryField, region: Option<(&BoundaryRegion, Subset)>) -> C64 {
    match region {
        Some((r, s)) => r.integrate(f, s),
        None => {
            let mut s = zero();
            for (fi, face) in FACES.iter().enumerate() {
                for (v, w) in f.faces[fi].iter().zip(face.weights(chart)) {
                    s += v * w;
                }
            }
            s
        }
    }
}

/// Cumulative ∫ along one grid line with local cubic interpolation
/// (exact for cubics; trapezoid/quadratic on very short lines).
fn cumulative(f: &[C64], h: f64) -> Vec<C64> {
    let n = f.len();
    let mut out = vec![zero(); n];
    for i in 0..n.saturating_sub(1) {
        let seg = match n {
            2 => 0.5 * h * (f[0] + f[1]),
            3 if i == 0 => h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]),
            3 => h / 12.0 * (-f[0] + 8.0 * f[1] + 5.0 * f[2]),
            _ if i == 0 => h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]),
            _ if i == n - 2 => h / 24.0 * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]),
            _ => h / 24.0 * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]),
        };
        out[i + 1] = out[i] + seg;
    }
    out
}

/// Line integration from the corner node, axes visited in `order`.
fn path_integral(chart: &CylinderChart, delta: &OneForm, order: [usize; 3]) -> Vec<C64> {
    let s = chart.shape();
    let mut phi = vec![zero(); chart.len()];
    for (stage, &a) in order.iter().enumerate() {
        let pending = &order[stage + 1..];
        for m in 0..chart.len() {
            let ix = chart.unidx(m);
            if ix[a] != 0 || pending.iter().any(|&p| ix[p] != 0) {
                continue;
            }
            let line: Vec<usize> = (0..s[a])
                .map(|k| {
                    let mut j = ix;
                    j[a] = k;
                    chart.idx(j[0], j[1], j[2])
                })
                .collect();
            let vals: Vec<C64> = line.iter().map(|&n| delta.comp[a][n]).collect();
            let c = cumulative(&vals, chart.step(a));
            let base = phi[m];
            for (k, &n) in line.iter().enumerate() {
                phi[n] = base + c[k];
            }
        }
    }
    phi
}

/// A potential with dφ = δ and its diagnostics.
#[derive(Clone, Debug)]
pub struct GaugePotential {
    pub phi: ScalarField,
    /// max |φ_(x1,r,θ) − φ_(θ,r,x1)| over the two path orderings.
    pub path_gap: f64,
    /// ‖dδ‖_∞ relative to the largest first derivative of δ.
    pub closedness: f64,
    pub boundary_max: f64,
}

fn relative_curl(chart: &CylinderChart, delta: &OneForm) -> Result<f64> {
    let d = exterior_derivative(chart, delta)?;
    let curl = d.iter().map(|c| c.max_abs()).fold(0.0, f64::max);
    let mut scale = 0.0f64;
    for a in 0..3 {
        let c = delta.component(a);
        for b in 0..3 {
            scale = scale.max(crate::geometry::partial(chart, &c, b)?.max_abs());
        }
    }
    Ok(if scale > 0.0 { curl / scale } else { curl })
}

/// φ with dφ = δ by coordinate-path integration from the corner, shifted so
/// that the boundary mean vanishes. Fails with a domain error when the relative
/// discrete curl of δ exceeds `closed_tol`.
pub fn gauge_potential(chart: &CylinderChart, delta: &OneForm, closed_tol: f64) -> Result<GaugePotential> {
    chart.same_grid(delta.shape)?;
    let closedness = relative_curl(chart, delta)?;
    if closedness > closed_tol {
        return Err(LabError::Domain(format!("one-form is not closed: relative ‖dδ‖ = {closedness:.3e} > {closed_tol:.1e}")));
    }
    let p = path_integral(chart, delta, [0, 1, 2]);
    let q = path_integral(chart, delta, [2, 1, 0]);
    let path_gap = p.iter().zip(&q).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let mut phi = ScalarField::from_vec(chart, p)?;
    let region = boundary_split(chart, 1.0, 0.0)?;
    let mean = region.integrate(&trace(chart, &phi)?, Subset::All) / region.area(Subset::All);
    phi = phi.map(|v| v - mean);
    let boundary: Vec<usize> = (0..chart.len()).filter(|&m| chart.on_boundary(m)).collect();
    let boundary_max = phi.max_abs_on(&boundary);
    Ok(GaugePotential { phi, path_gap, closedness, boundary_max })
}

/// w₂ = e^{−iφ}u₁. Accepts u₁ or its envelope a₁ + r₁ (the exponential weight commutes).
pub fn gauge_matched_solution(chart: &CylinderChart, u1: &ScalarField, phi: &ScalarField, tol: f64) -> Result<ScalarField> {
    chart.same_grid(u1.shape)?;
    chart.same_grid(phi.shape)?;
    let boundary: Vec<usize> = (0..chart.len()).filter(|&m| chart.on_boundary(m)).collect();
    let bmax = phi.max_abs_on(&boundary);
    if bmax > tol {
        return Err(LabError::Gauge(format!("gauge potential is {bmax:.3e} on ∂M (tolerance {tol:.1e})")));
    }
    Ok(phi.zip(u1, |p, u| (-I * p).exp() * u))
}

/// ‖L_{A+dφ,q}(e^{−iφ}u) − e^{−iφ}L_{A,q}u‖₂ / ‖e^{−iφ}L_{A,q}u‖₂ with dφ taken discretely.
pub fn gauge_conjugation_gap(chart: &CylinderChart, a: &OneForm, q: &ScalarField, phi: &ScalarField, u: &ScalarField) -> Result<f64> {
    let e = phi.map(|p| (-I * p).exp());
    let a2 = a.add(&differential(chart, phi)?);
    let lhs = magnetic_apply(chart, &a2, q, &e.mul(u))?;
    let rhs = e.mul(&magnetic_apply(chart, a, q, u)?);
    Ok(l2_norm(chart, &lhs.sub(&rhs)) / l2_norm(chart, &rhs))
}

/// Scenario kinds of a coefficient pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// A₂ = A₁ + dφ, q₂ = q₁, φ = 0 on ∂M.
    Gauge,
    Generic,
}

/// φ = amp Π sin(k_a π t_a), t_a the normalized chart coordinate; zero on ∂M.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SineGauge {
    pub amp: f64,
    pub k: [f64; 3],
    pub lo: [f64; 3],
    pub len: [f64; 3],
}

impl SineGauge {
    pub fn new(chart: &CylinderChart, amp: f64, k: [f64; 3]) -> Self {
        SineGauge { amp, k, lo: chart.axes.map(|a| a.min), len: chart.axes.map(|a| a.length()) }
    }

    fn arg(&self, x: Point, a: usize) -> f64 {
        self.k[a] * std::f64::consts::PI * (x[a] - self.lo[a]) / self.len[a]
    }

    pub fn value(&self, x: Point) -> f64 {
        self.amp * (0..3).map(|a| self.arg(x, a).sin()).product::<f64>()
    }

    pub fn gradient(&self, x: Point) -> [f64; 3] {
        let s = [0, 1, 2].map(|a| self.arg(x, a).sin());
        let c = [0, 1, 2].map(|a| self.arg(x, a).cos());
        [0, 1, 2].map(|a| {
            let others: f64 = (0..3).filter(|&b| b != a).map(|b| s[b]).product();
            self.amp * self.k[a] * std::f64::consts::PI / self.len[a] * c[a] * others
        })
    }
}

/// A pair of coefficient sets on a shared chart.
#[derive(Clone, Debug)]
pub struct ScenarioPair {
    pub name: String,
    pub kind: ScenarioKind,
    pub first: Coefficients,
    pub second: Coefficients,
    pub gauge: Option<SineGauge>,
}

pub const SCENARIOS: [&str; 4] = ["gauge-smooth", "gauge-rough", "gauge-bump", "generic"];

impl ScenarioPair {
    /// Gauge pair A₂ = A₁ + dφ, q₂ = q₁.
    pub fn gauge(name: &str, base: Coefficients, g: SineGauge) -> Self {
        let a1 = base.a.clone();
        let second = Coefficients {
            name: format!("{}+dφ", base.name),
            a: Arc::new(move |x| {
                let v = a1(x);
                let d = g.gradient(x);
                [v[0] + d[0], v[1] + d[1], v[2] + d[2]]
            }),
            q: base.q.clone(),
            analytic_extension: true,
        };
        ScenarioPair { name: name.to_string(), kind: ScenarioKind::Gauge, first: base, second, gauge: Some(g) }
    }

    /// Catalogue:
    /// - `gauge-smooth`: smooth (A, q), φ with one half-wave per axis
    /// - `gauge-rough`: rough (A, q), two half-waves in x1
    /// - `gauge-bump`: A = 0, bump q, two half-waves in r
    /// - `generic`: smooth (A₁, q₁), A₂ = A₁ − (0, 0.4 x1, 0.2 x1 r), q₂ = q₁ − ½ bump
    pub fn preset(name: &str, chart: &CylinderChart) -> Result<Self> {
        Ok(match name {
            "gauge-smooth" => Self::gauge(name, Coefficients::preset("smooth")?, SineGauge::new(chart, 0.3, [1.0, 1.0, 1.0])),
            "gauge-rough" => Self::gauge(name, Coefficients::preset("rough")?, SineGauge::new(chart, 0.2, [2.0, 1.0, 1.0])),
            "gauge-bump" => Self::gauge(name, Coefficients::preset("bump-q")?, SineGauge::new(chart, 0.25, [1.0, 2.0, 1.0])),
            "generic" => {
                let first = Coefficients::preset("smooth")?;
                let (a1, q1) = (first.a.clone(), first.q.clone());
                let second = Coefficients {
                    name: "generic".into(),
                    a: Arc::new(move |x| {
                        let v = a1(x);
                        [v[0], v[1] - 0.4 * x[0], v[2] - 0.2 * x[0] * x[1]]
                    }),
                    q: Arc::new(move |x| q1(x) - 0.5 * bump_q(x)),
                    analytic_extension: true,
                };
                ScenarioPair { name: name.into(), kind: ScenarioKind::Generic, first, second, gauge: None }
            }
            _ => return Err(LabError::Config(format!("unknown scenario '{name}' (known: {SCENARIOS:?})"))),
        })
    }

    /// δ = A₁ − A₂ sampled on the chart.
    pub fn delta(&self, chart: &CylinderChart) -> OneForm {
        self.first.one_form(chart).sub(&self.second.one_form(chart))
    }

    pub fn phi(&self, chart: &CylinderChart) -> Option<ScalarField> {
        self.gauge.map(|g| ScalarField::from_real(chart, |x| g.value(x)))
    }

    /// Extensions χA₁ and χA₂ + φ dχ, so that A₂ − A₁ = d(χφ) outside M as well.
    pub fn extensions(&self, tau_max: f64) -> ([Extension; 3], [Extension; 3]) {
        let ext = |c: &Coefficients, g: Option<SineGauge>| {
            [0, 1, 2].map(|k| {
                let a = c.a.clone();
                Extension::with_cutoff(tau_max, move |x, chi| {
                    let mut v = a(x)[k] * chi(x);
                    if let Some(g) = g {
                        let step = 1e-6 * g.len[k];
                        let (mut xp, mut xm) = (x, x);
                        xp[k] += step;
                        xm[k] -= step;
                        v += g.value(x) * (chi(xp) - chi(xm)) / (2.0 * step);
                    }
                    v
                })
            })
        };
        (ext(&self.first, None), ext(&self.second, self.gauge))
    }
}

fn check_pairing(u1: &CgoSolution, u2: &CgoSolution) -> Result<()> {
    if u1.sign != -1.0 || u2.sign != 1.0 {
        return Err(LabError::Pairing(format!(
            "identity needs u₁ = e^{{ρ/h}}(a₁+r₁) and u₂ = e^{{−ρ/h}}(a₂+r₂), got signs {} and {}",
            u1.sign, u2.sign
        )));
    }
    if (u1.h - u2.h).abs() > 1e-15 {
        return Err(LabError::Pairing(format!("h mismatch: {} vs {}", u1.h, u2.h)));
    }
    Ok(())
}

/// The two volume integrals of the identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityLhs {
    pub magnetic: C64,
    pub electric: C64,
    /// ∫ |integrand| dV, the scale against which agreement is judged.
    pub l1: f64,
}

impl IdentityLhs {
    pub fn total(&self) -> C64 {
        self.magnetic + self.electric
    }
}

fn identity_integrands(
    chart: &CylinderChart,
    pair: &ScenarioPair,
    uu: &ScalarField,
    cross: &OneForm,
) -> Result<(ScalarField, ScalarField)> {
    let (a1, a2) = (pair.first.one_form(chart), pair.second.one_form(chart));
    let delta = a1.sub(&a2);
    let mag = inner(chart, &delta, cross)?.scale(I);
    let pot = inner(chart, &a1, &a1)?.sub(&inner(chart, &a2, &a2)?).add(&pair.first.potential(chart)).sub(&pair.second.potential(chart));
    Ok((mag, pot.mul(uu)))
}

fn lhs_from(chart: &CylinderChart, mag: &ScalarField, ele: &ScalarField) -> Result<IdentityLhs> {
    let abs = mag.zip(ele, |x, y| C64::new(x.norm() + y.norm(), 0.0));
    Ok(IdentityLhs { magnetic: integrate_volume(chart, mag)?, electric: integrate_volume(chart, ele)?, l1: integrate_volume(chart, &abs)?.re })
}

/// e^{−sρ/h} D(e^{sρ/h}B) for the discrete differential D, with the exponential
/// shifted to each stencil center so nothing larger than e^{grid/h} is formed.
pub fn weighted_differential(chart: &CylinderChart, b: &ScalarField, h: f64, sign: f64) -> Result<OneForm> {
    chart.same_grid(b.shape)?;
    let rho: Vec<C64> = (0..chart.len()).map(|m| {
        let x = chart.coords(m);
        C64::new(x[0], x[1])
    }).collect();
    let comp = [0, 1, 2].map(|a| {
        let d = chart.derivative_operator(a);
        (0..chart.len())
            .map(|m| {
                let (c, w) = d.row(m);
                c.iter().zip(w).map(|(&j, &wj)| wj * (sign * (rho[j] - rho[m]) / h).exp() * b.data[j]).sum()
            })
            .collect()
    });
    Ok(OneForm { shape: b.shape, comp })
}

/// ∫ i⟨A₁−A₂, u₁du₂ − u₂du₁⟩ dV + ∫ (⟨A₁,A₁⟩ − ⟨A₂,A₂⟩ + q₁ − q₂)u₁u₂ dV in the
/// envelope form: u₁u₂ = B₁B₂ and u₁du₂ − u₂du₁ = B₁dB₂ − B₂dB₁ − (2/h)B₁B₂dρ, B = a + r.
pub fn integral_identity_lhs(chart: &CylinderChart, pair: &ScenarioPair, u1: &CgoSolution, u2: &CgoSolution) -> Result<IdentityLhs> {
    check_pairing(u1, u2)?;
    let (b1, b2) = (u1.envelope(), u2.envelope());
    let (db1, db2) = (differential(chart, &b1)?, differential(chart, &b2)?);
    let uu = b1.mul(&b2);
    let drho = differential(chart, &rho(chart))?;
    let cross = db2.times(&b1).sub(&db1.times(&b2)).sub(&drho.times(&uu.scale_re(2.0 / u1.h)));
    let (mag, ele) = identity_integrands(chart, pair, &uu, &cross)?;
    lhs_from(chart, &mag, &ele)
}

/// As `integral_identity_lhs` but with u₁du₂ − u₂du₁ = B₁D₋B₂ − B₂D₊B₁ from the shifted
/// differentials, which reproduces the discrete derivative of the explicit fields.
pub fn integral_identity_lhs_shifted(chart: &CylinderChart, pair: &ScenarioPair, u1: &CgoSolution, u2: &CgoSolution) -> Result<IdentityLhs> {
    check_pairing(u1, u2)?;
    let (b1, b2) = (u1.envelope(), u2.envelope());
    let db1 = weighted_differential(chart, &b1, u1.h, 1.0)?;
    let db2 = weighted_differential(chart, &b2, u1.h, -1.0)?;
    let uu = b1.mul(&b2);
    let cross = db2.times(&b1).sub(&db1.times(&b2));
    let (mag, ele) = identity_integrands(chart, pair, &uu, &cross)?;
    lhs_from(chart, &mag, &ele)
}

/// The same integrals from explicit fields u₁, u₂ (overflows for small h).
pub fn integral_identity_fields(chart: &CylinderChart, pair: &ScenarioPair, u1: &ScalarField, u2: &ScalarField) -> Result<IdentityLhs> {
    let (du1, du2) = (differential(chart, u1)?, differential(chart, u2)?);
    let cross = du2.times(u1).sub(&du1.times(u2));
    let (mag, ele) = identity_integrands(chart, pair, &u1.mul(u2), &cross)?;
    lhs_from(chart, &mag, &ele)
}

/// Boundary side of the identity for a gauge pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryTerms {
    /// ∫_{∂M∖Γ} ∂_ν(w₂ − u₁)u₂ dS
    pub j_h: C64,
    /// ∫_{∂M∖Γ} ⟨A₁ − A₂, ν⟩u₁u₂ dS
    pub k_h: C64,
    /// −∫_{∂M} ∂_ν(w₂ − u₁)u₂ dS + i∫_{∂M} ⟨A₁ − A₂, ν⟩u₁u₂ dS
    pub rhs: C64,
    /// The part of `rhs` over Γ, which the Cauchy data make vanish.
    pub gamma_part: C64,
    /// ∫_{∂M} |integrand| dS
    pub l1: f64,
}

/// J_h, K_h and the full boundary right-hand side, in the envelope form
/// (∂_ν(w₂ − u₁))u₂ = (∂_ν D + D ∂_νρ/h)B₂ with D = W₂ − B₁, W₂ = e^{−iφ}B₁.
pub fn boundary_terms(
    chart: &CylinderChart,
    pair: &ScenarioPair,
    u1: &CgoSolution,
    u2: &CgoSolution,
    w2: &ScalarField,
    region: &BoundaryRegion,
) -> Result<BoundaryTerms> {
    if pair.kind != ScenarioKind::Gauge {
        return Err(LabError::Unsupported("boundary terms need a gauge pair (w₂ is not constructible otherwise)".into()));
    }
    check_pairing(u1, u2)?;
    let h = u1.h;
    let (b1, b2) = (u1.envelope(), u2.envelope());
    let d = w2.sub(&b1);
    let dn_rho = normal_derivative(chart, &rho(chart))?;
    let jd = normal_derivative(chart, &d)?.add(&trace(chart, &d)?.mul(&dn_rho).scale(C64::new(1.0 / h, 0.0))).mul(&trace(chart, &b2)?);
    let kd = normal_component(chart, &pair.delta(chart))?.mul(&trace(chart, &b1.mul(&b2))?);
    let total = jd.scale(C64::new(-1.0, 0.0)).add(&kd.scale(I));
    let abs = jd.zip(&kd, |x, y| C64::new(x.norm() + y.norm(), 0.0));
    Ok(BoundaryTerms {
        j_h: region.integrate(&jd, Subset::Unmeasured),
        k_h: region.integrate(&kd, Subset::Unmeasured),
        rhs: region.integrate(&total, Subset::All),
        gamma_part: region.integrate(&total, Subset::Gamma),
        l1: region.integrate(&abs, Subset::All).re,
    })
}

/// ∫ ⟨δ, dρ⟩_g |g|^{−1/2} c e^{iΦ} a₀ b dV_g with a₀ = e^{iλ(x1+ir)}.
pub fn magnetic_limit_functional(chart: &CylinderChart, delta: &OneForm, phi: &ScalarField, lambda: f64, b: &Profile) -> Result<C64> {
    Ok(magnetic_functional_parts(chart, delta, phi, lambda, b)?.0)
}

/// The functional and its Cauchy–Schwarz bound ‖δ₁ + iδ_r‖₂‖e^{iΦ}a₀b‖₂ (flat measure).
pub fn magnetic_functional_parts(chart: &CylinderChart, delta: &OneForm, phi: &ScalarField, lambda: f64, b: &Profile) -> Result<(C64, f64)> {
    chart.same_grid(delta.shape)?;
    chart.same_grid(phi.shape)?;
    let drho = differential(chart, &rho(chart))?;
    let pair = inner(chart, delta, &drho)?;
    let a0 = holomorphic_factor(chart, lambda);
    let probe = ScalarField::from_fn(chart, |x| C64::new(b.eval(chart, x[2]), 0.0)).zip(&a0, |p, z| p * z).zip(phi, |p, f| p * (I * f).exp());
    let (sg, c) = (chart.sqrt_g(), chart.c());
    let mut f = pair.mul(&probe);
    for m in 0..chart.len() {
        f.data[m] *= c[m] / sg[m];
    }
    let value = integrate_volume(chart, &f)?;
    let dz = delta.component(0).add(&delta.component(1).scale(I));
    let norm = |g: &ScalarField| integrate_flat(chart, &g.map(|v| C64::new(v.norm_sqr(), 0.0))).map(|s| s.re.sqrt());
    Ok((value, norm(&dz)? * norm(&probe)?))
}

/// ∫ dq c b(θ) e^{iλ(x1+ir)} dx1 dr dθ.
pub fn electric_data(chart: &CylinderChart, dq: &ScalarField, lambda: f64, b: &Profile) -> Result<C64> {
    chart.same_grid(dq.shape)?;
    let c = chart.c();
    let mut f = dq.zip(&holomorphic_factor(chart, lambda), |d, z| d * z);
    for m in 0..chart.len() {
        f.data[m] *= c[m] * b.eval(chart, chart.coords(m)[2]);
    }
    integrate_flat(chart, &f)
}

/// Φ = Φ⁽¹⁾ + Φ⁽²⁾ from the unmollified extensions of A₁ and −A₂.
pub fn combined_phase(chart: &CylinderChart, pair: &ScenarioPair, tau_max: f64, rule: CellRule) -> Result<ScalarField> {
    let (e1, e2) = pair.extensions(tau_max);
    let neg = |e: Extension| {
        let tm = e.tau_max;
        match e.rule {
            crate::mollify::ExtensionRule::WithCutoff(f) => Extension::with_cutoff(tm, move |x, chi| -f(x, chi)),
            _ => unreachable!("scenario extensions are cutoff-aware"),
        }
    };
    let p1 = reference_phase(chart, &pair.first.one_form(chart), &e1, rule)?;
    let p2 = reference_phase(chart, &pair.second.one_form(chart).scale(C64::new(-1.0, 0.0)), &e2.map(neg), rule)?;
    Ok(p1.add(&p2))
}

/// Probe family (λ, b) for the limit functionals.
pub fn probe_family(chart: &CylinderChart, lambdas: &[f64], n_profiles: usize) -> Vec<(f64, Profile)> {
    let profiles = Profile::family(chart, n_profiles);
    lambdas.iter().flat_map(|&l| profiles.iter().map(move |p| (l, *p))).collect()
}

/// Settings for the gauge suite.
#[derive(Clone, Debug)]
pub struct GaugeSetup {
    pub preset: String,
    pub scenario: String,
    pub grid_scale: f64,
    pub n_theta: usize,
    /// Coordinate width of the Γ collar on the plus face.
    pub collar: f64,
    pub lambda: f64,
    pub probe_lambdas: Vec<f64>,
    pub probe_profiles: usize,
    pub remainder: RemainderMode,
    pub gauge_tol: f64,
    /// Largest relative discrete curl accepted as closed.
    pub closed_tol: f64,
}

impl GaugeSetup {
    pub fn new(preset: &str, scenario: &str) -> Self {
        GaugeSetup {
            preset: preset.to_string(),
            scenario: scenario.to_string(),
            grid_scale: 1.0,
            n_theta: 9,
            collar: 0.3,
            lambda: 0.0,
            probe_lambdas: (-3..=4).map(|l| l as f64).collect(),
            probe_profiles: 3,
            remainder: RemainderMode::MinNorm,
            gauge_tol: 1e-3,
            closed_tol: 0.1,
        }
    }
}

/// One rung of the gauge suite.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GaugeRung {
    pub h: f64,
    pub grid: [usize; 3],
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    /// |lhs − rhs| / (∫|volume integrand| + ∫|boundary integrand|)
    pub relative_gap: f64,
    pub h_abs_j: f64,
    pub h_abs_k: f64,
    pub gamma_part: f64,
    pub potential_path_gap: f64,
}

#[derive(Clone, Debug)]
pub struct GaugeSuite {
    pub scenario: String,
    pub rungs: Vec<GaugeRung>,
    pub j_report: ConvergenceReport,
    pub k_report: ConvergenceReport,
    /// (λ, profile center, |functional| / Cauchy–Schwarz bound)
    pub functionals: Vec<(f64, f64, f64)>,
}

impl GaugeSuite {
    pub fn identity_gap(&self) -> f64 {
        self.rungs.iter().map(|r| r.relative_gap).fold(0.0, f64::max)
    }

    pub fn functional_max(&self) -> f64 {
        self.functionals.iter().map(|f| f.2).fold(0.0, f64::max)
    }
}

/// Integral identity, boundary-term ladders and limit functionals for a gauge scenario.
pub fn gauge_suite(setup: &GaugeSetup, hs: &[f64]) -> Result<GaugeSuite> {
    let mut rungs = Vec::new();
    let mut finest: Option<CylinderChart> = None;
    for &h in hs {
        let chart = cgo_chart(&setup.preset, h, setup.grid_scale, setup.n_theta)?;
        let pair = ScenarioPair::preset(&setup.scenario, &chart)?;
        if pair.kind != ScenarioKind::Gauge {
            return Err(LabError::Unsupported(format!("scenario '{}' is not a gauge pair", setup.scenario)));
        }
        let mut params = CgoParams::new(&chart, h, 1.0);
        params.lambda = setup.lambda;
        params.remainder = setup.remainder;
        let (e1, e2) = pair.extensions(params.tau());
        let (a1, a2) = (pair.first.one_form(&chart), pair.second.one_form(&chart));
        let (q1, q2) = (pair.first.potential(&chart), pair.second.potential(&chart));
        let (u1, u2) = paired(&chart, (&a1, &e1, &q1), (&a2, &e2, &q2), &params)?;
        // φ recovered from δ = A₁ − A₂ = −dφ
        let pot = gauge_potential(&chart, &pair.delta(&chart).scale(C64::new(-1.0, 0.0)), setup.closed_tol)?;
        let w2 = gauge_matched_solution(&chart, &u1.envelope(), &pot.phi, setup.gauge_tol)?;
        let region = boundary_split(&chart, 1.0, setup.collar)?;
        let lhs = integral_identity_lhs(&chart, &pair, &u1, &u2)?;
        let bt = boundary_terms(&chart, &pair, &u1, &u2, &w2, &region)?;
        let l = lhs.total();
        rungs.push(GaugeRung {
            h,
            grid: chart.shape(),
            lhs: [l.re, l.im],
            rhs: [bt.rhs.re, bt.rhs.im],
            relative_gap: (l - bt.rhs).norm() / (lhs.l1 + bt.l1),
            h_abs_j: h * bt.j_h.norm(),
            h_abs_k: h * bt.k_h.norm(),
            gamma_part: bt.gamma_part.norm(),
            potential_path_gap: pot.path_gap,
        });
        finest = Some(chart);
    }
    let chart = finest.ok_or_else(|| LabError::Parameter("empty h ladder".into()))?;
    let pair = ScenarioPair::preset(&setup.scenario, &chart)?;
    let h_min = hs.iter().cloned().fold(f64::INFINITY, f64::min);
    let phase = combined_phase(&chart, &pair, CgoParams::new(&chart, h_min, 1.0).tau(), CellRule::Centered)?;
    let delta = pair.delta(&chart);
    let mut functionals = Vec::new();
    for (lambda, b) in probe_family(&chart, &setup.probe_lambdas, setup.probe_profiles) {
        let (v, bound) = magnetic_functional_parts(&chart, &delta, &phase, lambda, &b)?;
        let center = match b {
            Profile::Bump { center, .. } => center,
            Profile::Trig { k } => k as f64,
        };
        functionals.push((lambda, center, if bound > 0.0 { v.norm() / bound } else { 0.0 }));
    }
    let decreasing = |name: &str, vals: Vec<f64>| ConvergenceReport::new(name, hs.to_vec(), vals, 0.0, Trend::Decreasing);
    Ok(GaugeSuite {
        scenario: setup.scenario.clone(),
        j_report: decreasing("unmeasured normal-derivative boundary term h|J_h|", rungs.iter().map(|r| r.h_abs_j).collect())?,
        k_report: decreasing("unmeasured magnetic boundary term h|K_h|", rungs.iter().map(|r| r.h_abs_k).collect())?,
        rungs,
        functionals,
    })
}

/// Outcome of the advection reduction check for a pair X₁, X₂.
#[derive(Clone, Debug)]
pub struct AdvectionCertificate {
    /// ‖L_X u − L_{A,q}u‖₂ / ‖L_X u‖₂ for the first field.
    pub operator_gap: f64,
    /// Relative curl of X₁♭ − X₂♭.
    pub closedness: f64,
    /// max |φ| for ∇φ = X₁ − X₂.
    pub phi_max: f64,
    /// max |ψ| for Δψ − ⟨V, ∇ψ⟩ = 0, ψ = φ on ∂M, V = X₂ + ½∇φ.
    pub dirichlet_max: f64,
    /// q₁ − q₂ of the induced magnetic pairs.
    pub dq: ScalarField,
}

impl AdvectionCertificate {
    pub fn certificate(&self) -> f64 {
        self.phi_max.max(self.dirichlet_max)
    }
}

/// Converts both fields to magnetic data, recovers φ with X₁ − X₂ = ∇φ and
/// solves the zero-boundary Dirichlet problem whose only solution is 0.
pub fn advection_certificate(
    chart: &CylinderChart,
    x1: &VectorField,
    x2: &VectorField,
    probe: &ScalarField,
    closed_tol: f64,
) -> Result<AdvectionCertificate> {
    let (a1, q1) = advection_to_magnetic(chart, x1)?;
    let (_, q2) = advection_to_magnetic(chart, x2)?;
    let lx = advection_apply(chart, x1, probe)?;
    let la = magnetic_apply(chart, &a1, &q1, probe)?;
    let operator_gap = l2_norm(chart, &lx.sub(&la)) / l2_norm(chart, &lx);
    let diff = flat(chart, x1)?.sub(&flat(chart, x2)?);
    let pot = gauge_potential(chart, &diff, closed_tol)?;
    let grad = sharp(chart, &differential(chart, &pot.phi)?)?;
    let v = VectorField { shape: x2.shape, comp: [0, 1, 2].map(|a| x2.comp[a].iter().zip(&grad.comp[a]).map(|(x, g)| x + 0.5 * g).collect()) };
    let psi = dirichlet_advection(chart, &v, &pot.phi)?;
    Ok(AdvectionCertificate {
        operator_gap,
        closedness: pot.closedness,
        phi_max: pot.phi.max_abs(),
        dirichlet_max: psi.max_abs(),
        dq: q1.sub(&q2),
    })
}

/// Δψ − Vψ = 0 inside, ψ = g on ∂M; boundary unknowns are eliminated and
/// the interior system −Δψ + Vψ = (boundary contributions) is solved.
pub fn dirichlet_advection(chart: &CylinderChart, v: &VectorField, g: &ScalarField) -> Result<ScalarField> {
    let n = chart.len();
    let interior: Vec<usize> = (0..n).filter(|&m| !chart.on_boundary(m)).collect();
    let mut pos = vec![usize::MAX; n];
    for (k, &m) in interior.iter().enumerate() {
        pos[m] = k;
    }
    let mut out = ScalarField::zeros(chart);
    for m in 0..n {
        if chart.on_boundary(m) {
            out.data[m] = g.data[m];
        }
    }
    if g.max_abs() == 0.0 {
        return Ok(out);
    }
    let lap = chart.laplacian_operator();
    let mut trips = Vec::new();
    let mut rhs = vec![zero(); interior.len()];
    let mut push = |k: usize, j: usize, w: C64, trips: &mut Vec<(usize, usize, C64)>| {
        if pos[j] == usize::MAX {
            rhs[k] -= w * g.data[j];
        } else {
            trips.push((k, pos[j], w));
        }
    };
    for (k, &m) in interior.iter().enumerate() {
        let (c, vals) = lap.row(m);
        for (j, w) in c.iter().zip(vals) {
            push(k, *j, C64::new(-*w, 0.0), &mut trips);
        }
        for a in 0..3 {
            let (c, vals) = chart.derivative_operator(a).row(m);
            for (j, w) in c.iter().zip(vals) {
                push(k, *j, v.comp[a][m] * *w, &mut trips);
            }
        }
    }
    let op = Csr::from_triplets(interior.len(), interior.len(), trips);
    let (x, _) = solve_general(&op, &rhs, 1e-12)?;
    for (k, &m) in interior.iter().enumerate() {
        out.data[m] = x[k];
    }
    Ok(out)
}
