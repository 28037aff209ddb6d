//! Conjugated operators for the weights φ = ±x1 and their convexifications
//! φ̃ = φ + (h/2ε)φ², with sampled checks of the boundary and interior
//! Carleman inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::geometry::{
    codifferential, differential, h1_scl_norm, inner, l2_norm, laplace_beltrami, normal_derivative, CylinderChart, OneForm,
    ScalarField, Subset,
};
use crate::linsolve::conjugate_gradient;
use crate::report::{ConvergenceReport, Trend};
use crate::C64;

pub use crate::geometry::boundary_split;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Admissible (h, ε): h ≤ ε/ratio and ε ≤ eps_max.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightLimits {
    pub ratio: f64,
    pub eps_max: f64,
}

impl Default for WeightLimits {
    fn default() -> Self {
        WeightLimits { ratio: 4.0, eps_max: 0.25 }
    }
}

/// φ = s·x1, convexified when `eps` is set. `sign = 0` gives the unweighted operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexifiedWeight {
    pub sign: f64,
    pub h: f64,
    pub eps: Option<f64>,
}

impl ConvexifiedWeight {
    pub fn plain(sign: f64, h: f64) -> Self {
        ConvexifiedWeight { sign, h, eps: None }
    }

    /// Requires h ≤ ε/4 and ε ≤ 1/4.
    pub fn convexified(sign: f64, h: f64, eps: f64) -> Result<Self> {
        Self::with_limits(sign, h, eps, WeightLimits::default())
    }

    pub fn with_limits(sign: f64, h: f64, eps: f64, limits: WeightLimits) -> Result<Self> {
        let WeightLimits { ratio, eps_max } = limits;
        if !(h > 0.0) {
            return Err(LabError::Parameter(format!("h must be positive, got {h}")));
        }
        if !(eps > 0.0 && eps <= eps_max) {
            return Err(LabError::Parameter(format!("ε = {eps} outside (0, {eps_max}]")));
        }
        if h > eps / ratio * (1.0 + 1e-12) {
            return Err(LabError::Parameter(format!("h = {h} exceeds ε/{ratio} = {}", eps / ratio)));
        }
        Ok(ConvexifiedWeight { sign, h, eps: Some(eps) })
    }

    pub fn value(&self, x1: f64) -> f64 {
        let p = self.sign * x1;
        match self.eps {
            Some(e) => p + self.h / (2.0 * e) * p * p,
            None => p,
        }
    }

    pub fn field(&self, chart: &CylinderChart) -> ScalarField {
        ScalarField::from_real(chart, |x| self.value(x[0]))
    }
}

fn guard(f: ScalarField) -> Result<ScalarField> {
    if f.data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite() || v.norm() > 1e300) {
        return Err(LabError::Numeric("conjugated operator overflow".into()));
    }
    Ok(f)
}

/// e^{φ̃/h} (h² L_{A,q}) e^{−φ̃/h} u expanded:
/// −h²Δu − |∇φ̃|²u + 2h⟨dφ̃, du⟩ + h(Δφ̃)u + ih²(d*A)u − 2ih²⟨A, du⟩ + 2ih⟨A, dφ̃⟩u + h²(⟨A, A⟩ + q)u.
pub fn conjugate_apply(chart: &CylinderChart, a: &OneForm, q: &ScalarField, w: &ConvexifiedWeight, u: &ScalarField) -> Result<ScalarField> {
    chart.same_grid(u.shape)?;
    chart.same_grid(q.shape)?;
    let h = w.h;
    let h2 = h * h;
    let phi = w.field(chart);
    let dphi = differential(chart, &phi)?;
    let grad2 = inner(chart, &dphi, &dphi)?;
    let lap_phi = laplace_beltrami(chart, &phi)?;
    let du = differential(chart, u)?;
    let lap_u = laplace_beltrami(chart, u)?;
    let dphi_du = inner(chart, &dphi, &du)?;
    let a_du = inner(chart, a, &du)?;
    let a_dphi = inner(chart, a, &dphi)?;
    let dsa = codifferential(chart, a)?;
    let aa = inner(chart, a, a)?;
    let mut out = ScalarField::zeros(chart);
    for m in 0..chart.len() {
        let um = u.data[m];
        out.data[m] = -h2 * lap_u.data[m] - grad2.data[m] * um
            + 2.0 * h * dphi_du.data[m]
            + h * lap_phi.data[m] * um
            + I * h2 * dsa.data[m] * um
            - 2.0 * I * h2 * a_du.data[m]
            + 2.0 * I * h * a_dphi.data[m] * um
            + h2 * (aa.data[m] + q.data[m]) * um;
    }
    guard(out)
}

/// Dual norm realized by the discrete Riesz map: (1 − h²Δ)w = v with w = 0 on ∂M,
/// returning ⟨v, w⟩^{1/2} in the volume quadrature.
pub fn hminus1_scl_norm(chart: &CylinderChart, v: &ScalarField, h: f64) -> Result<f64> {
    chart.same_grid(v.shape)?;
    let n = chart.len();
    let interior: Vec<usize> = (0..n).filter(|&m| !chart.on_boundary(m)).collect();
    let vw = chart.volume_weights();
    let b: Vec<C64> = interior.iter().map(|&m| v.data[m] * vw[m]).collect();
    if b.iter().all(|x| *x == C64::new(0.0, 0.0)) {
        return Ok(0.0);
    }
    let lap = chart.laplacian_operator();
    let h2 = h * h;
    // W(1 − h²Δ) restricted to interior nodes is symmetric for the flux-form Laplacian
    let apply = |x: &[C64]| {
        let mut full = vec![C64::new(0.0, 0.0); n];
        for (k, &m) in interior.iter().enumerate() {
            full[m] = x[k];
        }
        let lx = lap.mul_vec(&full);
        interior.iter().enumerate().map(|(k, &m)| (x[k] - h2 * lx[m]) * vw[m]).collect::<Vec<_>>()
    };
    let diag = lap.diagonal();
    let pre: Vec<f64> = interior.iter().map(|&m| 1.0 / ((1.0 - h2 * diag[m]) * vw[m])).collect();
    let (w, _) = conjugate_gradient(apply, &b, &pre, 1e-12, 10_000)?;
    let pair: C64 = interior.iter().enumerate().map(|(k, &m)| v.data[m].conj() * w[k] * vw[m]).sum();
    Ok(pair.re.max(0.0).sqrt())
}

/// Largest |u| on ∂M relative to max |u|.
pub fn boundary_leak(chart: &CylinderChart, u: &ScalarField) -> f64 {
    let top = u.max_abs();
    if top == 0.0 {
        return 0.0;
    }
    (0..chart.len()).filter(|&m| chart.on_boundary(m)).map(|m| u.data[m].norm()).fold(0.0, f64::max) / top
}

fn unit(chart: &CylinderChart, x: [f64; 3], a: usize) -> f64 {
    let ax = chart.axes[a];
    (x[a] - ax.min) / ax.length()
}

fn max_mode(len: f64, h_min: f64) -> u32 {
    ((1.5 * len / (std::f64::consts::PI * h_min)).floor() as u32).max(2)
}

/// Seeded sums of two sine-product modes, zero on ∂M, with x1 and r
/// frequencies up to about 1.5/h_min.
pub fn boundary_samples(chart: &CylinderChart, count: usize, seed: u64, h_min: f64) -> Vec<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let km = [max_mode(chart.axes[0].length(), h_min), max_mode(chart.axes[1].length(), h_min), 3];
    let pi = std::f64::consts::PI;
    (0..count)
        .map(|_| {
            let modes: Vec<([f64; 3], C64)> = (0..2)
                .map(|_| {
                    let k = [0, 1, 2].map(|a| rng.gen_range(1..=km[a]) as f64);
                    (k, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                })
                .collect();
            ScalarField::from_fn(chart, |x| {
                if (0..3).any(|a| {
                    let t = unit(chart, x, a);
                    t <= 1e-12 || t >= 1.0 - 1e-12
                }) {
                    return C64::new(0.0, 0.0);
                }
                modes.iter().map(|(k, c)| c * (0..3).map(|a| (k[a] * pi * unit(chart, x, a)).sin()).product::<f64>()).sum()
            })
        })
        .collect()
}

/// Seeded wave packets e^{iξ·x} under a smooth bump that vanishes within
/// `collar` (a fraction of each axis) of ∂M; |ξ| in x1 and r up to 1.5/h_min.
pub fn interior_samples(chart: &CylinderChart, count: usize, seed: u64, h_min: f64, collar: f64) -> Vec<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = 1.5 / h_min;
    (0..count)
        .map(|_| {
            let xi = [rng.gen_range(-kmax..kmax), rng.gen_range(-kmax..kmax), rng.gen_range(-3.0..3.0)];
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            ScalarField::from_fn(chart, |x| {
                let mut env = 1.0;
                for a in 0..3 {
                    let s = (2.0 * unit(chart, x, a) - 1.0) / (1.0 - 2.0 * collar);
                    env *= if s.abs() >= 1.0 { 0.0 } else { (1.0 - 1.0 / (1.0 - s * s)).exp() };
                }
                if env == 0.0 {
                    return C64::new(0.0, 0.0);
                }
                c * env * C64::new(0.0, xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]).exp()
            })
        })
        .collect()
}

/// One rung of a Carleman check.
#[derive(Clone, Debug, PartialEq)]
pub struct CarlemanRow {
    pub h: f64,
    pub eps: f64,
    pub ratio: f64,
    pub n_samples: usize,
    pub grid: [usize; 3],
}

#[derive(Clone, Debug)]
pub struct CarlemanCheck {
    pub rows: Vec<CarlemanRow>,
    pub report: ConvergenceReport,
    pub rejected: usize,
}

impl CarlemanCheck {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, column: &str) -> std::io::Result<()> {
        writeln!(w, "h,eps,{column},n_samples,grid")?;
        for r in &self.rows {
            writeln!(w, "{:.17e},{:.17e},{:.17e},{},{}x{}x{}", r.h, r.eps, r.ratio, r.n_samples, r.grid[0], r.grid[1], r.grid[2])?;
        }
        Ok(())
    }
}

/// (‖P_φ̃ u‖² + 2h³∫(∂_ν φ̃)|∂_ν u|² dS) / ((h²/ε)‖u‖²_{H¹_scl}) for one sample.
pub fn boundary_ratio(chart: &CylinderChart, a: &OneForm, q: &ScalarField, w: &ConvexifiedWeight, u: &ScalarField) -> Result<f64> {
    let eps = w.eps.ok_or_else(|| LabError::Parameter("boundary check needs a convexified weight".into()))?;
    let h = w.h;
    let pu = conjugate_apply(chart, a, q, w, u)?;
    let lhs = l2_norm(chart, &pu).powi(2);
    let dphi = normal_derivative(chart, &w.field(chart))?;
    let dnu = normal_derivative(chart, u)?;
    let integrand = dphi.zip(&dnu, |p, d| p * d.norm_sqr());
    let region = boundary_split(chart, if w.sign >= 0.0 { 1.0 } else { -1.0 }, 0.0)?;
    let bterm = 2.0 * h.powi(3) * region.integrate(&integrand, Subset::All).re;
    let denom = h * h / eps * h1_scl_norm(chart, u, h)?.powi(2);
    Ok((lhs + bterm) / denom)
}

/// Minimum boundary ratio over the samples for each h; verdict: every minimum ≥ `threshold`.
#[allow(clippy::too_many_arguments)]
pub fn carleman_check_boundary(
    chart: &CylinderChart,
    a: &OneForm,
    q: &ScalarField,
    h_list: &[f64],
    eps: f64,
    sign: f64,
    samples: &[ScalarField],
    limits: WeightLimits,
    threshold: f64,
) -> Result<CarlemanCheck> {
    let good: Vec<&ScalarField> = samples.iter().filter(|u| u.max_abs() > 0.0 && boundary_leak(chart, u) <= 1e-12).collect();
    let rejected = samples.len() - good.len();
    let mut rows = Vec::new();
    for &h in h_list {
        let w = ConvexifiedWeight::with_limits(sign, h, eps, limits)?;
        let mut min = f64::INFINITY;
        for u in &good {
            min = min.min(boundary_ratio(chart, a, q, &w, u)?);
        }
        rows.push(CarlemanRow { h, eps, ratio: min, n_samples: good.len(), grid: chart.shape() });
    }
    let report = ConvergenceReport::new(
        "boundary Carleman minimum ratio",
        h_list.to_vec(),
        rows.iter().map(|r| r.ratio.max(0.0)).collect(),
        0.0,
        Trend::LowerBound { min: threshold },
    )?;
    Ok(CarlemanCheck { rows, report, rejected })
}

/// h‖u‖_{H¹_scl} / ‖P_φ u‖_{H⁻¹_scl} for one sample.
pub fn interior_ratio(chart: &CylinderChart, a: &OneForm, q: &ScalarField, w: &ConvexifiedWeight, u: &ScalarField) -> Result<f64> {
    let pu = conjugate_apply(chart, a, q, w, u)?;
    let den = hminus1_scl_norm(chart, &pu, w.h)?;
    let num = w.h * h1_scl_norm(chart, u, w.h)?;
    if den == 0.0 {
        return Err(LabError::Numeric("conjugated operator annihilated a sample".into()));
    }
    Ok(num / den)
}

/// Maximum interior ratio over the samples for each h, with the plain weight;
/// verdict: the maxima stay within 2× of the first rung.
pub fn carleman_check_interior(
    chart: &CylinderChart,
    a: &OneForm,
    q: &ScalarField,
    h_list: &[f64],
    sign: f64,
    samples: &[ScalarField],
) -> Result<CarlemanCheck> {
    let good: Vec<&ScalarField> = samples.iter().filter(|u| u.max_abs() > 0.0 && boundary_leak(chart, u) <= 1e-12).collect();
    let rejected = samples.len() - good.len();
    let mut rows = Vec::new();
    for &h in h_list {
        let w = ConvexifiedWeight::plain(sign, h);
        let mut max = 0.0f64;
        for u in &good {
            max = max.max(interior_ratio(chart, a, q, &w, u)?);
        }
        rows.push(CarlemanRow { h, eps: f64::NAN, ratio: max, n_samples: good.len(), grid: chart.shape() });
    }
    let report = ConvergenceReport::new(
        "interior Carleman maximum ratio",
        h_list.to_vec(),
        rows.iter().map(|r| r.ratio).collect(),
        0.0,
        Trend::Bounded { factor: 2.0 },
    )?;
    Ok(CarlemanCheck { rows, report, rejected })
}
