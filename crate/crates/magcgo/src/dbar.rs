//! The ∂̄-equation on (x1, r)-planes: convolution with 1/(πz), z = x1 + i r.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{LabError, Result};
use crate::geometry::{laplace_beltrami, differential, pointwise_norm, CylinderChart, ScalarField};
use crate::mollify::{lp_on, Patch};
use crate::report::{ConvergenceReport, Trend};
use crate::C64;

/// Samples on a box of (x1, r) lattice nodes, indexed relative to the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2 {
    pub lo: [isize; 2],
    pub shape: [usize; 2],
    pub data: Vec<C64>,
}

impl Field2 {
    pub fn zeros(lo: [isize; 2], shape: [usize; 2]) -> Self {
        Field2 { lo, shape, data: vec![C64::new(0.0, 0.0); shape[0] * shape[1]] }
    }

    pub fn from_fn(lo: [isize; 2], shape: [usize; 2], f: impl Fn([isize; 2]) -> C64) -> Self {
        let mut out = Self::zeros(lo, shape);
        for i in 0..shape[0] {
            for j in 0..shape[1] {
                out.data[i * shape[1] + j] = f([lo[0] + i as isize, lo[1] + j as isize]);
            }
        }
        out
    }

    pub fn get(&self, ix: [isize; 2]) -> C64 {
        let (i, j) = (ix[0] - self.lo[0], ix[1] - self.lo[1]);
        if i < 0 || j < 0 || i >= self.shape[0] as isize || j >= self.shape[1] as isize {
            C64::new(0.0, 0.0)
        } else {
            self.data[i as usize * self.shape[1] + j as usize]
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// How the rhs sample at a node is spread over its cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRule {
    /// Cell centred on the node; kernel sampled at offsets, singular cell average = 0.
    Centered,
    /// Cell [x, x+h1)×[r, r+hr) anchored at the node; exact cell averages everywhere.
    /// First order; kept for comparison.
    Anchored,
}

/// Kernel weights W(d) ≈ ∬_cell(d) dz/(π z) over lattice offsets of a window.
#[derive(Clone, Debug)]
pub struct CauchyKernelGrid {
    pub steps: [f64; 2],
    pub window_lo: [isize; 2],
    pub window_shape: [usize; 2],
    pub rule: CellRule,
}

/// Antiderivative F with ∂x∂y F = 1/z, branch cut kept off the upper (lower) half plane.
fn cell_antiderivative(x: f64, y: f64, upper: bool) -> C64 {
    let z = C64::new(x, y);
    if z.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let mut arg = y.atan2(x);
    if upper && arg < -std::f64::consts::FRAC_PI_2 {
        arg += 2.0 * std::f64::consts::PI;
    }
    if !upper && arg > std::f64::consts::FRAC_PI_2 {
        arg -= 2.0 * std::f64::consts::PI;
    }
    let log = C64::new(z.norm().ln(), arg);
    C64::new(0.0, -1.0) * (z * log - z)
}

/// ∬_{[x0,x1]×[y0,y1]} dx dy / (π(x + i y)) for a cell not straddling y = 0.
pub fn cell_integral(x0: f64, x1: f64, y0: f64, y1: f64) -> C64 {
    let upper = y0 >= 0.0;
    let f = |x, y| cell_antiderivative(x, y, upper);
    (f(x1, y1) - f(x0, y1) - f(x1, y0) + f(x0, y0)) / std::f64::consts::PI
}

impl CauchyKernelGrid {
    pub fn new(steps: [f64; 2], window_lo: [isize; 2], window_shape: [usize; 2], rule: CellRule) -> Result<Self> {
        if steps.iter().any(|s| !(*s > 0.0)) || window_shape.iter().any(|n| *n < 3) {
            return Err(LabError::Parameter("kernel grid needs positive steps and at least 3 nodes per axis".into()));
        }
        Ok(CauchyKernelGrid { steps, window_lo, window_shape, rule })
    }

    /// Window = bounding box of the chart rectangle and the rhs support, grown by 25% of its extent.
    pub fn for_chart(chart: &CylinderChart, support_lo: [isize; 2], support_shape: [usize; 2], rule: CellRule) -> Result<Self> {
        let s = chart.shape();
        let mut lo = [0isize; 2];
        let mut shape = [0usize; 2];
        for a in 0..2 {
            let l = support_lo[a].min(0);
            let h = (support_lo[a] + support_shape[a] as isize).max(s[a] as isize) - 1;
            let pad = (((h - l) as f64) * 0.125).ceil().max(2.0) as isize;
            lo[a] = l - pad;
            shape[a] = (h - l + 1 + 2 * pad) as usize;
        }
        Self::new([chart.step(0), chart.step(1)], lo, shape, rule)
    }

    /// Weight for the offset d = output node − source node.
    pub fn value(&self, d: [isize; 2]) -> C64 {
        let (h1, h2) = (self.steps[0], self.steps[1]);
        let (x, y) = (d[0] as f64 * h1, d[1] as f64 * h2);
        match self.rule {
            CellRule::Centered => {
                if d == [0, 0] {
                    // exact average over the centred cell vanishes by symmetry
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(h1 * h2, 0.0) / (std::f64::consts::PI * C64::new(x, y))
                }
            }
            // source cell [s, s+h) seen from the output node: offsets z = x_out − y ∈ (d − 1, d]·h
            CellRule::Anchored => {
                if d[1] >= 1 {
                    cell_integral(x - h1, x, y - h2, y)
                } else {
                    // y-range [y−h2, y] lies in y ≤ 0: integrate the mirror image and conjugate
                    cell_integral(x - h1, x, -y, -y + h2).conj()
                }
            }
        }
    }

    fn check_support(&self, rhs: &Field2) -> Result<()> {
        let wlo = self.window_lo;
        let whi = [wlo[0] + self.window_shape[0] as isize - 1, wlo[1] + self.window_shape[1] as isize - 1];
        for i in 0..rhs.shape[0] {
            for j in 0..rhs.shape[1] {
                let v = rhs.data[i * rhs.shape[1] + j];
                if v.norm() == 0.0 {
                    continue;
                }
                let ix = [rhs.lo[0] + i as isize, rhs.lo[1] + j as isize];
                if (0..2).any(|a| ix[a] <= wlo[a] || ix[a] >= whi[a]) {
                    return Err(LabError::Window(format!("rhs support reaches node {ix:?}, outside the interior of the window")));
                }
            }
        }
        Ok(())
    }
}

/// Direct O(N_out · N_rhs) evaluation of Σ_k W(i − k) f_k; the reference path.
pub fn cauchy_transform_direct(rhs: &Field2, k: &CauchyKernelGrid, out_lo: [isize; 2], out_shape: [usize; 2]) -> Result<Field2> {
    k.check_support(rhs)?;
    let src: Vec<([isize; 2], C64)> = (0..rhs.data.len())
        .filter(|&m| rhs.data[m].norm() != 0.0)
        .map(|m| ([rhs.lo[0] + (m / rhs.shape[1]) as isize, rhs.lo[1] + (m % rhs.shape[1]) as isize], rhs.data[m]))
        .collect();
    Ok(Field2::from_fn(out_lo, out_shape, |ix| src.iter().map(|(s, v)| k.value([ix[0] - s[0], ix[1] - s[1]]) * v).sum()))
}

fn smooth_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut t = m;
        for p in [2, 3, 5] {
            while t % p == 0 {
                t /= p;
            }
        }
        if t == 1 {
            return m;
        }
        m += 1;
    }
}

/// Precomputed spectrum of the kernel table for a fixed pair of boxes.
pub struct CauchyPlan {
    kernel: CauchyKernelGrid,
    rhs_lo: [isize; 2],
    rhs_shape: [usize; 2],
    out_lo: [isize; 2],
    out_shape: [usize; 2],
    dmin: [isize; 2],
    len: [usize; 2],
    spectrum: Vec<Complex<f64>>,
    planner: std::cell::RefCell<FftPlanner<f64>>,
}

fn fft2(data: &mut [Complex<f64>], len: [usize; 2], planner: &mut FftPlanner<f64>, inverse: bool) {
    let (n0, n1) = (len[0], len[1]);
    let f1 = if inverse { planner.plan_fft_inverse(n1) } else { planner.plan_fft_forward(n1) };
    f1.process(data);
    let f0 = if inverse { planner.plan_fft_inverse(n0) } else { planner.plan_fft_forward(n0) };
    let mut col = vec![Complex::new(0.0, 0.0); n0];
    for j in 0..n1 {
        for i in 0..n0 {
            col[i] = data[i * n1 + j];
        }
        f0.process(&mut col);
        for i in 0..n0 {
            data[i * n1 + j] = col[i];
        }
    }
}

impl CauchyPlan {
    /// Plans Σ_k W(i − k) f_k for rhs on `rhs` box and outputs on `out` box.
    pub fn new(kernel: &CauchyKernelGrid, rhs_lo: [isize; 2], rhs_shape: [usize; 2], out_lo: [isize; 2], out_shape: [usize; 2]) -> Self {
        let dmin = [0, 1].map(|a| out_lo[a] - (rhs_lo[a] + rhs_shape[a] as isize - 1));
        let klen = [0, 1].map(|a| out_shape[a] + rhs_shape[a] - 1);
        let len = [0, 1].map(|a| smooth_len(klen[a] + rhs_shape[a] - 1));
        let mut spectrum = vec![Complex::new(0.0, 0.0); len[0] * len[1]];
        for t0 in 0..klen[0] {
            for t1 in 0..klen[1] {
                let w = kernel.value([dmin[0] + t0 as isize, dmin[1] + t1 as isize]);
                spectrum[t0 * len[1] + t1] = Complex::new(w.re, w.im);
            }
        }
        let mut planner = FftPlanner::new();
        fft2(&mut spectrum, len, &mut planner, false);
        CauchyPlan { kernel: kernel.clone(), rhs_lo, rhs_shape, out_lo, out_shape, dmin, len, spectrum, planner: std::cell::RefCell::new(planner) }
    }

    pub fn apply(&self, rhs: &Field2) -> Result<Field2> {
        if rhs.lo != self.rhs_lo || rhs.shape != self.rhs_shape {
            return Err(LabError::Window("rhs box does not match the planned box".into()));
        }
        self.kernel.check_support(rhs)?;
        let len = self.len;
        let mut buf = vec![Complex::new(0.0, 0.0); len[0] * len[1]];
        for i in 0..rhs.shape[0] {
            for j in 0..rhs.shape[1] {
                let v = rhs.data[i * rhs.shape[1] + j];
                buf[i * len[1] + j] = Complex::new(v.re, v.im);
            }
        }
        let mut planner = self.planner.borrow_mut();
        fft2(&mut buf, len, &mut planner, false);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        fft2(&mut buf, len, &mut planner, true);
        let scale = 1.0 / (len[0] * len[1]) as f64;
        // out node i pairs with kernel index t = i − k − dmin and rhs index k − rhs_lo
        let shift = [0, 1].map(|a| (self.out_lo[a] - self.rhs_lo[a] - self.dmin[a]) as usize);
        Ok(Field2::from_fn(self.out_lo, self.out_shape, |ix| {
            let p = [0, 1].map(|a| (ix[a] - self.out_lo[a]) as usize + shift[a]);
            let v = buf[p[0] * len[1] + p[1]] * scale;
            C64::new(v.re, v.im)
        }))
    }
}

/// FFT evaluation of the same discrete convolution as [`cauchy_transform_direct`].
pub fn cauchy_transform(rhs: &Field2, k: &CauchyKernelGrid, out_lo: [isize; 2], out_shape: [usize; 2]) -> Result<Field2> {
    CauchyPlan::new(k, rhs.lo, rhs.shape, out_lo, out_shape).apply(rhs)
}

/// ∂̄u = ½(∂_{x1} + i ∂_r) by central differences at nodes with both neighbours.
pub fn dbar_apply(u: &Field2, steps: [f64; 2]) -> Field2 {
    let lo = [u.lo[0] + 1, u.lo[1] + 1];
    let shape = [u.shape[0] - 2, u.shape[1] - 2];
    Field2::from_fn(lo, shape, |ix| {
        let d1 = (u.get([ix[0] + 1, ix[1]]) - u.get([ix[0] - 1, ix[1]])) / (2.0 * steps[0]);
        let d2 = (u.get([ix[0], ix[1] + 1]) - u.get([ix[0], ix[1] - 1])) / (2.0 * steps[1]);
        (d1 + C64::new(0.0, 1.0) * d2) * 0.5
    })
}

/// Φ per θ-slice: sign = +1 gives −½ K ∗ (A1 + i Ar), sign = −1 gives +½ K ∗ (A1 + i Ar).
/// `a1` and `ar` hold the x1 and r components on a common node box covering every chart θ.
pub fn phase_correction(chart: &CylinderChart, a1: &Patch, ar: &Patch, sign: f64, rule: CellRule) -> Result<ScalarField> {
    if sign != 1.0 && sign != -1.0 {
        return Err(LabError::Parameter(format!("phase sign must be ±1, got {sign}")));
    }
    if a1.lo != ar.lo || a1.shape != ar.shape {
        return Err(LabError::Window("component patches differ".into()));
    }
    let s = chart.shape();
    let (lo, shape) = ([a1.lo[0], a1.lo[1]], [a1.shape[0], a1.shape[1]]);
    let kernel = CauchyKernelGrid::for_chart(chart, lo, shape, rule)?;
    let plan = CauchyPlan::new(&kernel, lo, shape, [0, 0], [s[0], s[1]]);
    let mut out = ScalarField::zeros(chart);
    let factor = -0.5 * sign;
    for k in 0..s[2] {
        let rhs = Field2::from_fn(lo, shape, |ix| {
            let n = [ix[0], ix[1], k as isize];
            (a1.get(n) + C64::new(0.0, 1.0) * ar.get(n)) * factor
        });
        if rhs.max_abs() == 0.0 {
            continue;
        }
        let phi = plan.apply(&rhs)?;
        for i in 0..s[0] {
            for j in 0..s[1] {
                out.data[chart.idx(i, j, k)] = phi.get([i as isize, j as isize]);
            }
        }
    }
    Ok(out)
}

/// Ladders of the phase estimates: sup norms of Φ_τ, ∇Φ_τ, ΔΦ_τ (bounded after scaling
/// by τ^0, τ, τ²), L³ norms of Φ_τ, ∇Φ_τ (bounded), τ‖ΔΦ_τ‖_{L³} and ‖Φ_τ − Φ‖_{L³}/τ (decreasing).
pub fn phase_estimates(chart: &CylinderChart, phi_taus: &[ScalarField], phi: &ScalarField, taus: &[f64]) -> Result<Vec<ConvergenceReport>> {
    if phi_taus.len() != taus.len() {
        return Err(LabError::Parameter("one phase per tau expected".into()));
    }
    let nodes: Vec<usize> = (0..chart.len()).collect();
    let mut cols = vec![Vec::new(); 7];
    for p in phi_taus {
        let abs: Vec<f64> = p.data.iter().map(|v| v.norm()).collect();
        let grad = pointwise_norm(chart, &differential(chart, p)?);
        let lap: Vec<f64> = laplace_beltrami(chart, p)?.data.iter().map(|v| v.norm()).collect();
        let diff: Vec<f64> = p.data.iter().zip(&phi.data).map(|(a, b)| (a - b).norm()).collect();
        cols[0].push(lp_on(chart, &abs, f64::INFINITY, &nodes));
        cols[1].push(lp_on(chart, &grad, f64::INFINITY, &nodes));
        cols[2].push(lp_on(chart, &lap, f64::INFINITY, &nodes));
        cols[3].push(lp_on(chart, &abs, 3.0, &nodes));
        cols[4].push(lp_on(chart, &grad, 3.0, &nodes));
        cols[5].push(lp_on(chart, &lap, 3.0, &nodes));
        cols[6].push(lp_on(chart, &diff, 3.0, &nodes));
    }
    let b = Trend::Bounded { factor: 2.0 };
    let ladders: [(&str, f64, Trend); 7] = [
        ("|Phi_tau|_inf", 0.0, b),
        ("tau |grad Phi_tau|_inf", -1.0, b),
        ("tau^2 |lap Phi_tau|_inf", -2.0, b),
        ("|Phi_tau|_L3", 0.0, b),
        ("|grad Phi_tau|_L3", 0.0, b),
        ("tau |lap Phi_tau|_L3", -1.0, Trend::Decreasing),
        ("|Phi_tau - Phi|_L3 / tau", 1.0, Trend::Decreasing),
    ];
    ladders.iter().zip(cols).map(|((n, e, t), c)| ConvergenceReport::new(n, taus.to_vec(), c, *e, *t)).collect()
}

/// Manufactured ∂̄ pairs w(z)·β(x₁, r) with β a bump on the chart's (x₁, r) rectangle.
pub const MANUFACTURED: [&str; 3] = ["bump", "z-bump", "zbar-bump"];

/// (Φ, ∂̄Φ) of a manufactured corpus member at (x₁, r).
pub fn manufactured(name: &str, x1: f64, r: f64) -> Result<(C64, C64)> {
    let z = C64::new(x1, r);
    let (w, dw) = match name {
        "bump" => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        "z-bump" => (z, C64::new(0.0, 0.0)),
        "zbar-bump" => (z.conj(), C64::new(1.0, 0.0)),
        _ => return Err(LabError::Config(format!("unknown manufactured phase '{name}'"))),
    };
    let (u, v) = ((x1 - 0.5) / 0.45, (r - 2.0) / 0.9);
    let s = u * u + v * v;
    if s >= 1.0 {
        return Ok((C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
    }
    let b = (-1.0 / (1.0 - s)).exp();
    let db = -b / (1.0 - s).powi(2);
    let dbar_b = C64::new(db * u / 0.45, db * v / 0.9);
    Ok((w * b, w * dbar_b + dw * b))
}

/// Sup error of the Cauchy transform of ∂̄Φ against Φ on an (n+1)² lattice over [0, 1] × [1, 3].
pub fn manufactured_error(name: &str, n: usize, rule: CellRule) -> Result<f64> {
    let ax = [crate::geometry::Axis::new(0.0, 1.0, n + 1), crate::geometry::Axis::new(1.0, 3.0, n + 1)];
    let shape = [n + 1, n + 1];
    let mut rhs = Field2::zeros([0, 0], shape);
    let mut exact = Field2::zeros([0, 0], shape);
    for i in 0..=n {
        for j in 0..=n {
            let (p, d) = manufactured(name, ax[0].coord(i), ax[1].coord(j))?;
            rhs.data[i * shape[1] + j] = d;
            exact.data[i * shape[1] + j] = p;
        }
    }
    let steps = [ax[0].step(), ax[1].step()];
    let pad = (n / 8).max(2) as isize;
    let k = CauchyKernelGrid::new(steps, [-pad, -pad], [shape[0] + 2 * pad as usize, shape[1] + 2 * pad as usize], rule)?;
    let phi = cauchy_transform(&rhs, &k, [0, 0], shape)?;
    Ok(phi.data.iter().zip(&exact.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// Sup errors over successive grid halvings; the verdict asks every error ratio to lie in [ratio_min, ratio_max].
pub fn manufactured_order(name: &str, ns: &[usize], rule: CellRule, ratio_min: f64, ratio_max: f64) -> Result<ConvergenceReport> {
    let errs = ns.iter().map(|&n| manufactured_error(name, n, rule)).collect::<Result<Vec<_>>>()?;
    let steps: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let trend = Trend::Order { min: ratio_min.log2(), max: ratio_max.log2() };
    ConvergenceReport::new(&format!("manufactured dbar sup error ({name})"), steps, errs, 0.0, trend)
}
