use std::sync::OnceLock;

use crate::error::{LabError, Result};
use crate::linsolve::Csr;

/// A uniformly sampled closed interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Self {
        Axis { min, max, n }
    }

    /// Axis with spacing at most `step`.
    pub fn with_step(min: f64, max: f64, step: f64) -> Self {
        let n = ((max - min) / step - 1e-9).ceil() as usize + 1;
        Axis { min, max, n: n.max(3) }
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    pub fn length(&self) -> f64 {
        self.max - self.min
    }

    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let d = self.step();
        let mut w = vec![d; self.n];
        w[0] *= 0.5;
        w[self.n - 1] *= 0.5;
        w
    }
}

/// Closed-form conformal factor `c(x1, r, theta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Warp {
    /// c = const
    Constant(f64),
    /// c = exp(rate * x1)
    ExpX1 { rate: f64 },
}

impl Warp {
    pub fn value(&self, x1: f64, _r: f64, _theta: f64) -> f64 {
        match *self {
            Warp::Constant(c) => c,
            Warp::ExpX1 { rate } => (rate * x1).exp(),
        }
    }

    /// Gradient (d/dx1, d/dr, d/dtheta).
    pub fn gradient(&self, x1: f64, r: f64, theta: f64) -> [f64; 3] {
        match *self {
            Warp::Constant(_) => [0.0; 3],
            Warp::ExpX1 { rate } => [rate * self.value(x1, r, theta), 0.0, 0.0],
        }
    }
}

pub const X1: usize = 0;
pub const R: usize = 1;
pub const TH: usize = 2;

/// The discretized cylinder piece M in coordinates (x1, r, theta) with
/// metric g = c (dx1^2 + dr^2 + r^2 dtheta^2), n = 3.
#[derive(Debug)]
pub struct CylinderChart {
    pub axes: [Axis; 3],
    pub warp: Warp,
    pub name: String,
    c: Vec<f64>,
    sqrt_g: Vec<f64>,
    ginv: [Vec<f64>; 3],
    gdiag: [Vec<f64>; 3],
    stencils: OnceLock<Stencils>,
}

#[derive(Debug)]
pub(crate) struct Stencils {
    pub d: [Csr<f64>; 3],
    pub lap: Csr<f64>,
}

impl Clone for CylinderChart {
    fn clone(&self) -> Self {
        CylinderChart::new(self.axes[0], self.axes[1], self.axes[2], self.warp)
            .expect("cloning a valid chart")
            .named(&self.name)
    }
}

impl PartialEq for CylinderChart {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes && self.warp == other.warp
    }
}

impl CylinderChart {
    pub fn new(x1: Axis, r: Axis, theta: Axis, warp: Warp) -> Result<Self> {
        for (name, a) in [("x1", x1), ("r", r), ("theta", theta)] {
            if a.n < 3 {
                return Err(LabError::Config(format!("axis {name} needs at least 3 nodes, got {}", a.n)));
            }
            if !(a.max > a.min) {
                return Err(LabError::Config(format!("axis {name} has empty range")));
            }
        }
        if r.min <= 0.0 {
            return Err(LabError::Config("r_min must be positive (polar center outside M)".into()));
        }
        let axes = [x1, r, theta];
        let n = x1.n * r.n * theta.n;
        let mut c = Vec::with_capacity(n);
        let mut sqrt_g = Vec::with_capacity(n);
        let mut ginv = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        let mut gdiag = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        for i in 0..x1.n {
            for j in 0..r.n {
                for k in 0..theta.n {
                    let (xv, rv, tv) = (x1.coord(i), r.coord(j), theta.coord(k));
                    let cv = warp.value(xv, rv, tv);
                    if !(cv > 0.0) || !cv.is_finite() {
                        return Err(LabError::Config(format!("warp not positive at ({xv}, {rv}, {tv})")));
                    }
                    c.push(cv);
                    sqrt_g.push(cv.powf(1.5) * rv);
                    ginv[0].push(1.0 / cv);
                    ginv[1].push(1.0 / cv);
                    ginv[2].push(1.0 / (cv * rv * rv));
                    gdiag[0].push(cv);
                    gdiag[1].push(cv);
                    gdiag[2].push(cv * rv * rv);
                }
            }
        }
        Ok(CylinderChart { axes, warp, name: String::from("custom"), c, sqrt_g, ginv, gdiag, stencils: OnceLock::new() })
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Named presets: "flat-cylinder", "exp-warp", "log-polar-image".
    pub fn preset(name: &str, sizes: [usize; 3]) -> Result<Self> {
        let th = std::f64::consts::FRAC_PI_6;
        let (x1, warp) = match name {
            "flat-cylinder" => ((0.0, 1.0), Warp::Constant(1.0)),
            "exp-warp" => ((0.0, 1.0), Warp::ExpX1 { rate: 2.0 }),
            "log-polar-image" => ((0.0, std::f64::consts::LN_2), Warp::ExpX1 { rate: 2.0 }),
            other => return Err(LabError::Config(format!("unknown chart preset '{other}'"))),
        };
        CylinderChart::new(
            Axis::new(x1.0, x1.1, sizes[0]),
            Axis::new(1.0, 3.0, sizes[1]),
            Axis::new(-th, th, sizes[2]),
            warp,
        )
        .map(|c| c.named(name))
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.axes[0].n, self.axes[1].n, self.axes[2].n]
    }

    pub fn len(&self) -> usize {
        self.axes[0].n * self.axes[1].n * self.axes[2].n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.axes[1].n + j) * self.axes[2].n + k
    }

    #[inline]
    pub fn unidx(&self, m: usize) -> [usize; 3] {
        let nt = self.axes[2].n;
        let nr = self.axes[1].n;
        [m / (nr * nt), (m / nt) % nr, m % nt]
    }

    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.axes[1].n * self.axes[2].n,
            1 => self.axes[2].n,
            _ => 1,
        }
    }

    pub fn coords(&self, m: usize) -> [f64; 3] {
        let [i, j, k] = self.unidx(m);
        [self.axes[0].coord(i), self.axes[1].coord(j), self.axes[2].coord(k)]
    }

    pub fn step(&self, axis: usize) -> f64 {
        self.axes[axis].step()
    }

    /// Conformal factor samples.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// |g|^{1/2} = c^{3/2} r
    pub fn sqrt_g(&self) -> &[f64] {
        &self.sqrt_g
    }

    /// Diagonal inverse metric g^{jj}.
    pub fn ginv(&self, axis: usize) -> &[f64] {
        &self.ginv[axis]
    }

    /// Diagonal metric g_jj.
    pub fn g(&self, axis: usize) -> &[f64] {
        &self.gdiag[axis]
    }

    /// Transversal density |g0|^{1/2} = r.
    pub fn transversal_density(&self, m: usize) -> f64 {
        self.coords(m)[1]
    }

    /// Tensor trapezoid weights in coordinate space (flat measure dx1 dr dtheta).
    pub fn flat_weights(&self) -> Vec<f64> {
        let w: Vec<Vec<f64>> = self.axes.iter().map(|a| a.trapezoid_weights()).collect();
        let mut out = Vec::with_capacity(self.len());
        for a in &w[0] {
            for b in &w[1] {
                for c in &w[2] {
                    out.push(a * b * c);
                }
            }
        }
        out
    }

    /// Quadrature weights for dV_g.
    pub fn volume_weights(&self) -> Vec<f64> {
        self.flat_weights().iter().zip(&self.sqrt_g).map(|(w, s)| w * s).collect()
    }

    pub fn same_grid(&self, shape: [usize; 3]) -> Result<()> {
        if shape == self.shape() {
            Ok(())
        } else {
            Err(LabError::ChartMismatch(format!("field shape {:?} vs chart {:?}", shape, self.shape())))
        }
    }

    /// Whether a node lies on the chart boundary.
    pub fn on_boundary(&self, m: usize) -> bool {
        let ix = self.unidx(m);
        (0..3).any(|a| ix[a] == 0 || ix[a] + 1 == self.axes[a].n)
    }

    /// Indices of nodes at least `layers` nodes away from every face.
    pub fn interior_nodes(&self, layers: usize) -> Vec<usize> {
        let s = self.shape();
        let mut out = Vec::new();
        for i in layers..s[0].saturating_sub(layers) {
            for j in layers..s[1].saturating_sub(layers) {
                for k in layers..s[2].saturating_sub(layers) {
                    out.push(self.idx(i, j, k));
                }
            }
        }
        out
    }

    pub(crate) fn stencils(&self) -> &Stencils {
        self.stencils.get_or_init(|| self.build_stencils())
    }

    fn build_stencils(&self) -> Stencils {
        let n = self.len();
        let d = [0, 1, 2].map(|a| self.derivative_matrix(a));
        let mut trips: Vec<(usize, usize, f64)> = Vec::with_capacity(n * 13);
        for axis in 0..3 {
            let ax = self.axes[axis];
            let h = ax.step();
            let st = self.stride(axis);
            let w: Vec<f64> = self.sqrt_g.iter().zip(&self.ginv[axis]).map(|(s, g)| s * g).collect();
            let dw = d[axis].mul_vec(&w.iter().map(|v| crate::C64::new(*v, 0.0)).collect::<Vec<_>>());
            for m in 0..n {
                let i = self.unidx(m)[axis];
                if i > 0 && i + 1 < ax.n {
                    // flux form with averaged half-node weights
                    let wp = 0.5 * (w[m] + w[m + st]);
                    let wm = 0.5 * (w[m] + w[m - st]);
                    let s = 1.0 / (self.sqrt_g[m] * h * h);
                    trips.push((m, m + st, wp * s));
                    trips.push((m, m - st, wm * s));
                    trips.push((m, m, -(wp + wm) * s));
                } else {
                    // non-divergence form with one-sided stencils
                    let g = self.ginv[axis][m] / (h * h);
                    let coef = dw[m].re / self.sqrt_g[m];
                    let sgn: isize = if i == 0 { 1 } else { -1 };
                    let at = |k: isize| (m as isize + sgn * k * st as isize) as usize;
                    for (k, c2) in [2.0, -5.0, 4.0, -1.0].iter().enumerate() {
                        trips.push((m, at(k as isize), g * c2));
                    }
                    let c1 = coef / (2.0 * h) * sgn as f64;
                    for (k, c) in [-3.0, 4.0, -1.0].iter().enumerate() {
                        trips.push((m, at(k as isize), c1 * c));
                    }
                }
            }
        }
        let lap = Csr::from_triplets(n, n, trips);
        Stencils { d, lap }
    }

    /// Second-order first-derivative matrix along `axis`.
    fn derivative_matrix(&self, axis: usize) -> Csr<f64> {
        let n = self.len();
        let ax = self.axes[axis];
        let h = ax.step();
        let st = self.stride(axis);
        let mut trips = Vec::with_capacity(3 * n);
        for m in 0..n {
            let i = self.unidx(m)[axis];
            if i == 0 {
                trips.push((m, m, -1.5 / h));
                trips.push((m, m + st, 2.0 / h));
                trips.push((m, m + 2 * st, -0.5 / h));
            } else if i + 1 == ax.n {
                trips.push((m, m, 1.5 / h));
                trips.push((m, m - st, -2.0 / h));
                trips.push((m, m - 2 * st, 0.5 / h));
            } else {
                trips.push((m, m + st, 0.5 / h));
                trips.push((m, m - st, -0.5 / h));
            }
        }
        Csr::from_triplets(n, n, trips)
    }

    /// First-derivative stencil matrix (d/dx_axis).
    pub fn derivative_operator(&self, axis: usize) -> &Csr<f64> {
        &self.stencils().d[axis]
    }

    /// Laplace–Beltrami stencil matrix.
    pub fn laplacian_operator(&self) -> &Csr<f64> {
        &self.stencils().lap
    }
}
