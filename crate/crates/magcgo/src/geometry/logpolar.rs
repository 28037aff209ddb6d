//! The change of variables y1 = log|x|, y' = x/|x| that turns the Euclidean
//! metric into e^{2 y1}(dy1^2 + g_{S^2}).

use crate::error::{LabError, Result};

/// Cylinder coordinates of a Euclidean point: y1 plus spherical angles
/// (polar angle from the x3 axis, azimuth) of x/|x|.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderPoint {
    pub y1: f64,
    pub polar: f64,
    pub azimuth: f64,
    /// Conformal factor e^{2 y1} of the pulled-back metric.
    pub warp: f64,
}

impl CylinderPoint {
    pub fn coords(&self) -> [f64; 3] {
        [self.y1, self.polar, self.azimuth]
    }
}

/// Maps points of the upper half-space to cylinder coordinates.
pub fn log_polar_map(points: &[[f64; 3]]) -> Result<Vec<CylinderPoint>> {
    points
        .iter()
        .map(|x| {
            let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if n == 0.0 {
                return Err(LabError::Domain("log-polar map is undefined at the origin".into()));
            }
            if x[2] <= 0.0 {
                return Err(LabError::Domain(format!("point {:?} is not in the upper half-space", x)));
            }
            let y1 = n.ln();
            Ok(CylinderPoint { y1, polar: (x[2] / n).acos(), azimuth: x[1].atan2(x[0]), warp: (2.0 * y1).exp() })
        })
        .collect()
}

/// Inverse map back to Euclidean coordinates.
pub fn to_euclidean(y: [f64; 3]) -> [f64; 3] {
    let rho = y[0].exp();
    let (s, c) = y[1].sin_cos();
    [rho * s * y[2].cos(), rho * s * y[2].sin(), rho * c]
}

/// Diagonal entries of the warped metric e^{2 y1} diag(1, 1, sin^2 polar).
pub fn warped_sphere_metric(y: [f64; 3]) -> [f64; 3] {
    let c = (2.0 * y[0]).exp();
    let s = y[1].sin();
    [c, c, c * s * s]
}

fn d4(f: &dyn Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h)
}

/// Laplace–Beltrami of `u` for a diagonal metric, evaluated off-grid with
/// nested fourth-order central differences.
pub fn laplace_beltrami_at(metric: &dyn Fn([f64; 3]) -> [f64; 3], u: &dyn Fn([f64; 3]) -> f64, y: [f64; 3], step: f64) -> f64 {
    let sqrt_det = |p: [f64; 3]| {
        let g = metric(p);
        (g[0] * g[1] * g[2]).sqrt()
    };
    let mut total = 0.0;
    for j in 0..3 {
        let flux = |t: f64| {
            let mut p = y;
            p[j] = t;
            let g = metric(p);
            let du = d4(
                &|s: f64| {
                    let mut q = p;
                    q[j] = s;
                    u(q)
                },
                t,
                step,
            );
            sqrt_det(p) / g[j] * du
        };
        total += d4(&flux, y[j], step);
    }
    total / sqrt_det(y)
}

/// Euclidean Laplacian evaluated the same way.
pub fn euclidean_laplacian_at(u: &dyn Fn([f64; 3]) -> f64, x: [f64; 3], step: f64) -> f64 {
    laplace_beltrami_at(&|_| [1.0, 1.0, 1.0], u, x, step)
}

/// Largest discrepancy between Δ_euclid u(x) and Δ_g (u ∘ map^{-1})(y)
/// over the given points, for each test function.
pub fn laplacian_discrepancy(points: &[[f64; 3]], u: &dyn Fn([f64; 3]) -> f64) -> Result<f64> {
    let mapped = log_polar_map(points)?;
    let mut worst: f64 = 0.0;
    for (x, y) in points.iter().zip(&mapped) {
        let le = euclidean_laplacian_at(u, *x, 1e-3);
        let uy = |p: [f64; 3]| u(to_euclidean(p));
        let lg = laplace_beltrami_at(&warped_sphere_metric, &uy, y.coords(), 1e-3);
        worst = worst.max((le - lg).abs());
    }
    Ok(worst)
}
