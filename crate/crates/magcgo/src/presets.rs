//! Closed-form coefficient catalogue and θ-profiles.

use crate::error::{LabError, Result};
use crate::geometry::{CylinderChart, OneForm, ScalarField, VectorField};
use crate::mollify::Extension;
use crate::C64;
use std::sync::Arc;

pub type Point = [f64; 3];
pub type FormFn = Arc<dyn Fn(Point) -> [C64; 3] + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(Point) -> C64 + Send + Sync>;

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// A magnetic potential and electric potential given on all of ℝ³.
#[derive(Clone)]
pub struct Coefficients {
    pub name: String,
    pub a: FormFn,
    pub q: ScalarFn,
    /// Mollify the analytic continuation instead of the reflected chart samples.
    pub analytic_extension: bool,
}

impl std::fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Coefficients({})", self.name)
    }
}

pub const COEFFICIENTS: [&str; 4] = ["zero", "smooth", "rough", "bump-q"];

impl Coefficients {
    pub fn new(name: &str, a: impl Fn(Point) -> [C64; 3] + Send + Sync + 'static, q: impl Fn(Point) -> C64 + Send + Sync + 'static) -> Self {
        Coefficients { name: name.to_string(), a: Arc::new(a), q: Arc::new(q), analytic_extension: false }
    }

    /// Catalogue entries:
    /// - `zero`: A = 0, q = 0
    /// - `smooth`: analytic A and q
    /// - `rough`: Lipschitz A and q with kinks inside M (bounded, W^{1,∞})
    /// - `bump-q`: A = 0, q a smooth bump centered in M
    pub fn preset(name: &str) -> Result<Self> {
        let c = match name {
            "zero" => Coefficients::new(name, |_| [re(0.0); 3], |_| re(0.0)),
            "smooth" => Coefficients::new(
                name,
                |x| [re(0.5 * (x[0] + x[1]).cos()), re(0.4 * (x[0] * x[1]).sin()), re(0.2 * x[1] * x[2].cos())],
                |x| re(0.5 + 0.3 * x[0] * x[1].sin()),
            ),
            "rough" => Coefficients::new(
                name,
                |x| {
                    [
                        re(0.5 * (x[0] - 0.4).abs() + 0.2),
                        re(0.4 * (0.6 - (x[1] - 2.0).abs()).max(0.0)),
                        re(0.2 * x[1] * (x[2].abs() - 0.2).abs()),
                    ]
                },
                |x| re(0.5 + (x[0] - x[1] / 3.0).abs()),
            ),
            "bump-q" => Coefficients::new(name, |_| [re(0.0); 3], |x| re(bump_q(x))),
            _ => return Err(LabError::Config(format!("unknown coefficient preset '{name}' (known: {COEFFICIENTS:?})"))),
        };
        Ok(c)
    }

    pub fn with_analytic_extension(mut self) -> Self {
        self.analytic_extension = true;
        self
    }

    pub fn one_form(&self, chart: &CylinderChart) -> OneForm {
        OneForm::from_fn(chart, |x| (self.a)(x))
    }

    pub fn potential(&self, chart: &CylinderChart) -> ScalarField {
        ScalarField::from_fn(chart, |x| (self.q)(x))
    }

    /// Per-component extension rules for A.
    pub fn extensions(&self, tau_max: f64) -> [Extension; 3] {
        [0, 1, 2].map(|c| {
            if self.analytic_extension {
                let a = self.a.clone();
                Extension::analytic(tau_max, move |x| a(x)[c])
            } else {
                Extension::reflect(tau_max)
            }
        })
    }
}

/// Smooth bump of height 1 centered at (0.5, 2, 0) with radii (0.35, 0.7, 0.4).
pub fn bump_q(x: Point) -> f64 {
    let s = ((x[0] - 0.5) / 0.35).powi(2) + ((x[1] - 2.0) / 0.7).powi(2) + (x[2] / 0.4).powi(2);
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s)).exp()
    }
}

/// Smooth vector fields for the advection reduction.
pub fn vector_field(name: &str, chart: &CylinderChart) -> Result<VectorField> {
    match name {
        "zero" => Ok(VectorField::zeros(chart)),
        "smooth" => Ok(VectorField::from_real(chart, |x| [0.3 * (x[1] - 1.0), 0.2 * x[0].sin(), 0.1 * x[0]])),
        "swirl" => Ok(VectorField::from_real(chart, |x| [0.2 * x[1].cos(), -0.2 * x[0].cos(), 0.05])),
        _ => Err(LabError::Config(format!("unknown vector field preset '{name}'"))),
    }
}

/// θ-profile b of the amplitude; must vanish at the θ-boundary.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// exp(1 − 1/(1 − s²)), s = (θ − center)/width, zero for |s| ≥ 1.
    Bump { center: f64, width: f64 },
    /// sin(kπt)·sin²(πt), t the normalized θ coordinate.
    Trig { k: u32 },
}

impl Profile {
    pub fn eval(&self, chart: &CylinderChart, theta: f64) -> f64 {
        match *self {
            Profile::Bump { center, width } => {
                let s = (theta - center) / width;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - s * s)).exp()
                }
            }
            Profile::Trig { k } => {
                let ax = chart.axes[2];
                let t = (theta - ax.min) / ax.length();
                let pi = std::f64::consts::PI;
                (k as f64 * pi * t).sin() * (pi * t).sin().powi(2)
            }
        }
    }

    /// Centered bump covering 80% of the θ-range.
    pub fn default_for(chart: &CylinderChart) -> Self {
        let ax = chart.axes[2];
        Profile::Bump { center: 0.5 * (ax.min + ax.max), width: 0.4 * ax.length() }
    }

    /// `count` translated bumps spread across the θ-range.
    pub fn family(chart: &CylinderChart, count: usize) -> Vec<Self> {
        let ax = chart.axes[2];
        let width = 0.35 * ax.length();
        let (lo, hi) = (ax.min + width, ax.max - width);
        (0..count)
            .map(|i| {
                let t = if count == 1 { 0.5 } else { i as f64 / (count - 1) as f64 };
                Profile::Bump { center: lo + t * (hi - lo), width }
            })
            .collect()
    }

    /// Support error unless b vanishes at both θ-faces.
    pub fn check(&self, chart: &CylinderChart) -> Result<()> {
        let ax = chart.axes[2];
        for th in [ax.min, ax.max] {
            if self.eval(chart, th).abs() > 1e-12 {
                return Err(LabError::Support(format!("θ-profile {self:?} does not vanish at θ = {th}")));
            }
        }
        Ok(())
    }
}
