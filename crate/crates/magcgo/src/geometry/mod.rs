//! Discrete differential geometry on the warped cylinder
//! M ⊂ ℝ × M0 with g = c (dx1² + dr² + r² dθ²).

pub mod boundary;
pub mod chart;
pub mod field;
pub mod logpolar;
pub mod ops;
pub mod tensor;

pub use boundary::{
    boundary_split, normal_component, normal_derivative, trace, BoundaryField, BoundaryFlag, BoundaryRegion, Face, Subset, FACES,
};
pub use chart::{Axis, CylinderChart, Warp, R, TH, X1};
pub use field::{OneForm, ScalarField, VectorField};
pub use logpolar::{laplacian_discrepancy, log_polar_map, CylinderPoint};
pub use ops::*;
pub use tensor::{christoffel, covariant_derivative, Tensor};

use crate::error::{LabError, Result};
use crate::C64;

/// Reduces the advection term X to magnetic data: A = iX♭/2,
/// q = ¼⟨X, X⟩_g − ½ div_g X with div_g X = −d*(X♭).
pub fn advection_to_magnetic(chart: &CylinderChart, x: &VectorField) -> Result<(OneForm, ScalarField)> {
    if !x.is_real() {
        return Err(LabError::Domain("advection field must be real".into()));
    }
    let xf = flat(chart, x)?;
    let a = xf.scale(C64::new(0.0, 0.5));
    let xx = inner(chart, &xf, &xf)?;
    let div = codifferential(chart, &xf)?.scale_re(-1.0);
    let q = xx.scale_re(0.25).sub(&div.scale_re(0.5));
    Ok((a, q))
}

/// L_X u = −Δ_g u + X u.
pub fn advection_apply(chart: &CylinderChart, x: &VectorField, u: &ScalarField) -> Result<ScalarField> {
    let lap = laplace_beltrami(chart, u)?;
    Ok(directional(chart, x, u)?.sub(&lap))
}
