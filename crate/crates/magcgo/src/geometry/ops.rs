use super::chart::CylinderChart;
use super::field::{OneForm, ScalarField, VectorField};
use crate::error::Result;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// du by second-order differences (one-sided at the faces).
pub fn differential(chart: &CylinderChart, u: &ScalarField) -> Result<OneForm> {
    chart.same_grid(u.shape)?;
    let comp = [0, 1, 2].map(|a| chart.derivative_operator(a).mul_vec(&u.data));
    Ok(OneForm { shape: u.shape, comp })
}

/// Partial derivative of u along one coordinate.
pub fn partial(chart: &CylinderChart, u: &ScalarField, axis: usize) -> Result<ScalarField> {
    chart.same_grid(u.shape)?;
    Ok(ScalarField { shape: u.shape, data: chart.derivative_operator(axis).mul_vec(&u.data) })
}

/// Δ_g u = |g|^{-1/2} ∂_j(|g|^{1/2} g^{jk} ∂_k u), flux form inside, one-sided at faces.
pub fn laplace_beltrami(chart: &CylinderChart, u: &ScalarField) -> Result<ScalarField> {
    chart.same_grid(u.shape)?;
    Ok(ScalarField { shape: u.shape, data: chart.laplacian_operator().mul_vec(&u.data) })
}

/// d*α = −|g|^{-1/2} ∂_j(|g|^{1/2} g^{jk} α_k)
pub fn codifferential(chart: &CylinderChart, alpha: &OneForm) -> Result<ScalarField> {
    chart.same_grid(alpha.shape)?;
    let sg = chart.sqrt_g();
    let mut out = vec![C64::new(0.0, 0.0); chart.len()];
    for a in 0..3 {
        let gi = chart.ginv(a);
        let flux: Vec<C64> = alpha.comp[a].iter().enumerate().map(|(m, v)| v * (sg[m] * gi[m])).collect();
        let d = chart.derivative_operator(a).mul_vec(&flux);
        for (o, dv) in out.iter_mut().zip(d) {
            *o -= dv;
        }
    }
    for (o, s) in out.iter_mut().zip(sg) {
        *o /= s;
    }
    Ok(ScalarField { shape: alpha.shape, data: out })
}

/// Bilinear pairing ⟨α, β⟩_g = g^{jk} α_j β_k (no conjugation).
pub fn inner(chart: &CylinderChart, alpha: &OneForm, beta: &OneForm) -> Result<ScalarField> {
    chart.same_grid(alpha.shape)?;
    chart.same_grid(beta.shape)?;
    let mut out = vec![C64::new(0.0, 0.0); chart.len()];
    for a in 0..3 {
        let gi = chart.ginv(a);
        for m in 0..out.len() {
            out[m] += alpha.comp[a][m] * beta.comp[a][m] * gi[m];
        }
    }
    Ok(ScalarField { shape: alpha.shape, data: out })
}

pub fn sharp(chart: &CylinderChart, alpha: &OneForm) -> Result<VectorField> {
    chart.same_grid(alpha.shape)?;
    let comp = [0, 1, 2].map(|a| alpha.comp[a].iter().zip(chart.ginv(a)).map(|(v, g)| v * g).collect());
    Ok(VectorField { shape: alpha.shape, comp })
}

pub fn flat(chart: &CylinderChart, x: &VectorField) -> Result<OneForm> {
    chart.same_grid(x.shape)?;
    let comp = [0, 1, 2].map(|a| x.comp[a].iter().zip(chart.g(a)).map(|(v, g)| v * g).collect());
    Ok(OneForm { shape: x.shape, comp })
}

/// Action of a vector field on a function, X u = X^j ∂_j u.
pub fn directional(chart: &CylinderChart, x: &VectorField, u: &ScalarField) -> Result<ScalarField> {
    let du = differential(chart, u)?;
    let mut out = vec![C64::new(0.0, 0.0); chart.len()];
    for a in 0..3 {
        for m in 0..out.len() {
            out[m] += x.comp[a][m] * du.comp[a][m];
        }
    }
    Ok(ScalarField { shape: u.shape, data: out })
}

/// Termwise pieces of L_{A,q} u.
#[derive(Clone, Debug)]
pub struct MagneticTerms {
    pub neg_laplacian: ScalarField,
    pub codiff: ScalarField,
    pub transport: ScalarField,
    pub potential: ScalarField,
}

impl MagneticTerms {
    pub fn total(&self) -> ScalarField {
        self.neg_laplacian.add(&self.codiff).add(&self.transport).add(&self.potential)
    }
}

/// −Δ_g u, i(d*A)u, −2i⟨A, du⟩_g and (⟨A, A⟩_g + q)u separately.
pub fn magnetic_terms(chart: &CylinderChart, a: &OneForm, q: &ScalarField, u: &ScalarField) -> Result<MagneticTerms> {
    chart.same_grid(q.shape)?;
    let lap = laplace_beltrami(chart, u)?;
    let dsa = codifferential(chart, a)?;
    let du = differential(chart, u)?;
    let adu = inner(chart, a, &du)?;
    let aa = inner(chart, a, a)?;
    Ok(MagneticTerms {
        neg_laplacian: lap.scale_re(-1.0),
        codiff: dsa.mul(u).scale(I),
        transport: adu.scale(-2.0 * I),
        potential: aa.add(q).mul(u),
    })
}

/// L_{A,q} u = −Δ_g u + i(d*A)u − 2i⟨A, du⟩_g + (⟨A, A⟩_g + q)u.
pub fn magnetic_apply(chart: &CylinderChart, a: &OneForm, q: &ScalarField, u: &ScalarField) -> Result<ScalarField> {
    Ok(magnetic_terms(chart, a, q, u)?.total())
}

/// ∫ f dV_g by tensor trapezoid weighted with |g|^{1/2}.
pub fn integrate_volume(chart: &CylinderChart, f: &ScalarField) -> Result<C64> {
    chart.same_grid(f.shape)?;
    Ok(integrate_weighted(&chart.volume_weights(), &f.data))
}

/// ∫ f dx1 dr dθ (flat coordinate measure).
pub fn integrate_flat(chart: &CylinderChart, f: &ScalarField) -> Result<C64> {
    chart.same_grid(f.shape)?;
    Ok(integrate_weighted(&chart.flat_weights(), &f.data))
}

pub(crate) fn integrate_weighted(w: &[f64], f: &[C64]) -> C64 {
    w.iter().zip(f).map(|(w, v)| v * *w).sum()
}

/// Quadrature L² norm on (M, dV_g).
pub fn l2_norm(chart: &CylinderChart, f: &ScalarField) -> f64 {
    let w = chart.volume_weights();
    w.iter().zip(&f.data).map(|(w, v)| w * v.norm_sqr()).sum::<f64>().sqrt()
}

/// Quadrature L^p norm on (M, dV_g).
pub fn lp_norm(chart: &CylinderChart, f: &ScalarField, p: f64) -> f64 {
    let w = chart.volume_weights();
    w.iter().zip(&f.data).map(|(w, v)| w * v.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Pointwise |α|_g = (g^{jk} α_j conj(α_k))^{1/2}.
pub fn pointwise_norm(chart: &CylinderChart, alpha: &OneForm) -> Vec<f64> {
    (0..chart.len())
        .map(|m| (0..3).map(|a| alpha.comp[a][m].norm_sqr() * chart.ginv(a)[m]).sum::<f64>().sqrt())
        .collect()
}

/// ‖α‖_{L²} with the metric pointwise norm.
pub fn l2_norm_form(chart: &CylinderChart, alpha: &OneForm) -> f64 {
    let w = chart.volume_weights();
    pointwise_norm(chart, alpha).iter().zip(&w).map(|(n, w)| n * n * w).sum::<f64>().sqrt()
}

/// Semiclassical H¹ norm ‖h∇u‖ + ‖u‖.
pub fn h1_scl_norm(chart: &CylinderChart, u: &ScalarField, h: f64) -> Result<f64> {
    let du = differential(chart, u)?;
    Ok(h * l2_norm_form(chart, &du) + l2_norm(chart, u))
}

/// Discrete exterior derivative of a 1-form: components (dα)_{x1 r}, (dα)_{x1 θ}, (dα)_{r θ}.
pub fn exterior_derivative(chart: &CylinderChart, alpha: &OneForm) -> Result<[ScalarField; 3]> {
    chart.same_grid(alpha.shape)?;
    let d = |f: &Vec<C64>, axis: usize| chart.derivative_operator(axis).mul_vec(f);
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    Ok(pairs.map(|(a, b)| {
        let x = d(&alpha.comp[b], a);
        let y = d(&alpha.comp[a], b);
        ScalarField { shape: alpha.shape, data: x.iter().zip(&y).map(|(p, q)| p - q).collect() }
    }))
}
