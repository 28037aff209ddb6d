use super::chart::CylinderChart;
use super::field::{OneForm, ScalarField};
use crate::error::{LabError, Result};
use crate::C64;

/// The six coordinate faces of the box chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Face {
    X1Min,
    X1Max,
    RMin,
    RMax,
    ThetaMin,
    ThetaMax,
}

pub const FACES: [Face; 6] = [Face::X1Min, Face::X1Max, Face::RMin, Face::RMax, Face::ThetaMin, Face::ThetaMax];

impl Face {
    pub fn axis(self) -> usize {
        match self {
            Face::X1Min | Face::X1Max => 0,
            Face::RMin | Face::RMax => 1,
            Face::ThetaMin | Face::ThetaMax => 2,
        }
    }

    pub fn is_max(self) -> bool {
        matches!(self, Face::X1Max | Face::RMax | Face::ThetaMax)
    }

    /// Sign of the outward normal relative to the coordinate direction.
    pub fn outward(self) -> f64 {
        if self.is_max() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Face::X1Min => "x1_min",
            Face::X1Max => "x1_max",
            Face::RMin => "r_min",
            Face::RMax => "r_max",
            Face::ThetaMin => "theta_min",
            Face::ThetaMax => "theta_max",
        }
    }

    fn tangential(self) -> (usize, usize) {
        match self.axis() {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    /// Grid nodes of the face in (a, b) order of its tangential axes.
    pub fn nodes(self, chart: &CylinderChart) -> Vec<usize> {
        let s = chart.shape();
        let fixed = if self.is_max() { s[self.axis()] - 1 } else { 0 };
        let (ta, tb) = self.tangential();
        let mut out = Vec::with_capacity(s[ta] * s[tb]);
        for a in 0..s[ta] {
            for b in 0..s[tb] {
                let mut ix = [0usize; 3];
                ix[self.axis()] = fixed;
                ix[ta] = a;
                ix[tb] = b;
                out.push(chart.idx(ix[0], ix[1], ix[2]));
            }
        }
        out
    }

    /// dS_g weights: tangential trapezoid times the induced density
    /// (c r on x1 and r faces, c on theta faces).
    pub fn weights(self, chart: &CylinderChart) -> Vec<f64> {
        let (ta, tb) = self.tangential();
        let wa = chart.axes[ta].trapezoid_weights();
        let wb = chart.axes[tb].trapezoid_weights();
        let nodes = self.nodes(chart);
        let c = chart.c();
        let nb = wb.len();
        nodes
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let r = chart.coords(m)[1];
                let dens = if self.axis() == 2 { c[m] } else { c[m] * r };
                wa[k / nb] * wb[k % nb] * dens
            })
            .collect()
    }
}

/// Values on each of the six faces, ordered as [`Face::nodes`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryField {
    pub faces: Vec<Vec<C64>>,
}

impl BoundaryField {
    pub fn zip(&self, o: &BoundaryField, f: impl Fn(C64, C64) -> C64) -> Self {
        BoundaryField {
            faces: self.faces.iter().zip(&o.faces).map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()).collect(),
        }
    }

    pub fn mul(&self, o: &BoundaryField) -> Self {
        self.zip(o, |a, b| a * b)
    }

    pub fn add(&self, o: &BoundaryField) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &BoundaryField) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        BoundaryField { faces: self.faces.iter().map(|f| f.iter().map(|v| v * s).collect()).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.faces.iter().flat_map(|f| f.iter().map(|v| v.norm())).fold(0.0, f64::max)
    }
}

/// Restriction of a grid field to the faces.
pub fn trace(chart: &CylinderChart, u: &ScalarField) -> Result<BoundaryField> {
    chart.same_grid(u.shape)?;
    Ok(BoundaryField { faces: FACES.iter().map(|f| f.nodes(chart).iter().map(|&m| u.data[m]).collect()).collect() })
}

/// Outward normal derivative ∂_ν u = ±g_jj^{-1/2} ∂_j u, one-sided second order.
pub fn normal_derivative(chart: &CylinderChart, u: &ScalarField) -> Result<BoundaryField> {
    chart.same_grid(u.shape)?;
    let mut faces = Vec::with_capacity(6);
    for f in FACES {
        let a = f.axis();
        let h = chart.step(a);
        let st = chart.stride(a) as isize;
        let inward: isize = if f.is_max() { -1 } else { 1 };
        let g = chart.g(a);
        let vals = f
            .nodes(chart)
            .iter()
            .map(|&m| {
                let at = |k: isize| u.data[(m as isize + inward * k * st) as usize];
                // derivative along the inward direction
                let d_in = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
                -d_in / g[m].sqrt()
            })
            .collect();
        faces.push(vals);
    }
    Ok(BoundaryField { faces })
}

/// ⟨α, ν⟩_g = α_j ν^j on each face.
pub fn normal_component(chart: &CylinderChart, alpha: &OneForm) -> Result<BoundaryField> {
    chart.same_grid(alpha.shape)?;
    let faces = FACES
        .iter()
        .map(|f| {
            let a = f.axis();
            let g = chart.g(a);
            f.nodes(chart).iter().map(|&m| alpha.comp[a][m] * (f.outward() / g[m].sqrt())).collect()
        })
        .collect();
    Ok(BoundaryField { faces })
}

/// ∂_ν of the weight φ = s x1.
pub fn normal_derivative_of_weight(chart: &CylinderChart, sign: f64) -> BoundaryField {
    let faces = FACES
        .iter()
        .map(|f| {
            let n = f.nodes(chart);
            if f.axis() == 0 {
                n.iter().map(|&m| C64::new(sign * f.outward() / chart.c()[m].sqrt(), 0.0)).collect()
            } else {
                vec![C64::new(0.0, 0.0); n.len()]
            }
        })
        .collect();
    BoundaryField { faces }
}

/// Node classification for the partial-data split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryFlag {
    /// ∂_ν φ > 0 and outside the measurement set.
    Plus,
    /// ∂_ν φ ≤ 0 (the front face F).
    Minus,
    /// ∂_ν φ > 0 but inside the collar that makes Γ an open neighborhood of F.
    GammaOnly,
}

/// Which part of ∂M to integrate over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subset {
    All,
    /// Γ = Minus ∪ GammaOnly
    Gamma,
    /// ∂M \ Γ
    Unmeasured,
    /// {∂_ν φ ≥ 0}
    PlusSet,
    /// {∂_ν φ ≤ 0}
    MinusSet,
}

/// Partition of ∂M into ∂M±, F and Γ for the weight φ = s x1.
#[derive(Clone, Debug)]
pub struct BoundaryRegion {
    pub sign: f64,
    pub collar: f64,
    pub flags: Vec<Vec<BoundaryFlag>>,
    pub dnu_phi: BoundaryField,
    pub weights: Vec<Vec<f64>>,
}

/// Builds the split for φ = sign·x1 with a collar of coordinate width `collar`
/// on the plus face, measured from its edges.
pub fn boundary_split(chart: &CylinderChart, sign: f64, collar: f64) -> Result<BoundaryRegion> {
    if sign != 1.0 && sign != -1.0 {
        return Err(LabError::Parameter(format!("weight sign must be ±1, got {sign}")));
    }
    if collar < 0.0 {
        return Err(LabError::Parameter("collar width must be nonnegative".into()));
    }
    let dnu = normal_derivative_of_weight(chart, sign);
    let mut flags = Vec::with_capacity(6);
    let mut weights = Vec::with_capacity(6);
    for (fi, f) in FACES.iter().enumerate() {
        let nodes = f.nodes(chart);
        let fl = nodes
            .iter()
            .zip(&dnu.faces[fi])
            .map(|(&m, d)| {
                if d.re <= 0.0 {
                    BoundaryFlag::Minus
                } else {
                    let x = chart.coords(m);
                    let (ra, th) = (chart.axes[1], chart.axes[2]);
                    let dist = (x[1] - ra.min).min(ra.max - x[1]).min(x[2] - th.min).min(th.max - x[2]);
                    if dist < collar - 1e-12 {
                        BoundaryFlag::GammaOnly
                    } else {
                        BoundaryFlag::Plus
                    }
                }
            })
            .collect();
        flags.push(fl);
        weights.push(f.weights(chart));
    }
    Ok(BoundaryRegion { sign, collar, flags, dnu_phi: dnu, weights })
}

impl BoundaryRegion {
    fn member(&self, face: usize, k: usize, subset: Subset) -> bool {
        let fl = self.flags[face][k];
        let d = self.dnu_phi.faces[face][k].re;
        match subset {
            Subset::All => true,
            Subset::Gamma => fl != BoundaryFlag::Plus,
            Subset::Unmeasured => fl == BoundaryFlag::Plus,
            Subset::PlusSet => d >= 0.0,
            Subset::MinusSet => d <= 0.0,
        }
    }

    /// ∫ f dS_g over the chosen subset, face by face.
    pub fn integrate(&self, f: &BoundaryField, subset: Subset) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (fi, vals) in f.faces.iter().enumerate() {
            for (k, v) in vals.iter().enumerate() {
                if self.member(fi, k, subset) {
                    s += v * self.weights[fi][k];
                }
            }
        }
        s
    }

    /// Surface measure of the subset.
    pub fn area(&self, subset: Subset) -> f64 {
        let ones = BoundaryField { faces: self.weights.iter().map(|w| vec![C64::new(1.0, 0.0); w.len()]).collect() };
        self.integrate(&ones, subset).re
    }

    pub fn count(&self, flag: BoundaryFlag) -> usize {
        self.flags.iter().flatten().filter(|f| **f == flag).count()
    }
}
