//! Covariant tensors of low rank and their Levi-Civita derivatives.

use super::chart::CylinderChart;
use super::field::{OneForm, ScalarField};
use crate::error::Result;
use crate::C64;

/// Covariant rank-k tensor; component (i1, …, ik) lives at Σ i_s 3^{k-1-s}.
#[derive(Clone, Debug)]
pub struct Tensor {
    pub rank: usize,
    pub comp: Vec<Vec<C64>>,
}

impl Tensor {
    pub fn scalar(f: &ScalarField) -> Self {
        Tensor { rank: 0, comp: vec![f.data.clone()] }
    }

    pub fn one_form(a: &OneForm) -> Self {
        Tensor { rank: 1, comp: a.comp.to_vec() }
    }

    fn multi(&self, mut c: usize) -> Vec<usize> {
        let mut ix = vec![0; self.rank];
        for s in (0..self.rank).rev() {
            ix[s] = c % 3;
            c /= 3;
        }
        ix
    }

    /// Pointwise |T|_g for a diagonal metric.
    pub fn pointwise_norm(&self, chart: &CylinderChart) -> Vec<f64> {
        let mut out = vec![0.0; chart.len()];
        for (c, vals) in self.comp.iter().enumerate() {
            let ix = self.multi(c);
            for (m, v) in vals.iter().enumerate() {
                let w: f64 = ix.iter().map(|&a| chart.ginv(a)[m]).product();
                out[m] += w * v.norm_sqr();
            }
        }
        out.iter_mut().for_each(|v| *v = v.sqrt());
        out
    }
}

/// Γ^k_{ij} = ½ g^{kk}(∂_i g_jk + ∂_j g_ik − ∂_k g_ij) for the diagonal chart metric,
/// with ∂g taken by the chart difference operators.
pub fn christoffel(chart: &CylinderChart) -> Vec<Vec<Vec<Vec<f64>>>> {
    let dg: Vec<Vec<Vec<f64>>> = (0..3)
        .map(|a| {
            let ga: Vec<C64> = chart.g(a).iter().map(|v| C64::new(*v, 0.0)).collect();
            (0..3).map(|b| chart.derivative_operator(b).mul_vec(&ga).iter().map(|v| v.re).collect()).collect()
        })
        .collect();
    let n = chart.len();
    let mut gam = vec![vec![vec![vec![0.0; n]; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                for m in 0..n {
                    let mut s = 0.0;
                    if j == k {
                        s += dg[j][i][m];
                    }
                    if i == k {
                        s += dg[i][j][m];
                    }
                    if i == j {
                        s -= dg[i][k][m];
                    }
                    gam[k][i][j][m] = 0.5 * chart.ginv(k)[m] * s;
                }
            }
        }
    }
    gam
}

/// (∇T)_{i1…ik j} = ∂_j T_{i1…ik} − Σ_s Γ^m_{j i_s} T_{…m…}.
pub fn covariant_derivative(chart: &CylinderChart, t: &Tensor) -> Result<Tensor> {
    let gam = christoffel(chart);
    let n = chart.len();
    let ncomp = t.comp.len() * 3;
    let mut comp = vec![vec![C64::new(0.0, 0.0); n]; ncomp];
    for (c, vals) in t.comp.iter().enumerate() {
        let ix = t.multi(c);
        for j in 0..3 {
            let mut out = chart.derivative_operator(j).mul_vec(vals);
            for s in 0..t.rank {
                for mm in 0..3 {
                    let mut jx = ix.clone();
                    jx[s] = mm;
                    let src = &t.comp[jx.iter().fold(0, |acc, v| acc * 3 + v)];
                    let g = &gam[mm][j][ix[s]];
                    for m in 0..n {
                        out[m] -= src[m] * g[m];
                    }
                }
            }
            comp[c * 3 + j] = out;
        }
    }
    Ok(Tensor { rank: t.rank + 1, comp })
}
