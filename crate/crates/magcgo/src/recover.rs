//! Discretized electric data map, its injectivity proxy, and regularized
//! recovery of q₁ − q₂ from probe data.

use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cgo::holomorphic_factor;
use crate::error::{LabError, Result};
use crate::geometry::{exterior_derivative, l2_norm, CylinderChart, OneForm, ScalarField};
use crate::identity::magnetic_functional_parts;
use crate::presets::Profile;
use crate::C64;

/// Dense probe-by-node matrix of c·b(θ)e^{iλ(x₁+ir)}·(flat quadrature weight).
#[derive(Clone, Debug)]
pub struct DataOperator {
    pub chart_name: String,
    pub shape: [usize; 3],
    pub probes: Vec<(f64, Profile)>,
    /// Row-major, `probes.len()` rows by `shape` product columns.
    pub entries: Vec<C64>,
}

impl DataOperator {
    pub fn rows(&self) -> usize {
        self.probes.len()
    }

    pub fn cols(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn row(&self, i: usize) -> &[C64] {
        let n = self.cols();
        &self.entries[i * n..(i + 1) * n]
    }

    /// Data vector for a sampled dq.
    pub fn apply(&self, dq: &ScalarField) -> Result<Vec<C64>> {
        if dq.shape != self.shape {
            return Err(LabError::ChartMismatch(format!("dq grid {:?} vs operator grid {:?}", dq.shape, self.shape)));
        }
        Ok((0..self.rows()).map(|i| self.row(i).iter().zip(&dq.data).map(|(a, x)| a * x).sum()).collect())
    }

    /// Real and imaginary parts stacked, so that real unknowns see a real system.
    pub fn stacked(&self) -> DMatrix<f64> {
        let (m, n) = (self.rows(), self.cols());
        DMatrix::from_fn(2 * m, n, |i, j| {
            let z = self.entries[(i % m) * n + j];
            if i < m {
                z.re
            } else {
                z.im
            }
        })
    }

    /// The same operator restricted to a subset of probes.
    pub fn select(&self, keep: impl Fn(f64, &Profile) -> bool) -> DataOperator {
        let n = self.cols();
        let mut probes = Vec::new();
        let mut entries = Vec::new();
        for (i, (l, b)) in self.probes.iter().enumerate() {
            if keep(*l, b) {
                probes.push((*l, *b));
                entries.extend_from_slice(&self.entries[i * n..(i + 1) * n]);
            }
        }
        DataOperator { chart_name: self.chart_name.clone(), shape: self.shape, probes, entries }
    }

    /// Writes `<stem>_rows.csv`, `<stem>_matrix.csv` and `<stem>_meta.json` into `dir`.
    pub fn write_triple(&self, dir: &Path, stem: &str) -> Result<[PathBuf; 3]> {
        let paths = triple_paths(dir, stem);
        let mut w = std::io::BufWriter::new(std::fs::File::create(&paths[0])?);
        writeln!(w, "row,lambda,profile,center,width,k")?;
        for (i, (l, b)) in self.probes.iter().enumerate() {
            match *b {
                Profile::Bump { center, width } => writeln!(w, "{i},{l:.17e},bump,{center:.17e},{width:.17e},")?,
                Profile::Trig { k } => writeln!(w, "{i},{l:.17e},trig,,,{k}")?,
            }
        }
        w.flush()?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(&paths[1])?);
        writeln!(w, "row,col,re,im")?;
        let n = self.cols();
        for (k, z) in self.entries.iter().enumerate() {
            writeln!(w, "{},{},{:.17e},{:.17e}", k / n, k % n, z.re, z.im)?;
        }
        w.flush()?;
        let meta = serde_json::json!({
            "chart": self.chart_name,
            "shape": self.shape,
            "rows": self.rows(),
            "cols": n,
            "entry": "c*b(theta)*exp(i*lambda*(x1+i*r))*flat_weight",
        });
        std::fs::write(&paths[2], serde_json::to_string_pretty(&meta).map_err(|e| LabError::Io(e.to_string()))? + "\n")?;
        Ok(paths)
    }

    pub fn read_triple(dir: &Path, stem: &str) -> Result<DataOperator> {
        let paths = triple_paths(dir, stem);
        let bad = |what: &str| LabError::Io(format!("malformed {what}"));
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&paths[2])?).map_err(|e| LabError::Io(e.to_string()))?;
        let shape_v = meta["shape"].as_array().ok_or_else(|| bad("meta shape"))?;
        let mut shape = [0usize; 3];
        for (s, v) in shape.iter_mut().zip(shape_v) {
            *s = v.as_u64().ok_or_else(|| bad("meta shape"))? as usize;
        }
        let chart_name = meta["chart"].as_str().unwrap_or_default().to_string();
        let mut probes = Vec::new();
        for line in std::fs::read_to_string(&paths[0])?.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad("rows file"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad("rows file"));
            let profile = match f[2] {
                "bump" => Profile::Bump { center: num(f[3])?, width: num(f[4])? },
                "trig" => Profile::Trig { k: f[5].parse().map_err(|_| bad("rows file"))? },
                _ => return Err(bad("rows file")),
            };
            probes.push((num(f[1])?, profile));
        }
        let n: usize = shape.iter().product();
        let mut entries = vec![C64::new(0.0, 0.0); probes.len() * n];
        for line in std::fs::read_to_string(&paths[1])?.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad("matrix file"));
            }
            let i: usize = f[0].parse().map_err(|_| bad("matrix file"))?;
            let j: usize = f[1].parse().map_err(|_| bad("matrix file"))?;
            let re: f64 = f[2].parse().map_err(|_| bad("matrix file"))?;
            let im: f64 = f[3].parse().map_err(|_| bad("matrix file"))?;
            *entries.get_mut(i * n + j).ok_or_else(|| bad("matrix file"))? = C64::new(re, im);
        }
        Ok(DataOperator { chart_name, shape, probes, entries })
    }
}

fn triple_paths(dir: &Path, stem: &str) -> [PathBuf; 3] {
    [dir.join(format!("{stem}_rows.csv")), dir.join(format!("{stem}_matrix.csv")), dir.join(format!("{stem}_meta.json"))]
}

/// Probe family: every λ paired with every profile.
pub fn probe_grid(lambdas: &[f64], profiles: &[Profile]) -> Vec<(f64, Profile)> {
    lambdas.iter().flat_map(|&l| profiles.iter().map(move |b| (l, *b))).collect()
}

/// Integer ladder {lo, …, hi}.
pub fn lambda_ladder(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(f64::from).collect()
}

/// Rows in λ-major order, columns in chart node order.
pub fn assemble_data_operator(chart: &CylinderChart, lambdas: &[f64], b_family: &[Profile]) -> Result<DataOperator> {
    if lambdas.is_empty() || b_family.is_empty() {
        return Err(LabError::Parameter("empty probe family".into()));
    }
    assemble_from_probes(chart, probe_grid(lambdas, b_family))
}

pub fn assemble_from_probes(chart: &CylinderChart, probes: Vec<(f64, Profile)>) -> Result<DataOperator> {
    if probes.is_empty() {
        return Err(LabError::Parameter("empty probe family".into()));
    }
    let n = chart.len();
    let w = chart.flat_weights();
    let c = chart.c();
    let theta: Vec<f64> = (0..n).map(|m| chart.coords(m)[2]).collect();
    let mut entries = Vec::with_capacity(probes.len() * n);
    for (l, b) in &probes {
        let z = holomorphic_factor(chart, *l);
        entries.extend((0..n).map(|m| z.data[m] * (c[m] * b.eval(chart, theta[m])) * w[m]));
    }
    if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LabError::Numeric("non-finite data operator entry".into()));
    }
    Ok(DataOperator { chart_name: chart.name.clone(), shape: chart.shape(), probes, entries })
}

/// Singular-value summary of the stacked real operator. `sigma_min` is the
/// smallest of the min(rows, cols) singular values, so it can be positive while
/// `nullity` > 0 for an underdetermined operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub rows: usize,
    pub cols: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub condition: f64,
    pub rank: usize,
    /// cols − rank: dimension of the numerically invisible unknowns.
    pub nullity: usize,
    pub singular_values: Vec<f64>,
}

impl InjectivityReport {
    /// Full column rank at the discretization.
    pub fn injective(&self) -> bool {
        self.nullity == 0
    }
}

fn singular_values(a: DMatrix<f64>) -> Result<Vec<f64>> {
    // Work with the wide orientation: same singular values, cheaper bidiagonalization.
    let a = if a.nrows() > a.ncols() { a.transpose() } else { a };
    let svd = a.try_svd(false, false, f64::EPSILON, 0).ok_or_else(|| LabError::Numeric("SVD did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Computed on the stacked operator with every complex probe row scaled to unit norm.
pub fn injectivity_report(op: &DataOperator) -> Result<InjectivityReport> {
    let m = op.rows();
    let mut a = op.stacked();
    for (i, mut row) in a.row_iter_mut().enumerate() {
        let n = op.row(i % m).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            row /= n;
        }
    }
    let (rows, cols) = (a.nrows(), a.ncols());
    let s = singular_values(a)?;
    let sigma_max = s.first().copied().unwrap_or(0.0);
    let sigma_min = s.last().copied().unwrap_or(0.0);
    let tol = rows.max(cols) as f64 * f64::EPSILON * sigma_max;
    let rank = s.iter().filter(|v| **v > tol).count();
    Ok(InjectivityReport {
        rows,
        cols,
        sigma_max,
        sigma_min,
        condition: if sigma_min > 0.0 { sigma_max / sigma_min } else { f64::INFINITY },
        rank,
        nullity: cols - rank,
        singular_values: s,
    })
}

/// How the least-squares problem is regularized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    /// Minimizes ‖A dq − d‖² + reg²‖dq‖²_{L²(M)}.
    Tikhonov { reg: f64 },
    /// Keeps singular values above `rel_cutoff`·σ_max.
    Tsvd { rel_cutoff: f64 },
}

impl Regularizer {
    fn check(&self) -> Result<()> {
        let v = match *self {
            Regularizer::Tikhonov { reg } => reg,
            Regularizer::Tsvd { rel_cutoff } => rel_cutoff,
        };
        if !(v >= 0.0) || !v.is_finite() {
            return Err(LabError::Parameter(format!("regularization parameter must be a nonnegative real, got {v}")));
        }
        Ok(())
    }

    fn filter(&self, s: f64, s_max: f64) -> f64 {
        match *self {
            Regularizer::Tikhonov { reg } => {
                let d = s * s + reg * reg;
                if d > 0.0 {
                    s / d
                } else {
                    0.0
                }
            }
            Regularizer::Tsvd { rel_cutoff } => {
                if s > rel_cutoff * s_max && s > 0.0 {
                    1.0 / s
                } else {
                    0.0
                }
            }
        }
    }
}

/// SVD of the operator in L²(M)-orthonormal unknowns with unit-norm probe
/// rows, reusable across regularizers. Rows span e^{±λr} over r ∈ [1, 3], so
/// without the row scaling a few probes would own the whole misfit.
pub struct FactoredOperator {
    shape: [usize; 3],
    inv_sqrt_w: Vec<f64>,
    row_scale: Vec<f64>,
    u: DMatrix<f64>,
    s: DVector<f64>,
    v_t: DMatrix<f64>,
}

impl FactoredOperator {
    pub fn new(chart: &CylinderChart, op: &DataOperator) -> Result<Self> {
        chart.same_grid(op.shape)?;
        let w = chart.volume_weights();
        let inv_sqrt_w: Vec<f64> = w.iter().map(|v| 1.0 / v.sqrt()).collect();
        let row_scale: Vec<f64> = (0..op.rows())
            .map(|i| {
                let n = op.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if n > 0.0 {
                    1.0 / n
                } else {
                    0.0
                }
            })
            .collect();
        let m = op.rows();
        let mut a = op.stacked();
        for (j, mut col) in a.column_iter_mut().enumerate() {
            col *= inv_sqrt_w[j];
        }
        for (i, mut row) in a.row_iter_mut().enumerate() {
            row *= row_scale[i % m];
        }
        let svd = a.try_svd(true, true, f64::EPSILON, 0).ok_or_else(|| LabError::Numeric("SVD did not converge".into()))?;
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v)) => (u, v),
            _ => return Err(LabError::Numeric("SVD factors missing".into())),
        };
        Ok(FactoredOperator { shape: op.shape, inv_sqrt_w, row_scale, u, s: svd.singular_values, v_t })
    }

    fn solve(&self, data: &[C64], reg: Regularizer) -> Result<ScalarField> {
        reg.check()?;
        let m = data.len();
        if 2 * m != self.u.nrows() {
            return Err(LabError::Parameter(format!("data has {m} probes, operator has {}", self.u.nrows() / 2)));
        }
        let d = self.scaled(data);
        let d = DVector::from_iterator(2 * m, d.iter().map(|z| z.re).chain(d.iter().map(|z| z.im)));
        let s_max = self.s.iter().copied().fold(0.0, f64::max);
        let mut coef = self.u.tr_mul(&d);
        for (c, s) in coef.iter_mut().zip(self.s.iter()) {
            *c *= reg.filter(*s, s_max);
        }
        let y = self.v_t.tr_mul(&coef);
        let data = y.iter().zip(&self.inv_sqrt_w).map(|(v, w)| C64::new(v * w, 0.0)).collect();
        Ok(ScalarField { shape: self.shape, data })
    }

    fn scaled(&self, data: &[C64]) -> Vec<C64> {
        data.iter().zip(&self.row_scale).map(|(z, s)| z * *s).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryDiagnostics {
    pub regularizer: Regularizer,
    /// ‖A dq − d‖ with every probe row scaled to unit norm.
    pub residual_norm: f64,
    /// ‖dq‖_{L²(M)}.
    pub solution_norm: f64,
    /// ‖dq − dq*‖/‖dq*‖ in L²(M) when the truth is supplied (absolute error if dq* = 0).
    pub relative_error: Option<f64>,
}

fn data_residual(op: &DataOperator, f: &FactoredOperator, est: &ScalarField, data: &[C64]) -> Result<f64> {
    let fit = f.scaled(&op.apply(est)?);
    Ok(fit.iter().zip(f.scaled(data)).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
}

fn diagnose(
    chart: &CylinderChart,
    op: &DataOperator,
    f: &FactoredOperator,
    est: &ScalarField,
    data: &[C64],
    reg: Regularizer,
    truth: Option<&ScalarField>,
) -> Result<RecoveryDiagnostics> {
    let relative_error = match truth {
        Some(t) => {
            chart.same_grid(t.shape)?;
            let err = l2_norm(chart, &est.sub(t));
            let norm = l2_norm(chart, t);
            Some(if norm > 0.0 { err / norm } else { err })
        }
        None => None,
    };
    Ok(RecoveryDiagnostics {
        regularizer: reg,
        residual_norm: data_residual(op, f, est, data)?,
        solution_norm: l2_norm(chart, est),
        relative_error,
    })
}

/// Regularized least-squares estimate of dq from probe data.
pub fn recover_q(
    chart: &CylinderChart,
    op: &DataOperator,
    data: &[C64],
    reg: Regularizer,
    truth: Option<&ScalarField>,
) -> Result<(ScalarField, RecoveryDiagnostics)> {
    reg.check()?;
    let f = FactoredOperator::new(chart, op)?;
    recover_with(chart, op, &f, data, reg, truth)
}

pub fn recover_with(
    chart: &CylinderChart,
    op: &DataOperator,
    f: &FactoredOperator,
    data: &[C64],
    reg: Regularizer,
    truth: Option<&ScalarField>,
) -> Result<(ScalarField, RecoveryDiagnostics)> {
    let est = f.solve(data, reg)?;
    let diag = diagnose(chart, op, f, &est, data, reg, truth)?;
    Ok((est, diag))
}

/// Adds seeded noise to probe data. Each probe's noise is proportional to its
/// row norm, and the total is `level` times the data norm in row-normalized units.
pub fn add_noise(op: &DataOperator, data: &[C64], level: f64, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<f64> = (0..op.rows()).map(|i| op.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let unit: Vec<C64> = data.iter().map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let scaled_norm = data.iter().zip(&rows).filter(|(_, r)| **r > 0.0).map(|(d, r)| (d / r).norm_sqr()).sum::<f64>().sqrt();
    let nn = unit.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let s = if nn > 0.0 { level * scaled_norm / nn } else { 0.0 };
    data.iter().zip(&unit).zip(&rows).map(|((d, e), r)| d + e * (s * r)).collect()
}

/// Tikhonov sweep over `regs` (ascending), one diagnostics row per value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LCurve {
    pub points: Vec<RecoveryDiagnostics>,
}

impl LCurve {
    fn regs(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| match p.regularizer {
                Regularizer::Tikhonov { reg } => reg,
                Regularizer::Tsvd { rel_cutoff } => rel_cutoff,
            })
            .collect()
    }

    /// Residual nondecreasing and solution norm nonincreasing as reg grows.
    pub fn is_monotone(&self) -> bool {
        let slack = 1e-12;
        self.points.windows(2).all(|w| {
            w[1].residual_norm >= w[0].residual_norm * (1.0 - slack) && w[1].solution_norm <= w[0].solution_norm * (1.0 + slack)
        })
    }

    /// Regularization with the smallest error against the truth, if known.
    pub fn best(&self) -> Option<&RecoveryDiagnostics> {
        self.points
            .iter()
            .filter(|p| p.relative_error.is_some())
            .min_by(|a, b| a.relative_error.unwrap().total_cmp(&b.relative_error.unwrap()))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "reg,residual_norm,solution_norm,relative_error")?;
        for (r, p) in self.regs().iter().zip(&self.points) {
            let e = p.relative_error.map(|e| format!("{e:.17e}")).unwrap_or_default();
            writeln!(w, "{r:.17e},{:.17e},{:.17e},{e}", p.residual_norm, p.solution_norm)?;
        }
        Ok(())
    }
}

pub fn l_curve(
    chart: &CylinderChart,
    op: &DataOperator,
    data: &[C64],
    regs: &[f64],
    truth: Option<&ScalarField>,
) -> Result<LCurve> {
    if regs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Parameter("L-curve regularization ladder must be strictly increasing".into()));
    }
    let f = FactoredOperator::new(chart, op)?;
    let points = regs
        .iter()
        .map(|&reg| recover_with(chart, op, &f, data, Regularizer::Tikhonov { reg }, truth).map(|r| r.1))
        .collect::<Result<Vec<_>>>()?;
    Ok(LCurve { points })
}

/// Logarithmic ladder of `count` values from `lo` to `hi`.
pub fn log_ladder(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    (0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64)).collect()
}

/// Closedness evidence for A₁ − A₂.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedCertificate {
    /// L²(M) norm of the discrete exterior derivative, summed over its three components.
    pub curl_norm: f64,
    /// max over probes of |magnetic_limit_functional|.
    pub functional_max: f64,
    /// Same maximum divided by each probe's Cauchy–Schwarz bound.
    pub functional_max_relative: f64,
}

pub fn certify_closed(chart: &CylinderChart, delta: &OneForm, phase: &ScalarField, probes: &[(f64, Profile)]) -> Result<ClosedCertificate> {
    let d = exterior_derivative(chart, delta)?;
    let curl_norm = d.iter().map(|c| l2_norm(chart, c).powi(2)).sum::<f64>().sqrt();
    let mut functional_max = 0.0f64;
    let mut functional_max_relative = 0.0f64;
    for (l, b) in probes {
        let (v, bound) = magnetic_functional_parts(chart, delta, phase, *l, b)?;
        functional_max = functional_max.max(v.norm());
        if bound > 0.0 {
            functional_max_relative = functional_max_relative.max(v.norm() / bound);
        }
    }
    Ok(ClosedCertificate { curl_norm, functional_max, functional_max_relative })
}

/// Synthetic recovery run: truth, probes, clean and noisy data, sweep.
#[derive(Clone, Debug)]
pub struct RecoverySetup {
    pub preset: String,
    pub grid: [usize; 3],
    pub lambdas: Vec<f64>,
    pub n_profiles: usize,
    pub reg: f64,
    pub noise: f64,
    pub l_curve_regs: Vec<f64>,
    pub seed: u64,
}

impl RecoverySetup {
    pub fn new(preset: &str, grid: [usize; 3]) -> Self {
        RecoverySetup {
            preset: preset.into(),
            grid,
            lambdas: lambda_ladder(-8, 8),
            n_profiles: 6,
            reg: 1e-6,
            noise: 0.01,
            l_curve_regs: log_ladder(1e-8, 1e-1, 15),
            seed: 0,
        }
    }
}

pub struct RecoveryRun {
    pub chart: CylinderChart,
    pub op: DataOperator,
    pub injectivity: InjectivityReport,
    pub estimate: ScalarField,
    pub clean: RecoveryDiagnostics,
    pub noisy_curve: LCurve,
}

/// Recovers `truth` (sampled on the setup grid) from its own clean data, then sweeps noisy data.
pub fn synthetic_recovery(setup: &RecoverySetup, truth: impl Fn([f64; 3]) -> f64) -> Result<RecoveryRun> {
    let chart = CylinderChart::preset(&setup.preset, setup.grid)?;
    let profiles = Profile::family(&chart, setup.n_profiles);
    let op = assemble_data_operator(&chart, &setup.lambdas, &profiles)?;
    let dq = ScalarField::from_real(&chart, truth);
    let data = op.apply(&dq)?;
    let injectivity = injectivity_report(&op)?;
    let f = FactoredOperator::new(&chart, &op)?;
    let (estimate, clean) = recover_with(&chart, &op, &f, &data, Regularizer::Tikhonov { reg: setup.reg }, Some(&dq))?;
    let noisy = add_noise(&op, &data, setup.noise, setup.seed);
    let noisy_curve = l_curve(&chart, &op, &noisy, &setup.l_curve_regs, Some(&dq))?;
    Ok(RecoveryRun { chart, op, injectivity, estimate, clean, noisy_curve })
}

/// Unused-probe sanity: the θ-only family (λ = 0) as a separate operator.
pub fn theta_only(op: &DataOperator) -> DataOperator {
    op.select(|l, _| l == 0.0)
}

