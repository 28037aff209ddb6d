use std::io::Write;

use super::chart::CylinderChart;
use crate::error::{LabError, Result};
use crate::C64;

/// Complex samples of a function on the chart grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub shape: [usize; 3],
    pub data: Vec<C64>,
}

/// Covariant components (x1, r, theta) of a complex 1-form.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub shape: [usize; 3],
    pub comp: [Vec<C64>; 3],
}

/// Contravariant components of a complex vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub shape: [usize; 3],
    pub comp: [Vec<C64>; 3],
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl ScalarField {
    pub fn zeros(chart: &CylinderChart) -> Self {
        ScalarField { shape: chart.shape(), data: vec![zero(); chart.len()] }
    }

    pub fn constant(chart: &CylinderChart, v: C64) -> Self {
        ScalarField { shape: chart.shape(), data: vec![v; chart.len()] }
    }

    pub fn from_fn(chart: &CylinderChart, f: impl Fn([f64; 3]) -> C64) -> Self {
        let data = (0..chart.len()).map(|m| f(chart.coords(m))).collect();
        ScalarField { shape: chart.shape(), data }
    }

    pub fn from_real(chart: &CylinderChart, f: impl Fn([f64; 3]) -> f64) -> Self {
        Self::from_fn(chart, |x| C64::new(f(x), 0.0))
    }

    pub fn from_vec(chart: &CylinderChart, data: Vec<C64>) -> Result<Self> {
        if data.len() != chart.len() {
            return Err(LabError::ChartMismatch(format!("{} samples for {} nodes", data.len(), chart.len())));
        }
        Ok(ScalarField { shape: chart.shape(), data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        ScalarField { shape: self.shape, data: self.data.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip(&self, o: &ScalarField, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.shape, o.shape, "field shapes differ");
        ScalarField { shape: self.shape, data: self.data.iter().zip(&o.data).map(|(a, b)| f(*a, *b)).collect() }
    }

    pub fn add(&self, o: &ScalarField) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &ScalarField) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn mul(&self, o: &ScalarField) -> Self {
        self.zip(o, |a, b| a * b)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|v| v * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max modulus over the listed nodes.
    pub fn max_abs_on(&self, nodes: &[usize]) -> f64 {
        nodes.iter().map(|&m| self.data[m].norm()).fold(0.0, f64::max)
    }

    /// CSV with columns (i1, ir, itheta, re, im).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i1,ir,itheta,re,im")?;
        let [_, nr, nt] = self.shape;
        for (m, v) in self.data.iter().enumerate() {
            writeln!(w, "{},{},{},{:.17e},{:.17e}", m / (nr * nt), (m / nt) % nr, m % nt, v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_csv(chart: &CylinderChart, text: &str) -> Result<Self> {
        let mut f = ScalarField::zeros(chart);
        let mut seen = vec![false; chart.len()];
        for (ln, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || LabError::Config(format!("field csv line {}: '{line}'", ln + 1));
            if cols.len() != 5 {
                return Err(bad());
            }
            let ix: Vec<usize> = cols[..3].iter().map(|c| c.parse::<usize>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
            let re: f64 = cols[3].parse().map_err(|_| bad())?;
            let im: f64 = cols[4].parse().map_err(|_| bad())?;
            if ix[0] >= f.shape[0] || ix[1] >= f.shape[1] || ix[2] >= f.shape[2] {
                return Err(bad());
            }
            let m = chart.idx(ix[0], ix[1], ix[2]);
            f.data[m] = C64::new(re, im);
            seen[m] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(LabError::Config("field csv does not cover every node".into()));
        }
        Ok(f)
    }
}

impl OneForm {
    pub fn zeros(chart: &CylinderChart) -> Self {
        let z = vec![zero(); chart.len()];
        OneForm { shape: chart.shape(), comp: [z.clone(), z.clone(), z] }
    }

    pub fn from_fn(chart: &CylinderChart, f: impl Fn([f64; 3]) -> [C64; 3]) -> Self {
        let mut out = Self::zeros(chart);
        for m in 0..chart.len() {
            let v = f(chart.coords(m));
            for a in 0..3 {
                out.comp[a][m] = v[a];
            }
        }
        out
    }

    pub fn from_real(chart: &CylinderChart, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        Self::from_fn(chart, |x| f(x).map(|v| C64::new(v, 0.0)))
    }

    pub fn component(&self, axis: usize) -> ScalarField {
        ScalarField { shape: self.shape, data: self.comp[axis].clone() }
    }

    pub fn from_components(c: [ScalarField; 3]) -> Self {
        let shape = c[0].shape;
        let [a, b, d] = c;
        OneForm { shape, comp: [a.data, b.data, d.data] }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        OneForm { shape: self.shape, comp: [0, 1, 2].map(|a| self.comp[a].iter().map(|v| f(*v)).collect()) }
    }

    pub fn zip(&self, o: &OneForm, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.shape, o.shape, "one-form shapes differ");
        OneForm {
            shape: self.shape,
            comp: [0, 1, 2].map(|a| self.comp[a].iter().zip(&o.comp[a]).map(|(x, y)| f(*x, *y)).collect()),
        }
    }

    pub fn add(&self, o: &OneForm) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &OneForm) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|v| v * s)
    }

    /// Pointwise product with a scalar field.
    pub fn times(&self, f: &ScalarField) -> Self {
        assert_eq!(self.shape, f.shape);
        OneForm {
            shape: self.shape,
            comp: [0, 1, 2].map(|a| self.comp[a].iter().zip(&f.data).map(|(x, y)| x * y).collect()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comp.iter().flat_map(|c| c.iter().map(|v| v.norm())).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.comp.iter().all(|c| c.iter().all(|v| v.im == 0.0))
    }
}

impl VectorField {
    pub fn zeros(chart: &CylinderChart) -> Self {
        let z = vec![zero(); chart.len()];
        VectorField { shape: chart.shape(), comp: [z.clone(), z.clone(), z] }
    }

    pub fn from_fn(chart: &CylinderChart, f: impl Fn([f64; 3]) -> [C64; 3]) -> Self {
        let mut out = Self::zeros(chart);
        for m in 0..chart.len() {
            let v = f(chart.coords(m));
            for a in 0..3 {
                out.comp[a][m] = v[a];
            }
        }
        out
    }

    pub fn from_real(chart: &CylinderChart, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        Self::from_fn(chart, |x| f(x).map(|v| C64::new(v, 0.0)))
    }

    pub fn is_real(&self) -> bool {
        self.comp.iter().all(|c| c.iter().all(|v| v.im == 0.0))
    }
}
