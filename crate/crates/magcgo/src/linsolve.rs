//! Sparse matrices and the iterative/direct solvers used by the remainder
//! solve and the semiclassical dual norm.

use crate::error::{LabError, Result};
use crate::C64;

/// Scalar types a [`Csr`] can hold.
pub trait Entry: Copy + Send + Sync + std::fmt::Debug + 'static {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn to_c(self) -> C64;
    fn conj(self) -> Self;
}

impl Entry for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn to_c(self) -> C64 {
        C64::new(self, 0.0)
    }
    fn conj(self) -> Self {
        self
    }
}

impl Entry for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn to_c(self) -> C64 {
        self
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
}

/// Compressed sparse row matrix with sorted, duplicate-free rows.
#[derive(Clone, Debug)]
pub struct Csr<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<T>,
}

impl<T: Entry> Csr<T> {
    /// Builds from triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trips: Vec<(usize, usize, T)>) -> Self {
        trips.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut ptr = vec![0usize; nrows + 1];
        let mut col = Vec::with_capacity(trips.len());
        let mut val: Vec<T> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trips {
            debug_assert!(i < nrows && j < ncols);
            if last == Some((i, j)) {
                let k = val.len() - 1;
                val[k] = val[k].add(v);
            } else {
                col.push(j);
                val.push(v);
                ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            ptr[i + 1] += ptr[i];
        }
        Csr { nrows, ncols, ptr, col, val }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let (a, b) = (self.ptr[i], self.ptr[i + 1]);
        (&self.col[a..b], &self.val[a..b])
    }

    pub fn to_complex(&self) -> Csr<C64> {
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            ptr: self.ptr.clone(),
            col: self.col.clone(),
            val: self.val.iter().map(|v| v.to_c()).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for k in self.ptr[i]..self.ptr[i + 1] {
                s += self.val[k].to_c() * x[self.col[k]];
            }
            *yi = s;
        }
        y
    }

    /// y = A^H x
    pub fn mul_adj_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![C64::new(0.0, 0.0); self.ncols];
        for (i, xi) in x.iter().enumerate() {
            for k in self.ptr[i]..self.ptr[i + 1] {
                y[self.col[k]] += self.val[k].conj().to_c() * xi;
            }
        }
        y
    }

    /// Restriction to the given rows and columns. `cols[j]` maps an old
    /// column to its new index; unmapped columns are dropped.
    pub fn restrict(&self, rows: &[usize], cols: &[Option<usize>], ncols: usize) -> Self {
        let mut ptr = Vec::with_capacity(rows.len() + 1);
        ptr.push(0);
        let mut col = Vec::new();
        let mut val = Vec::new();
        for &i in rows {
            let mut entries: Vec<(usize, T)> = Vec::new();
            for k in self.ptr[i]..self.ptr[i + 1] {
                if let Some(j) = cols[self.col[k]] {
                    entries.push((j, self.val[k]));
                }
            }
            entries.sort_by_key(|e| e.0);
            for (j, v) in entries {
                col.push(j);
                val.push(v);
            }
            ptr.push(col.len());
        }
        Csr { nrows: rows.len(), ncols, ptr, col, val }
    }

    pub fn diagonal(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.nrows.min(self.ncols)];
        for (i, di) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            if let Ok(k) = c.binary_search(&i) {
                *di = v[k];
            }
        }
        d
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveInfo {
    pub iterations: usize,
    pub relative_residual: f64,
    pub method: &'static str,
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn dotc(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Preconditioned conjugate gradients for a Hermitian positive definite
/// operator given as a closure. `precond` holds the inverse diagonal.
pub fn conjugate_gradient<F>(
    apply: F,
    b: &[C64],
    precond: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<C64>, SolveInfo)>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = b.len();
    let bn = norm(b);
    let mut x = vec![C64::new(0.0, 0.0); n];
    if bn == 0.0 {
        return Ok((x, SolveInfo { iterations: 0, relative_residual: 0.0, method: "cg" }));
    }
    let mut r = b.to_vec();
    let mut z: Vec<C64> = r.iter().zip(precond).map(|(a, p)| a * p).collect();
    let mut p = z.clone();
    let mut rz = dotc(&r, &z);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dotc(&p, &ap);
        if pap.re <= 0.0 || !pap.re.is_finite() {
            return Err(LabError::Solver {
                msg: "cg: operator not positive definite".into(),
                condition: f64::INFINITY,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm(&r) / bn;
        if rel <= tol {
            return Ok((x, SolveInfo { iterations: it, relative_residual: rel, method: "cg" }));
        }
        for i in 0..n {
            z[i] = r[i] * precond[i];
        }
        let rz_new = dotc(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = norm(&r) / bn;
    Err(LabError::Solver {
        msg: format!("cg did not converge in {max_iter} iterations (residual {rel:.2e})"),
        condition: f64::NAN,
    })
}

/// Incomplete LU factorization with zero fill-in on the sparsity pattern of A.
pub struct Ilu0 {
    lu: Csr<C64>,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &Csr<C64>) -> Result<Self> {
        let n = a.nrows;
        let mut lu = a.clone();
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            let (c, _) = lu.row(i);
            match c.binary_search(&i) {
                Ok(k) => diag_pos[i] = lu.ptr[i] + k,
                Err(_) => {
                    return Err(LabError::Solver {
                        msg: format!("ilu0: missing diagonal in row {i}"),
                        condition: f64::INFINITY,
                    })
                }
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in lu.ptr[i]..lu.ptr[i + 1] {
                pos[lu.col[k]] = k;
            }
            for k in lu.ptr[i]..diag_pos[i] {
                let j = lu.col[k];
                let piv = lu.val[diag_pos[j]];
                if piv.norm() == 0.0 {
                    return Err(LabError::Solver {
                        msg: "ilu0: zero pivot".into(),
                        condition: f64::INFINITY,
                    });
                }
                let m = lu.val[k] / piv;
                lu.val[k] = m;
                for kk in diag_pos[j] + 1..lu.ptr[j + 1] {
                    let p = pos[lu.col[kk]];
                    if p != usize::MAX {
                        let sub = m * lu.val[kk];
                        lu.val[p] -= sub;
                    }
                }
            }
            for k in lu.ptr[i]..lu.ptr[i + 1] {
                pos[lu.col[k]] = usize::MAX;
            }
        }
        Ok(Ilu0 { lu, diag_pos })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = b.len();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in self.lu.ptr[i]..self.diag_pos[i] {
                s -= self.lu.val[k] * y[self.lu.col[k]];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in self.diag_pos[i] + 1..self.lu.ptr[i + 1] {
                s -= self.lu.val[k] * y[self.lu.col[k]];
            }
            y[i] = s / self.lu.val[self.diag_pos[i]];
        }
        y
    }
}

/// ILU(0)-preconditioned BiCGSTAB for a general complex square system.
pub fn bicgstab(a: &Csr<C64>, b: &[C64], tol: f64, max_iter: usize) -> Result<(Vec<C64>, SolveInfo)> {
    let n = b.len();
    let ilu = Ilu0::new(a)?;
    let bn = norm(b);
    let mut x = vec![C64::new(0.0, 0.0); n];
    if bn == 0.0 {
        return Ok((x, SolveInfo { iterations: 0, relative_residual: 0.0, method: "bicgstab" }));
    }
    let mut r = b.to_vec();
    let r0 = r.clone();
    let mut rho = C64::new(1.0, 0.0);
    let mut alpha = C64::new(1.0, 0.0);
    let mut omega = C64::new(1.0, 0.0);
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];
    for it in 1..=max_iter {
        let rho_new = dotc(&r0, &r);
        if rho_new.norm() < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let ph = ilu.solve(&p);
        v = a.mul_vec(&ph);
        alpha = rho / dotc(&r0, &v);
        let s: Vec<C64> = (0..n).map(|i| r[i] - alpha * v[i]).collect();
        if norm(&s) / bn <= tol {
            for i in 0..n {
                x[i] += alpha * ph[i];
            }
            return Ok((x, SolveInfo { iterations: it, relative_residual: norm(&s) / bn, method: "bicgstab" }));
        }
        let sh = ilu.solve(&s);
        let t = a.mul_vec(&sh);
        let tt = dotc(&t, &t);
        omega = if tt.norm() > 0.0 { dotc(&t, &s) / tt } else { C64::new(0.0, 0.0) };
        for i in 0..n {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        let rel = norm(&r) / bn;
        if rel <= tol {
            return Ok((x, SolveInfo { iterations: it, relative_residual: rel, method: "bicgstab" }));
        }
        if omega.norm() == 0.0 {
            break;
        }
    }
    let res: Vec<C64> = a.mul_vec(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
    Err(LabError::Solver {
        msg: format!("bicgstab stalled (residual {:.2e})", norm(&res) / bn),
        condition: f64::NAN,
    })
}

/// Minimum weighted-norm solution of an underdetermined system `A x = b`:
/// minimizes `sum_i w_i |x_i|^2` subject to the constraints, via conjugate
/// gradients on `A W^{-1} A^H y = b`, `x = W^{-1} A^H y`.
pub fn min_norm_solve(
    a: &Csr<C64>,
    weights: &[f64],
    b: &[C64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<C64>, SolveInfo)> {
    assert_eq!(weights.len(), a.ncols);
    let winv: Vec<f64> = weights.iter().map(|w| 1.0 / w).collect();
    let mut diag = vec![0.0; a.nrows];
    for (i, d) in diag.iter_mut().enumerate() {
        let (c, v) = a.row(i);
        *d = c.iter().zip(v).map(|(&j, x)| x.norm_sqr() * winv[j]).sum::<f64>();
    }
    let pre: Vec<f64> = diag.iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let apply = |y: &[C64]| {
        let mut t = a.mul_adj_vec(y);
        for (tj, wj) in t.iter_mut().zip(&winv) {
            *tj *= *wj;
        }
        a.mul_vec(&t)
    };
    let (y, mut info) = conjugate_gradient(apply, b, &pre, tol, max_iter)?;
    let mut x = a.mul_adj_vec(&y);
    for (xj, wj) in x.iter_mut().zip(&winv) {
        *xj *= *wj;
    }
    info.method = "min-norm-cg";
    Ok((x, info))
}

/// Banded LU with partial pivoting (LAPACK gbtrf layout), for moderate
/// systems where a direct factorization is affordable.
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row-major band storage, `ld = 2*kl + ku + 1` entries per column.
    ab: Vec<C64>,
    piv: Vec<usize>,
    pub pivot_ratio: f64,
}

impl BandedLu {
    pub fn factor(a: &Csr<C64>) -> Result<Self> {
        let n = a.nrows;
        assert_eq!(n, a.ncols);
        let (mut kl, mut ku) = (0usize, 0usize);
        for i in 0..n {
            let (c, _) = a.row(i);
            for &j in c {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        let ld = 2 * kl + ku + 1;
        // ab[(kl + ku + i - j) + j*ld] = a(i, j)
        let mut ab = vec![C64::new(0.0, 0.0); ld * n];
        for i in 0..n {
            let (c, v) = a.row(i);
            for (&j, &x) in c.iter().zip(v) {
                ab[(kl + ku + i - j) + j * ld] = x;
            }
        }
        let kv = ku + kl;
        let mut piv = vec![0usize; n];
        let (mut pmax, mut pmin) = (0.0f64, f64::INFINITY);
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = -1.0;
            for k in 0..=km {
                let m = ab[kv + k + j * ld].norm();
                if m > best {
                    best = m;
                    jp = k;
                }
            }
            piv[j] = j + jp;
            if best == 0.0 {
                return Err(LabError::Solver {
                    msg: format!("banded LU: singular at column {j}"),
                    condition: f64::INFINITY,
                });
            }
            pmax = pmax.max(best);
            pmin = pmin.min(best);
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let r1 = kv + j - c;
                    let r2 = kv + j + jp - c;
                    ab.swap(r1.wrapping_add(c * ld), r2 + c * ld);
                }
            }
            let d = ab[kv + j * ld];
            for k in 1..=km {
                ab[kv + k + j * ld] /= d;
            }
            for c in j + 1..=ju {
                let u = ab[kv + j - c + c * ld];
                if u.norm() == 0.0 {
                    continue;
                }
                for k in 1..=km {
                    let l = ab[kv + k + j * ld];
                    ab[kv + j + k - c + c * ld] -= l * u;
                }
            }
        }
        Ok(BandedLu { n, kl, ku, ab, piv, pivot_ratio: pmax / pmin })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let ld = 2 * kl + ku + 1;
        let kv = kl + ku;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            let xj = x[j];
            for k in 1..=km {
                x[j + k] -= self.ab[kv + k + j * ld] * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.ab[kv + j * ld];
            let xj = x[j];
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                x[i] -= self.ab[kv + i - j + j * ld] * xj;
            }
        }
        x
    }
}

/// Direct solve when the band is small enough, ILU-BiCGSTAB otherwise.
pub fn solve_general(a: &Csr<C64>, b: &[C64], tol: f64) -> Result<(Vec<C64>, SolveInfo)> {
    let n = a.nrows;
    let mut band = 0usize;
    for i in 0..n {
        let (c, _) = a.row(i);
        if let (Some(f), Some(l)) = (c.first(), c.last()) {
            band = band.max(i.abs_diff(*f)).max(i.abs_diff(*l));
        }
    }
    let direct_cost = (n as f64) * (band as f64) * (band as f64);
    if direct_cost < 4e8 {
        let lu = BandedLu::factor(a)?;
        let x = lu.solve(b);
        let res: Vec<C64> = a.mul_vec(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
        let bn = norm(b).max(1e-300);
        let rel = norm(&res) / bn;
        if rel > 1e-6 {
            return Err(LabError::Solver {
                msg: format!("banded LU residual {rel:.2e}"),
                condition: lu.pivot_ratio,
            });
        }
        return Ok((x, SolveInfo { iterations: 1, relative_residual: rel, method: "banded-lu" }));
    }
    bicgstab(a, b, tol, 20_000)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap1d(n: usize, shift: C64) -> Csr<C64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(2.0, 0.0) + shift));
            if i > 0 {
                t.push((i, i - 1, C64::new(-1.0, 0.3)));
            }
            if i + 1 < n {
                t.push((i, i + 1, C64::new(-1.0, -0.1)));
            }
        }
        Csr::from_triplets(n, n, t)
    }

    #[test]
    fn triplets_merge_duplicates() {
        let a = Csr::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 1.0)]);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.val[0], 3.0);
    }

    #[test]
    fn banded_lu_and_bicgstab_agree() {
        let a = lap1d(60, C64::new(0.1, 0.2));
        let b: Vec<C64> = (0..60).map(|i| C64::new((i as f64).sin(), 1.0)).collect();
        let lu = BandedLu::factor(&a).unwrap();
        let x1 = lu.solve(&b);
        let (x2, _) = bicgstab(&a, &b, 1e-12, 500).unwrap();
        let err: f64 = x1.iter().zip(&x2).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        let r = a.mul_vec(&x1);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-10);
        }
    }

    #[test]
    fn banded_lu_pivots() {
        // zero leading diagonal forces a row swap
        let t = vec![
            (0, 0, C64::new(0.0, 0.0)),
            (0, 1, C64::new(1.0, 0.0)),
            (1, 0, C64::new(2.0, 0.0)),
            (1, 1, C64::new(1.0, 0.0)),
            (1, 2, C64::new(1.0, 0.0)),
            (2, 1, C64::new(1.0, 0.0)),
            (2, 2, C64::new(3.0, 0.0)),
        ];
        let a = Csr::from_triplets(3, 3, t);
        let b = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0)];
        let x = BandedLu::factor(&a).unwrap().solve(&b);
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-12);
        }
    }

    #[test]
    fn min_norm_satisfies_constraints() {
        // one constraint x0 + x1 = 2 with weights (1, 3): minimizer (1.5, 0.5)
        let a = Csr::from_triplets(1, 2, vec![(0, 0, C64::new(1.0, 0.0)), (0, 1, C64::new(1.0, 0.0))]);
        let (x, _) = min_norm_solve(&a, &[1.0, 3.0], &[C64::new(2.0, 0.0)], 1e-14, 10).unwrap();
        assert!((x[0] - C64::new(1.5, 0.0)).norm() < 1e-12);
        assert!((x[1] - C64::new(0.5, 0.0)).norm() < 1e-12);
    }
}
