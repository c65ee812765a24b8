//! Dense complex linear algebra: eigenpairs, weighted least squares and
//! log-magnitude determinants.
//!
//! QR and LU factorizations come from `nalgebra`; the eigensolver (Householder
//! Hessenberg reduction, Wilkinson-shifted complex QR, triangular
//! back-substitution) is local so its residual contract can be enforced.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch { expected: rows * cols, got: data.len() });
        }
        if let Some(i) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Input(format!("non-finite matrix entry at ({}, {})", i / cols, i % cols)));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        CMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<C64> = rows.iter().flatten().copied().collect();
        CMatrix::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn scaled_add(&self, alpha: C64, other: &CMatrix) -> CMatrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + alpha * b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    fn to_na(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn from_na(m: &DMatrix<C64>) -> CMatrix {
        CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `v^H w`.
pub fn dot_h(v: &[C64], w: &[C64]) -> C64 {
    v.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors, `vectors[k]` pairs with `values[k]`.
    pub vectors: Vec<Vec<C64>>,
    /// `‖A v − λ v‖` per pair.
    pub residuals: Vec<f64>,
}

/// Residual bound every returned pair satisfies.
pub fn eig_residual_bound(a: &CMatrix) -> f64 {
    1e-10 * a.frobenius().max(f64::MIN_POSITIVE) * a.rows() as f64
}

pub fn eig(a: &CMatrix) -> Result<Eigen> {
    if !a.is_square() {
        return Err(Error::Input("eig needs a square matrix".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: vec![], residuals: vec![] });
    }
    let (mut t, mut q) = hessenberg(a);
    schur_qr(&mut t, &mut q)?;
    let bound = eig_residual_bound(a);
    let scale = a.frobenius().max(1.0);
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let y = triangular_eigvec(&t, k, scale);
        let mut v = q.matvec(&y);
        normalize(&mut v);
        let mut r = residual(a, lambda, &v);
        if r > bound {
            // Near-defective eigenvalue: polish with inverse iteration.
            for _ in 0..3 {
                let shifted = a.scaled_add(-lambda - C64::new(1e-13 * scale, 0.0), &CMatrix::identity(n));
                let Some(w) = solve_vec(&shifted, &v) else { break };
                v = w;
                normalize(&mut v);
                r = residual(a, lambda, &v);
                if r <= bound {
                    break;
                }
            }
        }
        if r > bound {
            return Err(Error::NonConvergence(k));
        }
        values.push(lambda);
        vectors.push(v);
        residuals.push(r);
    }
    Ok(Eigen { values, vectors, residuals })
}

fn normalize(v: &mut [C64]) {
    let nv = vec_norm(v);
    if nv > 0.0 {
        v.iter_mut().for_each(|z| *z /= nv);
    }
}

fn residual(a: &CMatrix, lambda: C64, v: &[C64]) -> f64 {
    let av = a.matvec(v);
    av.iter().zip(v).map(|(x, y)| (x - lambda * y).norm_sqr()).sum::<f64>().sqrt()
}

/// Householder reduction `A = Q H Q^H` with `H` upper Hessenberg.
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xn = vec_norm(&x);
        if xn == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let mut v = x.clone();
        v[0] += phase * xn;
        normalize(&mut v);
        // H <- P H with P = I - 2 v v^H acting on rows k+1..n.
        for j in 0..n {
            let s: C64 = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..v.len() {
                h[(k + 1 + i, j)] -= 2.0 * v[i] * s;
            }
        }
        // H <- H P, Q <- Q P on columns k+1..n.
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let s: C64 = (0..v.len()).map(|j| m[(i, k + 1 + j)] * v[j]).sum();
                for j in 0..v.len() {
                    m[(i, k + 1 + j)] -= 2.0 * s * v[j].conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Unitary `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

/// Reduce Hessenberg `h` to upper-triangular Schur form in place,
/// accumulating the unitary similarity into `q`.
fn schur_qr(h: &mut CMatrix, q: &mut CMatrix) -> Result<()> {
    let n = h.rows();
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iters = 0usize;
    let mut since_deflation = 0usize;
    let budget = 100 * n.max(4);
    while hi > 0 {
        // Locate the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= eps * diag.max(f64::MIN_POSITIVE) || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        iters += 1;
        since_deflation += 1;
        if iters > budget {
            return Err(Error::NonConvergence(iters));
        }
        let mu = if since_deflation % 11 == 10 {
            // Exceptional shift breaks symmetric stalls.
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = c * x + s * y;
                h[(k + 1, j)] = -s.conj() * x + c * y;
            }
            h[(k + 1, k)] = ZERO;
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            for i in 0..=(k + 2).min(hi) {
                let (x, y) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let (x, y) = (q[(i, k)], q[(i, k + 1)]);
                q[(i, k)] = x * c + y * s.conj();
                q[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = ZERO;
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = (tr + disc) / 2.0;
    let l2 = (tr - disc) / 2.0;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Solve `(T − t_kk I) y = 0` with `y_k = 1`, `y_i = 0` for `i > k`.
fn triangular_eigvec(t: &CMatrix, k: usize, scale: f64) -> Vec<C64> {
    let n = t.rows();
    let lambda = t[(k, k)];
    let tiny = f64::EPSILON * scale;
    let mut y = vec![ZERO; n];
    y[k] = ONE;
    for i in (0..k).rev() {
        let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
        let mut den = t[(i, i)] - lambda;
        if den.norm() < tiny {
            den = C64::new(tiny, 0.0);
        }
        y[i] = -s / den;
    }
    y
}

/// `x` with `A x = b`, or `None` when `A` is exactly singular.
pub fn solve_vec(a: &CMatrix, b: &[C64]) -> Option<Vec<C64>> {
    let lu = a.to_na().lu();
    let rhs = nalgebra::DVector::from_column_slice(b);
    lu.solve(&rhs).map(|x| x.iter().copied().collect())
}

/// `X` with `A X = B`, or `None` when `A` is exactly singular.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    a.to_na().lu().solve(&b.to_na()).map(|x| CMatrix::from_na(&x))
}

/// Minimize `Σ w_i |b_i − (A c)_i|²` by Householder QR of `√W A`.
pub fn weighted_lstsq(a: &CMatrix, b: &[C64], w: &[f64]) -> Result<Vec<C64>> {
    let (m, k) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: b.len() });
    }
    if w.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: w.len() });
    }
    if m < k {
        return Err(Error::Input(format!("least squares needs rows >= cols, got {m} < {k}")));
    }
    if k == 0 {
        return Ok(vec![]);
    }
    let sw: Vec<f64> = w.iter().map(|x| x.max(0.0).sqrt()).collect();
    let mut sa = DMatrix::from_fn(m, k, |i, j| a[(i, j)] * sw[i]);
    let mut sb = nalgebra::DVector::from_fn(m, |i, _| b[i] * sw[i]);
    let col_norms: Vec<f64> = (0..k).map(|j| sa.column(j).norm()).collect();
    let qr = std::mem::replace(&mut sa, DMatrix::zeros(0, 0)).qr();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)].norm() <= 1e-12 * col_norms[j] || col_norms[j] == 0.0 {
            return Err(Error::RankDeficient { column: j });
        }
    }
    qr.q_tr_mul(&mut sb);
    let rhs = sb.rows(0, k).into_owned();
    let c = r
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficient { column: k - 1 })?;
    Ok(c.iter().copied().collect())
}

/// `log|det A|` and the phase `det A / |det A|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: C64,
    pub zero: bool,
}

impl LogDet {
    pub fn is_zero(&self) -> bool {
        self.zero
    }
}

pub fn logdet(a: &CMatrix) -> Result<LogDet> {
    if !a.is_square() {
        return Err(Error::Input("logdet needs a square matrix".into()));
    }
    if a.rows() == 0 {
        return Ok(LogDet { log_abs: 0.0, phase: ONE, zero: false });
    }
    let lu = a.to_na().lu();
    let u = lu.u();
    let mut log_abs = 0.0;
    let mut phase: C64 = lu.p().determinant();
    for i in 0..u.nrows() {
        let p = u[(i, i)];
        let m = p.norm();
        if m == 0.0 {
            return Ok(LogDet { log_abs: f64::NEG_INFINITY, phase: ZERO, zero: true });
        }
        log_abs += m.ln();
        phase *= p / m;
    }
    Ok(LogDet { log_abs, phase: phase / phase.norm(), zero: false })
}
