//! Independent oracles shared by the integration tests: coefficient-grid
//! search with an ellipsoid polish for discrete complex minimax, and
//! exhaustive Vandermonde maximization.

#![allow(dead_code)]

use curvecap_core::exactnum::BigRational;
use curvecap_core::sampler::{build_set, rational_circle};
use curvecap_core::{CompactSet, Ideal, SampleConfig, C64};
use nalgebra::{DMatrix, SymmetricEigen};

pub fn line() -> Ideal {
    Ideal::parse(2, &["z2 - z1"]).unwrap()
}

pub fn hyperbola() -> Ideal {
    Ideal::parse(2, &["z2^2 - z1^2 - 1"]).unwrap()
}

pub fn worked_example() -> Ideal {
    Ideal::parse(3, &["z2^2 + z3^2 - z1^2 - 1", "z3^2 + z2*z3 - 2*z2^2 + z1*z3 - z1*z2 + 1"]).unwrap()
}

/// Fibers over `m` exact points of the circle of radius `r`.
pub fn circle_fibers(ideal: &Ideal, m: usize, r: i64) -> CompactSet {
    build_set(ideal, &rational_circle(m, &BigRational::from_integer(r.into())), 1e3, &SampleConfig::default()).unwrap()
}

#[derive(Clone, Debug)]
pub struct Oracle {
    /// Best objective value found.
    pub value: f64,
    /// Certified lower bound on the true minimum.
    pub lower: f64,
    pub coeffs: Vec<C64>,
}

/// `x ∈ R^{2k}` holds `(Re c_j, Im c_j)` pairs.
fn to_complex(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
}

fn objective(target: &[C64], cols: &[Vec<C64>], x: &[f64]) -> (f64, Vec<f64>) {
    let c = to_complex(x);
    let mut best = (-1.0, 0usize, C64::new(0.0, 0.0));
    for (i, t) in target.iter().enumerate() {
        let r = cols.iter().zip(&c).fold(*t, |acc, (col, cj)| acc + col[i] * cj);
        if r.norm() > best.0 {
            best = (r.norm(), i, r);
        }
    }
    let (f, i, r) = best;
    let mut g = vec![0.0; x.len()];
    if f > 0.0 {
        for (j, col) in cols.iter().enumerate() {
            let w = r.conj() * col[i];
            g[2 * j] = w.re / f;
            g[2 * j + 1] = -w.im / f;
        }
    }
    (f, g)
}

/// Radius of a ball around the origin containing every minimizer:
/// `‖Bc*‖_∞ ≤ 2‖t‖_∞` and `‖c‖ ≤ ‖Bc‖_2 / σ_min(B)`.
fn coefficient_radius(target: &[C64], cols: &[Vec<C64>]) -> f64 {
    let n = 2 * cols.len();
    let real_col = |a: usize| -> Vec<C64> {
        let unit = if a.is_multiple_of(2) { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
        cols[a / 2].iter().map(|v| v * unit).collect()
    };
    let rc: Vec<Vec<C64>> = (0..n).map(real_col).collect();
    let gram = DMatrix::from_fn(n, n, |a, b| rc[a].iter().zip(&rc[b]).map(|(u, v)| (u.conj() * v).re).sum::<f64>());
    let lmin = SymmetricEigen::new(gram).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(lmin > 0.0, "oracle needs linearly independent columns");
    let tmax = target.iter().map(|t| t.norm()).fold(0.0, f64::max);
    1.01 * 2.0 * (target.len() as f64).sqrt() * tmax / lmin.sqrt()
}

/// `min_c max_i |t_i + Σ_j c_j B_ij|`. For `k ≤ 2` a uniform grid over the
/// coefficient ball seeds the search; the central-cut ellipsoid method then
/// shrinks a ball known to contain the minimizer.
pub fn minimax_oracle(target: &[C64], cols: &[Vec<C64>]) -> Oracle {
    let k = cols.len();
    if k == 0 {
        let v = target.iter().map(|t| t.norm()).fold(0.0, f64::max);
        return Oracle { value: v, lower: v, coeffs: vec![] };
    }
    let n = 2 * k;
    let radius = coefficient_radius(target, cols);
    let mut x = vec![0.0; n];
    let mut reach = radius;
    if k <= 2 {
        let steps = 17usize;
        let h = 2.0 * radius / (steps - 1) as f64;
        let mut best = f64::INFINITY;
        let mut idx = vec![0usize; n];
        loop {
            let p: Vec<f64> = idx.iter().map(|&i| -radius + h * i as f64).collect();
            let (f, _) = objective(target, cols, &p);
            if f < best {
                best = f;
                x = p;
            }
            let mut a = 0;
            while a < n && idx[a] == steps - 1 {
                idx[a] = 0;
                a += 1;
            }
            if a == n {
                break;
            }
            idx[a] += 1;
        }
        reach = radius + x.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    let mut p = DMatrix::<f64>::identity(n, n) * (reach * reach);
    let mut best = (f64::INFINITY, x.clone());
    let mut lower = 0.0f64;
    let nf = n as f64;
    for _ in 0..400_000 {
        let (f, g) = objective(target, cols, &x);
        if f < best.0 {
            best = (f, x.clone());
        }
        let gv = nalgebra::DVector::from_vec(g);
        let pg = &p * &gv;
        let width = gv.dot(&pg).max(0.0).sqrt();
        lower = lower.max(f - width);
        if width == 0.0 || best.0 - lower <= 1e-13 * best.0.max(1e-300) {
            break;
        }
        let step = &pg / width;
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi -= si / (nf + 1.0);
        }
        p = (&p - (&step * step.transpose()) * (2.0 / (nf + 1.0))) * (nf * nf / (nf * nf - 1.0));
    }
    Oracle { value: best.0, lower: lower.min(best.0), coeffs: to_complex(&best.1) }
}

/// `log|det|` by Gaussian elimination with partial pivoting; `-∞` if singular.
pub fn log_abs_det(mut a: Vec<Vec<C64>>) -> f64 {
    let m = a.len();
    let mut acc = 0.0;
    for c in 0..m {
        let p = (c..m).max_by(|&x, &y| a[x][c].norm().total_cmp(&a[y][c].norm())).unwrap();
        if a[p][c].norm() == 0.0 {
            return f64::NEG_INFINITY;
        }
        a.swap(c, p);
        acc += a[c][c].norm().ln();
        for r in c + 1..m {
            let f = a[r][c] / a[c][c];
            for cc in c..m {
                let v = a[c][cc];
                a[r][cc] -= f * v;
            }
        }
    }
    acc
}

/// `max log|det E[S, ..m]|` over all `m`-subsets `S` of the rows of `e`.
pub fn exhaustive_log_van(e: &[Vec<C64>], m: usize) -> f64 {
    fn go(e: &[Vec<C64>], m: usize, start: usize, pick: &mut Vec<usize>, best: &mut f64) {
        if pick.len() == m {
            let rows = pick.iter().map(|&i| e[i][..m].to_vec()).collect();
            *best = best.max(log_abs_det(rows));
            return;
        }
        for i in start..=e.len() - (m - pick.len()) {
            pick.push(i);
            go(e, m, i + 1, pick, best);
            pick.pop();
        }
    }
    let mut best = f64::NEG_INFINITY;
    go(e, m, 0, &mut Vec::with_capacity(m), &mut best);
    best
}

/// Rows of a column-major evaluation: `rows[i][j] = cols[j][i]`.
pub fn rows_of(cols: &[Vec<C64>]) -> Vec<Vec<C64>> {
    (0..cols[0].len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}
