//! Finite samples of compact sets `K ⊂ V`.
//!
//! Fibers `V ∩ {z_1 = c}` over exact base values are solved by the
//! eigenvalue method on the finite quotient `C[z]/(I + ⟨z_1 − c⟩)`.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curve::{InfinityPoint, QMatrix};
use crate::error::{Error, Result};
use crate::exactnum::{BigRational, GaussRational};
use crate::groebner::{buchberger, GroebnerBasis, Ideal};
use crate::numeric::{dot_h, eig, weighted_lstsq, CMatrix, C64};
use crate::poly::{MultiIndex, Poly};

#[derive(Clone, Copy, Debug)]
pub struct SampleConfig {
    /// Max `|g(ζ)|` over the reduced Groebner basis of the curve.
    pub residual_tol: f64,
    /// Points closer than this (max-norm) are merged.
    pub dedup_tol: f64,
    pub eig_sep_tol: f64,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { residual_tol: 1e-10, dedup_tol: 1e-9, eig_sep_tol: 1e-7, seed: 0xf1be }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Fibers { base_values: Vec<String>, r_max: f64 },
    File(String),
    Affine { of: Box<Provenance> },
}

#[derive(Clone, Debug)]
pub struct CompactSet {
    pub points: Vec<Vec<C64>>,
    pub source: Provenance,
    pub residual_tol: f64,
}

impl CompactSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// `max_ζ |ζ_1|`.
    pub fn sup_z1(&self) -> f64 {
        self.points.iter().map(|p| p[0].norm()).fold(0.0, f64::max)
    }

    /// Serialize in the `re:im,re:im` point-file format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|z| format!("{:e}:{:e}", z.re, z.im)).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }
}

/// `max_i |g_i(ζ)|` over the Groebner basis elements.
pub fn residual(gb: &GroebnerBasis, z: &[C64]) -> f64 {
    gb.elements()
        .iter()
        .map(|g| g.eval_complex(z).map(|v| v.norm()).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

fn lex_cmp(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            match p.total_cmp(&q) {
                std::cmp::Ordering::Equal => {}
                o => return o,
            }
        }
    }
    std::cmp::Ordering::Equal
}

fn max_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Points of `V` with `z_1 = c`, sorted lexicographically.
pub fn fiber_points(ideal: &Ideal, c: &GaussRational, cfg: &SampleConfig) -> Result<Vec<Vec<C64>>> {
    let n = ideal.nvars();
    let z1c = Poly::var(n, 0).sub(&Poly::constant(n, c.clone()));
    let gb = buchberger(&ideal.with_generator(z1c)?)?;
    if gb.is_unit() {
        return Ok(vec![]);
    }
    for k in 0..n {
        if !gb.lt_exponents().iter().any(|a| a.pure_power_of() == Some(k)) {
            return Err(Error::PositiveDimensionalFiber(c.to_string()));
        }
    }
    let mut basis: Vec<MultiIndex> = Vec::new();
    for s in 0.. {
        let b = gb.quotient_basis(s);
        if b.is_empty() {
            break;
        }
        basis.extend(b);
    }
    let dim = basis.len();
    // M_j[r][c] = coefficient of basis[r] in ρ(z_j · basis[c]).
    let mut mats = Vec::with_capacity(n);
    for j in 0..n {
        let mut m = QMatrix::zeros(dim, dim);
        for (col, alpha) in basis.iter().enumerate() {
            let nf = gb.reduce(&Poly::monomial(GaussRational::one(), alpha.mul(&MultiIndex::var_pow(n, j, 1))));
            for (coef, beta) in nf.terms() {
                let row = basis.iter().position(|b| b == beta).ok_or_else(|| {
                    Error::Internal(format!("normal form term {beta} outside the quotient basis"))
                })?;
                m.rows[row][col] = coef.clone();
            }
        }
        mats.push(m.to_cmatrix()?.transpose());
    }
    // Evaluation vectors (b_k(ζ))_k are common eigenvectors of the transposes.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);
    let mut last_sep = 0.0;
    for _ in 0..6 {
        let combo = mats.iter().fold(CMatrix::zeros(dim, dim), |acc, m| {
            acc.scaled_add(C64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5)), m)
        });
        let e = eig(&combo)?;
        let sep = min_sep(&e.values);
        if dim > 1 && sep <= cfg.eig_sep_tol * combo.frobenius().max(1.0) {
            last_sep = sep;
            continue;
        }
        let mut pts: Vec<Vec<C64>> = e
            .vectors
            .iter()
            .map(|v| {
                let vv = dot_h(v, v);
                mats.iter().map(|m| dot_h(v, &m.matvec(v)) / vv).collect()
            })
            .collect();
        let cz = c.to_complex()?;
        for p in &mut pts {
            p[0] = cz;
            polish(&gb, p);
        }
        pts.sort_by(|a, b| lex_cmp(a, b));
        return Ok(pts);
    }
    Err(Error::ClusteredEigenvalues(last_sep))
}

fn min_sep(v: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.min((v[i] - v[j]).norm());
        }
    }
    best
}

/// Gauss–Newton on the fiber system with `z_1` held fixed; a step is kept
/// only if it lowers the residual.
fn polish(gb: &GroebnerBasis, p: &mut [C64]) {
    let n = p.len();
    if n < 2 {
        return;
    }
    let grads: Vec<Vec<Poly>> = gb.elements().iter().map(|g| (1..n).map(|k| derivative(g, k)).collect()).collect();
    let mut best = residual(gb, p);
    for _ in 0..4 {
        if best == 0.0 {
            return;
        }
        let rows = gb.elements().len();
        let jac = CMatrix::from_fn(rows, n - 1, |i, k| grads[i][k].eval_complex(p).unwrap_or_default());
        let f: Vec<C64> = gb.elements().iter().map(|g| -g.eval_complex(p).unwrap_or_default()).collect();
        let Ok(step) = weighted_lstsq(&jac, &f, &vec![1.0; rows]) else { return };
        let mut trial = p.to_vec();
        for k in 1..n {
            trial[k] += step[k - 1];
        }
        let r = residual(gb, &trial);
        if r >= best {
            return;
        }
        best = r;
        p.copy_from_slice(&trial);
    }
}

fn derivative(g: &Poly, k: usize) -> Poly {
    let terms = g
        .terms()
        .iter()
        .filter(|(_, a)| a.exponents()[k] > 0)
        .map(|(c, a)| {
            let mut e = a.exponents().to_vec();
            let f = GaussRational::from_integer(e[k] as i64);
            e[k] -= 1;
            (c * &f, MultiIndex(e))
        })
        .collect();
    Poly::from_terms(g.nvars(), terms)
}

/// `r((1 − t²) + 2ti)/(1 + t²)`, exactly on `|c| = r`.
pub fn circle_point(t: &BigRational, r: &BigRational) -> GaussRational {
    let one = BigRational::from_integer(BigInt::from(1));
    let t2 = t * t;
    let den = &one + &t2;
    let two_t = t + t;
    GaussRational::new(r * (&one - &t2) / &den, r * two_t / den)
}

/// `m` base values on `|c| = r` at half-offset uniform angles
/// `θ_k = 2π(k + 1/2)/m`. Angles are rationalized through
/// `t = tan(θ/2)` rounded to a dyadic rational; on the left half-plane the
/// point is `−circle_point(tan((θ − π)/2))` so `t` stays in `[-1, 1]`.
pub fn rational_circle(m: usize, r: &BigRational) -> Vec<GaussRational> {
    (0..m)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
            if theta.cos() >= 0.0 {
                circle_point(&dyadic((theta / 2.0).tan(), 40), r)
            } else {
                let p = circle_point(&dyadic(((theta - std::f64::consts::PI) / 2.0).tan(), 40), r);
                GaussRational::new(-p.re, -p.im)
            }
        })
        .collect()
}

/// Union of fibers over `base_values`, filtered to `max_i |ζ_i| <= r_max`,
/// deduplicated and validated. Fibers are solved in parallel and merged in
/// input order.
pub fn build_set(ideal: &Ideal, base_values: &[GaussRational], r_max: f64, cfg: &SampleConfig) -> Result<CompactSet> {
    let gb = buchberger(ideal)?;
    let fibers: Vec<Result<Vec<Vec<C64>>>> =
        base_values.par_iter().map(|c| fiber_points(ideal, c, cfg)).collect();
    let mut points: Vec<Vec<C64>> = Vec::new();
    for fiber in fibers {
        for p in fiber? {
            if p.iter().map(|z| z.norm()).fold(0.0, f64::max) > r_max {
                continue;
            }
            if points.iter().any(|q| max_dist(q, &p) <= cfg.dedup_tol) {
                continue;
            }
            points.push(p);
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    validate(&gb, &points, cfg.residual_tol)?;
    Ok(CompactSet {
        points,
        source: Provenance::Fibers { base_values: base_values.iter().map(|c| c.to_string()).collect(), r_max },
        residual_tol: cfg.residual_tol,
    })
}

fn validate(gb: &GroebnerBasis, points: &[Vec<C64>], tol: f64) -> Result<()> {
    let bad: Vec<String> = points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let r = residual(gb, p);
            (r.is_nan() || r > tol).then(|| format!("row {}: residual {r:.3e}", i + 1))
        })
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::ResidualViolation(bad.join(", ")))
    }
}

/// `T(z) = A z + b` with exact invertible `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub matrix: Vec<Vec<GaussRational>>,
    pub shift: Vec<GaussRational>,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<GaussRational>>, shift: Vec<GaussRational>) -> Result<Self> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) || shift.len() != n {
            return Err(Error::Input("affine map needs a square matrix and matching shift".into()));
        }
        let t = AffineMap { matrix, shift };
        t.inverse_matrix()?;
        Ok(t)
    }

    pub fn identity(n: usize) -> Self {
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| GaussRational::from_integer((i == j) as i64)).collect())
            .collect();
        AffineMap { matrix, shift: vec![GaussRational::zero(); n] }
    }

    pub fn scaling(n: usize, s: GaussRational) -> Self {
        let mut t = AffineMap::identity(n);
        for (i, row) in t.matrix.iter_mut().enumerate() {
            row[i] = s.clone();
        }
        t
    }

    pub fn nvars(&self) -> usize {
        self.matrix.len()
    }

    /// Exact Gauss–Jordan inverse of the linear part.
    pub fn inverse_matrix(&self) -> Result<Vec<Vec<GaussRational>>> {
        let n = self.nvars();
        let mut a: Vec<Vec<GaussRational>> = self
            .matrix
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = r.clone();
                row.extend((0..n).map(|j| GaussRational::from_integer((i == j) as i64)));
                row
            })
            .collect();
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or_else(|| Error::Input("affine matrix is singular".into()))?;
            a.swap(col, piv);
            let inv = a[col][col].inv()?;
            a[col] = a[col].iter().map(|x| x * &inv).collect();
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    let pivot_row = a[col].clone();
                    for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                        *x -= &(&f * p);
                    }
                }
            }
        }
        Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
    }

    pub fn apply(&self, z: &[C64]) -> Result<Vec<C64>> {
        let mut out = Vec::with_capacity(z.len());
        for (row, b) in self.matrix.iter().zip(&self.shift) {
            let mut acc = b.to_complex()?;
            for (a, x) in row.iter().zip(z) {
                acc += a.to_complex()? * x;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// First row of the linear part applied to a direction `(1, η_2, …)`.
    pub fn t1_linear(&self, w: &[C64]) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for (a, x) in self.matrix[0].iter().zip(w) {
            acc += a.to_complex()? * x;
        }
        Ok(acc)
    }

    /// `T_1(η_j)` for each direction; errors if any vanishes.
    pub fn check_admissible(&self, directions: &[InfinityPoint], tol: f64) -> Result<Vec<C64>> {
        let mut out = Vec::with_capacity(directions.len());
        for (j, p) in directions.iter().enumerate() {
            let v = self.t1_linear(&p.coords)?;
            let scale = p.coords.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if v.norm() <= tol * scale {
                return Err(Error::T1Vanishes(j));
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Image direction `T(η)` normalized to first coordinate 1.
    pub fn map_direction(&self, w: &[C64]) -> Result<Vec<C64>> {
        let t1 = self.t1_linear(w)?;
        let mut out = Vec::with_capacity(w.len());
        for row in &self.matrix {
            let mut acc = C64::new(0.0, 0.0);
            for (a, x) in row.iter().zip(w) {
                acc += a.to_complex()? * x;
            }
            out.push(acc / t1);
        }
        Ok(out)
    }

    /// Generators of `T(V)`: `g ∘ T^{-1}`, made monic.
    pub fn transform_ideal(&self, ideal: &Ideal) -> Result<Ideal> {
        let n = self.nvars();
        if ideal.nvars() != n {
            return Err(Error::LengthMismatch { expected: n, got: ideal.nvars() });
        }
        let inv = self.inverse_matrix()?;
        // z_k = Σ_l inv[k][l] (w_l − b_l)
        let images: Vec<Poly> = inv
            .iter()
            .map(|row| {
                row.iter().enumerate().fold(Poly::zero(n), |acc, (l, a)| {
                    let wl = Poly::var(n, l).sub(&Poly::constant(n, self.shift[l].clone()));
                    acc.add(&wl.scale(a))
                })
            })
            .collect();
        let gens = ideal
            .generators()
            .iter()
            .map(|g| g.compose(&images)?.monic())
            .collect::<Result<Vec<_>>>()?;
        Ideal::new(n, gens)
    }
}

/// Transformed ideal and point set, in bijection with the input points.
pub fn apply_affine(t: &AffineMap, k: &CompactSet, ideal: &Ideal) -> Result<(Ideal, CompactSet)> {
    let image = t.transform_ideal(ideal)?;
    let gb = buchberger(&image)?;
    let points = k.points.iter().map(|p| t.apply(p)).collect::<Result<Vec<_>>>()?;
    validate(&gb, &points, k.residual_tol)?;
    let set = CompactSet {
        points,
        source: Provenance::Affine { of: Box::new(k.source.clone()) },
        residual_tol: k.residual_tol,
    };
    Ok((image, set))
}

/// Parse a point file: one point per line, `re:im` per coordinate separated
/// by commas; `#` starts a comment.
pub fn parse_points(text: &str, nvars: usize) -> Result<Vec<Vec<C64>>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
        let coords = line
            .split(',')
            .map(|f| {
                let (re, im) = f.trim().split_once(':').ok_or_else(|| bad("expected re:im"))?;
                let re: f64 = re.trim().parse().map_err(|_| bad("bad real part"))?;
                let im: f64 = im.trim().parse().map_err(|_| bad("bad imaginary part"))?;
                if !(re.is_finite() && im.is_finite()) {
                    return Err(bad("non-finite coordinate"));
                }
                Ok(C64::new(re, im))
            })
            .collect::<Result<Vec<_>>>()?;
        if coords.len() != nvars {
            return Err(bad(&format!("expected {nvars} coordinates, got {}", coords.len())));
        }
        out.push(coords);
    }
    Ok(out)
}

pub fn load_points(path: &Path, ideal: &Ideal, cfg: &SampleConfig) -> Result<CompactSet> {
    let text = std::fs::read_to_string(path)?;
    let points = parse_points(&text, ideal.nvars())?;
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    for i in 0..points.len() {
        for j in 0..i {
            if max_dist(&points[i], &points[j]) <= cfg.dedup_tol {
                return Err(Error::Input(format!("rows {} and {} coincide", j + 1, i + 1)));
            }
        }
    }
    validate(&buchberger(ideal)?, &points, cfg.residual_tol)?;
    Ok(CompactSet { points, source: Provenance::File(path.display().to_string()), residual_tol: cfg.residual_tol })
}

/// Nearest rational with denominator `2^bits`.
pub fn dyadic(x: f64, bits: u32) -> BigRational {
    let num = BigInt::from((x * (1u64 << bits) as f64).round() as i64);
    BigRational::new(num, BigInt::from(1u64) << bits)
}
