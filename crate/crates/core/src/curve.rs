//! The graded coordinate ring of a curve: multiplication matrices `[[z_j]]`,
//! points at infinity, eigenvector and directional polynomials, and the
//! C-basis of `C[V]_{<=n}`.
//!
//! Variable indices in this module's public API are 1-based (`z_1..z_N`).

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exactnum::GaussRational;
use crate::groebner::{buchberger, GroebnerBasis, HilbertData, Ideal};
use crate::numeric::{dot_h, eig, vec_norm, CMatrix, C64};
use crate::poly::{MultiIndex, Poly};

/// Tolerances and seed for the floating-point eigen analysis.
#[derive(Clone, Copy, Debug)]
pub struct CurveConfig {
    /// Relative residual allowed for `[[z_j]] v = λ_j v`.
    pub eigen_tol: f64,
    /// Minimum separation of eigenvalues treated as simple.
    pub eig_sep_tol: f64,
    /// Below this an eigenvector polynomial counts as vanishing at `λ`.
    pub vanish_tol: f64,
    pub seed: u64,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig { eigen_tol: 1e-9, eig_sep_tol: 1e-7, vanish_tol: 1e-8, seed: 0x5eed }
    }
}

/// Dense exact matrix over `Q(i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    pub rows: Vec<Vec<GaussRational>>,
}

impl QMatrix {
    pub fn zeros(n: usize, m: usize) -> Self {
        QMatrix { rows: vec![vec![GaussRational::zero(); m]; n] }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, r)| {
            r.iter().enumerate().all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
        })
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        let (n, k, m) = (self.nrows(), self.ncols(), other.ncols());
        let mut out = QMatrix::zeros(n, m);
        for i in 0..n {
            for l in 0..k {
                if self.rows[i][l].is_zero() {
                    continue;
                }
                for j in 0..m {
                    let t = &self.rows[i][l] * &other.rows[l][j];
                    out.rows[i][j] += &t;
                }
            }
        }
        out
    }

    pub fn lin_comb(terms: &[(GaussRational, &QMatrix)]) -> QMatrix {
        let (n, m) = (terms[0].1.nrows(), terms[0].1.ncols());
        let mut out = QMatrix::zeros(n, m);
        for (c, q) in terms {
            for i in 0..n {
                for j in 0..m {
                    let t = c * &q.rows[i][j];
                    out.rows[i][j] += &t;
                }
            }
        }
        out
    }

    pub fn to_cmatrix(&self) -> Result<CMatrix> {
        let data = self.rows.iter().flatten().map(GaussRational::to_complex).collect::<Result<Vec<_>>>()?;
        CMatrix::new(self.nrows(), self.ncols(), data)
    }
}

/// `C[V]` realized through a reduced Groebner basis, with the stabilized
/// graded dimension `d` and the degree `n0` from which every graded piece has
/// dimension `d`. When the curve meets the hypotheses,
/// `hom_basis(n + 1) = z_1 · hom_basis(n)` for `n >= n0`.
#[derive(Clone, Debug)]
pub struct CurveRing {
    ideal: Ideal,
    gb: GroebnerBasis,
    hilbert: HilbertData,
    d: usize,
    n0: u32,
    z1_stable: bool,
    base: Vec<MultiIndex>,
}

impl CurveRing {
    pub fn build(ideal: &Ideal, s_max: u32) -> Result<Self> {
        let gb = buchberger(ideal)?;
        if gb.is_unit() {
            return Err(Error::EmptyVariety);
        }
        let hilbert = gb.hilbert_data(s_max)?;
        let d = hilbert.d;
        let n = gb.nvars();
        let incs = &hilbert.increments;
        let mut n0 = s_max;
        while n0 > 0 && incs[n0 as usize - 1] == d {
            n0 -= 1;
        }
        let z1 = MultiIndex::var_pow(n, 0, 1);
        let z1_stable = (n0..s_max).all(|s| {
            let next: Vec<MultiIndex> = gb.quotient_basis(s).iter().map(|a| a.mul(&z1)).collect();
            next == gb.quotient_basis(s + 1)
        });
        let base = gb.quotient_basis(n0);
        Ok(CurveRing { ideal: ideal.clone(), gb, hilbert, d, n0, z1_stable, base })
    }

    pub fn ideal(&self) -> &Ideal {
        &self.ideal
    }

    pub fn groebner(&self) -> &GroebnerBasis {
        &self.gb
    }

    pub fn hilbert(&self) -> &HilbertData {
        &self.hilbert
    }

    pub fn nvars(&self) -> usize {
        self.gb.nvars()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n0(&self) -> u32 {
        self.n0
    }

    /// Degree of the eigenvector and directional polynomials: the smallest
    /// positive degree from which the graded pieces have stable shape.
    pub fn a(&self) -> u32 {
        self.n0.max(1)
    }

    /// Standard monomials of degree exactly `n`, ascending.
    pub fn hom_basis(&self, n: u32) -> Vec<MultiIndex> {
        if n >= self.n0 && self.z1_stable {
            let shift = MultiIndex::var_pow(self.nvars(), 0, n - self.n0);
            self.base.iter().map(|a| a.mul(&shift)).collect()
        } else {
            self.gb.quotient_basis(n)
        }
    }

    pub fn star(&self, p: &Poly, q: &Poly) -> Poly {
        self.gb.reduce(&p.mul(q))
    }

    /// Top-degree part of `p ∗ q`, or zero when the degree drops.
    pub fn hat_star(&self, p: &Poly, q: &Poly) -> Poly {
        let (Some(dp), Some(dq)) = (p.degree(), q.degree()) else {
            return Poly::zero(self.nvars());
        };
        self.star(p, q).homogeneous_part(dp + dq)
    }

    /// Matrix of `q ↦ p ĥ∗ q` from `C[V]_{=n}` to `C[V]_{=n+deg p}`, `n >= n0`,
    /// for homogeneous `p`.
    pub fn hat_star_matrix(&self, p: &Poly, n: u32) -> Result<QMatrix> {
        if !p.is_homogeneous() || p.is_zero() {
            return Err(Error::Input("hat-star matrix needs a nonzero homogeneous polynomial".into()));
        }
        if n < self.n0 {
            return Err(Error::Input(format!("degree {n} below the stable degree {}", self.n0)));
        }
        let dp = p.degree().unwrap_or(0);
        let cols = self.hom_basis(n);
        let rows = self.hom_basis(n + dp);
        let mut m = QMatrix::zeros(self.d, self.d);
        for (c, alpha) in cols.iter().enumerate() {
            let e = Poly::monomial(GaussRational::one(), alpha.clone());
            let top = self.star(p, &e).homogeneous_part(n + dp);
            for (coef, beta) in top.terms() {
                let r = rows.iter().position(|b| b == beta).ok_or_else(|| {
                    Error::Internal(format!("normal form term {beta} outside the graded basis"))
                })?;
                m.rows[r][c] = coef.clone();
            }
        }
        Ok(m)
    }

    /// `[[z_j]]` (1-based `j`), computed at degrees `a` and `a + 1`, which must agree.
    pub fn mul_matrix(&self, j: usize) -> Result<QMatrix> {
        let n = self.nvars();
        if j == 0 || j > n {
            return Err(Error::Input(format!("variable index {j} outside 1..={n}")));
        }
        let zj = Poly::var(n, j - 1);
        let a = self.a();
        let m = self.hat_star_matrix(&zj, a)?;
        if self.hat_star_matrix(&zj, a + 1)? != m {
            return Err(Error::Internal(format!("[[z{j}]] depends on the degree")));
        }
        Ok(m)
    }

    pub fn mul_matrices(&self) -> Result<Vec<QMatrix>> {
        (1..=self.nvars()).map(|j| self.mul_matrix(j)).collect()
    }
}

/// Outcome of the structural hypothesis checks; every flag must hold before
/// any Chebyshev or Fekete computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypothesisReport {
    /// Pure `z_k` powers lie in the LT ideal for `k >= 2`, never for `k = 1`.
    pub lt_pure_powers: bool,
    pub z1_identity: bool,
    /// Eigenvalues of each `[[z_j]]`, `j >= 2`, pairwise separated.
    pub simple_eigenvalues: bool,
    /// Infinity points differ in every coordinate `j >= 2`.
    pub distinct_coordinates: bool,
    pub messages: Vec<String>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.lt_pure_powers && self.z1_identity && self.simple_eigenvalues && self.distinct_coordinates
    }

    pub fn require(&self) -> Result<()> {
        if self.all_pass() {
            Ok(())
        } else {
            Err(Error::HypothesisViolation(self.messages.join("; ")))
        }
    }
}

/// Homogeneous form `Σ c_k z^{α_k}` over a graded basis, with complex coefficients.
#[derive(Clone, Debug)]
pub struct HomogeneousForm {
    pub degree: u32,
    pub basis: Vec<MultiIndex>,
    pub coeffs: Vec<C64>,
}

impl HomogeneousForm {
    pub fn eval(&self, z: &[C64]) -> C64 {
        self.basis
            .iter()
            .zip(&self.coeffs)
            .map(|(a, c)| c * monomial_value(a, z))
            .sum()
    }
}

pub fn monomial_value(a: &MultiIndex, z: &[C64]) -> C64 {
    a.exponents()
        .iter()
        .zip(z)
        .filter(|(e, _)| **e > 0)
        .map(|(e, x)| x.powi(*e as i32))
        .product()
}

/// A direction `[0:1:λ_2:⋯:λ_N]` on the hyperplane at infinity.
#[derive(Clone, Debug)]
pub struct InfinityPoint {
    /// `(1, λ_2, …, λ_N)`.
    pub coords: Vec<C64>,
    /// Shared unit eigenvector of all `[[z_j]]` over `hom_basis(a)`.
    pub eigvec: Vec<C64>,
    /// `‖[[z_j]] v − λ_j v‖` for `j = 1..N`.
    pub residuals: Vec<f64>,
}

/// `v_λ` at degree `a`: value 1 at `λ`, zero at the other directions.
#[derive(Clone, Debug)]
pub struct DirectionalPoly {
    pub lambda: InfinityPoint,
    pub form: HomogeneousForm,
    /// Distance of the normalized hat-star product from the normalized
    /// shared eigenvector, a consistency diagnostic.
    pub eigvec_deviation: f64,
}

impl DirectionalPoly {
    pub fn a(&self) -> u32 {
        self.form.degree
    }

    /// `v_λ(ζ)`.
    pub fn eval(&self, z: &[C64]) -> C64 {
        self.form.eval(z)
    }

    /// `v_{λ,s}(ζ) = ζ_1^{s−a} v_λ(ζ)`.
    pub fn eval_s(&self, z: &[C64], s: u32) -> C64 {
        debug_assert!(s >= self.a());
        z[0].powi((s - self.a()) as i32) * self.eval(z)
    }

    /// `z_1^pad v_λ` as a form of degree `a + pad`.
    pub fn padded(&self, pad: u32) -> DirectionalPoly {
        let n = self.lambda.coords.len();
        let shift = MultiIndex::var_pow(n, 0, pad);
        let mut out = self.clone();
        out.form.degree += pad;
        out.form.basis = self.form.basis.iter().map(|m| m.mul(&shift)).collect();
        out
    }
}

/// Everything downstream modules need about a curve.
#[derive(Clone, Debug)]
pub struct Curve {
    pub ring: CurveRing,
    pub matrices: Vec<QMatrix>,
    pub hypotheses: HypothesisReport,
    pub directions: Vec<DirectionalPoly>,
    pub config: CurveConfig,
}

impl Curve {
    /// Build the ring, check hypotheses, and compute directions; fails with a
    /// hypothesis violation if any check fails.
    pub fn analyze(ideal: &Ideal, s_max: u32, config: CurveConfig) -> Result<Self> {
        let ring = CurveRing::build(ideal, s_max)?;
        let matrices = ring.mul_matrices()?;
        let (hypotheses, points) = check_hypotheses(&ring, &matrices, &config);
        hypotheses.require()?;
        let points = points?;
        let directions = points
            .into_iter()
            .map(|p| directional_poly(&ring, &matrices, p, &config))
            .collect::<Result<Vec<_>>>()?;
        Ok(Curve { ring, matrices, hypotheses, directions, config })
    }

    pub fn nvars(&self) -> usize {
        self.ring.nvars()
    }

    pub fn d(&self) -> usize {
        self.ring.d()
    }

    pub fn a(&self) -> u32 {
        self.ring.a()
    }

    pub fn c_basis(&self) -> CBasis {
        CBasis::new(&self.ring, &self.directions)
    }

    /// `C`-basis built on `z_1^pad v_λ`: blocks start at degree `a + pad`
    /// and all standard monomials below that degree come first.
    pub fn c_basis_padded(&self, pad: u32) -> CBasis {
        let dirs: Vec<DirectionalPoly> = self.directions.iter().map(|v| v.padded(pad)).collect();
        let a = self.a() + pad;
        let low = (0..a).flat_map(|s| self.ring.hom_basis(s)).collect();
        CBasis { low, a, dirs }
    }

    pub fn monomial_basis(&self) -> MonomialBasis {
        MonomialBasis { gb: self.ring.groebner().clone() }
    }
}

/// Runs checks (a)–(d). Infinity points are returned alongside so the
/// eigen analysis is done once.
pub fn check_hypotheses(
    ring: &CurveRing,
    matrices: &[QMatrix],
    cfg: &CurveConfig,
) -> (HypothesisReport, Result<Vec<InfinityPoint>>) {
    let n = ring.nvars();
    let mut msgs = Vec::new();
    let lts = ring.groebner().lt_exponents();
    let pure: Vec<Option<usize>> = lts.iter().map(MultiIndex::pure_power_of).collect();
    let mut lt_ok = !pure.contains(&Some(0));
    if !lt_ok {
        msgs.push("a pure power of z1 lies in the leading-term ideal".into());
    }
    for k in 1..n {
        if !pure.contains(&Some(k)) {
            lt_ok = false;
            msgs.push(format!("no pure power of z{} in the leading-term ideal", k + 1));
        }
    }
    let z1_ok = matrices.first().is_some_and(QMatrix::is_identity);
    if !z1_ok {
        msgs.push("[[z1]] is not the identity".into());
    }
    let mut simple = true;
    for (j, m) in matrices.iter().enumerate().skip(1) {
        match m.to_cmatrix().and_then(|c| eig(&c)) {
            Ok(e) => {
                let scale = m.to_cmatrix().map(|c| c.frobenius()).unwrap_or(1.0).max(1.0);
                let sep = min_separation(&e.values);
                if sep <= cfg.eig_sep_tol * scale {
                    simple = false;
                    msgs.push(format!("[[z{}]] has a repeated eigenvalue (separation {sep:.2e})", j + 1));
                }
            }
            Err(err) => {
                simple = false;
                msgs.push(format!("eigen analysis of [[z{}]] failed: {err}", j + 1));
            }
        }
    }
    let points = if lt_ok && z1_ok && simple {
        infinity_points(ring, matrices, cfg)
    } else {
        Err(Error::HypothesisViolation("prerequisite checks failed".into()))
    };
    let distinct = match &points {
        Ok(pts) => {
            let mut ok = true;
            for j in 1..n {
                let vals: Vec<C64> = pts.iter().map(|p| p.coords[j]).collect();
                if min_separation(&vals) <= cfg.eig_sep_tol {
                    ok = false;
                    msgs.push(format!("two directions share coordinate {}", j + 1));
                }
            }
            ok
        }
        Err(e) => {
            msgs.push(format!("infinity points unavailable: {e}"));
            false
        }
    };
    let report = HypothesisReport {
        lt_pure_powers: lt_ok,
        z1_identity: z1_ok,
        simple_eigenvalues: simple,
        distinct_coordinates: distinct,
        messages: msgs,
    };
    (report, points)
}

fn min_separation(v: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.min((v[i] - v[j]).norm());
        }
    }
    best
}

/// Tolerant lexicographic order on `(Re λ_2, Im λ_2, Re λ_3, …)`.
fn direction_cmp(a: &[C64], b: &[C64]) -> Ordering {
    const TOL: f64 = 1e-9;
    for (x, y) in a.iter().zip(b).skip(1) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            if (p - q).abs() > TOL {
                return p.partial_cmp(&q).unwrap_or(Ordering::Equal);
            }
        }
    }
    Ordering::Equal
}

/// Shared eigenvectors of a random rational combination `Σ_{j>=2} r_j [[z_j]]`,
/// with coordinates read off as Rayleigh quotients.
pub fn infinity_points(ring: &CurveRing, matrices: &[QMatrix], cfg: &CurveConfig) -> Result<Vec<InfinityPoint>> {
    let n = ring.nvars();
    let d = ring.d();
    let cms = matrices.iter().map(QMatrix::to_cmatrix).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut last_sep = 0.0;
    for _attempt in 0..6 {
        let terms: Vec<(GaussRational, &QMatrix)> = matrices
            .iter()
            .skip(1)
            .map(|m| (GaussRational::from_ratio(rng.gen_range(32..=96), 64), m))
            .collect();
        let combo = if terms.is_empty() { QMatrix::zeros(d, d) } else { QMatrix::lin_comb(&terms) };
        let cm = combo.to_cmatrix()?;
        let e = eig(&cm)?;
        let sep = if d > 1 { min_separation(&e.values) } else { f64::INFINITY };
        if sep <= cfg.eig_sep_tol * cm.frobenius().max(1.0) {
            last_sep = sep;
            continue;
        }
        let mut pts = Vec::with_capacity(d);
        for v in e.vectors {
            let vv = dot_h(&v, &v);
            let mut coords = Vec::with_capacity(n);
            let mut residuals = Vec::with_capacity(n);
            for m in &cms {
                let mv = m.matvec(&v);
                let lam = dot_h(&v, &mv) / vv;
                let r: Vec<C64> = mv.iter().zip(&v).map(|(x, y)| x - lam * y).collect();
                let res = vec_norm(&r);
                if res > cfg.eigen_tol * m.frobenius().max(1.0) {
                    return Err(Error::HypothesisViolation(format!(
                        "eigenvector of the combination is not shared (residual {res:.2e})"
                    )));
                }
                coords.push(lam);
                residuals.push(res);
            }
            pts.push(InfinityPoint { coords, eigvec: v, residuals });
        }
        pts.sort_by(|p, q| direction_cmp(&p.coords, &q.coords));
        return Ok(pts);
    }
    Err(Error::ClusteredEigenvalues(last_sep))
}

/// Eigenvector polynomial `v_{λ_j}` (1-based `j >= 2`), normalized to 1 at `λ`.
pub fn eigenvector_poly(
    ring: &CurveRing,
    matrices: &[QMatrix],
    lambda: &InfinityPoint,
    j: usize,
    cfg: &CurveConfig,
) -> Result<HomogeneousForm> {
    let m = matrices
        .get(j.wrapping_sub(1))
        .ok_or_else(|| Error::Input(format!("variable index {j} out of range")))?
        .to_cmatrix()?;
    let e = eig(&m)?;
    let target = lambda.coords[j - 1];
    let k = (0..e.values.len())
        .min_by(|&x, &y| {
            (e.values[x] - target).norm().partial_cmp(&(e.values[y] - target).norm()).unwrap_or(Ordering::Equal)
        })
        .ok_or_else(|| Error::Internal("empty spectrum".into()))?;
    normalized_form(ring, e.vectors[k].clone(), &lambda.coords, cfg)
}

fn normalized_form(ring: &CurveRing, coeffs: Vec<C64>, at: &[C64], cfg: &CurveConfig) -> Result<HomogeneousForm> {
    let a = ring.a();
    let mut form = HomogeneousForm { degree: a, basis: ring.hom_basis(a), coeffs };
    let val = form.eval(at);
    if val.norm() <= cfg.vanish_tol * vec_norm(&form.coeffs) {
        return Err(Error::HypothesisViolation(format!(
            "eigenvector polynomial vanishes at its own direction ({:.2e})",
            val.norm()
        )));
    }
    form.coeffs.iter_mut().for_each(|c| *c /= val);
    Ok(form)
}

/// `v_λ = v_{λ_2} ĥ∗ ⋯ ĥ∗ v_{λ_N}`, folded at degree `a`: each product
/// lands in degree `2a`, whose basis is `z_1^a · hom_basis(a)`, so the
/// coefficient vector is carried back to degree `a` (dropping `z_1^a`).
pub fn directional_poly(
    ring: &CurveRing,
    matrices: &[QMatrix],
    lambda: InfinityPoint,
    cfg: &CurveConfig,
) -> Result<DirectionalPoly> {
    let n = ring.nvars();
    let d = ring.d();
    let a = ring.a();
    let mut acc = if n >= 2 {
        eigenvector_poly(ring, matrices, &lambda, 2, cfg)?.coeffs
    } else {
        lambda.eigvec.clone()
    };
    if n > 2 {
        let tensor = structure_tensor(ring)?;
        for j in 3..=n {
            let v = eigenvector_poly(ring, matrices, &lambda, j, cfg)?.coeffs;
            let mut next = vec![C64::new(0.0, 0.0); d];
            for (k, ak) in acc.iter().enumerate() {
                for (l, bl) in v.iter().enumerate() {
                    let w = ak * bl;
                    for (r, t) in tensor[k][l].iter().enumerate() {
                        next[r] += w * t;
                    }
                }
            }
            if vec_norm(&next) <= cfg.vanish_tol * vec_norm(&acc) * vec_norm(&v) {
                return Err(Error::Internal("hat-star product of eigenvector polynomials collapsed".into()));
            }
            acc = next;
        }
    }
    let form = normalized_form(ring, acc, &lambda.coords, cfg)?;
    let shared = normalized_form(ring, lambda.eigvec.clone(), &lambda.coords, cfg)?;
    let dev = form.coeffs.iter().zip(&shared.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    debug_assert_eq!(form.degree, a);
    Ok(DirectionalPoly { lambda, form, eigvec_deviation: dev })
}

/// `T[k][l]` = coordinates of `e_k ĥ∗ e_l` in `hom_basis(2a)`.
fn structure_tensor(ring: &CurveRing) -> Result<Vec<Vec<Vec<C64>>>> {
    let a = ring.a();
    let b = ring.hom_basis(a);
    let top = ring.hom_basis(2 * a);
    let mut t = vec![vec![vec![C64::new(0.0, 0.0); b.len()]; b.len()]; b.len()];
    for (k, ek) in b.iter().enumerate() {
        for (l, el) in b.iter().enumerate() {
            let prod = ring.hat_star(
                &Poly::monomial(GaussRational::one(), ek.clone()),
                &Poly::monomial(GaussRational::one(), el.clone()),
            );
            for (c, beta) in prod.terms() {
                let r = top
                    .iter()
                    .position(|x| x == beta)
                    .ok_or_else(|| Error::Internal(format!("term {beta} outside degree-2a basis")))?;
                t[k][l][r] = c.to_complex()?;
            }
        }
    }
    Ok(t)
}

/// Ordered basis of `C[V]_{<=n}`: standard monomials of degree `< a`, then
/// `v_{λ_1,s}, …, v_{λ_d,s}` for `s = a, a+1, …`.
#[derive(Clone, Debug)]
pub struct CBasis {
    low: Vec<MultiIndex>,
    a: u32,
    dirs: Vec<DirectionalPoly>,
}

impl CBasis {
    pub fn new(ring: &CurveRing, dirs: &[DirectionalPoly]) -> Self {
        let a = ring.a();
        let low = (0..a).flat_map(|s| ring.hom_basis(s)).collect();
        CBasis { low, a, dirs: dirs.to_vec() }
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn d(&self) -> usize {
        self.dirs.len()
    }

    pub fn directions(&self) -> &[DirectionalPoly] {
        &self.dirs
    }

    /// `m_n = |C_n|`.
    pub fn len_upto(&self, n: u32) -> usize {
        let lows = self.low.iter().filter(|m| m.degree() <= n).count();
        lows + if n >= self.a { (n - self.a + 1) as usize * self.d() } else { 0 }
    }

    /// Degrees of the first `m` basis elements.
    pub fn degrees(&self, m: usize) -> Vec<u32> {
        let mut out: Vec<u32> = self.low.iter().map(MultiIndex::degree).take(m).collect();
        let mut s = self.a;
        while out.len() < m {
            for _ in 0..self.d() {
                if out.len() < m {
                    out.push(s);
                }
            }
            s += 1;
        }
        out
    }

    /// `l_n`: sum of the degrees of `C_n`.
    pub fn degree_sum(&self, n: u32) -> u64 {
        self.degrees(self.len_upto(n)).iter().map(|&x| x as u64).sum()
    }

    /// Index range of the block `v_{λ_1,s}..v_{λ_d,s}`.
    pub fn block(&self, s: u32) -> std::ops::Range<usize> {
        let start = self.len_upto(s - 1);
        start..start + self.d()
    }

    /// Values of the first `m` basis functions at `z`.
    pub fn eval_prefix(&self, z: &[C64], m: usize) -> Vec<C64> {
        let mut out: Vec<C64> = self.low.iter().take(m).map(|a| monomial_value(a, z)).collect();
        if out.len() == m {
            return out;
        }
        let base: Vec<C64> = self.dirs.iter().map(|v| v.eval(z)).collect();
        let mut pow = C64::new(1.0, 0.0);
        while out.len() < m {
            for b in &base {
                if out.len() < m {
                    out.push(pow * b);
                }
            }
            pow *= z[0];
        }
        out
    }

    /// `M × m` matrix of the first `m` basis functions over `points`.
    pub fn eval_matrix(&self, points: &[Vec<C64>], m: usize) -> CMatrix {
        let mut out = CMatrix::zeros(points.len(), m);
        for (i, p) in points.iter().enumerate() {
            for (j, v) in self.eval_prefix(p, m).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }
}

/// Orthonormal columns spanning the `C`-basis prefixes on a finite point
/// set, built by multiplying the previous column of each direction by `z_1`
/// and orthogonalizing (twice). `C_i = D_i q_i + (earlier q's)`, so every
/// prefix change of basis is triangular with diagonal `D`.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    pub q: CMatrix,
    /// `log|D_i|`.
    pub log_diag: Vec<f64>,
    /// `top[s - a][j][μ]`: degree-`s` leading value of `q_{s,j}` at `λ_μ`.
    pub top: Vec<Vec<Vec<C64>>>,
    a: u32,
    low: usize,
    d: usize,
}

impl OrthoBasis {
    pub fn len(&self) -> usize {
        self.q.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.q.cols() == 0
    }

    pub fn block(&self, s: u32) -> std::ops::Range<usize> {
        let start = self.low + (s - self.a) as usize * self.d;
        start..start + self.d
    }

    /// `Σ_{i<m} log|D_i|`.
    pub fn log_diag_sum(&self, m: usize) -> f64 {
        self.log_diag[..m].iter().sum()
    }
}

/// Removes from `w` its components along `cols` and returns the
/// accumulated coefficients.
fn orthogonalize(cols: &[Vec<C64>], w: &mut [C64]) -> Vec<C64> {
    let mut coeffs = vec![C64::new(0.0, 0.0); cols.len()];
    for _ in 0..2 {
        for (q, c) in cols.iter().zip(coeffs.iter_mut()) {
            let h = dot_h(q, w);
            for (x, y) in w.iter_mut().zip(q) {
                *x -= h * y;
            }
            *c += h;
        }
    }
    coeffs
}

impl CBasis {
    /// Orthonormal version of the first `len_upto(s_max)` basis functions
    /// over `points`.
    pub fn orthonormal(&self, points: &[Vec<C64>], s_max: u32) -> Result<OrthoBasis> {
        self.orthonormal_capped(points, s_max, usize::MAX)
    }

    /// The first `m` orthonormal columns. The last block of `top` may be
    /// partial.
    pub fn orthonormal_prefix(&self, points: &[Vec<C64>], m: usize) -> Result<OrthoBasis> {
        let mut s_max = self.a;
        while self.len_upto(s_max) < m {
            s_max += 1;
        }
        self.orthonormal_capped(points, s_max, m)
    }

    fn orthonormal_capped(&self, points: &[Vec<C64>], s_max: u32, cap: usize) -> Result<OrthoBasis> {
        let d = self.d();
        let mut cols: Vec<Vec<C64>> = Vec::new();
        let mut log_diag = Vec::new();
        let push = |cols: &mut Vec<Vec<C64>>, mut w: Vec<C64>| -> Result<(Vec<C64>, f64)> {
            let before = vec_norm(&w);
            let coeffs = orthogonalize(cols, &mut w);
            let h = vec_norm(&w);
            if h.is_nan() || h <= 1e-13 * before || h == 0.0 {
                return Err(Error::RankDeficient { column: cols.len() });
            }
            for x in &mut w {
                *x /= h;
            }
            cols.push(w);
            Ok((coeffs, h))
        };
        for mono in self.low.iter().take(cap) {
            let w = points.iter().map(|z| monomial_value(mono, z)).collect();
            let (_, h) = push(&mut cols, w)?;
            log_diag.push(h.ln());
        }
        let mut top: Vec<Vec<Vec<C64>>> = Vec::new();
        let zero = C64::new(0.0, 0.0);
        for s in self.a..=s_max {
            if cols.len() >= cap {
                break;
            }
            let mut block: Vec<Vec<C64>> = Vec::with_capacity(d);
            let start = cols.len();
            for j in 0..d.min(cap - start) {
                let (w, lead, base_log): (Vec<C64>, Vec<C64>, f64) = if s == self.a {
                    let w = points.iter().map(|z| self.dirs[j].eval(z)).collect();
                    let lead = (0..d).map(|mu| if mu == j { C64::new(1.0, 0.0) } else { zero }).collect();
                    (w, lead, 0.0)
                } else {
                    let prev = start - d + j;
                    let w = cols[prev].iter().zip(points).map(|(q, z)| q * z[0]).collect();
                    (w, top[(s - 1 - self.a) as usize][j].clone(), log_diag[prev])
                };
                let (coeffs, h) = push(&mut cols, w)?;
                let row: Vec<C64> = (0..d)
                    .map(|mu| {
                        let mut v = lead[mu];
                        for (jj, earlier) in block.iter().enumerate() {
                            v -= coeffs[start + jj] * earlier[mu];
                        }
                        v / h
                    })
                    .collect();
                block.push(row);
                log_diag.push(base_log + h.ln());
            }
            top.push(block);
        }
        let m = cols.len();
        let q = CMatrix::from_fn(points.len(), m, |i, j| cols[j][i]);
        Ok(OrthoBasis { q, log_diag, top, a: self.a, low: self.low.len(), d })
    }
}

/// Standard monomials in ascending grevlex order, the basis for the
/// monomial Vandermonde determinant.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    gb: GroebnerBasis,
}

impl MonomialBasis {
    pub fn prefix(&self, m: usize) -> Vec<MultiIndex> {
        let mut out = Vec::with_capacity(m);
        let mut s = 0;
        while out.len() < m {
            out.extend(self.gb.quotient_basis(s).into_iter().take(m - out.len()));
            s += 1;
        }
        out
    }

    pub fn eval_matrix(&self, points: &[Vec<C64>], m: usize) -> CMatrix {
        let mons = self.prefix(m);
        CMatrix::from_fn(points.len(), m, |i, j| monomial_value(&mons[j], &points[i]))
    }
}
