//! Discrete complex Chebyshev problems on a finite `K ⊂ V`.
//!
//! Every constant is a max over the sample, so all values here are
//! discrete-`K` quantities.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::curve::{CBasis, Curve};
use crate::error::{Error, Result};
use crate::numeric::{solve_vec, weighted_lstsq, CMatrix, C64};
use crate::poly::Poly;
use crate::sampler::{AffineMap, CompactSet};

#[derive(Clone, Copy, Debug)]
pub struct MinimaxConfig {
    /// Stop when the max residual changes by less than `tol` relatively,
    /// or when the best max residual is within `tol` of the certified
    /// lower bound.
    pub tol: f64,
    pub max_iters: usize,
    pub weight_floor: f64,
}

impl Default for MinimaxConfig {
    fn default() -> Self {
        MinimaxConfig { tol: 1e-10, max_iters: 5_000, weight_floor: 1e-300 }
    }
}

/// `min_c max_i |target_i − (basis c)_i|`.
#[derive(Clone, Debug)]
pub struct MinimaxProblem {
    pub target: Vec<C64>,
    pub basis: CMatrix,
    pub labels: Vec<String>,
    /// Exponent used for `normalized_constant = value^(1/degree)`.
    pub degree: u32,
}

impl MinimaxProblem {
    pub fn new(target: Vec<C64>, basis: CMatrix, labels: Vec<String>, degree: u32) -> Result<Self> {
        if basis.rows() != target.len() {
            return Err(Error::LengthMismatch { expected: target.len(), got: basis.rows() });
        }
        if basis.cols() > basis.rows() {
            return Err(Error::Input(format!(
                "{} correction functions but only {} sample points",
                basis.cols(),
                basis.rows()
            )));
        }
        if labels.len() != basis.cols() {
            return Err(Error::LengthMismatch { expected: basis.cols(), got: labels.len() });
        }
        Ok(MinimaxProblem { target, basis, labels, degree })
    }

    /// Max residual at `c`, computed directly from the unscaled data.
    pub fn max_residual(&self, c: &[C64]) -> f64 {
        let ac = self.basis.matvec(c);
        self.target.iter().zip(&ac).map(|(b, x)| (b - x).norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct ChebResult {
    pub coefficients: Vec<C64>,
    pub minimax_value: f64,
    /// `sqrt(Σ w_i |r_i|²)` at the final weights; no polynomial in the
    /// class does better on `K`.
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    pub degree: u32,
    pub normalized_constant: f64,
}

/// Lawson iteration: reweighted least squares with `w_i ← w_i |r_i|`.
/// Returns the iterate with the smallest max residual.
pub fn minimax_solve(p: &MinimaxProblem, cfg: &MinimaxConfig) -> Result<ChebResult> {
    minimax_solve_from(p, cfg, None)
}

/// As `minimax_solve`, with a known feasible coefficient vector competing
/// against the Lawson iterates.
pub fn minimax_solve_from(p: &MinimaxProblem, cfg: &MinimaxConfig, candidate: Option<&[C64]>) -> Result<ChebResult> {
    let m = p.target.len();
    let k = p.basis.cols();
    let finish = |coefficients: Vec<C64>, lower: f64, iterations, converged| {
        let value = p.max_residual(&coefficients);
        ChebResult {
            minimax_value: value,
            lower_bound: lower.min(value),
            normalized_constant: if p.degree == 0 { value } else { value.powf(1.0 / p.degree as f64) },
            coefficients,
            iterations,
            converged,
            degree: p.degree,
        }
    };
    let sigma = p.target.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if k == 0 || sigma == 0.0 {
        return Ok(finish(vec![C64::new(0.0, 0.0); k], sigma, 0, true));
    }
    // Unit max-norm target and columns; coefficients are unscaled at the end.
    let col_scale: Vec<f64> = (0..k)
        .map(|j| (0..m).map(|i| p.basis[(i, j)].norm()).fold(0.0, f64::max))
        .collect();
    if let Some(column) = col_scale.iter().position(|&s| s == 0.0) {
        return Err(Error::RankDeficient { column });
    }
    let a = CMatrix::from_fn(m, k, |i, j| p.basis[(i, j)] / col_scale[j]);
    let b: Vec<C64> = p.target.iter().map(|z| z / sigma).collect();
    let mut w = vec![1.0 / m as f64; m];
    // Remove the least-squares part first: targets differing by an element
    // of the correction span then give the same iteration up to rounding.
    let c0 = weighted_lstsq(&a, &b, &w)?;
    let ac0 = a.matvec(&c0);
    let b: Vec<C64> = b.iter().zip(&ac0).map(|(x, y)| x - y).collect();
    let rho = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let unscale = |c: &[C64], rho: f64| -> Vec<C64> {
        c.iter().zip(&c0).zip(&col_scale).map(|((x, x0), s)| (x * rho + x0) * sigma / s).collect()
    };
    if rho == 0.0 {
        return Ok(finish(unscale(&vec![C64::new(0.0, 0.0); k], 0.0), 0.0, 1, true));
    }
    let b: Vec<C64> = b.iter().map(|z| z / rho).collect();

    let mut best: Option<(f64, Vec<C64>)> = None;
    let mut lower: f64 = 0.0;
    let mut prev = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let c = match active_lstsq(&a, &b, &w) {
            Ok(c) => c,
            Err(e) if best.is_none() => return Err(e),
            // Weights collapsed onto too few points to fix all coefficients.
            Err(_) => break,
        };
        let ac = a.matvec(&c);
        let r: Vec<f64> = b.iter().zip(&ac).map(|(x, y)| (x - y).norm()).collect();
        let maxr = r.iter().copied().fold(0.0, f64::max);
        lower = lower.max(w.iter().zip(&r).map(|(wi, ri)| wi * ri * ri).sum::<f64>().sqrt());
        if best.as_ref().is_none_or(|(v, _)| maxr < *v) {
            best = Some((maxr, c));
        }
        let best_v = best.as_ref().map_or(maxr, |(v, _)| *v);
        if maxr == 0.0 || (prev - maxr).abs() <= cfg.tol * maxr || best_v - lower <= cfg.tol * best_v {
            converged = true;
            break;
        }
        prev = maxr;
        let mut total = 0.0;
        for (wi, ri) in w.iter_mut().zip(&r) {
            *wi = (*wi * ri).max(cfg.weight_floor);
            total += *wi;
        }
        for wi in &mut w {
            *wi /= total;
        }
    }
    let (_, c) = best.ok_or_else(|| Error::Internal("minimax produced no iterate".into()))?;
    let mut c = unscale(&c, rho);
    if let Some(cand) = candidate {
        if cand.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: cand.len() });
        }
        if p.max_residual(cand) < p.max_residual(&c) {
            c = cand.to_vec();
        }
    }
    Ok(finish(c, lower * rho * sigma, iterations, converged))
}

/// Rows whose weight is below this fraction of the largest move the
/// weighted least-squares solution by less than rounding.
const ACTIVE_WEIGHT: f64 = 1e-30;

/// Weighted least squares restricted to the rows that still carry weight.
fn active_lstsq(a: &CMatrix, b: &[C64], w: &[f64]) -> Result<Vec<C64>> {
    let wmax = w.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] >= ACTIVE_WEIGHT * wmax).collect();
    if keep.len() < a.cols() || keep.len() == w.len() {
        return weighted_lstsq(a, b, w);
    }
    let sub = CMatrix::from_fn(keep.len(), a.cols(), |i, j| a[(keep[i], j)]);
    let sb: Vec<C64> = keep.iter().map(|&i| b[i]).collect();
    let sw: Vec<f64> = keep.iter().map(|&i| w[i]).collect();
    weighted_lstsq(&sub, &sb, &sw).or_else(|_| weighted_lstsq(a, b, w))
}

fn ensure_fits(k: &CompactSet, columns: usize) -> Result<()> {
    if columns > k.len() {
        return Err(Error::Input(format!(
            "{columns} correction functions need at least that many sample points, K has {}",
            k.len()
        )));
    }
    Ok(())
}

fn c_labels(basis: &CBasis, m: usize) -> Vec<String> {
    basis.degrees(m).iter().enumerate().map(|(i, deg)| format!("q{}_deg{deg}", i + 1)).collect()
}

fn columns(q: &CMatrix, range: std::ops::Range<usize>) -> CMatrix {
    CMatrix::from_fn(q.rows(), range.len(), |i, j| q[(i, range.start + j)])
}

/// `τ(K, Q, n)^{n deg Q}`: minimize over `Qⁿ + r`, `deg r < n deg Q`.
pub fn tau_q(curve: &Curve, k: &CompactSet, q: &Poly, n: u32, cfg: &MinimaxConfig) -> Result<ChebResult> {
    let dq = q.degree().ok_or(Error::ZeroPolynomial)?;
    if n == 0 || dq == 0 {
        return Err(Error::Input("tau_Q needs n >= 1 and a non-constant Q".into()));
    }
    let deg = n * dq;
    let basis = curve.c_basis();
    let cols = basis.len_upto(deg - 1);
    ensure_fits(k, cols)?;
    let target = k
        .points
        .iter()
        .map(|z| Ok(q.eval_complex(z)?.powu(n)))
        .collect::<Result<Vec<_>>>()?;
    let ortho = basis.orthonormal(&k.points, deg - 1)?;
    let mat = columns(&ortho.q, 0..cols);
    minimax_solve(&MinimaxProblem::new(target, mat, c_labels(&basis, cols), deg)?, cfg)
}

/// Shared body of `τ_s` and `t_s`. The top-degree part is imposed through
/// the leading values of the orthonormal block: `τ_s` fixes all of them,
/// `t_s` only the one at `λ`.
#[allow(clippy::too_many_arguments)]
fn directional(
    curve: &Curve,
    k: &CompactSet,
    dir: usize,
    s: u32,
    pad: u32,
    others: bool,
    seed: Option<&ChebResult>,
    cfg: &MinimaxConfig,
) -> Result<ChebResult> {
    let basis = if pad == 0 { curve.c_basis() } else { curve.c_basis_padded(pad) };
    let a = basis.a();
    if s < a {
        return Err(Error::Input(format!("s = {s} is below the minimum degree {a}")));
    }
    let d = basis.d();
    if dir >= d {
        return Err(Error::Input(format!("direction index {dir} out of range 0..{d}")));
    }
    let lower = basis.len_upto(s - 1);
    let extra = if others { d - 1 } else { 0 };
    ensure_fits(k, lower + extra)?;
    let ortho = basis.orthonormal(&k.points, s)?;
    let blk = ortho.block(s);
    let lead = &ortho.top[(s - a) as usize];
    // Block coefficients c with Σ_j c_j L_μ(q_{s,j}) = δ_{μ,dir}.
    let lt = CMatrix::from_fn(d, d, |mu, j| lead[j][mu]);
    let mut e = vec![C64::new(0.0, 0.0); d];
    e[dir] = C64::new(1.0, 0.0);
    let c = solve_vec(&lt, &e).ok_or_else(|| Error::Internal(format!("leading values singular at s = {s}")))?;
    let block = columns(&ortho.q, blk.clone());
    let target = block.matvec(&c);

    let mut labels = c_labels(&basis, lower);
    let mut mat = columns(&ortho.q, 0..lower);
    if others {
        // Null space of f ↦ Σ_j f_j L_dir(q_{s,j}), pivoted on the largest entry.
        let ell: Vec<C64> = (0..d).map(|j| lead[j][dir]).collect();
        let p = (0..d).max_by(|&x, &y| ell[x].norm().total_cmp(&ell[y].norm())).unwrap_or(0);
        let free: Vec<Vec<C64>> = (0..d)
            .filter(|&j| j != p)
            .map(|j| {
                let mut v = vec![C64::new(0.0, 0.0); d];
                v[j] = C64::new(1.0, 0.0);
                v[p] = -ell[j] / ell[p];
                block.matvec(&v)
            })
            .collect();
        let old = mat;
        mat = CMatrix::from_fn(k.len(), lower + free.len(), |i, j| if j < lower { old[(i, j)] } else { free[j - lower][i] });
        labels.extend((0..free.len()).map(|j| format!("free{}_deg{s}", j + 1)));
    }
    let problem = MinimaxProblem::new(target, mat, labels, s)?;
    // A τ_s optimum padded with zeros is feasible for t_s.
    let candidate = seed.map(|r| {
        let mut c = r.coefficients.clone();
        c.resize(lower + extra, C64::new(0.0, 0.0));
        c
    });
    minimax_solve_from(&problem, cfg, candidate.as_deref())
}

/// `τ_s(K, λ)`: minimize over `v_{λ,s} + q`, `deg q < s`.
pub fn tau_s(curve: &Curve, k: &CompactSet, dir: usize, s: u32, cfg: &MinimaxConfig) -> Result<ChebResult> {
    directional(curve, k, dir, s, 0, false, None, cfg)
}

/// `τ_s` with the directional polynomial replaced by `z_1^pad v_λ`.
pub fn tau_s_padded(
    curve: &Curve,
    k: &CompactSet,
    dir: usize,
    s: u32,
    pad: u32,
    cfg: &MinimaxConfig,
) -> Result<ChebResult> {
    directional(curve, k, dir, s, pad, false, None, cfg)
}

/// `t_s(K, λ)`: as `τ_s`, with `v_{μ,s}` for every `μ ≠ λ` also free.
pub fn t_s(curve: &Curve, k: &CompactSet, dir: usize, s: u32, cfg: &MinimaxConfig) -> Result<ChebResult> {
    directional(curve, k, dir, s, 0, true, None, cfg)
}

/// `t_s` warm-started from the matching `τ_s` result, so the reported
/// values keep `t_s <= τ_s`.
pub fn t_s_seeded(
    curve: &Curve,
    k: &CompactSet,
    dir: usize,
    s: u32,
    tau: &ChebResult,
    cfg: &MinimaxConfig,
) -> Result<ChebResult> {
    directional(curve, k, dir, s, 0, true, Some(tau), cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    Tau,
    T,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Tau => "tau",
            Family::T => "t",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChebRow {
    pub direction: usize,
    pub s: u32,
    pub family: Family,
    pub result: ChebResult,
}

/// All `(direction, s, family)` problems, solved in parallel per
/// `(direction, s)` and returned in `(direction, s, family)` order.
pub fn cheb_table(
    curve: &Curve,
    k: &CompactSet,
    s_range: std::ops::RangeInclusive<u32>,
    families: &[Family],
    cfg: &MinimaxConfig,
) -> Result<Vec<ChebRow>> {
    let jobs: Vec<(usize, u32)> =
        (0..curve.d()).flat_map(|dir| s_range.clone().map(move |s| (dir, s))).collect();
    let want_t = families.contains(&Family::T);
    let want_tau = families.contains(&Family::Tau);
    let per_job = jobs
        .par_iter()
        .map(|&(direction, s)| {
            let tau = tau_s(curve, k, direction, s, cfg)?;
            let mut rows = Vec::with_capacity(2);
            if want_t {
                let result = t_s_seeded(curve, k, direction, s, &tau, cfg)?;
                rows.push(ChebRow { direction, s, family: Family::T, result });
            }
            if want_tau {
                rows.push(ChebRow { direction, s, family: Family::Tau, result: tau });
            }
            rows.sort_by_key(|r| r.family);
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

pub fn rows_to_csv(rows: &[ChebRow]) -> String {
    let mut out = String::from("direction_index,s,family,raw_value,normalized_constant,iterations,converged\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.17e},{:.17e},{},{}",
            r.direction,
            r.s,
            r.family.name(),
            r.result.minimax_value,
            r.result.normalized_constant,
            r.result.iterations,
            r.result.converged
        );
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitEstimate {
    pub last: f64,
    /// Geometric mean of the last `⌈25%⌉` terms (at least two).
    pub tail_geomean: f64,
    /// Max relative successive difference over the tail.
    pub diagnostic: f64,
}

pub fn estimate_limit(seq: &[(u32, f64)]) -> Result<LimitEstimate> {
    if seq.len() < 3 {
        return Err(Error::Input(format!("limit estimate needs at least 3 terms, got {}", seq.len())));
    }
    let tail_len = seq.len().div_ceil(4).max(2);
    let tail: Vec<f64> = seq[seq.len() - tail_len..].iter().map(|&(_, v)| v).collect();
    let tail_geomean = (tail.iter().map(|v| v.ln()).sum::<f64>() / tail_len as f64).exp();
    let diagnostic = tail.windows(2).map(|w| ((w[1] - w[0]) / w[0]).abs()).fold(0.0, f64::max);
    Ok(LimitEstimate { last: seq[seq.len() - 1].1, tail_geomean, diagnostic })
}

#[derive(Clone, Debug)]
pub struct TransformRow {
    /// Direction index on `V`.
    pub eta: usize,
    /// Matching direction index on `T(V)`.
    pub lambda: usize,
    pub t1: C64,
    pub tau_v: f64,
    pub tau_tv: f64,
    /// `|τ_{T(V)}(T(K), λ) − |T_1(η)| τ_V(K, η)|` relative to the right side.
    pub rel_gap: f64,
}

/// Compares `τ_s(T(K), T(η))` with `|T_1(η)| τ_s(K, η)` for every direction.
/// `image` and `image_set` must come from `apply_affine` on `curve`, `k`.
pub fn transform_check(
    curve: &Curve,
    k: &CompactSet,
    t: &AffineMap,
    image: &Curve,
    image_set: &CompactSet,
    s: u32,
    cfg: &MinimaxConfig,
) -> Result<Vec<TransformRow>> {
    let etas: Vec<_> = curve.directions.iter().map(|v| v.lambda.clone()).collect();
    let t1 = t.check_admissible(&etas, curve.config.vanish_tol)?;
    let mut rows = Vec::new();
    for (eta, p) in etas.iter().enumerate() {
        let target = t.map_direction(&p.coords)?;
        let lambda = match_direction(image, &target)?;
        let tau_v = tau_s(curve, k, eta, s, cfg)?.normalized_constant;
        let tau_tv = tau_s(image, image_set, lambda, s, cfg)?.normalized_constant;
        let expected = t1[eta].norm() * tau_v;
        rows.push(TransformRow { eta, lambda, t1: t1[eta], tau_v, tau_tv, rel_gap: (tau_tv - expected).abs() / expected });
    }
    Ok(rows)
}

/// Index of the direction of `curve` nearest to `target`.
pub fn match_direction(curve: &Curve, target: &[C64]) -> Result<usize> {
    curve
        .directions
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let dist = v.lambda.coords.iter().zip(target).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            (j, dist)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .filter(|&(_, dist)| dist <= 1e-6)
        .map(|(j, _)| j)
        .ok_or_else(|| Error::Internal("image direction not found among the transformed curve's directions".into()))
}
