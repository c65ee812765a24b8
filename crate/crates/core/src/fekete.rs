//! Vandermonde determinants over a finite `K`, approximate Fekete points and
//! the transfinite-diameter ladder `d_n = V_n^{1/l_n}`.
//!
//! `V_n` is approximated from below: greedy selection (row-pivoted
//! elimination) followed by single-point exchanges.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::chebyshev::{estimate_limit, tau_s, t_s_seeded, ChebResult, LimitEstimate, MinimaxConfig};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::numeric::{logdet, solve_vec, CMatrix, LogDet, C64};
use crate::sampler::{AffineMap, CompactSet};

/// Pivots below this mean `K` cannot separate the next basis function.
pub const PIVOT_FLOOR: f64 = 1e-300;
/// Exchanges must raise `log|Van|` by more than this.
pub const EXCHANGE_GAIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// Low standard monomials, then `v_{λ_j,s}` blocks.
    C,
    /// Standard monomials in ascending grevlex order.
    Monomial,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::C => "C",
            BasisKind::Monomial => "monomial",
        }
    }
}

/// `|K| × m` matrix of the first `m` basis functions.
pub fn basis_matrix(curve: &Curve, kind: BasisKind, points: &[Vec<C64>], m: usize) -> CMatrix {
    match kind {
        BasisKind::C => curve.c_basis().eval_matrix(points, m),
        BasisKind::Monomial => curve.monomial_basis().eval_matrix(points, m),
    }
}

/// Matrix used for selection with per-column log scale: for the `C` kind
/// the orthonormalized columns, whose determinants differ from `Van_C` by
/// the product of the triangular diagonal.
pub fn selection_matrix(curve: &Curve, kind: BasisKind, points: &[Vec<C64>], m: usize) -> Result<(CMatrix, Vec<f64>)> {
    match kind {
        BasisKind::C => {
            let ortho = curve.c_basis().orthonormal_prefix(points, m).map_err(|e| match e {
                Error::RankDeficient { column } => unsupported(column),
                other => other,
            })?;
            Ok((ortho.q, ortho.log_diag))
        }
        BasisKind::Monomial => Ok((curve.monomial_basis().eval_matrix(points, m), vec![0.0; m])),
    }
}

fn unsupported(t: usize) -> Error {
    Error::Input(format!("K cannot support basis element {}: every residual is below {PIVOT_FLOOR:e}", t + 1))
}

/// `log|Van|` of `points` against the first `|points|` basis functions.
pub fn vandermonde_logabs(curve: &Curve, kind: BasisKind, points: &[Vec<C64>]) -> Result<LogDet> {
    logdet(&basis_matrix(curve, kind, points, points.len()))
}

#[derive(Clone, Debug)]
pub struct FeketeRun {
    pub kind: BasisKind,
    /// Indices into `K`, in selection order.
    pub selected: Vec<usize>,
    /// `log_v[t]`: `log|Van|` of the first `t + 1` selected points.
    pub log_v: Vec<f64>,
}

impl FeketeRun {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// `log|Van|` of the first `m` points; `0` for `m = 0`.
    pub fn log_v_at(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            self.log_v[m - 1]
        }
    }

    pub fn prefix(&self, m: usize) -> FeketeRun {
        FeketeRun { kind: self.kind, selected: self.selected[..m].to_vec(), log_v: self.log_v[..m].to_vec() }
    }
}

/// Greedy selection among the rows `candidates` of `e`: step `t` takes the
/// row with the largest residual in column `t` after eliminating the
/// previous pivots. Ties go to the earlier candidate.
fn greedy_rows(e: &CMatrix, offsets: &[f64], candidates: &[usize], m: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut rows: Vec<Vec<C64>> = candidates.iter().map(|&i| e.row(i)[..m].to_vec()).collect();
    let mut used = vec![false; rows.len()];
    let mut picked = Vec::with_capacity(m);
    let mut log_v = Vec::with_capacity(m);
    let mut acc = 0.0;
    for t in 0..m {
        let (best, score) = rows
            .par_iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, r)| (i, r[t].norm()))
            .reduce(|| (usize::MAX, -1.0), |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
        if best == usize::MAX || score.is_nan() || score <= PIVOT_FLOOR {
            return Err(unsupported(t));
        }
        used[best] = true;
        acc += score.ln() + offsets[t];
        picked.push(candidates[best]);
        log_v.push(acc);
        let pivot = rows[best].clone();
        rows.par_iter_mut().enumerate().filter(|(i, _)| !used[*i]).for_each(|(_, r)| {
            let f = r[t] / pivot[t];
            for c in t + 1..m {
                r[c] -= f * pivot[c];
            }
            r[t] = C64::new(0.0, 0.0);
        });
    }
    Ok((picked, log_v))
}

pub fn greedy_fekete(curve: &Curve, k: &CompactSet, m_target: usize, kind: BasisKind) -> Result<FeketeRun> {
    if m_target > k.len() {
        return Err(Error::Input(format!("{m_target} Fekete points requested from a sample of {}", k.len())));
    }
    let (e, offsets) = selection_matrix(curve, kind, &k.points, m_target)?;
    let all: Vec<usize> = (0..k.len()).collect();
    let (selected, log_v) = greedy_rows(&e, &offsets, &all, m_target)?;
    Ok(FeketeRun { kind, selected, log_v })
}

/// Single-point exchanges on the full selected set, at most `passes`
/// sweeps. Replacing row `r` of `B` by `e_x` scales `det B` by
/// `(e_x B^{-1})_r`. The improved set is reordered greedily so every
/// prefix is again a greedy trajectory.
pub fn exchange_refine(curve: &Curve, k: &CompactSet, run: &FeketeRun, passes: usize) -> Result<FeketeRun> {
    let m = run.len();
    if m == 0 {
        return Ok(run.clone());
    }
    let (e, offsets) = selection_matrix(curve, run.kind, &k.points, m)?;
    let mut sel = run.selected.clone();
    let mut swapped = false;
    for _ in 0..passes {
        let mut improved = false;
        for r in 0..m {
            let b = CMatrix::from_fn(m, m, |i, j| e[(sel[i], j)]);
            // y = B^{-1} e_r, so that (e_x B^{-1})_r = e_x · y.
            let mut unit = vec![C64::new(0.0, 0.0); m];
            unit[r] = C64::new(1.0, 0.0);
            let Some(y) = solve_vec(&b, &unit) else {
                return Err(Error::Internal("selected Fekete set became singular".into()));
            };
            let (best, gain) = (0..k.len())
                .into_par_iter()
                .filter(|x| !sel.contains(x))
                .map(|x| (x, e.row(x).iter().zip(&y).map(|(a, b)| a * b).sum::<C64>().norm().ln()))
                .reduce(|| (usize::MAX, 0.0), |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
            if best != usize::MAX && gain > EXCHANGE_GAIN {
                sel[r] = best;
                improved = true;
                swapped = true;
            }
        }
        if !improved {
            break;
        }
    }
    if !swapped {
        return Ok(run.clone());
    }
    let (selected, log_v) = greedy_rows(&e, &offsets, &sel, m)?;
    Ok(FeketeRun { kind: run.kind, selected, log_v })
}

#[derive(Clone, Copy, Debug)]
pub struct LadderConfig {
    pub n_max: u32,
    pub passes: usize,
    pub kind: BasisKind,
    pub minimax: MinimaxConfig,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig { n_max: 10, passes: 10, kind: BasisKind::C, minimax: MinimaxConfig::default() }
    }
}

#[derive(Clone, Debug)]
pub struct LadderRow {
    pub n: u32,
    pub m_n: usize,
    pub l_n: u64,
    /// `log V_n` from the exchange-refined `m_n`-point set.
    pub log_v: f64,
    pub d_n: f64,
    /// `(Π_j τ_n(K, λ_j))^{1/d}`, absent for `n < a`.
    pub cheb_side: Option<f64>,
    /// `|log d_n − log cheb_side|`.
    pub gap: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SandwichRow {
    pub n: u32,
    pub j: usize,
    pub log_ratio: f64,
    /// `(n+1) log t_{n+1}(K, λ_j)`.
    pub log_lower: f64,
    /// `log(m_n + j) + (n+1) log τ_{n+1}(K, λ_j)`.
    pub log_upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

#[derive(Clone, Debug)]
pub struct DiameterReport {
    pub kind: BasisKind,
    pub rows: Vec<LadderRow>,
    /// Greedy trajectory to `m_{n_max} + d`, source of the `V_{n,j}` ladder.
    pub trajectory: FeketeRun,
    /// Refined `m_n`-point sets, one per row.
    pub refined: Vec<FeketeRun>,
    /// `tau[j][s - a]` and `t[j][s - a]` for `s = a..=n_max + 1`.
    pub tau: Vec<Vec<ChebResult>>,
    pub t: Vec<Vec<ChebResult>>,
    /// Limit estimate of `τ_s(K, λ_j)` over `s = a..=n_max`.
    pub tau_limits: Vec<LimitEstimate>,
    pub sandwich: Vec<SandwichRow>,
    pub warnings: Vec<String>,
}

impl DiameterReport {
    pub fn row(&self, n: u32) -> Option<&LadderRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// `V_{n,j}` from the greedy trajectory.
    pub fn log_v_nj(&self, curve: &Curve, n: u32, j: usize) -> f64 {
        self.trajectory.log_v_at(curve.c_basis().len_upto(n) + j)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,m_n,l_n,log_V_n,d_n,cheb_side,gap\n");
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.17e}"));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.17e},{:.17e},{},{}",
                r.n,
                r.m_n,
                r.l_n,
                r.log_v,
                r.d_n,
                opt(r.cheb_side),
                opt(r.gap)
            );
        }
        out
    }
}

/// Fekete ladder for `n = 1..=n_max` with the matching directional
/// Chebyshev constants and sandwich diagnostics.
pub fn diameter_ladder(curve: &Curve, k: &CompactSet, cfg: &LadderConfig) -> Result<DiameterReport> {
    let basis = curve.c_basis();
    let d = curve.d();
    let a = curve.a();
    let n_max = cfg.n_max;
    if n_max < 1 {
        return Err(Error::Input("n_max must be at least 1".into()));
    }
    let mut warnings = Vec::new();
    let m_max = basis.len_upto(n_max);
    if k.len() < m_max + d {
        return Err(Error::Input(format!(
            "sample of {} points cannot support the ladder to n = {n_max}: need m_{n_max} + d = {}",
            k.len(),
            m_max + d
        )));
    }
    if k.len() < 3 * m_max {
        warnings.push(format!("sample of {} points is below 3·m_{n_max} = {}", k.len(), 3 * m_max));
    }
    let m_traj = m_max + d;
    let trajectory = greedy_fekete(curve, k, m_traj, cfg.kind)?;

    let ns: Vec<u32> = (1..=n_max).collect();
    let refined = ns
        .par_iter()
        .map(|&n| exchange_refine(curve, k, &trajectory.prefix(basis.len_upto(n)), cfg.passes))
        .collect::<Result<Vec<_>>>()?;

    // τ_s and t_s for s = a..=n_max + 1, per direction, in parallel.
    let s_hi = n_max + 1;
    let jobs: Vec<(usize, u32)> = (0..d).flat_map(|j| (a..=s_hi).map(move |s| (j, s))).collect();
    let solved = jobs
        .par_iter()
        .map(|&(j, s)| {
            let tau = tau_s(curve, k, j, s, &cfg.minimax)?;
            let t = t_s_seeded(curve, k, j, s, &tau, &cfg.minimax)?;
            Ok((tau, t))
        })
        .collect::<Result<Vec<_>>>()?;
    let width = (s_hi - a + 1) as usize;
    let mut tau = vec![Vec::with_capacity(width); d];
    let mut t = vec![Vec::with_capacity(width); d];
    for ((j, _), (x, y)) in jobs.iter().zip(solved) {
        tau[*j].push(x);
        t[*j].push(y);
    }
    let tau_at = |j: usize, s: u32| &tau[j][(s - a) as usize];

    let mut tau_limits = Vec::with_capacity(d);
    for j in 0..d {
        let seq: Vec<(u32, f64)> = (a..=n_max).map(|s| (s, tau_at(j, s).normalized_constant)).collect();
        if seq.len() >= 3 {
            tau_limits.push(estimate_limit(&seq)?);
        }
    }

    let rows = ns
        .iter()
        .zip(&refined)
        .map(|(&n, run)| {
            let m_n = basis.len_upto(n);
            let l_n = basis.degree_sum(n);
            let log_v = run.log_v_at(m_n).max(trajectory.log_v_at(m_n));
            let d_n = (log_v / l_n as f64).exp();
            let cheb_side = (n >= a).then(|| {
                ((0..d).map(|j| tau_at(j, n).normalized_constant.ln()).sum::<f64>() / d as f64).exp()
            });
            let gap = cheb_side.map(|c| (d_n.ln() - c.ln()).abs());
            LadderRow { n, m_n, l_n, log_v, d_n, cheb_side, gap }
        })
        .collect();

    let mut sandwich = Vec::new();
    for n in a + 1..=n_max {
        let m_n = basis.len_upto(n);
        for j in 1..=d {
            if m_n + j > trajectory.len() {
                continue;
            }
            let log_ratio = trajectory.log_v_at(m_n + j) - trajectory.log_v_at(m_n + j - 1);
            let bounds = sandwich_bounds(m_n, j, t[j - 1][(n + 1 - a) as usize].minimax_value, tau_at(j - 1, n + 1).minimax_value);
            sandwich.push(sandwich_row(n, j, log_ratio, bounds, SANDWICH_SLACK));
        }
    }

    Ok(DiameterReport { kind: cfg.kind, rows, trajectory, refined, tau, t, tau_limits, sandwich, warnings })
}

pub const SANDWICH_SLACK: f64 = 1e-9;

/// `(log t^{n+1}, log((m_n + j) τ^{n+1}))` from raw minimax values.
pub fn sandwich_bounds(m_n: usize, j: usize, t_raw: f64, tau_raw: f64) -> (f64, f64) {
    (t_raw.ln(), ((m_n + j) as f64).ln() + tau_raw.ln())
}

/// Both inequalities of the ratio sandwich, in log form with `slack`.
pub fn sandwich_row(n: u32, j: usize, log_ratio: f64, (log_lower, log_upper): (f64, f64), slack: f64) -> SandwichRow {
    SandwichRow {
        n,
        j,
        log_ratio,
        log_lower,
        log_upper,
        lower_ok: log_lower <= log_ratio + slack,
        upper_ok: log_ratio <= log_upper + slack,
    }
}

/// Sandwich diagnostics recomputed from a report; `(hard, soft)` failure
/// counts where only `exhaustive` runs turn lower-bound misses into hard
/// failures.
pub fn sandwich_check(report: &DiameterReport, exhaustive: bool) -> (usize, usize) {
    let mut hard = 0;
    let mut soft = 0;
    for row in &report.sandwich {
        if !row.upper_ok {
            hard += 1;
        }
        if !row.lower_ok {
            if exhaustive {
                hard += 1;
            } else {
                soft += 1;
            }
        }
    }
    (hard, soft)
}

#[derive(Clone, Debug)]
pub struct EquivalenceRow {
    pub n: u32,
    pub l_n: u64,
    /// `log|Van_C| − log|Van|` on the refined `C`-basis set.
    pub delta: f64,
    pub d_n_c: f64,
    pub d_n_monomial: f64,
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
    /// Least-squares line `delta ≈ slope·n + intercept` over `n >= a`.
    pub slope: f64,
    pub intercept: f64,
    pub fit_residual: f64,
}

/// Compares `C`-basis and monomial Vandermonde determinants on the same
/// point sets.
pub fn monomial_equivalence_check(curve: &Curve, report: &DiameterReport, k: &CompactSet) -> Result<EquivalenceReport> {
    let basis = curve.c_basis();
    let mut rows = Vec::new();
    for (row, run) in report.rows.iter().zip(&report.refined) {
        let pts: Vec<Vec<C64>> = run.selected.iter().map(|&i| k.points[i].clone()).collect();
        let c = vandermonde_logabs(curve, BasisKind::C, &pts)?;
        let mono = vandermonde_logabs(curve, BasisKind::Monomial, &pts)?;
        if c.is_zero() || mono.is_zero() {
            return Err(Error::Internal(format!("singular Vandermonde matrix at n = {}", row.n)));
        }
        debug_assert_eq!(pts.len(), basis.len_upto(row.n));
        rows.push(EquivalenceRow {
            n: row.n,
            l_n: row.l_n,
            delta: c.log_abs - mono.log_abs,
            d_n_c: (c.log_abs / row.l_n as f64).exp(),
            d_n_monomial: (mono.log_abs / row.l_n as f64).exp(),
        });
    }
    let fit: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.n >= curve.a()).map(|r| (r.n as f64, r.delta)).collect();
    let (slope, intercept, fit_residual) = line_fit(&fit);
    Ok(EquivalenceReport { rows, slope, intercept, fit_residual })
}

/// Ordinary least squares; returns `(slope, intercept, max |residual|)`.
fn line_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (0.0, pts.first().map_or(0.0, |p| p.1), 0.0);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let res = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).abs()).fold(0.0, f64::max);
    (slope, intercept, res)
}

/// `log d_n` at `n` for one set, from a refined greedy run.
pub fn log_diameter(curve: &Curve, k: &CompactSet, n: u32, kind: BasisKind, passes: usize) -> Result<f64> {
    let basis = curve.c_basis();
    let m = basis.len_upto(n);
    let run = exchange_refine(curve, k, &greedy_fekete(curve, k, m, kind)?, passes)?;
    Ok(run.log_v_at(m) / basis.degree_sum(n) as f64)
}

/// `d_n(K1) / d_n(K2)` with both ladders computed identically.
pub fn relative_diameter(curve: &Curve, k1: &CompactSet, k2: &CompactSet, n: u32, passes: usize) -> Result<f64> {
    let l1 = log_diameter(curve, k1, n, BasisKind::C, passes)?;
    let l2 = log_diameter(curve, k2, n, BasisKind::C, passes)?;
    if l2.is_nan() || l2.exp() <= PIVOT_FLOOR {
        return Err(Error::Input("reference set has vanishing diameter estimate".into()));
    }
    Ok((l1 - l2).exp())
}

#[derive(Clone, Debug)]
pub struct TransformLawReport {
    pub n: u32,
    pub d_v: f64,
    pub d_tv: f64,
    /// `T_1(λ_j)` over the directions of `V`.
    pub t1: Vec<C64>,
    /// `d_V(K) (Π_j |T_1(λ_j)|)^{1/d}`.
    pub predicted: f64,
    pub rel_gap: f64,
    /// `d_V(K) |Π_j T_1(λ_j)|`, the product without the `1/d` root.
    pub unrooted: f64,
}

/// Compares `d_n(T(K))` on `T(V)` with `d_n(K) (Π_j |T_1(λ_j)|)^{1/d}`.
pub fn transform_law_check(
    curve: &Curve,
    k: &CompactSet,
    t: &AffineMap,
    image: &Curve,
    image_set: &CompactSet,
    n: u32,
    passes: usize,
) -> Result<TransformLawReport> {
    let dirs: Vec<_> = curve.directions.iter().map(|v| v.lambda.clone()).collect();
    let t1 = t.check_admissible(&dirs, curve.config.vanish_tol)?;
    let d_v = log_diameter(curve, k, n, BasisKind::C, passes)?.exp();
    let d_tv = log_diameter(image, image_set, n, BasisKind::C, passes)?.exp();
    let log_prod: f64 = t1.iter().map(|z| z.norm().ln()).sum();
    let predicted = d_v * (log_prod / curve.d() as f64).exp();
    Ok(TransformLawReport {
        n,
        d_v,
        d_tv,
        rel_gap: (d_tv - predicted).abs() / predicted,
        unrooted: d_v * log_prod.exp(),
        t1,
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveConfig;
    use crate::exactnum::{BigRational, GaussRational};
    use crate::groebner::Ideal;
    use crate::sampler::{apply_affine, build_set, rational_circle, SampleConfig};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn line() -> Ideal {
        Ideal::parse(2, &["z2 - z1"]).unwrap()
    }

    fn hyperbola() -> Ideal {
        Ideal::parse(2, &["z2^2 - z1^2 - 1"]).unwrap()
    }

    fn circle_set(i: &Ideal, m: usize, r: i64) -> CompactSet {
        build_set(i, &rational_circle(m, &BigRational::from_integer(r.into())), 100.0, &SampleConfig::default()).unwrap()
    }

    fn analyze(i: &Ideal) -> Curve {
        Curve::analyze(i, 10, CurveConfig::default()).unwrap()
    }

    fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
        if m == 0 {
            return vec![vec![]];
        }
        (m - 1..n)
            .flat_map(|last| {
                subsets(last, m - 1).into_iter().map(move |mut s| {
                    s.push(last);
                    s
                })
            })
            .collect()
    }

    fn exhaustive(curve: &Curve, k: &CompactSet, m: usize) -> f64 {
        subsets(k.len(), m)
            .iter()
            .map(|s| {
                let pts: Vec<_> = s.iter().map(|&i| k.points[i].clone()).collect();
                let ld = vandermonde_logabs(curve, BasisKind::C, &pts).unwrap();
                if ld.is_zero() { f64::NEG_INFINITY } else { ld.log_abs }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn small_vandermondes() {
        let c = analyze(&line());
        let p = |x: f64| vec![C64::new(x, 0.0), C64::new(x, 0.0)];
        assert_eq!(vandermonde_logabs(&c, BasisKind::C, &[p(0.3)]).unwrap().log_abs, 0.0);
        let two = vandermonde_logabs(&c, BasisKind::C, &[p(0.3), p(-1.2)]).unwrap();
        assert!((two.log_abs - 1.5f64.ln()).abs() < 1e-15);
        assert!(vandermonde_logabs(&c, BasisKind::Monomial, &[p(0.3), p(0.3)]).unwrap().is_zero());
    }

    #[test]
    fn permutations_keep_the_modulus() {
        let c = analyze(&hyperbola());
        let k = circle_set(&hyperbola(), 8, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut pts: Vec<_> = k.points[..7].to_vec();
        let base = vandermonde_logabs(&c, BasisKind::C, &pts).unwrap();
        for _ in 0..10 {
            pts.shuffle(&mut rng);
            let ld = vandermonde_logabs(&c, BasisKind::C, &pts).unwrap();
            assert!((ld.log_abs - base.log_abs).abs() < 1e-12);
            let ratio = ld.phase / base.phase;
            assert!((ratio - 1.0).norm() < 1e-9 || (ratio + 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn row_operations_leave_van_unchanged() {
        let c = analyze(&hyperbola());
        let k = circle_set(&hyperbola(), 8, 1);
        let pts = &k.points[..5];
        let e = basis_matrix(&c, BasisKind::C, pts, 5);
        let shifted = CMatrix::from_fn(5, 5, |i, j| {
            if j == 4 { e[(i, 4)] - C64::new(0.7, -2.0) * e[(i, 1)] + C64::new(3.0, 0.0) * e[(i, 0)] } else { e[(i, j)] }
        });
        let a = logdet(&e).unwrap().log_abs;
        let b = logdet(&shifted).unwrap().log_abs;
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn greedy_on_the_line() {
        let c = analyze(&line());
        let k = circle_set(&line(), 64, 1);
        let one = greedy_fekete(&c, &k, 1, BasisKind::C).unwrap();
        assert_eq!(one.log_v, vec![0.0]);
        let two = greedy_fekete(&c, &k, 2, BasisKind::C).unwrap();
        let brute = (0..64)
            .flat_map(|i| (0..64).map(move |j| (i, j)))
            .map(|(i, j)| (k.points[i][0] - k.points[j][0]).norm())
            .fold(0.0, f64::max);
        assert!((two.log_v[1] - brute.ln()).abs() < 1e-12);
        assert!((two.log_v[1] - 2f64.ln()).abs() < 1e-6);
        // Greedy fixes an antipodal pair first, so the third point sits at a
        // right angle: V_3 = 2·√2·√2 against 3√3 for the equilateral optimum.
        let three = greedy_fekete(&c, &k, 3, BasisKind::C).unwrap();
        let best = exhaustive(&c, &k, 3);
        assert!((three.log_v[2] - 4f64.ln()).abs() < 1e-5);
        assert!((best - 27f64.sqrt().ln()).abs() < 1e-2);
        let refined = exchange_refine(&c, &k, &three, 10).unwrap();
        assert!((best - refined.log_v[2]).abs() < 1e-9, "{best} {}", refined.log_v[2]);
    }

    #[test]
    fn exchange_is_monotone_from_bad_starts() {
        let c = analyze(&hyperbola());
        let k = circle_set(&hyperbola(), 16, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let mut idx: Vec<usize> = (0..k.len()).collect();
            idx.shuffle(&mut rng);
            let sel = idx[..5].to_vec();
            let e = basis_matrix(&c, BasisKind::C, &k.points, 5);
            let b = CMatrix::from_fn(5, 5, |i, j| e[(sel[i], j)]);
            let start = logdet(&b).unwrap();
            if start.is_zero() {
                continue;
            }
            let run = FeketeRun { kind: BasisKind::C, selected: sel, log_v: vec![0.0, 0.0, 0.0, 0.0, start.log_abs] };
            let out = exchange_refine(&c, &k, &run, 10).unwrap();
            assert!(out.log_v[4] >= start.log_abs);
            // An optimal configuration is a fixed point.
            let again = exchange_refine(&c, &k, &out, 10).unwrap();
            assert_eq!(again.selected, out.selected);
        }
    }

    #[test]
    fn too_few_points_is_an_error() {
        let c = analyze(&line());
        let k = circle_set(&line(), 4, 1);
        assert!(greedy_fekete(&c, &k, 5, BasisKind::C).is_err());
        let dup = CompactSet { points: vec![k.points[0].clone(); 3], ..k.clone() };
        let err = greedy_fekete(&c, &dup, 2, BasisKind::C).unwrap_err();
        assert!(err.to_string().contains("basis element 2"), "{err}");
    }

    #[test]
    fn line_ladder_block_structure() {
        let c = analyze(&line());
        let k = circle_set(&line(), 32, 1);
        let r = diameter_ladder(&c, &k, &LadderConfig { n_max: 6, ..Default::default() }).unwrap();
        for row in &r.rows {
            assert_eq!(row.m_n, row.n as usize + 1);
            assert_eq!(row.l_n, (row.n * (row.n + 1) / 2) as u64);
        }
        assert_eq!(r.log_v_nj(&c, 3, 1), r.trajectory.log_v_at(c.c_basis().len_upto(4)));
        // On the full circle V_n = (n+1)^{(n+1)/2}, so d_n <= (n+1)^{1/n}.
        for row in &r.rows {
            let bound = ((row.n + 1) as f64).powf(1.0 / row.n as f64);
            assert!(row.d_n <= bound * (1.0 + 1e-9) && row.d_n >= 0.99 * bound, "{row:?}");
        }
        assert_eq!(sandwich_check(&r, false).0, 0);
        let eq = monomial_equivalence_check(&c, &r, &k).unwrap();
        assert!(eq.rows.iter().all(|row| row.delta.abs() < 1e-12), "{:?}", eq.rows);
    }

    #[test]
    fn hyperbola_blocks_grow_by_d() {
        let c = analyze(&hyperbola());
        let b = c.c_basis();
        for n in 1..10 {
            assert_eq!(b.len_upto(n + 1) - b.len_upto(n), 2);
            let degs = b.degrees(b.len_upto(n));
            assert_eq!(degs.iter().map(|&x| x as u64).sum::<u64>(), b.degree_sum(n));
        }
    }

    #[test]
    fn relative_and_transformed_diameters() {
        let c = analyze(&line());
        let k1 = circle_set(&line(), 48, 2);
        let k2 = circle_set(&line(), 48, 1);
        assert_eq!(relative_diameter(&c, &k2, &k2, 8, 5).unwrap(), 1.0);
        let rel = relative_diameter(&c, &k1, &k2, 8, 5).unwrap();
        assert!((rel - 2.0).abs() < 1e-9, "{rel}");
        let t = AffineMap::scaling(2, GaussRational::from_integer(2));
        let (i2, k3) = apply_affine(&t, &k2, &line()).unwrap();
        let image = analyze(&i2);
        let law = transform_law_check(&c, &k2, &t, &image, &k3, 8, 5).unwrap();
        assert!(law.rel_gap < 1e-9);
        assert!((law.unrooted - law.predicted).abs() < 1e-12);
        let id = AffineMap::identity(2);
        let (i4, k4) = apply_affine(&id, &k2, &line()).unwrap();
        let law = transform_law_check(&c, &k2, &id, &analyze(&i4), &k4, 8, 5).unwrap();
        assert_eq!(law.rel_gap, 0.0);
    }
}
