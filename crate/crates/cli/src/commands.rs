//! The five subcommands. Each writes its artifacts into the output directory
//! and reports whether its own pass condition held.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use curvecap_core::chebyshev::{cheb_table, estimate_limit, rows_to_csv, tau_q, transform_check, ChebRow, Family};
use curvecap_core::curve::{check_hypotheses, directional_poly, CurveRing};
use curvecap_core::fekete::{
    diameter_ladder, monomial_equivalence_check, sandwich_check, transform_law_check, DiameterReport, LadderConfig,
};
use curvecap_core::sampler::{apply_affine, build_set, load_points};
use curvecap_core::{BasisKind, CompactSet, Curve, Error, Result, C64};
use serde_json::{json, Value};

use crate::spec::{Job, SampleSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    HypothesisViolation,
    ToleranceUnmet,
}

fn cx(z: &C64) -> Value {
    json!([z.re, z.im])
}

/// Non-finite floats become `null` in JSON.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn write_json(out: &Path, name: &str, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(out.join(name), text + "\n")?;
    Ok(())
}

fn provenance(job: &Job) -> Value {
    let a = &job.spec.analysis;
    let t = &a.tolerances;
    json!({
        "seed": job.seed,
        "s_min": a.s_min,
        "s_max": a.s_max,
        "n_max": a.n_max,
        "passes": a.passes,
        "basis": job.basis_kind().name(),
        "tolerances": {
            "gap": t.gap,
            "diagnostic": t.diagnostic,
            "minimax": t.minimax,
            "max_iters": t.max_iters,
            "residual": t.residual,
            "dedup": t.dedup,
        },
    })
}

fn analyze_curve(job: &Job) -> Result<Curve> {
    Curve::analyze(&job.ideal, job.spec.analysis.hilbert_degree, job.curve_config())
}

fn sample(job: &Job) -> Result<CompactSet> {
    let cfg = job.sample_config();
    let r_max = job.spec.sampling.as_ref().map_or(1e6, |s| s.r_max);
    match &job.source {
        None => Err(Error::Input("this command needs a `sampling` block".into())),
        Some(SampleSource::Circle(base)) => build_set(&job.ideal, base, r_max, &cfg),
        Some(SampleSource::File(path)) => load_points(path, &job.ideal, &cfg),
    }
}

pub fn analyze(job: &Job, out: &Path) -> Result<Outcome> {
    let cfg = job.curve_config();
    let ring = CurveRing::build(&job.ideal, job.spec.analysis.hilbert_degree)?;
    let matrices = ring.mul_matrices()?;
    let (hyp, points) = check_hypotheses(&ring, &matrices, &cfg);
    let gb = ring.groebner();
    let quotient: Vec<Value> = (0..=ring.n0() + 2)
        .map(|n| json!({"degree": n, "monomials": gb.quotient_basis(n).iter().map(|a| a.to_string()).collect::<Vec<_>>()}))
        .collect();
    let mats: Vec<Value> = matrices
        .iter()
        .enumerate()
        .map(|(j, m)| {
            json!({
                "variable": format!("z{}", j + 1),
                "rows": m.rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut report = json!({
        "nvars": job.spec.nvars,
        "generators": job.spec.generators,
        "groebner_basis": gb.elements().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "lt_ideal": gb.lt_exponents().iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "d": ring.d(),
        "n0": ring.n0(),
        "a": ring.a(),
        "quotient_basis": quotient,
        "mul_matrices": mats,
        "hypotheses": {
            "lt_pure_powers": hyp.lt_pure_powers,
            "z1_identity": hyp.z1_identity,
            "simple_eigenvalues": hyp.simple_eigenvalues,
            "distinct_coordinates": hyp.distinct_coordinates,
            "messages": hyp.messages,
        },
        "provenance": provenance(job),
    });
    if !hyp.all_pass() {
        report["status"] = json!("hypothesis_violation");
        write_json(out, "analyze.json", &report)?;
        return Ok(Outcome::HypothesisViolation);
    }
    let points = points?;
    let directions = points
        .into_iter()
        .map(|p| directional_poly(&ring, &matrices, p, &cfg))
        .collect::<Result<Vec<_>>>()?;
    report["infinity_points"] = directions
        .iter()
        .map(|v| json!({"coords": v.lambda.coords.iter().map(cx).collect::<Vec<_>>(), "residuals": v.lambda.residuals}))
        .collect();
    report["directional_polys"] = directions
        .iter()
        .map(|v| {
            json!({
                "degree": v.form.degree,
                "terms": v.form.basis.iter().zip(&v.form.coeffs)
                    .map(|(a, c)| json!({"monomial": a.to_string(), "coeff": cx(c)}))
                    .collect::<Vec<_>>(),
                "eigvec_deviation": v.eigvec_deviation,
            })
        })
        .collect();
    report["status"] = json!("ok");
    write_json(out, "analyze.json", &report)?;
    Ok(Outcome::Pass)
}

/// Appends the solver settings to every CSV row.
fn tag_rows(csv: &str, extra_header: &str, extra: &str) -> String {
    let mut out = String::new();
    for (i, line) in csv.lines().enumerate() {
        let tail = if i == 0 { extra_header } else { extra };
        let _ = writeln!(out, "{line},{tail}");
    }
    out
}

fn s_range(job: &Job, curve: &Curve) -> Result<std::ops::RangeInclusive<u32>> {
    let a = curve.a();
    let an = &job.spec.analysis;
    if an.s_max < a {
        return Err(Error::Input(format!("s_max = {} is below the minimum degree a = {a}", an.s_max)));
    }
    let lo = an.s_min.unwrap_or(a);
    if lo < a || lo > an.s_max {
        return Err(Error::Input(format!("s_min = {lo} must lie in [a, s_max] = [{a}, {}]", an.s_max)));
    }
    Ok(lo..=an.s_max)
}

fn limits(rows: &[ChebRow], d: usize) -> Vec<Value> {
    (0..d)
        .map(|dir| {
            let seq: Vec<(u32, f64)> = rows
                .iter()
                .filter(|r| r.direction == dir && r.family == Family::Tau)
                .map(|r| (r.s, r.result.normalized_constant))
                .collect();
            match estimate_limit(&seq) {
                Ok(l) => json!({"direction_index": dir, "last": l.last, "tail_geomean": l.tail_geomean, "diagnostic": l.diagnostic}),
                Err(e) => json!({"direction_index": dir, "error": e.to_string()}),
            }
        })
        .collect()
}

pub fn cheb(job: &Job, out: &Path) -> Result<Outcome> {
    let curve = analyze_curve(job)?;
    let range = s_range(job, &curve)?;
    let k = sample(job)?;
    let cfg = job.minimax();
    let rows = cheb_table(&curve, &k, range, &[Family::Tau, Family::T], &cfg)?;
    let mut csv = rows_to_csv(&rows);
    let mut tau_q_values = Vec::new();
    if let Some((q, n_max)) = &job.tau_q {
        for n in 1..=*n_max {
            let r = tau_q(&curve, &k, q, n, &cfg)?;
            let _ = writeln!(
                csv,
                ",{n},tauQ,{:.17e},{:.17e},{},{}",
                r.minimax_value, r.normalized_constant, r.iterations, r.converged
            );
            tau_q_values.push(json!({"n": n, "normalized_constant": r.normalized_constant, "converged": r.converged}));
        }
    }
    let extra = format!("{:e},{},{}", cfg.tol, cfg.max_iters, job.seed);
    fs::write(out.join("cheb.csv"), tag_rows(&csv, "tol,max_iters,seed", &extra))?;
    let unconverged = rows.iter().filter(|r| !r.result.converged).count();
    write_json(
        out,
        "cheb.json",
        &json!({
            "d": curve.d(),
            "a": curve.a(),
            "sample_size": k.len(),
            "limits": limits(&rows, curve.d()),
            "tau_q": tau_q_values,
            "unconverged_rows": unconverged,
            "provenance": provenance(job),
        }),
    )?;
    Ok(Outcome::Pass)
}

fn ladder(job: &Job, curve: &Curve, k: &CompactSet) -> Result<DiameterReport> {
    let an = &job.spec.analysis;
    let cfg = LadderConfig { n_max: an.n_max, passes: an.passes, kind: job.basis_kind(), minimax: job.minimax() };
    diameter_ladder(curve, k, &cfg)
}

fn diameter_summary(job: &Job, curve: &Curve, k: &CompactSet, report: &DiameterReport) -> Result<Value> {
    let (hard, soft) = sandwich_check(report, false);
    let sandwich: Vec<Value> = report
        .sandwich
        .iter()
        .map(|r| {
            json!({"n": r.n, "j": r.j, "log_ratio": num(r.log_ratio), "log_lower": num(r.log_lower),
                   "log_upper": num(r.log_upper), "lower_ok": r.lower_ok, "upper_ok": r.upper_ok})
        })
        .collect();
    let equivalence = if report.kind == BasisKind::C {
        let eq = monomial_equivalence_check(curve, report, k)?;
        json!({
            "slope": num(eq.slope),
            "intercept": num(eq.intercept),
            "fit_residual": num(eq.fit_residual),
            "rows": eq.rows.iter().map(|r| json!({"n": r.n, "l_n": r.l_n, "delta": num(r.delta),
                "d_n_c": num(r.d_n_c), "d_n_monomial": num(r.d_n_monomial)})).collect::<Vec<_>>(),
        })
    } else {
        Value::Null
    };
    Ok(json!({
        "d": curve.d(),
        "a": curve.a(),
        "sample_size": k.len(),
        "tau_limits": report.tau_limits.iter().enumerate().map(|(j, l)| json!({"direction_index": j,
            "last": l.last, "tail_geomean": l.tail_geomean, "diagnostic": l.diagnostic})).collect::<Vec<_>>(),
        "sandwich": {"upper_failures": hard, "lower_soft_failures": soft, "rows": sandwich},
        "equivalence": equivalence,
        "warnings": report.warnings,
        "provenance": provenance(job),
    }))
}

fn ladder_csv(job: &Job, report: &DiameterReport) -> String {
    let an = &job.spec.analysis;
    tag_rows(&report.to_csv(), "passes,basis,seed", &format!("{},{},{}", an.passes, report.kind.name(), job.seed))
}

pub fn fekete(job: &Job, out: &Path) -> Result<Outcome> {
    let curve = analyze_curve(job)?;
    let k = sample(job)?;
    let report = ladder(job, &curve, &k)?;
    fs::write(out.join("fekete.csv"), ladder_csv(job, &report))?;
    write_json(out, "fekete.json", &diameter_summary(job, &curve, &k, &report)?)?;
    Ok(Outcome::Pass)
}

pub fn verify(job: &Job, out: &Path) -> Result<Outcome> {
    let curve = analyze_curve(job)?;
    let k = sample(job)?;
    let report = ladder(job, &curve, &k)?;
    let n = job.spec.analysis.n_max;
    let tol = &job.spec.analysis.tolerances;
    let row = report.row(n).ok_or_else(|| Error::Input(format!("n_max = {n} has no ladder row")))?;
    let gap = row.gap.ok_or_else(|| {
        Error::Input(format!("n_max = {n} is below the minimum degree a = {}; no Chebyshev side", curve.a()))
    })?;
    let diagnostic = report.tau_limits.iter().map(|l| l.diagnostic).fold(0.0, f64::max);
    let pass = gap <= tol.gap && diagnostic <= tol.diagnostic;
    let mut summary = diameter_summary(job, &curve, &k, &report)?;
    summary["verdict"] = json!({
        "n": n,
        "d_n": num(row.d_n),
        "cheb_side": row.cheb_side.map(num),
        "gap": num(gap),
        "gap_tolerance": tol.gap,
        "diagnostic": num(diagnostic),
        "diagnostic_tolerance": tol.diagnostic,
        "pass": pass,
    });
    fs::write(out.join("fekete.csv"), ladder_csv(job, &report))?;
    write_json(out, "verify.json", &summary)?;
    Ok(if pass { Outcome::Pass } else { Outcome::ToleranceUnmet })
}

pub fn transform(job: &Job, out: &Path) -> Result<Outcome> {
    let t = job.transform.as_ref().ok_or_else(|| Error::Input("transform needs `analysis.transform`".into()))?;
    let curve = analyze_curve(job)?;
    let k = sample(job)?;
    let (image_ideal, image_set) = apply_affine(t, &k, &job.ideal)?;
    let image = Curve::analyze(&image_ideal, job.spec.analysis.hilbert_degree, job.curve_config())?;
    let an = &job.spec.analysis;
    let s = an.s_max;
    if s < curve.a() {
        return Err(Error::Input(format!("s_max = {s} is below the minimum degree a = {}", curve.a())));
    }
    let rows = transform_check(&curve, &k, t, &image, &image_set, s, &job.minimax())?;
    let law = transform_law_check(&curve, &k, t, &image, &image_set, an.n_max, an.passes)?;
    write_json(
        out,
        "transform.json",
        &json!({
            "image_generators": image_ideal.generators().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "chebyshev": {
                "s": s,
                "rows": rows.iter().map(|r| json!({"eta": r.eta, "lambda": r.lambda, "t1": cx(&r.t1),
                    "tau_v": r.tau_v, "tau_tv": r.tau_tv, "rel_gap": r.rel_gap})).collect::<Vec<_>>(),
            },
            "diameter": {
                "n": law.n,
                "d_v": law.d_v,
                "d_tv": law.d_tv,
                "t1": law.t1.iter().map(cx).collect::<Vec<_>>(),
                "predicted": law.predicted,
                "rel_gap": law.rel_gap,
                "unrooted": law.unrooted,
            },
            "provenance": provenance(job),
        }),
    )?;
    Ok(Outcome::Pass)
}
