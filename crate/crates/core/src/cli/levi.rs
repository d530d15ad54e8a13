//! `levi`, `classify` and `qholo`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{
    point_header, read_json, run_seed, DomainFile, FileOr, FunctionSpec, PointsSpec,
};
use super::{all_passed, to_json, Check, CliError, Context, Outcome};
use crate::expr::eval_jet2;
use crate::forms::{minor_oracle_form, q_holo_form, residual_scale, FormError};
use crate::levi::{
    classify_boundary_point, eig_signature, levi_form, sample_boundary, signature_oracle, LeviError,
    ProjectionSettings, ZeroTol,
};
use crate::point::{format_complex, CPoint};
use crate::rng;

fn matrix_strings(m: &DMatrix<Complex64>) -> Vec<Vec<String>> {
    m.row_iter()
        .map(|r| r.iter().map(|c| format_complex(*c)).collect())
        .collect()
}

fn zero_tol(ctx: &Context, config: Option<f64>) -> Result<ZeroTol, CliError> {
    match ctx.tol.get("ztol").or(config) {
        Some(x) if x.is_finite() && x >= 0.0 => Ok(ZeroTol::Absolute(x)),
        Some(x) => Err(CliError::input(format!("ztol must be finite and nonnegative, got {x}"))),
        None => Ok(ZeroTol::default()),
    }
}

fn levi_input(e: LeviError) -> CliError {
    CliError::input(e.to_string())
}

fn fmt_q(q: Option<usize>) -> String {
    q.map_or("none".into(), |q| q.to_string())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeviConfig {
    function: FunctionSpec,
    points: PointsSpec,
    #[serde(default)]
    seed: Option<u64>,
    /// Absolute zero-eigenvalue tolerance; relative 1e-8·‖H‖ when absent.
    #[serde(default)]
    ztol: Option<f64>,
    #[serde(default)]
    expect: LeviExpect,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeviExpect {
    /// `[n_pos, n_neg, n_zero]` at every point.
    #[serde(default)]
    signature: Option<[usize; 3]>,
    /// Overall minimal q must not exceed this.
    #[serde(default)]
    q_at_most: Option<usize>,
}

#[derive(Debug, Serialize)]
struct LeviPoint {
    point: CPoint,
    levi: Vec<Vec<String>>,
    hermitian_deviation: f64,
    ztol: f64,
    signature: [usize; 3],
    oracle_signature: [usize; 3],
    q: Option<usize>,
}

#[derive(Debug, Serialize)]
struct LeviReport {
    command: &'static str,
    function: String,
    expr: String,
    n: usize,
    points: Vec<LeviPoint>,
    overall_q: Option<usize>,
    checks: Vec<Check>,
    passed: bool,
}

pub(crate) fn cmd_levi(ctx: &Context) -> Result<Outcome, CliError> {
    ctx.tol.restrict(&["ztol"])?;
    let cfg: LeviConfig = read_json(&ctx.config)?;
    let seed = run_seed(ctx, cfg.seed);
    let ztol = zero_tol(ctx, cfg.ztol)?;
    let mut fs = cfg.function.expand(ctx, None, seed, 0)?;
    if fs.len() != 1 {
        return Err(CliError::input("levi takes exactly one function"));
    }
    let f = fs.remove(0);
    let n = f.expr.dim();
    let points = cfg.points.load(ctx, n, seed, rng::DOMAIN_POINTS)?;
    if points.is_empty() {
        return Err(CliError::input("no points"));
    }
    let rows = points
        .par_iter()
        .map(|z| -> Result<LeviPoint, LeviError> {
            let h = levi_form(&f.expr, z)?;
            let tol = ztol.resolve(&h);
            let s = eig_signature(&h, tol)?;
            let o = signature_oracle(&h, tol);
            Ok(LeviPoint {
                point: z.clone(),
                levi: matrix_strings(h.matrix()),
                hermitian_deviation: h.deviation(),
                ztol: tol,
                signature: [s.n_pos, s.n_neg, s.n_zero],
                oracle_signature: [o.n_pos, o.n_neg, o.n_zero],
                q: (s.n_pos > 0).then(|| n - s.n_pos + 1),
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(levi_input)?;
    let overall_q = rows.iter().try_fold(0usize, |acc, r| r.q.map(|q| acc.max(q)));

    let mut checks = Vec::new();
    let disagree = rows.iter().filter(|r| r.signature != r.oracle_signature).count();
    checks.push(Check::new(
        "oracle_agreement",
        disagree == 0,
        format!("{disagree} of {} points disagree with the real-embedding oracle", rows.len()),
    ));
    if let Some(sig) = cfg.expect.signature {
        let bad = rows.iter().filter(|r| r.signature != sig).count();
        checks.push(Check::new(
            "signature",
            bad == 0,
            format!("expected {sig:?}; {bad} of {} points differ", rows.len()),
        ));
    }
    if let Some(qmax) = cfg.expect.q_at_most {
        checks.push(Check::new(
            "q_at_most",
            matches!(overall_q, Some(q) if q <= qmax),
            format!("overall q = {}, bound {qmax}", fmt_q(overall_q)),
        ));
    }
    let passed = all_passed(&checks);
    let summary = format!("levi {}: {} points, overall q = {}", f.name, rows.len(), fmt_q(overall_q));
    let report = LeviReport {
        command: "levi",
        function: f.name,
        expr: f.expr.to_string(),
        n,
        points: rows,
        overall_q,
        checks,
        passed,
    };
    Ok(Outcome {
        files: vec![("levi.json".into(), to_json(&report))],
        summary,
        passed,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyConfig {
    domain: FileOr<DomainFile>,
    /// Boundary points; sampled from the domain when absent.
    #[serde(default)]
    points: Option<PointsSpec>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    ztol: Option<f64>,
    #[serde(default)]
    expect: ClassifyExpect,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyExpect {
    #[serde(default)]
    strict_q_at_most: Option<usize>,
    #[serde(default)]
    weak_q_at_most: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ClassifyPoint {
    point: CPoint,
    gradient_norm: f64,
    restricted_signature: [usize; 3],
    strict_q: Option<usize>,
    weak_q: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ClassifyReport {
    command: &'static str,
    domain: String,
    defining: String,
    n: usize,
    points: Vec<ClassifyPoint>,
    overall_strict_q: Option<usize>,
    overall_weak_q: Option<usize>,
    checks: Vec<Check>,
    passed: bool,
}

pub(crate) fn cmd_classify(ctx: &Context) -> Result<Outcome, CliError> {
    ctx.tol.restrict(&["ztol"])?;
    let cfg: ClassifyConfig = read_json(&ctx.config)?;
    let dom = cfg.domain.load(ctx)?;
    dom.validate()?;
    let phi = dom.compile()?;
    let n = dom.n;
    let ztol = zero_tol(ctx, cfg.ztol)?;
    let seed = ctx.seed.or(cfg.seed).unwrap_or(dom.seed);
    let points = match &cfg.points {
        Some(spec) => spec.load(ctx, n, seed, rng::DOMAIN_POINTS)?,
        None => {
            let mut rng = rng::stream(seed, rng::DOMAIN_BOUNDARY, 0);
            sample_boundary(&phi, dom.boundary_samples, dom.halfwidth, &ProjectionSettings::default(), &mut rng)
                .map_err(levi_input)?
        }
    };
    if points.is_empty() {
        return Err(CliError::input("no boundary points"));
    }
    let rows = points
        .par_iter()
        .map(|p| {
            classify_boundary_point(&phi, p, ztol).map(|c| ClassifyPoint {
                point: c.point,
                gradient_norm: c.gradient.norm(),
                restricted_signature: [c.restricted.n_pos, c.restricted.n_neg, c.restricted.n_zero],
                strict_q: c.strict_q,
                weak_q: c.weak_q,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(levi_input)?;
    let overall = |get: fn(&ClassifyPoint) -> Option<usize>| rows.iter().try_fold(0usize, |acc, r| get(r).map(|q| acc.max(q)));
    let overall_strict_q = overall(|r| r.strict_q);
    let overall_weak_q = overall(|r| r.weak_q);

    let mut checks = Vec::new();
    if let Some(b) = cfg.expect.strict_q_at_most {
        checks.push(Check::new(
            "strict_q_at_most",
            matches!(overall_strict_q, Some(q) if q <= b),
            format!("overall strict q = {}, bound {b}", fmt_q(overall_strict_q)),
        ));
    }
    if let Some(b) = cfg.expect.weak_q_at_most {
        checks.push(Check::new(
            "weak_q_at_most",
            matches!(overall_weak_q, Some(q) if q <= b),
            format!("overall weak q = {}, bound {b}", fmt_q(overall_weak_q)),
        ));
    }
    let passed = all_passed(&checks);
    let summary = format!(
        "classify {}: {} points, strict q = {}, weak q = {}",
        dom.name,
        rows.len(),
        fmt_q(overall_strict_q),
        fmt_q(overall_weak_q)
    );
    let report = ClassifyReport {
        command: "classify",
        domain: dom.name.clone(),
        defining: phi.to_string(),
        n,
        points: rows,
        overall_strict_q,
        overall_weak_q,
        checks,
        passed,
    };
    Ok(Outcome {
        files: vec![("classify.json".into(), to_json(&report))],
        summary,
        passed,
    })
}

fn default_threshold() -> f64 {
    1e-8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QholoConfig {
    function: FunctionSpec,
    q: usize,
    points: PointsSpec,
    #[serde(default)]
    seed: Option<u64>,
    /// Largest admissible residual.
    #[serde(default = "default_threshold")]
    threshold: f64,
}

#[derive(Debug, Serialize)]
struct QholoFunction {
    name: String,
    expr: String,
    max_residual: f64,
    argmax: Option<CPoint>,
    /// Largest `|primary − minor oracle| / scale` over the points.
    max_oracle_discrepancy: f64,
    singular_points: usize,
}

#[derive(Debug, Serialize)]
struct QholoReport {
    command: &'static str,
    n: usize,
    q: usize,
    points: usize,
    threshold: f64,
    functions: Vec<QholoFunction>,
    max_residual: f64,
    checks: Vec<Check>,
    passed: bool,
}

pub(crate) fn cmd_qholo(ctx: &Context) -> Result<Outcome, CliError> {
    ctx.tol.restrict(&["threshold"])?;
    let cfg: QholoConfig = read_json(&ctx.config)?;
    let seed = run_seed(ctx, cfg.seed);
    let threshold = ctx.tol.get("threshold").unwrap_or(cfg.threshold);
    let fs = cfg.function.expand(ctx, None, seed, 0)?;
    let n = fs[0].expr.dim();
    if cfg.q == 0 || cfg.q > n {
        return Err(CliError::input(format!("q = {} is outside 1..={n}", cfg.q)));
    }
    let points = cfg.points.load(ctx, n, seed, rng::DOMAIN_POINTS)?;
    if points.is_empty() {
        return Err(CliError::input("no points"));
    }

    let mut csv_rows: Vec<(usize, usize, Option<f64>)> = Vec::new();
    let mut functions = Vec::with_capacity(fs.len());
    for (fi, f) in fs.iter().enumerate() {
        // `None` marks a point where f is singular.
        let vals = points
            .par_iter()
            .map(|z| -> Result<Option<(f64, f64)>, FormError> {
                let j = match eval_jet2(&f.expr, z) {
                    Ok(j) => j,
                    Err(_) => return Ok(None),
                };
                let r = q_holo_form(&j, cfg.q)?.sup_norm();
                let o = minor_oracle_form(&j, cfg.q)?.sup_norm();
                Ok(Some((r, (r - o).abs() / residual_scale(&j, cfg.q))))
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::input(e.to_string()))?;
        let mut max_residual = 0.0f64;
        let mut argmax = None;
        let mut disc = 0.0f64;
        let mut singular = 0;
        for (pi, v) in vals.iter().enumerate() {
            match v {
                Some((r, d)) => {
                    if *r > max_residual || argmax.is_none() {
                        max_residual = max_residual.max(*r);
                        argmax = Some(points[pi].clone());
                    }
                    disc = disc.max(*d);
                }
                None => singular += 1,
            }
            csv_rows.push((pi, fi, v.map(|x| x.0)));
        }
        if singular == points.len() {
            return Err(CliError::input(format!("function {} is singular at every point", f.name)));
        }
        functions.push(QholoFunction {
            name: f.name.clone(),
            expr: f.expr.to_string(),
            max_residual,
            argmax,
            max_oracle_discrepancy: disc,
            singular_points: singular,
        });
    }
    let max_residual = functions.iter().map(|f| f.max_residual).fold(0.0, f64::max);
    let worst_disc = functions.iter().map(|f| f.max_oracle_discrepancy).fold(0.0, f64::max);
    let checks = vec![
        Check::new(
            "threshold",
            max_residual <= threshold,
            format!("max residual {max_residual:e}, threshold {threshold:e}"),
        ),
        Check::new(
            "oracle_agreement",
            worst_disc <= 1e-10,
            format!("largest relative discrepancy to the minor oracle {worst_disc:e}"),
        ),
    ];
    let passed = all_passed(&checks);

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = point_header(n);
    header.extend(["function".to_string(), "residual".to_string()]);
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for (pi, fi, r) in &csv_rows {
        let mut rec: Vec<String> = points[*pi].interleaved().iter().map(|x| x.to_string()).collect();
        rec.push(fi.to_string());
        rec.push(r.map_or(String::new(), |x| x.to_string()));
        w.write_record(&rec).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let csv_bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;

    let summary = format!(
        "qholo q = {}: {} function(s), {} points, max residual {max_residual:e}",
        cfg.q,
        functions.len(),
        points.len()
    );
    let report = QholoReport {
        command: "qholo",
        n,
        q: cfg.q,
        points: points.len(),
        threshold,
        functions,
        max_residual,
        checks,
        passed,
    };
    Ok(Outcome {
        files: vec![("qholo.json".into(), to_json(&report)), ("qholo.csv".into(), csv_bytes)],
        summary,
        passed,
    })
}
