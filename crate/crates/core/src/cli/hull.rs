//! `hull` and `thm2`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{
    point_header, read_json, read_points_csv, resolve, run_seed, to_point, to_points, unit_direction, Coord,
    FunctionSpec, NamedExpr,
};
use super::{all_passed, to_json, Check, CliError, Context, Outcome};
use crate::hull::{
    basener_expr, box_sample, construct_lambda, discrete_hull, random_theorem2_config, theorem2_experiment,
    FamilyMember, HullProblem, LinkCounts, Theorem2Config, Theorem2Report, Violation, CERTIFY_POINTS,
};
use crate::point::CPoint;
use crate::rng;

/// Refuse grids larger than this.
const MAX_GRID: usize = 2_000_000;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SphereSpec {
    p: Vec<Coord>,
    r: f64,
    count: usize,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum KSpec {
    File { file: String },
    Sphere { sphere: SphereSpec },
    Points { points: Vec<Vec<Coord>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    center: Vec<Coord>,
    halfwidth: f64,
    per_axis: usize,
    /// Real axes `re1`, `im1`, … held at a fixed value.
    #[serde(default)]
    fixed_axes: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CandidateSpec {
    Grid { grid: GridSpec },
    File { file: String },
    Points { points: Vec<Vec<Coord>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BallSpec {
    p: Vec<Coord>,
    radius: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct HullExpect {
    /// Every candidate `z` with `0 < ‖z − p‖ < radius` must be excluded.
    #[serde(default)]
    excluded_ball: Option<BallSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HullConfig {
    n: usize,
    /// Hull order; family members are certified q-holomorphic. Defaults to n.
    #[serde(default)]
    q: Option<usize>,
    family: Vec<FunctionSpec>,
    #[serde(rename = "K")]
    k: KSpec,
    candidates: CandidateSpec,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    expect: HullExpect,
}

fn load_k(ctx: &Context, spec: &KSpec, n: usize, seed: u64) -> Result<Vec<CPoint>, CliError> {
    match spec {
        KSpec::File { file } => read_points_csv(&resolve(ctx, file), n),
        KSpec::Points { points } => to_points(points, n, "K"),
        KSpec::Sphere { sphere } => {
            let p = to_point(&sphere.p, n, "K sphere p")?;
            if !(sphere.r > 0.0 && sphere.r.is_finite()) {
                return Err(CliError::input("K sphere radius must be positive"));
            }
            let mut rng = rng::stream(sphere.seed.unwrap_or(seed), rng::DOMAIN_K, 0);
            (0..sphere.count)
                .map(|_| {
                    let d = unit_direction(n, &mut rng);
                    CPoint::new(p.coords().iter().zip(&d).map(|(c, u)| c + u * sphere.r).collect())
                        .map_err(|e| CliError::input(e.to_string()))
                })
                .collect()
        }
    }
}

fn axis_index(name: &str, n: usize) -> Option<usize> {
    let (part, k) = if let Some(k) = name.strip_prefix("re") {
        (0, k)
    } else {
        (1, name.strip_prefix("im")?)
    };
    let k: usize = k.parse().ok()?;
    (1..=n).contains(&k).then_some(2 * (k - 1) + part)
}

fn grid_points(g: &GridSpec, n: usize) -> Result<Vec<CPoint>, CliError> {
    let center = to_point(&g.center, n, "grid center")?.interleaved();
    if !(g.halfwidth >= 0.0 && g.halfwidth.is_finite()) || g.per_axis == 0 {
        return Err(CliError::input("grid needs halfwidth ≥ 0 and per_axis ≥ 1"));
    }
    let mut fixed = vec![None; 2 * n];
    for (name, &v) in &g.fixed_axes {
        let i = axis_index(name, n)
            .ok_or_else(|| CliError::input(format!("unknown grid axis {name:?}; use re1, im1, …, re{n}, im{n}")))?;
        if !v.is_finite() {
            return Err(CliError::input(format!("fixed axis {name} is not finite")));
        }
        fixed[i] = Some(v);
    }
    let free: Vec<usize> = (0..2 * n).filter(|&i| fixed[i].is_none()).collect();
    let total = (g.per_axis as f64).powi(free.len() as i32);
    if total > MAX_GRID as f64 {
        return Err(CliError::input(format!("grid has {total} points, limit {MAX_GRID}")));
    }
    let total = total as usize;
    let ticks: Vec<f64> = (0..g.per_axis)
        .map(|k| {
            if g.per_axis == 1 {
                0.0
            } else {
                -g.halfwidth + 2.0 * g.halfwidth * k as f64 / (g.per_axis - 1) as f64
            }
        })
        .collect();
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut xs: Vec<f64> = (0..2 * n).map(|i| fixed[i].unwrap_or(center[i])).collect();
        let mut rest = idx;
        for &axis in free.iter().rev() {
            xs[axis] += ticks[rest % g.per_axis];
            rest /= g.per_axis;
        }
        out.push(CPoint::from_interleaved(&xs).map_err(|e| CliError::input(e.to_string()))?);
    }
    Ok(out)
}

/// Box around `K ∪ Z` used to certify family members.
fn certification_sample(k: &[CPoint], z: &[CPoint], n: usize, seed: u64, index: u64) -> Vec<CPoint> {
    let mut lo = vec![f64::INFINITY; 2 * n];
    let mut hi = vec![f64::NEG_INFINITY; 2 * n];
    for p in k.iter().chain(z) {
        for (i, x) in p.interleaved().into_iter().enumerate() {
            lo[i] = lo[i].min(x);
            hi[i] = hi[i].max(x);
        }
    }
    let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let half = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (b - a)).fold(1.0, f64::max);
    let center = CPoint::from_interleaved(&mid).expect("finite bounding box");
    let mut rng = rng::stream(seed, rng::DOMAIN_CERTIFY, index);
    box_sample(&center, half, CERTIFY_POINTS, &mut rng)
}

#[derive(Debug, Serialize)]
struct FamilyEntry {
    name: String,
    q: usize,
    residual_bound: f64,
    max_on_k: f64,
}

#[derive(Debug, Serialize)]
struct HullSummary {
    command: &'static str,
    label: &'static str,
    n: usize,
    q: usize,
    k_points: usize,
    candidates: usize,
    members: usize,
    excluded: usize,
    singular: usize,
    /// Smallest positive margin among excluded candidates.
    min_exclusion_margin: Option<f64>,
    /// Largest margin (≤ 0) among members.
    max_member_margin: Option<f64>,
    k_in_candidates: usize,
    family: Vec<FamilyEntry>,
    checks: Vec<Check>,
    passed: bool,
}

pub(crate) fn cmd_hull(ctx: &Context) -> Result<Outcome, CliError> {
    ctx.tol.restrict(&[])?;
    let cfg: HullConfig = read_json(&ctx.config)?;
    let n = cfg.n;
    if n == 0 {
        return Err(CliError::input("n must be positive"));
    }
    let q = cfg.q.unwrap_or(n);
    if q == 0 || q > n {
        return Err(CliError::input(format!("q = {q} is outside 1..={n}")));
    }
    let seed = run_seed(ctx, cfg.seed);
    let k = load_k(ctx, &cfg.k, n, seed)?;
    if k.is_empty() {
        return Err(CliError::input("K is empty"));
    }
    let candidates = match &cfg.candidates {
        CandidateSpec::Grid { grid } => grid_points(grid, n)?,
        CandidateSpec::File { file } => read_points_csv(&resolve(ctx, file), n)?,
        CandidateSpec::Points { points } => to_points(points, n, "candidates")?,
    };
    if cfg.family.is_empty() {
        return Err(CliError::input("family is empty"));
    }

    let mut named: Vec<NamedExpr> = Vec::new();
    for (i, spec) in cfg.family.iter().enumerate() {
        named.extend(spec.expand(ctx, Some(n), seed, i as u64)?);
        if let FunctionSpec::Builtin(b) = spec {
            if b.per_candidate {
                let p = b.center(n)?;
                for (ci, z) in candidates.iter().enumerate() {
                    if z.dist(&p) == 0.0 {
                        continue;
                    }
                    let lambda = construct_lambda(z, &p).map_err(|e| CliError::input(e.to_string()))?;
                    named.push(NamedExpr {
                        name: format!("basener[{i}].z{ci}"),
                        expr: basener_expr(&lambda, &p).map_err(|e| CliError::input(e.to_string()))?,
                    });
                }
            }
        }
    }
    let family = named
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let sample = certification_sample(&k, &candidates, n, seed, i as u64);
            FamilyMember::certify(f.expr.clone(), q, &sample).map_err(|e| CliError::input(format!("family member {}: {e}", f.name)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let prob = HullProblem::new(n, k.clone(), candidates.clone(), family).map_err(|e| CliError::input(e.to_string()))?;
    let result = discrete_hull(&prob).map_err(|e| CliError::input(e.to_string()))?;

    let k_in: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(_, z)| k.iter().any(|x| x == *z))
        .map(|(i, _)| i)
        .collect();
    let k_out = k_in.iter().filter(|&&i| !result.outcomes[i].member).count();
    let mut checks = vec![Check::new(
        "k_members",
        k_out == 0,
        format!("{k_out} of {} candidates in K are excluded", k_in.len()),
    )];
    if let Some(ball) = &cfg.expect.excluded_ball {
        let p = to_point(&ball.p, n, "excluded_ball p")?;
        let inside: Vec<usize> = candidates
            .iter()
            .enumerate()
            .filter(|(_, z)| {
                let d = z.dist(&p);
                d > 0.0 && d < ball.radius
            })
            .map(|(i, _)| i)
            .collect();
        let kept = inside.iter().filter(|&&i| result.outcomes[i].member).count();
        checks.push(Check::new(
            "excluded_ball",
            kept == 0,
            format!("{kept} of {} candidates in the ball are members", inside.len()),
        ));
    }
    let passed = all_passed(&checks);

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = point_header(n);
    header.extend(["member".to_string(), "margin".to_string()]);
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for (z, o) in candidates.iter().zip(&result.outcomes) {
        let mut rec: Vec<String> = z.interleaved().iter().map(|x| x.to_string()).collect();
        rec.push(if o.member { "1".into() } else { "0".into() });
        rec.push(o.margin.map_or(String::new(), |m| m.to_string()));
        w.write_record(&rec).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let csv_bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;

    let members = result.member_count();
    let singular = result.outcomes.iter().filter(|o| o.singular.is_some()).count();
    let min_exclusion_margin = result
        .outcomes
        .iter()
        .filter(|o| !o.member)
        .filter_map(|o| o.margin)
        .reduce(f64::min);
    let max_member_margin = result
        .outcomes
        .iter()
        .filter(|o| o.member)
        .filter_map(|o| o.margin)
        .reduce(f64::max);
    let family: Vec<FamilyEntry> = prob
        .family
        .iter()
        .zip(&named)
        .zip(&result.maxima)
        .map(|((m, f), &mx)| FamilyEntry {
            name: f.name.clone(),
            q: m.q,
            residual_bound: m.residual_bound,
            max_on_k: mx,
        })
        .collect();
    let summary = format!(
        "hull n = {n}, q = {q}: {members} of {} candidates in the outer hull, {} family members",
        candidates.len(),
        family.len()
    );
    let report = HullSummary {
        command: "hull",
        label: "outer hull approximation",
        n,
        q,
        k_points: k.len(),
        candidates: candidates.len(),
        members,
        excluded: candidates.len() - members,
        singular,
        min_exclusion_margin,
        max_member_margin,
        k_in_candidates: k_in.len(),
        family,
        checks,
        passed,
    };
    Ok(Outcome {
        files: vec![("hull.json".into(), to_json(&report)), ("hull.csv".into(), csv_bytes)],
        summary,
        passed,
    })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Dims {
    One(usize),
    Many(Vec<usize>),
}

fn default_dims() -> Dims {
    Dims::One(2)
}
fn default_configs() -> usize {
    1000
}
fn default_k_count() -> usize {
    200
}
fn default_z_count() -> usize {
    50
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Thm2Config {
    /// Dimension, or a list cycled over the configurations.
    #[serde(default = "default_dims")]
    n: Dims,
    #[serde(default = "default_configs")]
    configs: usize,
    #[serde(default = "default_k_count")]
    k_count: usize,
    #[serde(default = "default_z_count")]
    z_count: usize,
    #[serde(default)]
    seed: Option<u64>,
    /// Also run the fixed instance p = 0, r = 1, z = (0.3, 0.3) in ℂ².
    #[serde(default = "default_true")]
    worked_example: bool,
}

#[derive(Debug, Serialize)]
struct WorkedExample {
    value: f64,
    expected: f64,
    inverse_distance: f64,
    sqrt_n: f64,
    k_max: f64,
    clean: bool,
}

#[derive(Debug, Serialize)]
struct Thm2Summary {
    command: &'static str,
    dims: Vec<usize>,
    configs: usize,
    k_count: usize,
    z_count: usize,
    z_checked: usize,
    violation_counts: LinkCounts,
    precondition_violations: usize,
    /// First recorded violations as (configuration, violation).
    violations: Vec<(usize, Violation)>,
    min_margin: f64,
    worked_example: Option<WorkedExample>,
    checks: Vec<Check>,
    passed: bool,
}

fn worked_example(seed: u64) -> Result<WorkedExample, CliError> {
    let mut rng = rng::stream(seed, rng::DOMAIN_K, 1);
    let k = (0..200)
        .map(|_| CPoint::new(unit_direction(2, &mut rng)).expect("finite"))
        .collect();
    let z = CPoint::from_reals(&[0.3, 0.3]).expect("finite");
    let inverse_distance = 1.0 / z.norm();
    let cfg = Theorem2Config {
        n: 2,
        p: CPoint::origin(2),
        r: 1.0,
        k,
        z: vec![z],
    };
    let rep = theorem2_experiment(&cfg).map_err(|e| CliError::input(e.to_string()))?;
    Ok(WorkedExample {
        value: rep.values[0],
        expected: 10.0 / 3.0,
        inverse_distance,
        sqrt_n: 2f64.sqrt(),
        k_max: rep.k_maxima[0],
        clean: rep.is_clean(),
    })
}

pub(crate) fn cmd_thm2(ctx: &Context) -> Result<Outcome, CliError> {
    ctx.tol.restrict(&[])?;
    let cfg: Thm2Config = read_json(&ctx.config)?;
    let dims = match cfg.n {
        Dims::One(n) => vec![n],
        Dims::Many(v) => v,
    };
    if dims.is_empty() || dims.contains(&0) {
        return Err(CliError::input("n must be a positive dimension or a nonempty list of them"));
    }
    if cfg.k_count == 0 || cfg.z_count == 0 {
        return Err(CliError::input("k_count and z_count must be positive"));
    }
    let seed = run_seed(ctx, cfg.seed);
    let reports = (0..cfg.configs)
        .into_par_iter()
        .map(|i| {
            let n = dims[i % dims.len()];
            let mut rng = rng::stream(seed, rng::DOMAIN_THM2, i as u64);
            let c = random_theorem2_config(n, cfg.k_count, cfg.z_count, &mut rng);
            theorem2_experiment(&c)
        })
        .collect::<Result<Vec<Theorem2Report>, _>>()
        .map_err(|e| CliError::input(e.to_string()))?;

    let mut counts = LinkCounts::default();
    let mut violations = Vec::new();
    let mut preconditions = 0;
    let mut z_checked = 0;
    let mut min_margin = f64::INFINITY;
    for (i, r) in reports.iter().enumerate() {
        counts.merge(&r.counts);
        preconditions += r.preconditions.len();
        z_checked += r.z_checked;
        min_margin = min_margin.min(r.min_margin);
        for v in &r.violations {
            if violations.len() < 20 {
                violations.push((i, v.clone()));
            }
        }
    }
    let mut checks = vec![
        Check::new(
            "chain",
            counts.total() == 0,
            format!("{} link violations over {z_checked} z samples", counts.total()),
        ),
        Check::new(
            "preconditions",
            preconditions == 0,
            format!("{preconditions} precondition violations"),
        ),
    ];
    let worked = if cfg.worked_example {
        let w = worked_example(seed)?;
        let ok = w.clean
            && (w.value - w.expected).abs() <= 1e-12 * w.expected
            && w.value > w.inverse_distance
            && w.inverse_distance > w.sqrt_n
            && w.sqrt_n >= w.k_max;
        checks.push(Check::new(
            "worked_example",
            ok,
            format!("|f_λ(0.3, 0.3)| = {} (expected 10/3)", w.value),
        ));
        Some(w)
    } else {
        None
    };
    let passed = all_passed(&checks);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["config", "n", "r", "z_checked", "violations", "preconditions", "min_margin"])
        .map_err(|e| CliError::Io(e.to_string()))?;
    for (i, r) in reports.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.n.to_string(),
            r.r.to_string(),
            r.z_checked.to_string(),
            r.violation_count().to_string(),
            r.preconditions.len().to_string(),
            r.min_margin.to_string(),
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let csv_bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;

    let summary = format!(
        "thm2: {} configurations, {z_checked} z samples, {} violations, min margin {min_margin:e}",
        cfg.configs,
        counts.total()
    );
    let report = Thm2Summary {
        command: "thm2",
        dims,
        configs: cfg.configs,
        k_count: cfg.k_count,
        z_count: cfg.z_count,
        z_checked,
        violation_counts: counts,
        precondition_violations: preconditions,
        violations,
        min_margin,
        worked_example: worked,
        checks,
        passed,
    };
    Ok(Outcome {
        files: vec![("thm2.json".into(), to_json(&report)), ("thm2.csv".into(), csv_bytes)],
        summary,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn grid_with_fixed_axes() {
        let g = GridSpec {
            center: vec![Coord::Real(1.0), Coord::Text("0+2i".into())],
            halfwidth: 1.0,
            per_axis: 3,
            fixed_axes: [("im1".to_string(), 0.5), ("re2".to_string(), -1.0)].into_iter().collect(),
        };
        let pts = grid_points(&g, 2).unwrap();
        assert_eq!(pts.len(), 9);
        for p in &pts {
            assert_eq!(p[0].im, 0.5);
            assert_eq!(p[1].re, -1.0);
        }
        assert_eq!(pts[0][0], Complex64::new(0.0, 0.5));
        assert_eq!(pts[0][1], Complex64::new(-1.0, 1.0));
        assert_eq!(pts[8][0], Complex64::new(2.0, 0.5));
        assert_eq!(pts[8][1], Complex64::new(-1.0, 3.0));
    }

    #[test]
    fn axis_names() {
        assert_eq!(axis_index("re1", 2), Some(0));
        assert_eq!(axis_index("im2", 2), Some(3));
        assert_eq!(axis_index("re3", 2), None);
        assert_eq!(axis_index("x1", 2), None);
    }
}
