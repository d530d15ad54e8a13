//! `peak`.

use serde::{Deserialize, Serialize};

use super::config::{read_json, run_seed, to_point, Coord, DomainFile, FileOr};
use super::{to_json, CliError, Context, Outcome};
use crate::levi::ZeroTol;
use crate::peak::{
    assemble_peak, verify_peak, ModelDomain, PeakError, PeakParams, PeakReport, PeakSamples, PeakSummary,
    VerifySettings,
};
use crate::rng;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Radius {
    Fixed(f64),
    Named(String),
}

fn default_c() -> f64 {
    1.0
}
fn default_rho() -> f64 {
    0.5
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplesSpec {
    boundary: usize,
    interior: usize,
    tube: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PeakConfig {
    domain: FileOr<DomainFile>,
    p: Vec<Coord>,
    q: usize,
    #[serde(default = "default_c")]
    c: f64,
    #[serde(rename = "rho_V", default = "default_rho")]
    rho_v: f64,
    #[serde(default)]
    r: Option<Radius>,
    #[serde(default)]
    w_margin: Option<f64>,
    #[serde(default)]
    samples: Option<SamplesSpec>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct PeakRun {
    command: &'static str,
    domain: String,
    defining: String,
    n: usize,
    seed: u64,
    convexity_min_eigenvalue: f64,
    construction: Option<PeakSummary>,
    error: Option<String>,
    report: Option<PeakReport>,
    passed: bool,
}

/// Errors that mean the configuration asks for something outside the
/// supported class, as opposed to a construction that did not succeed.
fn is_input_error(e: &PeakError) -> bool {
    !matches!(e, PeakError::TubeUnsatisfiable { .. } | PeakError::Geometry(_) | PeakError::Form(_))
}

fn peak_err(e: PeakError) -> CliError {
    CliError::input(e.to_string())
}

pub(crate) fn cmd_peak(ctx: &Context) -> Result<Outcome, CliError> {
    ctx.tol.restrict(&["residual", "margin", "value", "fd_step", "ztol"])?;
    let cfg: PeakConfig = read_json(&ctx.config)?;
    let dom_file = cfg.domain.load(ctx)?;
    dom_file.validate()?;
    let n = dom_file.n;
    let phi = dom_file.compile()?;
    let p = to_point(&cfg.p, n, "p")?;
    let seed = run_seed(ctx, cfg.seed);

    let mut params = PeakParams {
        c: cfg.c,
        rho_v: cfg.rho_v,
        ..PeakParams::default()
    };
    match &cfg.r {
        None => {}
        Some(Radius::Named(s)) if s == "auto" => {}
        Some(Radius::Named(s)) => return Err(CliError::input(format!("r must be a number or \"auto\", got {s:?}"))),
        Some(Radius::Fixed(r)) => params.r = Some(*r),
    }
    if let Some(m) = cfg.w_margin {
        params.w_margin = m;
    }
    if let Some(z) = ctx.tol.get("ztol") {
        params.ztol = ZeroTol::Absolute(z);
    }
    params.validate().map_err(peak_err)?;

    let mut settings = VerifySettings::default();
    if let Some(s) = &cfg.samples {
        settings.samples = PeakSamples {
            boundary: s.boundary,
            interior: s.interior,
            tube: s.tube,
        };
    }
    if let Some(v) = ctx.tol.get("residual") {
        settings.residual_tol = v;
    }
    if let Some(v) = ctx.tol.get("margin") {
        settings.margin_min = v;
    }
    if let Some(v) = ctx.tol.get("value") {
        settings.value_tol = v;
    }
    if let Some(v) = ctx.tol.get("fd_step") {
        if v <= 0.0 {
            return Err(CliError::input("fd_step must be positive"));
        }
        settings.fd_step = v;
    }

    let mut dom = ModelDomain::new(phi, dom_file.halfwidth).map_err(peak_err)?;
    let cert = dom
        .certify_convexity(dom_file.convexity_samples, &mut rng::stream(seed, rng::DOMAIN_CERTIFY, 0))
        .map_err(peak_err)?;

    let mut run = PeakRun {
        command: "peak",
        domain: dom_file.name.clone(),
        defining: dom.phi.to_string(),
        n,
        seed,
        convexity_min_eigenvalue: cert.min_eigenvalue,
        construction: None,
        error: None,
        report: None,
        passed: false,
    };
    match assemble_peak(&dom, &p, cfg.q, &params, &mut rng::stream(seed, rng::DOMAIN_PEAK, 0)) {
        Ok(pc) => {
            let rep = verify_peak(&pc, &settings, &mut rng::stream(seed, rng::DOMAIN_PEAK, 1)).map_err(|e| {
                if is_input_error(&e) {
                    peak_err(e)
                } else {
                    CliError::input(format!("verification could not sample the domain: {e}"))
                }
            })?;
            run.passed = rep.passed;
            run.construction = Some(pc.summary());
            run.report = Some(rep);
        }
        Err(e) if is_input_error(&e) => return Err(peak_err(e)),
        Err(e) => run.error = Some(e.to_string()),
    }

    let summary = match (&run.construction, &run.report) {
        (Some(c), Some(r)) => format!(
            "peak {} q = {}: r = {}, sup off V = {}, residual {:e}",
            run.domain, cfg.q, c.tube.r, r.sup_outside.sup, r.residual.max
        ),
        _ => format!("peak {} q = {}: construction failed: {}", run.domain, cfg.q, run.error.as_deref().unwrap_or("")),
    };
    let passed = run.passed;
    Ok(Outcome {
        files: vec![("peak.json".into(), to_json(&run))],
        summary,
        passed,
    })
}
