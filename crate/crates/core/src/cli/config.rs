//! Configuration file formats shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::{CliError, Context};
use crate::expr::{parse, Expr};
use crate::hull::{basener_expr, box_sample, Lambda};
use crate::point::{parse_complex, CPoint};
use crate::rng;

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

/// Parses JSON; the error names the file and the line and column.
pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub(crate) fn resolve(ctx: &Context, rel: &str) -> PathBuf {
    ctx.base_dir().join(rel)
}

/// A complex coordinate: a JSON number or an `a+bi` string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub(crate) enum Coord {
    Real(f64),
    Text(String),
}

impl Coord {
    fn value(&self) -> Result<Complex64, CliError> {
        match self {
            Coord::Real(x) => Ok(Complex64::new(*x, 0.0)),
            Coord::Text(s) => parse_complex(s).map_err(|e| CliError::input(e.to_string())),
        }
    }
}

pub(crate) fn to_point(coords: &[Coord], n: usize, what: &str) -> Result<CPoint, CliError> {
    if coords.len() != n {
        return Err(CliError::input(format!("{what}: expected {n} coordinates, got {}", coords.len())));
    }
    let v = coords.iter().map(Coord::value).collect::<Result<Vec<_>, _>>()?;
    CPoint::new(v).map_err(|e| CliError::input(format!("{what}: {e}")))
}

pub(crate) fn to_points(list: &[Vec<Coord>], n: usize, what: &str) -> Result<Vec<CPoint>, CliError> {
    list.iter()
        .enumerate()
        .map(|(i, c)| to_point(c, n, &format!("{what}[{i}]")))
        .collect()
}

/// Function file: `{"n", "name", "expr"}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub n: usize,
    pub name: String,
    pub expr: String,
}

impl FunctionFile {
    pub(crate) fn compile(&self) -> Result<Expr, CliError> {
        parse(&self.expr, self.n).map_err(|e| CliError::input(format!("function {:?}: {e}", self.name)))
    }
}

fn default_box() -> f64 {
    2.0
}

fn default_convexity_samples() -> usize {
    200
}

/// Domain model file `Ω = {φ < 0}`. `box` bounds the region used for
/// boundary sampling and convexity certification.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub n: usize,
    pub name: String,
    pub defining: String,
    pub boundary_samples: usize,
    pub seed: u64,
    #[serde(rename = "box", default = "default_box")]
    pub halfwidth: f64,
    #[serde(default = "default_convexity_samples")]
    pub convexity_samples: usize,
}

impl DomainFile {
    pub(crate) fn compile(&self) -> Result<Expr, CliError> {
        parse(&self.defining, self.n).map_err(|e| CliError::input(format!("domain {:?}: {e}", self.name)))
    }

    pub(crate) fn validate(&self) -> Result<(), CliError> {
        if !(self.halfwidth > 0.0 && self.halfwidth.is_finite()) {
            return Err(CliError::input(format!("domain {:?}: box must be positive", self.name)));
        }
        Ok(())
    }
}

/// A file path (relative to the config) or an inline object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub(crate) enum FileOr<T> {
    Path(String),
    Inline(T),
}

impl<T: DeserializeOwned + Clone> FileOr<T> {
    pub(crate) fn load(&self, ctx: &Context) -> Result<T, CliError> {
        match self {
            FileOr::Path(p) => read_json(&resolve(ctx, p)),
            FileOr::Inline(t) => Ok(t.clone()),
        }
    }
}

/// `{"builtin": "basener", ...}`: translates `z ↦ f_λ(z − p)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct BuiltinSpec {
    pub builtin: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub p: Option<Vec<Coord>>,
    /// Explicit λ; otherwise `lambda_count` random unit λ's.
    #[serde(default)]
    pub lambda: Option<Vec<Coord>>,
    #[serde(default)]
    pub lambda_count: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Hull only: add `construct_lambda(z, p)` for every candidate `z`.
    #[serde(default)]
    pub per_candidate: bool,
}

/// A named function with its compiled expression.
#[derive(Debug, Clone)]
pub(crate) struct NamedExpr {
    pub name: String,
    pub expr: Expr,
}

impl BuiltinSpec {
    pub(crate) fn check(&self, n: Option<usize>) -> Result<usize, CliError> {
        if self.builtin != "basener" {
            return Err(CliError::input(format!("unknown builtin {:?} (available: basener)", self.builtin)));
        }
        match (self.n, n) {
            (Some(a), Some(b)) if a != b => Err(CliError::input(format!("builtin n = {a} conflicts with n = {b}"))),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Err(CliError::input("builtin basener needs \"n\"")),
        }
    }

    pub(crate) fn center(&self, n: usize) -> Result<CPoint, CliError> {
        match &self.p {
            Some(p) => to_point(p, n, "builtin p"),
            None => Ok(CPoint::origin(n)),
        }
    }

    /// Members from explicit or random λ; `index` separates seed streams of
    /// several builtins in one config.
    pub(crate) fn expand(&self, n: usize, run_seed: u64, index: u64) -> Result<Vec<NamedExpr>, CliError> {
        let p = self.center(n)?;
        let lambdas = match &self.lambda {
            Some(l) => {
                let v = to_point(l, n, "builtin lambda")?;
                vec![Lambda::new(v.into_coords()).map_err(|e| CliError::input(e.to_string()))?]
            }
            None => {
                let count = self.lambda_count.unwrap_or(1);
                let mut rng = match self.seed {
                    Some(s) => rng::stream(s, rng::DOMAIN_FAMILY, 0),
                    None => rng::stream(run_seed, rng::DOMAIN_FAMILY, index),
                };
                (0..count).map(|_| Lambda::random(n, &mut rng)).collect()
            }
        };
        lambdas
            .iter()
            .enumerate()
            .map(|(k, l)| {
                Ok(NamedExpr {
                    name: format!("basener[{index}].{k}"),
                    expr: basener_expr(l, &p).map_err(|e| CliError::input(e.to_string()))?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub(crate) enum FunctionSpec {
    Path(String),
    Builtin(BuiltinSpec),
    Inline(FunctionFile),
}

impl FunctionSpec {
    /// Compiles the function(s); `n` is the dimension expected by the caller.
    pub(crate) fn expand(&self, ctx: &Context, n: Option<usize>, run_seed: u64, index: u64) -> Result<Vec<NamedExpr>, CliError> {
        let file = match self {
            FunctionSpec::Builtin(b) => {
                let n = b.check(n)?;
                return b.expand(n, run_seed, index);
            }
            FunctionSpec::Path(p) => read_json::<FunctionFile>(&resolve(ctx, p))?,
            FunctionSpec::Inline(f) => f.clone(),
        };
        if let Some(n) = n {
            if file.n != n {
                return Err(CliError::input(format!("function {:?} has n = {}, expected {n}", file.name, file.n)));
            }
        }
        Ok(vec![NamedExpr {
            name: file.name.clone(),
            expr: file.compile()?,
        }])
    }
}

/// Uniform points of `center ± halfwidth`, optionally avoiding a ball.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RandomBox {
    pub count: usize,
    pub halfwidth: f64,
    #[serde(default)]
    pub center: Option<Vec<Coord>>,
    /// Reject points closer than this to the center.
    #[serde(default)]
    pub exclude_radius: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub(crate) enum PointsSpec {
    List(Vec<Vec<Coord>>),
    File { file: String },
    Random { random: RandomBox },
}

impl PointsSpec {
    pub(crate) fn load(&self, ctx: &Context, n: usize, run_seed: u64, domain: u64) -> Result<Vec<CPoint>, CliError> {
        match self {
            PointsSpec::List(l) => to_points(l, n, "points"),
            PointsSpec::File { file } => read_points_csv(&resolve(ctx, file), n),
            PointsSpec::Random { random } => {
                let center = match &random.center {
                    Some(c) => to_point(c, n, "random center")?,
                    None => CPoint::origin(n),
                };
                if !(random.halfwidth > 0.0 && random.halfwidth.is_finite()) {
                    return Err(CliError::input("random halfwidth must be positive"));
                }
                let mut rng = rng::stream(random.seed.unwrap_or(run_seed), domain, 0);
                let mut out = Vec::with_capacity(random.count);
                let mut tries = 0usize;
                while out.len() < random.count {
                    if tries > 1000 * random.count.max(1) {
                        return Err(CliError::input("exclude_radius leaves no room in the sampling box"));
                    }
                    tries += 1;
                    let z = box_sample(&center, random.halfwidth, 1, &mut rng).remove(0);
                    if z.dist(&center) >= random.exclude_radius {
                        out.push(z);
                    }
                }
                Ok(out)
            }
        }
    }
}

pub(crate) fn point_header(n: usize) -> Vec<String> {
    (1..=n).flat_map(|k| [format!("re{k}"), format!("im{k}")]).collect()
}

/// Points CSV with header `re1,im1,…,reN,imN`.
pub(crate) fn read_points_csv(path: &Path, n: usize) -> Result<Vec<CPoint>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let expected = point_header(n);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(CliError::input(format!(
            "{}: header must be {}",
            path.display(),
            expected.join(",")
        )));
    }
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let xs = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::input(format!("{}: row {}: {e}", path.display(), row + 2)))?;
        let p = CPoint::from_interleaved(&xs)
            .map_err(|e| CliError::input(format!("{}: row {}: {e}", path.display(), row + 2)))?;
        out.push(p);
    }
    Ok(out)
}

/// Effective master seed: command line, then config, then 0.
pub(crate) fn run_seed(ctx: &Context, config: Option<u64>) -> u64 {
    ctx.seed.or(config).unwrap_or(0)
}

/// Standard Gaussian direction normalized to the unit sphere of ℂⁿ.
pub(crate) fn unit_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    use rand_distr::StandardNormal;
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let len = crate::point::norm(&v);
        if len > 1e-12 {
            return v.into_iter().map(|c| c / len).collect();
        }
    }
}
