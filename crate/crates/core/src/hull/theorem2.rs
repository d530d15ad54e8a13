//! Separation of a ball around a boundary point from the hull of `K`.
//!
//! For `p`, `r` with `‖x − p‖ ≥ r` on `K` and `z ∈ B(p, r/√n)`, the λ from
//! [`construct_lambda`] gives
//!
//! ```text
//! |f_λ(z−p)| = Σ|z_i−p_i| / ‖z−p‖²  ≥ 1/‖z−p‖  > √n/r
//!            ≥ Σ|w_i−p_i| / ‖w−p‖²  ≥ |f_λ(w−p)|        (w ∈ ∂B(p,r))
//! ```
//!
//! and `|f_λ(t·x)| = |f_λ(x)|/t` pushes every `x ∈ K` below its radial
//! projection onto `∂B(p, r)`. Each link is checked numerically.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::basener::{basener_offset, construct_lambda, Lambda};
use super::HullError;
use crate::point::{norm, CPoint};

/// Slack for the non-strict links and the equalities, relative to the
/// larger side.
pub const LINK_SLACK: f64 = 1e-12;
/// Samples closer than this to `p` are rejected.
pub const EPS_CENTER: f64 = 1e-9;
const MAX_RECORDED: usize = 20;

#[derive(Debug, Clone)]
pub struct Theorem2Config {
    pub n: usize,
    pub p: CPoint,
    pub r: f64,
    pub k: Vec<CPoint>,
    pub z: Vec<CPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainLink {
    /// `|f_λ(z−p)| = Σ|z_i−p_i| / ‖z−p‖²`
    Identity,
    /// `Σ|z_i−p_i| / ‖z−p‖² ≥ 1/‖z−p‖`
    SumBound,
    /// `1/‖z−p‖ > √n/r`
    RadiusBound,
    /// `√n/‖w−p‖ ≥ Σ|w_i−p_i| / ‖w−p‖²`
    CauchySchwarz,
    /// `Σ|w_i−p_i| / ‖w−p‖² ≥ |f_λ(w−p)|`
    Modulus,
    /// `|f_λ(t·v)|·t = |f_λ(v)|`
    Scaling,
    /// `|f_λ(x−p)| ≤ |f_λ(w−p)|` for `w` the radial projection of `x`.
    Radial,
    /// `|f_λ(z−p)| > max_K |f_λ(x−p)|`
    Separation,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LinkCounts {
    pub identity: usize,
    pub sum_bound: usize,
    pub radius_bound: usize,
    pub cauchy_schwarz: usize,
    pub modulus: usize,
    pub scaling: usize,
    pub radial: usize,
    pub separation: usize,
}

impl LinkCounts {
    fn bump(&mut self, link: ChainLink) {
        let slot = match link {
            ChainLink::Identity => &mut self.identity,
            ChainLink::SumBound => &mut self.sum_bound,
            ChainLink::RadiusBound => &mut self.radius_bound,
            ChainLink::CauchySchwarz => &mut self.cauchy_schwarz,
            ChainLink::Modulus => &mut self.modulus,
            ChainLink::Scaling => &mut self.scaling,
            ChainLink::Radial => &mut self.radial,
            ChainLink::Separation => &mut self.separation,
        };
        *slot += 1;
    }

    pub fn total(&self) -> usize {
        self.identity
            + self.sum_bound
            + self.radius_bound
            + self.cauchy_schwarz
            + self.modulus
            + self.scaling
            + self.radial
            + self.separation
    }

    pub fn merge(&mut self, other: &LinkCounts) {
        self.identity += other.identity;
        self.sum_bound += other.sum_bound;
        self.radius_bound += other.radius_bound;
        self.cauchy_schwarz += other.cauchy_schwarz;
        self.modulus += other.modulus;
        self.scaling += other.scaling;
        self.radial += other.radial;
        self.separation += other.separation;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub link: ChainLink,
    pub z_index: usize,
    pub k_index: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PreconditionViolation {
    /// `"K"` or `"z"`.
    pub set: &'static str,
    pub index: usize,
    pub distance: f64,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Report {
    pub n: usize,
    pub r: f64,
    pub z_checked: usize,
    pub counts: LinkCounts,
    /// First few violations in evaluation order.
    pub violations: Vec<Violation>,
    pub preconditions: Vec<PreconditionViolation>,
    /// `min_z (|f_λ(z−p)| − max_K |f_λ(x−p)|)`.
    pub min_margin: f64,
    /// `|f_λ(z−p)|` per z sample, in input order.
    pub values: Vec<f64>,
    /// `max_K |f_λ(x−p)|` per z sample.
    pub k_maxima: Vec<f64>,
}

impl Theorem2Report {
    pub fn violation_count(&self) -> usize {
        self.counts.total()
    }

    pub fn is_clean(&self) -> bool {
        self.counts.total() == 0 && self.preconditions.is_empty()
    }
}

fn ge_with_slack(a: f64, b: f64) -> bool {
    a >= b - LINK_SLACK * a.abs().max(b.abs())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= LINK_SLACK * a.abs().max(b.abs())
}

fn l1(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).sum()
}

pub fn theorem2_experiment(cfg: &Theorem2Config) -> Result<Theorem2Report, HullError> {
    let n = cfg.n;
    for pt in std::iter::once(&cfg.p).chain(&cfg.k).chain(&cfg.z) {
        if pt.dim() != n {
            return Err(HullError::DimensionMismatch { expected: n, got: pt.dim() });
        }
    }
    let sqrt_n = (n as f64).sqrt();
    let inner = cfg.r / sqrt_n;
    let mut preconditions = Vec::new();
    let mut k_ok = Vec::with_capacity(cfg.k.len());
    for (index, x) in cfg.k.iter().enumerate() {
        let d = x.dist(&cfg.p);
        if d < cfg.r * (1.0 - LINK_SLACK) {
            preconditions.push(PreconditionViolation {
                set: "K",
                index,
                distance: d,
                message: format!("‖x−p‖ = {d} < r = {}", cfg.r),
            });
        } else {
            k_ok.push(index);
        }
    }
    if k_ok.is_empty() {
        return Err(HullError::EmptyK);
    }
    // Offsets of K points and their radial projections onto ∂B(p, r).
    let k_offsets: Vec<(usize, Vec<Complex64>, Vec<Complex64>, f64)> = k_ok
        .iter()
        .map(|&i| {
            let v = cfg.k[i].sub(&cfg.p);
            let d = norm(&v);
            let w: Vec<Complex64> = v.iter().map(|c| c * (cfg.r / d)).collect();
            (i, v, w, d / cfg.r)
        })
        .collect();

    let mut counts = LinkCounts::default();
    let mut violations = Vec::new();
    let mut record = |counts: &mut LinkCounts, v: Violation| {
        counts.bump(v.link);
        if violations.len() < MAX_RECORDED {
            violations.push(v);
        }
    };
    let mut min_margin = f64::INFINITY;
    let mut values = Vec::new();
    let mut k_maxima = Vec::new();
    let mut z_checked = 0;

    for (zi, z) in cfg.z.iter().enumerate() {
        let d = z.dist(&cfg.p);
        if !(d > EPS_CENTER && d < inner) {
            preconditions.push(PreconditionViolation {
                set: "z",
                index: zi,
                distance: d,
                message: format!("‖z−p‖ = {d} not in ({EPS_CENTER}, r/√n = {inner})"),
            });
            continue;
        }
        z_checked += 1;
        let lambda: Lambda = construct_lambda(z, &cfg.p)?;
        let dz = z.sub(&cfg.p);
        let lhs = basener_offset(&lambda, &dz)?.norm();
        let ratio = l1(&dz) / (d * d);
        let link = |link, k_index, lhs, rhs| Violation {
            link,
            z_index: zi,
            k_index,
            lhs,
            rhs,
        };
        if !close(lhs, ratio) {
            record(&mut counts, link(ChainLink::Identity, None, lhs, ratio));
        }
        if !ge_with_slack(ratio, 1.0 / d) {
            record(&mut counts, link(ChainLink::SumBound, None, ratio, 1.0 / d));
        }
        if !(1.0 / d > sqrt_n / cfg.r) {
            record(&mut counts, link(ChainLink::RadiusBound, None, 1.0 / d, sqrt_n / cfg.r));
        }

        let mut k_max = 0.0f64;
        for (ki, v, w, t) in &k_offsets {
            let fw = basener_offset(&lambda, w)?.norm();
            let fv = basener_offset(&lambda, v)?.norm();
            let w_ratio = l1(w) / (cfg.r * cfg.r);
            if !ge_with_slack(sqrt_n / cfg.r, w_ratio) {
                record(&mut counts, link(ChainLink::CauchySchwarz, Some(*ki), sqrt_n / cfg.r, w_ratio));
            }
            if !ge_with_slack(w_ratio, fw) {
                record(&mut counts, link(ChainLink::Modulus, Some(*ki), w_ratio, fw));
            }
            let scaled: Vec<Complex64> = w.iter().map(|c| c * *t).collect();
            let fs = basener_offset(&lambda, &scaled)?.norm();
            if !close(fs * t, fw) {
                record(&mut counts, link(ChainLink::Scaling, Some(*ki), fs * t, fw));
            }
            if !ge_with_slack(fw, fv) {
                record(&mut counts, link(ChainLink::Radial, Some(*ki), fv, fw));
            }
            k_max = k_max.max(fv);
        }
        if !(lhs > k_max) {
            record(&mut counts, link(ChainLink::Separation, None, lhs, k_max));
        }
        min_margin = min_margin.min(lhs - k_max);
        values.push(lhs);
        k_maxima.push(k_max);
    }

    Ok(Theorem2Report {
        n,
        r: cfg.r,
        z_checked,
        counts,
        violations,
        preconditions,
        min_margin,
        values,
        k_maxima,
    })
}

fn gaussian_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let len = norm(&v);
        if len > 1e-6 {
            return v.into_iter().map(|c| c / len).collect();
        }
    }
}

/// Random instance: `p ∈ [−1, 1]^{2n}`, `r ∈ [0.1, 2]`, `K` uniform in the
/// box `p ± 3r` outside `B(p, r)`, `z` uniform in `B(p, r/√n)` minus a tiny
/// ball around `p`.
pub fn random_theorem2_config<R: Rng + ?Sized>(n: usize, k_count: usize, z_count: usize, rng: &mut R) -> Theorem2Config {
    let p = CPoint::new(
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
            .collect(),
    )
    .expect("finite center");
    let r = rng.random_range(0.1..=2.0);
    let half = 3.0 * r;
    let mut k = Vec::with_capacity(k_count);
    while k.len() < k_count {
        let x: Vec<Complex64> = p
            .coords()
            .iter()
            .map(|c| {
                Complex64::new(
                    c.re + rng.random_range(-half..=half),
                    c.im + rng.random_range(-half..=half),
                )
            })
            .collect();
        let x = CPoint::new(x).expect("finite K point");
        if x.dist(&p) >= r {
            k.push(x);
        }
    }
    let inner = r / (n as f64).sqrt();
    let mut z = Vec::with_capacity(z_count);
    while z.len() < z_count {
        let dir = gaussian_direction(n, rng);
        let u: f64 = rng.random_range(0.0..1.0);
        let rho = inner * u.powf(1.0 / (2 * n) as f64);
        if rho <= EPS_CENTER {
            continue;
        }
        let pt = CPoint::new(p.coords().iter().zip(&dir).map(|(c, d)| c + d * rho).collect()).expect("finite z");
        let dist = pt.dist(&p);
        if dist > EPS_CENTER && dist < inner {
            z.push(pt);
        }
    }
    Theorem2Config { n, p, r, k, z }
}
