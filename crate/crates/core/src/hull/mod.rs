//! Discrete q-holomorphic hulls.
//!
//! The hull of `K` relative to a finite family `F` keeps a candidate `z` iff
//! `|f(z)| ≤ max_K |f|` for every `f ∈ F`. Since `F` is a subfamily of all
//! q-holomorphic functions, the result is an outer approximation of the true
//! hull: exclusions are rigorous, memberships are not.

mod basener;
mod theorem2;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::forms::{q_holo_residual, FormError};
use crate::point::CPoint;

pub use basener::{basener_expr, basener_offset, basener_value, construct_lambda, Lambda, EPS_SING};
pub use theorem2::{
    random_theorem2_config, theorem2_experiment, ChainLink, LinkCounts, PreconditionViolation, Theorem2Config,
    Theorem2Report, Violation,
};

/// Certified family members must have residual at most this.
pub const EPS_FAM: f64 = 1e-8;
/// Number of points used to certify a family member.
pub const CERTIFY_POINTS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error("invalid λ: {0}")]
    InvalidLambda(String),
    #[error("evaluation at the singularity")]
    Singular,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("compact sample K is empty")]
    EmptyK,
    #[error("family member {index} failed on K point {point}: {source}")]
    KEvaluation {
        index: usize,
        point: usize,
        source: EvalError,
    },
    #[error("family member not certified for q = {q}: residual {residual:e} > {bound:e}")]
    NotCertified { q: usize, residual: f64, bound: f64 },
    #[error("certification found only {found} usable points of {wanted}")]
    CertificationSample { found: usize, wanted: usize },
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A family function together with its certified q and residual bound.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub expr: Expr,
    pub q: usize,
    /// Largest residual observed on the certification sample.
    pub residual_bound: f64,
}

impl FamilyMember {
    /// Certifies `expr` as q-holomorphic on `sample`: every point where the
    /// expression evaluates must have residual ≤ [`EPS_FAM`]. Singular points
    /// are skipped but at least half the sample has to be usable.
    pub fn certify(expr: Expr, q: usize, sample: &[CPoint]) -> Result<Self, HullError> {
        let mut worst = 0.0f64;
        let mut used = 0;
        for z in sample {
            match q_holo_residual(&expr, z, q) {
                Ok(r) => {
                    worst = worst.max(r);
                    used += 1;
                }
                Err(FormError::Eval(_)) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        if 2 * used < sample.len() || used == 0 {
            return Err(HullError::CertificationSample {
                found: used,
                wanted: sample.len(),
            });
        }
        if worst > EPS_FAM {
            return Err(HullError::NotCertified {
                q,
                residual: worst,
                bound: EPS_FAM,
            });
        }
        Ok(FamilyMember {
            expr,
            q,
            residual_bound: worst,
        })
    }
}

/// Uniform points of the box `center ± halfwidth` (in every real coordinate).
pub fn box_sample<R: Rng + ?Sized>(center: &CPoint, halfwidth: f64, count: usize, rng: &mut R) -> Vec<CPoint> {
    (0..count)
        .map(|_| {
            let coords = center
                .coords()
                .iter()
                .map(|c| {
                    Complex64::new(
                        c.re + rng.random_range(-halfwidth..=halfwidth),
                        c.im + rng.random_range(-halfwidth..=halfwidth),
                    )
                })
                .collect();
            CPoint::new(coords).expect("finite box sample")
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct HullProblem {
    pub n: usize,
    pub k: Vec<CPoint>,
    pub candidates: Vec<CPoint>,
    pub family: Vec<FamilyMember>,
}

impl HullProblem {
    pub fn new(n: usize, k: Vec<CPoint>, candidates: Vec<CPoint>, family: Vec<FamilyMember>) -> Result<Self, HullError> {
        if k.is_empty() {
            return Err(HullError::EmptyK);
        }
        for p in k.iter().chain(&candidates) {
            if p.dim() != n {
                return Err(HullError::DimensionMismatch { expected: n, got: p.dim() });
            }
        }
        for f in &family {
            if f.expr.dim() != n {
                return Err(HullError::DimensionMismatch {
                    expected: n,
                    got: f.expr.dim(),
                });
            }
        }
        Ok(HullProblem {
            n,
            k,
            candidates,
            family,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateOutcome {
    pub member: bool,
    /// `max_f (|f(z)| − max_K |f|)`: positive for excluded points, `None` if
    /// some family member is singular at the candidate.
    pub margin: Option<f64>,
    /// Family index attaining the margin when excluded.
    pub witness: Option<usize>,
    pub singular: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HullResult {
    pub outcomes: Vec<CandidateOutcome>,
    /// `max_K |f|` per family member.
    pub maxima: Vec<f64>,
}

impl HullResult {
    pub fn members(&self) -> Vec<bool> {
        self.outcomes.iter().map(|o| o.member).collect()
    }

    pub fn member_count(&self) -> usize {
        self.outcomes.iter().filter(|o| o.member).count()
    }
}

/// Outer hull approximation of `K` over the candidate set.
pub fn discrete_hull(prob: &HullProblem) -> Result<HullResult, HullError> {
    let maxima = prob
        .family
        .par_iter()
        .enumerate()
        .map(|(index, f)| {
            prob.k.iter().enumerate().try_fold(0.0f64, |acc, (point, x)| {
                let v = f
                    .expr
                    .eval(x)
                    .map_err(|source| HullError::KEvaluation { index, point, source })?;
                Ok(acc.max(v.norm()))
            })
        })
        .collect::<Result<Vec<f64>, HullError>>()?;

    let outcomes = prob
        .candidates
        .par_iter()
        .map(|z| {
            let mut margin = f64::NEG_INFINITY;
            let mut witness = None;
            for (i, f) in prob.family.iter().enumerate() {
                match f.expr.eval(z) {
                    Ok(v) => {
                        let d = v.norm() - maxima[i];
                        if d > margin {
                            margin = d;
                            witness = Some(i);
                        }
                    }
                    Err(e) => {
                        return CandidateOutcome {
                            member: false,
                            margin: None,
                            witness: Some(i),
                            singular: Some(e.to_string()),
                        }
                    }
                }
            }
            let member = margin <= 0.0;
            CandidateOutcome {
                member,
                margin: Some(if prob.family.is_empty() { 0.0 } else { margin }),
                witness: if member { None } else { witness },
                singular: None,
            }
        })
        .collect();
    Ok(HullResult { outcomes, maxima })
}
