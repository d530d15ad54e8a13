//! The family `f_λ(z) = (Σ λ_i z̄_i) / Σ |z_i|²`, n-holomorphic on ℂⁿ∖{0}
//! with an isolated nonremovable singularity at the origin.

use num_complex::Complex64;
use rand::Rng;

use super::HullError;
use crate::expr::Expr;
use crate::point::CPoint;

/// Distance from the singularity below which `f_λ` is not evaluated.
pub const EPS_SING: f64 = 1e-12;

/// Coefficient vector with unit-modulus entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Lambda(Vec<Complex64>);

impl Lambda {
    pub fn new(entries: Vec<Complex64>) -> Result<Self, HullError> {
        if entries.is_empty() {
            return Err(HullError::InvalidLambda("empty".into()));
        }
        for (k, c) in entries.iter().enumerate() {
            if (c.norm() - 1.0).abs() > 1e-12 {
                return Err(HullError::InvalidLambda(format!(
                    "|λ_{}| = {} is not 1",
                    k + 1,
                    c.norm()
                )));
            }
        }
        Ok(Lambda(entries))
    }

    pub fn ones(n: usize) -> Self {
        Lambda(vec![Complex64::new(1.0, 0.0); n])
    }

    /// Uniformly random phases.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Lambda(
            (0..n)
                .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// `f_λ(w)` for an offset vector `w = z − p`.
pub fn basener_offset(lambda: &Lambda, w: &[Complex64]) -> Result<Complex64, HullError> {
    let norm2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    if norm2.sqrt() <= EPS_SING {
        return Err(HullError::Singular);
    }
    let num: Complex64 = lambda.0.iter().zip(w).map(|(l, c)| l * c.conj()).sum();
    Ok(num / norm2)
}

/// `f_λ(z)`.
pub fn basener_value(lambda: &Lambda, z: &CPoint) -> Result<Complex64, HullError> {
    if lambda.dim() != z.dim() {
        return Err(HullError::DimensionMismatch {
            expected: lambda.dim(),
            got: z.dim(),
        });
    }
    basener_offset(lambda, z.coords())
}

/// Expression for `z ↦ f_λ(z − p)`.
pub fn basener_expr(lambda: &Lambda, p: &CPoint) -> Result<Expr, HullError> {
    let n = lambda.dim();
    if p.dim() != n {
        return Err(HullError::DimensionMismatch { expected: n, got: p.dim() });
    }
    let offset = |k: usize| Expr::var(k + 1, n) - Expr::constant(p[k], n);
    let num: Expr = (0..n)
        .map(|k| Expr::constant(lambda.0[k], n) * offset(k).conjugate())
        .sum();
    let den: Expr = (0..n).map(|k| offset(k).abs2()).sum();
    Ok(num / den)
}

/// The λ with `λ_i · conj(z_i − p_i) = |z_i − p_i|`, taking `λ_i = 1` where
/// `z_i = p_i`. For it, `|f_λ(z − p)| = Σ|z_i − p_i| / ‖z − p‖²`.
pub fn construct_lambda(z: &CPoint, p: &CPoint) -> Result<Lambda, HullError> {
    if z.dim() != p.dim() {
        return Err(HullError::DimensionMismatch {
            expected: p.dim(),
            got: z.dim(),
        });
    }
    let w = z.sub(p);
    if w.iter().all(|c| c.norm() == 0.0) {
        return Err(HullError::Singular);
    }
    Ok(Lambda(
        w.iter()
            .map(|c| {
                let m = c.norm();
                if m == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    c / m
                }
            })
            .collect(),
    ))
}
