//! Sampling points on `{φ = 0}` by damped projection.

use num_complex::Complex64;
use rand::Rng;

use super::{LeviError, EPS_BDRY, EPS_GRAD};
use crate::expr::{eval_jet2, Expr};
use crate::point::CPoint;

#[derive(Debug, Clone, Copy)]
pub struct ProjectionSettings {
    pub max_iter: usize,
    /// Cap on the length of a single step.
    pub max_step: f64,
    pub tol: f64,
}

impl Default for ProjectionSettings {
    fn default() -> Self {
        ProjectionSettings {
            max_iter: 200,
            max_step: 0.25,
            tol: EPS_BDRY,
        }
    }
}

/// Drives a real function `ψ` to zero from `start`. `f` returns `ψ(s)` and
/// the conjugate gradient `∂ψ/∂s̄`; each step moves along the real gradient
/// `2∂ψ/∂s̄` by the Newton length, capped at `max_step`. Returns `None` when
/// the gradient degenerates or the iteration budget runs out.
pub fn project_to_level<F, E>(f: F, start: Vec<Complex64>, settings: &ProjectionSettings) -> Option<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<(f64, Vec<Complex64>), E>,
{
    let mut s = start;
    for _ in 0..settings.max_iter {
        let (value, grad) = f(&s).ok()?;
        if value.abs() <= settings.tol {
            return Some(s);
        }
        let g2: f64 = grad.iter().map(|c| c.norm_sqr()).sum();
        if !(g2.sqrt() > EPS_GRAD) {
            return None;
        }
        let mut step: Vec<Complex64> = grad.iter().map(|c| c * (-value / (2.0 * g2))).collect();
        let len = step.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if len > settings.max_step {
            let shrink = settings.max_step / len;
            step.iter_mut().for_each(|c| *c *= shrink);
        }
        for (x, d) in s.iter_mut().zip(&step) {
            *x += d;
        }
    }
    let (value, _) = f(&s).ok()?;
    (value.abs() <= settings.tol).then_some(s)
}

/// Draws `count` points of `{φ = 0}` by projecting uniform points of the box
/// `[−halfwidth, halfwidth]^{2n}`. Points with degenerate gradient are
/// discarded.
pub fn sample_boundary<R: Rng + ?Sized>(
    phi: &Expr,
    count: usize,
    halfwidth: f64,
    settings: &ProjectionSettings,
    rng: &mut R,
) -> Result<Vec<CPoint>, LeviError> {
    let n = phi.dim();
    let level = |s: &[Complex64]| -> Result<(f64, Vec<Complex64>), LeviError> {
        let z = CPoint::new(s.to_vec()).map_err(|e| LeviError::Sampling(e.to_string()))?;
        let j = eval_jet2(phi, &z)?;
        Ok((j.value.re, j.g_zbar.iter().copied().collect()))
    };
    let max_attempts = 100 * count.max(1);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == max_attempts {
            return Err(LeviError::Sampling(format!(
                "only {} of {count} boundary points found after {max_attempts} attempts",
                out.len()
            )));
        }
        attempts += 1;
        let start: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    rng.random_range(-halfwidth..=halfwidth),
                    rng.random_range(-halfwidth..=halfwidth),
                )
            })
            .collect();
        let Some(s) = project_to_level(level, start, settings) else {
            continue;
        };
        let Ok(z) = CPoint::new(s) else { continue };
        match eval_jet2(phi, &z) {
            Ok(j) if j.g_z.norm() > EPS_GRAD => out.push(z),
            _ => continue,
        }
    }
    Ok(out)
}
