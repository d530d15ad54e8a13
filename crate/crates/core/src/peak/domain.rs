//! Model domains `Ω = {φ < 0}` inside a bounding box.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::PeakError;
use crate::expr::{eval_jet2, Expr, Jet2};
use crate::levi::{sample_boundary, ProjectionSettings, EPS_GRAD};
use crate::point::CPoint;

#[derive(Debug, Clone)]
pub struct ModelDomain {
    pub phi: Expr,
    /// `Ω` lies in `[−halfwidth, halfwidth]^{2n}`.
    pub halfwidth: f64,
    convexity: Option<ConvexityCertificate>,
}

/// Smallest eigenvalue of the real Hessian `D²φ` over the sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityCertificate {
    pub points: usize,
    pub min_eigenvalue: f64,
}

impl ModelDomain {
    pub fn new(phi: Expr, halfwidth: f64) -> Result<Self, PeakError> {
        if !(halfwidth > 0.0 && halfwidth.is_finite()) {
            return Err(PeakError::Config(format!("box halfwidth must be positive, got {halfwidth}")));
        }
        Ok(ModelDomain {
            phi,
            halfwidth,
            convexity: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn phi_at(&self, z: &[Complex64]) -> Result<f64, PeakError> {
        Ok(self.phi.eval_slice(z)?.re)
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        matches!(self.phi_at(z), Ok(v) if v < 0.0)
    }

    pub fn convexity(&self) -> Option<ConvexityCertificate> {
        self.convexity
    }

    /// Certifies strict convexity of `φ` by a positive definite real Hessian
    /// at the points of the box, so every affine slice of `Ω` is strictly
    /// convex. Stores the certificate on success.
    pub fn certify_convexity<R: Rng + ?Sized>(&mut self, count: usize, rng: &mut R) -> Result<ConvexityCertificate, PeakError> {
        let n = self.dim();
        let mut min_eig = f64::INFINITY;
        for _ in 0..count.max(1) {
            let z: Vec<Complex64> = (0..n)
                .map(|_| {
                    Complex64::new(
                        rng.random_range(-self.halfwidth..=self.halfwidth),
                        rng.random_range(-self.halfwidth..=self.halfwidth),
                    )
                })
                .collect();
            let j = eval_jet2(&self.phi, &CPoint::new(z.clone())?)?;
            let hess = real_hessian(&j);
            let lo = SymmetricEigen::new(hess).eigenvalues.min();
            if !(lo > 0.0) {
                return Err(PeakError::NotConvex {
                    point: CPoint::new(z)?,
                    min_eigenvalue: lo,
                });
            }
            min_eig = min_eig.min(lo);
        }
        let cert = ConvexityCertificate {
            points: count.max(1),
            min_eigenvalue: min_eig,
        };
        self.convexity = Some(cert);
        Ok(cert)
    }

    /// Checks `‖∂φ‖ > EPS_GRAD` on sampled boundary points.
    pub fn check_gradient<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<CPoint>, PeakError> {
        let pts = sample_boundary(&self.phi, count, self.halfwidth, &ProjectionSettings::default(), rng)?;
        for p in &pts {
            let g = eval_jet2(&self.phi, p)?.g_z.norm();
            if !(g > EPS_GRAD) {
                return Err(PeakError::DegenerateBoundary { point: p.clone(), gradient: g });
            }
        }
        Ok(pts)
    }
}

/// `D²φ` in the real coordinates `(x_1..x_n, y_1..y_n)`, built by
/// polarization of `Q(v) = 2 Re(vᵀ H_zz v) + 2 Σ v_i H_{zz̄}[i,j] v̄_j`.
pub fn real_hessian(j: &Jet2) -> DMatrix<f64> {
    let n = j.dim();
    let dir = |k: usize| -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k % n] = if k < n { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
        v
    };
    let quad = |v: &[Complex64]| -> f64 {
        let mut hol = Complex64::new(0.0, 0.0);
        let mut mixed = Complex64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                hol += v[a] * j.h_zz[(a, b)] * v[b];
                mixed += v[a] * j.h_zzbar[(a, b)] * v[b].conj();
            }
        }
        2.0 * hol.re + 2.0 * mixed.re
    };
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (u, v) = (dir(r), dir(c));
        let plus: Vec<Complex64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let minus: Vec<Complex64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
        (quad(&plus) - quad(&minus)) / 4.0
    })
}
