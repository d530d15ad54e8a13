//! Levi forms, Hermitian signatures and q-convexity classification.
//!
//! Restrictions act on the complex tangent space
//! `{v : Σ ∂φ/∂z_j(p) v_j = 0}`; its orthogonal complement is spanned by the
//! outward normal `ν = conj(∂φ/∂z)/‖∂φ/∂z‖`, the real gradient of `φ` viewed
//! as a vector of ℂⁿ.

mod boundary;
mod jacobi;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{eval_jet2, EvalError, Expr};
use crate::point::CPoint;

pub use boundary::{project_to_level, sample_boundary, ProjectionSettings};
pub use jacobi::{jacobi_eigen, HermitianEigen};

/// Relative Hermitian deviation accepted at construction.
pub const EPS_HERM: f64 = 1e-10;
/// Gradients with smaller norm mark a degenerate boundary point.
pub const EPS_GRAD: f64 = 1e-10;
/// `|φ(p)|` above this means `p` is not on the boundary.
pub const EPS_BDRY: f64 = 1e-10;
/// Relative tolerance on the imaginary part of a real-valued function.
pub const EPS_REAL: f64 = 1e-9;
/// Default relative zero-eigenvalue tolerance.
pub const ZTOL_REL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LeviError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("function is not real-valued at the point (imaginary part {imag:e})")]
    NotReal { imag: f64 },
    #[error("matrix is not Hermitian (relative deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("Jacobi iteration did not converge (relative off-diagonal residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("gradient norm {norm:e} is below the degeneracy threshold")]
    DegenerateGradient { norm: f64 },
    #[error("point is not on the boundary: |φ(p)| = {value:e}")]
    NotOnBoundary { value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("boundary sampling failed: {0}")]
    Sampling(String),
}

/// A Hermitian matrix, symmetrized at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LeviMatrix {
    m: DMatrix<Complex64>,
    deviation: f64,
}

impl LeviMatrix {
    /// Symmetrizes `(H + H*)/2`, rejecting inputs whose relative deviation
    /// from Hermitian exceeds [`EPS_HERM`].
    pub fn new(m: DMatrix<Complex64>) -> Result<Self, LeviError> {
        if m.nrows() != m.ncols() {
            return Err(LeviError::NotSquare(m.nrows(), m.ncols()));
        }
        let adj = m.adjoint();
        let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let deviation = (&m - &adj).iter().map(|c| c.norm()).fold(0.0, f64::max) / scale;
        if deviation > EPS_HERM {
            return Err(LeviError::NotHermitian { deviation });
        }
        Ok(LeviMatrix {
            m: (&m + adj) * Complex64::new(0.5, 0.0),
            deviation,
        })
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let m = DMatrix::from_fn(d.len(), d.len(), |i, j| {
            Complex64::new(if i == j { d[i] } else { 0.0 }, 0.0)
        });
        LeviMatrix { m, deviation: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// Relative Hermitian deviation of the input before symmetrization.
    pub fn deviation(&self) -> f64 {
        self.deviation
    }

    pub fn frobenius(&self) -> f64 {
        self.m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Zero-eigenvalue tolerance: absolute, or relative to the Frobenius norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroTol {
    Absolute(f64),
    Relative(f64),
}

impl Default for ZeroTol {
    fn default() -> Self {
        ZeroTol::Relative(ZTOL_REL)
    }
}

impl From<f64> for ZeroTol {
    fn from(x: f64) -> Self {
        ZeroTol::Absolute(x)
    }
}

impl ZeroTol {
    pub fn resolve(self, h: &LeviMatrix) -> f64 {
        match self {
            ZeroTol::Absolute(x) => x,
            ZeroTol::Relative(r) => r * h.frobenius(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Signature {
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_zero: usize,
    pub ztol: f64,
}

impl Signature {
    fn count(values: impl Iterator<Item = f64>, ztol: f64) -> Self {
        let mut s = Signature {
            n_pos: 0,
            n_neg: 0,
            n_zero: 0,
            ztol,
        };
        for x in values {
            if x > ztol {
                s.n_pos += 1;
            } else if x < -ztol {
                s.n_neg += 1;
            } else {
                s.n_zero += 1;
            }
        }
        s
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (self.n_pos, self.n_neg, self.n_zero)
    }

    pub fn dim(&self) -> usize {
        self.n_pos + self.n_neg + self.n_zero
    }
}

/// Levi matrix `(∂²φ/∂z_i∂z̄_j)` of a real-valued function.
pub fn levi_form(phi: &Expr, z: &CPoint) -> Result<LeviMatrix, LeviError> {
    let j = eval_jet2(phi, z)?;
    check_real(j.value)?;
    LeviMatrix::new(j.h_zzbar)
}

fn check_real(v: Complex64) -> Result<(), LeviError> {
    if v.im.abs() > EPS_REAL * v.re.abs().max(1.0) {
        Err(LeviError::NotReal { imag: v.im })
    } else {
        Ok(())
    }
}

/// Signature by complex Jacobi diagonalization.
pub fn eig_signature(h: &LeviMatrix, ztol: f64) -> Result<Signature, LeviError> {
    let eig = jacobi_eigen(h.matrix())?;
    Ok(Signature::count(eig.values.into_iter(), ztol))
}

/// Signature through the real symmetric embedding `[[Re H, −Im H], [Im H, Re H]]`,
/// whose spectrum is that of `H` with every eigenvalue doubled.
pub fn signature_oracle(h: &LeviMatrix, ztol: f64) -> Signature {
    let m = h.dim();
    let a = h.matrix();
    let big = DMatrix::<f64>::from_fn(2 * m, 2 * m, |r, c| {
        let (i, j) = (r % m, c % m);
        match (r < m, c < m) {
            (true, true) | (false, false) => a[(i, j)].re,
            (true, false) => -a[(i, j)].im,
            (false, true) => a[(i, j)].im,
        }
    });
    let mut evs: Vec<f64> = SymmetricEigen::new(big).eigenvalues.iter().copied().collect();
    evs.sort_by(f64::total_cmp);
    Signature::count(evs.into_iter().step_by(2), ztol)
}

/// Orthonormal frame adapted to a boundary gradient: the unit normal and a
/// basis of the complex tangent space.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub normal: DVector<Complex64>,
    /// n × (n−1), orthonormal columns spanning `{v : Σ g_j v_j = 0}`.
    pub basis: DMatrix<Complex64>,
}

impl TangentFrame {
    /// Builds the frame from `g = ∂φ/∂z` with a Householder reflection that
    /// sends the normal to the `pivot`-th coordinate axis.
    pub fn new(g: &DVector<Complex64>, pivot: usize) -> Result<Self, LeviError> {
        let n = g.len();
        assert!(pivot < n, "pivot {pivot} out of range");
        let norm = g.norm();
        if !(norm > EPS_GRAD) {
            return Err(LeviError::DegenerateGradient { norm });
        }
        let normal = g.map(|c| c.conj() / norm);
        let xp = normal[pivot];
        let phase = if xp.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            xp / xp.norm()
        };
        let mut v = normal.clone();
        v[pivot] += phase;
        let vv = v.norm_squared();
        let reflector = DMatrix::<Complex64>::identity(n, n) - (&v * v.adjoint()) * Complex64::new(2.0 / vv, 0.0);
        let cols: Vec<usize> = (0..n).filter(|&k| k != pivot).collect();
        let basis = DMatrix::from_fn(n, n - 1, |r, c| reflector[(r, cols[c])]);
        Ok(TangentFrame { normal, basis })
    }
}

/// Restriction to the default (first-axis) tangent frame of `g`.
pub fn tangent_restrict(h: &LeviMatrix, g: &DVector<Complex64>) -> Result<LeviMatrix, LeviError> {
    restrict_to(h, &TangentFrame::new(g, 0)?.basis)
}

/// Restriction of the Levi form to the span of the columns of `B`.
///
/// The form is `L(v) = Σ H_ij v_i v̄_j = v* Hᵀ v`, so in the coordinates
/// `v = Bx` its matrix is `B* Hᵀ B`. `Hᵀ = H̄` has the spectrum of `H`;
/// the transpose only matters once `B` mixes coordinates.
pub fn restrict_to(h: &LeviMatrix, basis: &DMatrix<Complex64>) -> Result<LeviMatrix, LeviError> {
    if basis.nrows() != h.dim() {
        return Err(LeviError::DimensionMismatch {
            expected: h.dim(),
            got: basis.nrows(),
        });
    }
    LeviMatrix::new(basis.adjoint() * h.matrix().transpose() * basis)
}

/// q-convexity of a function at one point.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionClass {
    pub signature: Signature,
    /// Minimal `q` with at least `n − q + 1` positive eigenvalues, `None` when
    /// there are no positive eigenvalues.
    pub q: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionClassification {
    pub points: Vec<FunctionClass>,
    /// Largest per-point `q`; `None` if some point admits none.
    pub overall: Option<usize>,
}

pub fn classify_function(
    f: &Expr,
    points: &[CPoint],
    ztol: impl Into<ZeroTol>,
) -> Result<FunctionClassification, LeviError> {
    let ztol = ztol.into();
    let n = f.dim();
    let mut out = Vec::with_capacity(points.len());
    for z in points {
        let h = levi_form(f, z)?;
        let signature = eig_signature(&h, ztol.resolve(&h))?;
        let q = (signature.n_pos > 0).then(|| n - signature.n_pos + 1);
        out.push(FunctionClass { signature, q });
    }
    let overall = out
        .iter()
        .try_fold(0usize, |acc, c| c.q.map(|q| acc.max(q)))
        .filter(|_| !out.is_empty());
    Ok(FunctionClassification { points: out, overall })
}

#[derive(Debug, Clone)]
pub struct BoundaryClassification {
    pub point: CPoint,
    /// `∂φ/∂z` at the point.
    pub gradient: DVector<Complex64>,
    pub restricted: Signature,
    /// Minimal q for strict q-pseudoconvexity (`n − n_pos`), `None` if `n_pos = 0`.
    pub strict_q: Option<usize>,
    /// Minimal q for q-pseudoconvexity (`n − n_pos − n_zero`), `None` if that count is 0.
    pub weak_q: Option<usize>,
}

pub fn classify_boundary_point(
    phi: &Expr,
    p: &CPoint,
    ztol: impl Into<ZeroTol>,
) -> Result<BoundaryClassification, LeviError> {
    let n = phi.dim();
    if p.dim() != n {
        return Err(LeviError::DimensionMismatch {
            expected: n,
            got: p.dim(),
        });
    }
    let j = eval_jet2(phi, p)?;
    check_real(j.value)?;
    if j.value.re.abs() > EPS_BDRY {
        return Err(LeviError::NotOnBoundary { value: j.value.re.abs() });
    }
    let h = LeviMatrix::new(j.h_zzbar.clone())?;
    let restricted = tangent_restrict(&h, &j.g_z)?;
    let sig = eig_signature(&restricted, ztol.into().resolve(&restricted))?;
    let strict_q = (sig.n_pos > 0).then(|| (n - sig.n_pos).clamp(1, n));
    let weak_count = sig.n_pos + sig.n_zero;
    let weak_q = (weak_count > 0).then(|| (n - weak_count).clamp(1, n));
    Ok(BoundaryClassification {
        point: p.clone(),
        gradient: j.g_z,
        restricted: sig,
        strict_q,
        weak_q,
    })
}
