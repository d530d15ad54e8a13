//! Almost-peak (q+1)-holomorphic functions on model domains.
//!
//! At a boundary point `p` of a strictly q-pseudoconvex model domain the
//! construction takes a complex slice `L` spanned by the outward normal `ν`
//! and `n − q` Levi-positive tangent directions, an affine subspace
//! `p + M ⊂ p + L` of dimension `n − q` containing `ν`, the peak function
//! `h(z) = exp(c⟨z − p, ν⟩)` and a cutoff `g` in the `q` directions
//! orthogonal to `M`:
//!
//! ```text
//! f(z) = h(w)·g(‖b‖)   if w ∈ W and ‖b‖ < r,     0 otherwise,
//! w = p + P_M(z − p),  b = (z − p) − P_M(z − p),  W = {w ∈ p + M : φ(w) < δ_W}.
//! ```
//!
//! `f` is holomorphic along `M`, so `∂̄f` and every term of `∂∂̄f` carry a
//! `dz̄` factor from the q-dimensional complement, which forces
//! `∂̄f ∧ (∂∂̄f)^q = 0`. [`verify_peak`] checks this numerically.

mod cutoff;
mod domain;
mod verify;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{eval_jet2, EvalError, Expr};
use crate::forms::FormError;
use crate::levi::{
    classify_boundary_point, jacobi_eigen, restrict_to, LeviError, LeviMatrix, TangentFrame, ZeroTol,
};
use crate::point::{format_complex, norm, CPoint, PointError};

pub use cutoff::CutoffG;
pub use domain::{real_hessian, ConvexityCertificate, ModelDomain};
pub use verify::{
    verify_peak, PeakReport, PeakSamples, ResidualCheck, SupCheck, ValueCheck, VanishingCheck, VerifySettings,
};

/// Required gap between `sup |f|` off `V_p` and 1.
pub const DELTA_MIN: f64 = 1e-3;
/// Tolerance on `|f(p) − 1|`.
pub const PEAK_VALUE_TOL: f64 = 1e-12;
/// Bound on the finite-difference (q+1)-residual.
pub const RESIDUAL_TOL: f64 = 1e-5;
/// Finite-difference step for jets of `f`. Second differences of `f` carry
/// roundoff `~ε/h²`, which the wedge amplifies by `|∂̄f|·|∂∂̄f|^q`.
pub const FD_STEP: f64 = 1e-3;

const BISECT_ITERS: usize = 80;

#[derive(Debug, Error)]
pub enum PeakError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Point(#[from] PointError),
    #[error(transparent)]
    Levi(#[from] LeviError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("φ is not strictly convex at {point}: smallest Hessian eigenvalue {min_eigenvalue:e}")]
    NotConvex { point: CPoint, min_eigenvalue: f64 },
    #[error("degenerate gradient {gradient:e} at boundary point {point}")]
    DegenerateBoundary { point: CPoint, gradient: f64 },
    #[error("slice convexity of the domain has not been certified")]
    ConvexityNotCertified,
    #[error("q = {q} is outside 1..={max} for n = {n}")]
    QOutOfRange { q: usize, n: usize, max: usize },
    #[error("not strictly {q}-pseudoconvex at p: {found} positive tangent eigenvalues, {needed} needed")]
    NotStrictlyPseudoconvex { q: usize, found: usize, needed: usize },
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("tube conditions unsatisfiable within limits (last tried r = {r:e}, δ_W = {delta_w:e}): {violation}")]
    TubeUnsatisfiable { r: f64, delta_w: f64, violation: TubeViolation },
}

/// The complex slice `L` through `p`.
#[derive(Debug, Clone)]
pub struct Slice {
    /// Orthonormal columns; the first is `ν`, the rest are lifted
    /// eigenvectors of the restricted Levi form.
    pub basis: DMatrix<Complex64>,
    /// Restricted Levi eigenvalues of the tangent columns, decreasing.
    pub eigenvalues: Vec<f64>,
}

impl Slice {
    pub fn normal(&self) -> DVector<Complex64> {
        self.basis.column(0).into_owned()
    }
}

/// Slice `L` at `p`: `ν` plus `n − q` tangent eigenvectors with eigenvalue
/// above the zero tolerance, in decreasing eigenvalue order.
pub fn select_slice(dom: &ModelDomain, p: &CPoint, q: usize, ztol: ZeroTol) -> Result<Slice, PeakError> {
    let n = dom.dim();
    if q == 0 || q >= n {
        return Err(PeakError::QOutOfRange { q, n, max: n - 1 });
    }
    let class = classify_boundary_point(&dom.phi, p, ztol)?;
    let needed = n - q;
    if class.restricted.n_pos < needed {
        return Err(PeakError::NotStrictlyPseudoconvex {
            q,
            found: class.restricted.n_pos,
            needed,
        });
    }
    let j = eval_jet2(&dom.phi, p)?;
    let frame = TangentFrame::new(&j.g_z, 0)?;
    let restricted = restrict_to(&LeviMatrix::new(j.h_zzbar.clone())?, &frame.basis)?;
    let tol = ztol.resolve(&restricted);
    let eig = jacobi_eigen(restricted.matrix())?;
    let order = eig.order_desc();
    let mut basis = DMatrix::<Complex64>::zeros(n, needed + 1);
    basis.set_column(0, &frame.normal);
    let mut eigenvalues = Vec::with_capacity(needed);
    for (slot, &k) in order.iter().take(needed).enumerate() {
        if !(eig.values[k] > tol) {
            return Err(PeakError::NotStrictlyPseudoconvex { q, found: slot, needed });
        }
        let lifted = &frame.basis * eig.vectors.column(k);
        basis.set_column(slot + 1, &lifted);
        eigenvalues.push(eig.values[k]);
    }
    Ok(Slice { basis, eigenvalues })
}

/// `h(z) = exp(c Σ ν̄_j (z_j − p_j))`.
pub fn build_peak_h(p: &CPoint, nu: &DVector<Complex64>, c: f64) -> Expr {
    let n = p.dim();
    assert_eq!(nu.len(), n, "normal and point dimensions differ");
    let lin: Expr = (0..n)
        .map(|j| Expr::constant(nu[j].conj() * c, n) * (Expr::var(j + 1, n) - Expr::constant(p[j], n)))
        .sum();
    lin.exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakParams {
    pub c: f64,
    pub rho_v: f64,
    /// Fixed tube radius, or `None` to start at `rho_v` and halve.
    pub r: Option<f64>,
    /// Initial `δ_W`; doubled on each widening step.
    pub w_margin: f64,
    pub max_r_halvings: usize,
    pub max_w_steps: usize,
    /// Rays used by each sampled tube invariant.
    pub tube_rays: usize,
    #[serde(skip)]
    pub ztol: ZeroTol,
}

impl Default for PeakParams {
    fn default() -> Self {
        PeakParams {
            c: 1.0,
            rho_v: 0.5,
            r: None,
            w_margin: 0.05,
            max_r_halvings: 20,
            max_w_steps: 10,
            tube_rays: 200,
            ztol: ZeroTol::default(),
        }
    }
}

impl PeakParams {
    pub fn validate(&self) -> Result<(), PeakError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(PeakError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("c", self.c)?;
        positive("rho_V", self.rho_v)?;
        positive("w_margin", self.w_margin)?;
        if let Some(r) = self.r {
            positive("r", r)?;
        }
        if self.tube_rays == 0 {
            return Err(PeakError::Config("tube_rays must be positive".into()));
        }
        Ok(())
    }
}

/// Sample that breaks one of the tube invariants.
#[derive(Debug, Clone, Serialize)]
pub enum TubeViolation {
    /// A point of `G⁻¹(∂W × B(0,r))` inside `Ω`.
    BoundaryInDomain { point: CPoint, phi: f64 },
    /// A point of `G⁻¹({|h| ≥ 1} × B(0,r))` outside `B(p, ρ_V)`.
    CapOutsideV { point: CPoint, distance: f64 },
}

impl std::fmt::Display for TubeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TubeViolation::BoundaryInDomain { point, phi } => {
                write!(f, "∂W × B(0,r) meets Ω at {point} (φ = {phi:e})")
            }
            TubeViolation::CapOutsideV { point, distance } => {
                write!(f, "{{|h| ≥ 1}} × B(0,r) leaves V_p at {point} (‖z−p‖ = {distance})")
            }
        }
    }
}

/// Outcome of the sampled tube invariants for the accepted parameters.
#[derive(Debug, Clone, Serialize)]
pub struct TubeReport {
    pub r: f64,
    pub delta_w: f64,
    pub r_halvings: usize,
    pub w_steps: usize,
    pub boundary_samples: usize,
    pub cap_samples: usize,
    /// `min φ` over the sampled `G⁻¹(∂W × B(0,r))`; nonnegative.
    pub min_phi_on_w_boundary: f64,
    /// Largest `‖z − p‖` over the sampled cap; below `ρ_V`.
    pub max_cap_distance: f64,
}

/// Data of the construction plus the extension `f`.
#[derive(Debug, Clone)]
pub struct PeakConstruction {
    pub domain: ModelDomain,
    pub p: CPoint,
    pub q: usize,
    pub slice: Slice,
    /// Orthonormal columns spanning `M`: `ν` and the first `n − q − 1`
    /// positive directions of `L`.
    pub m_basis: DMatrix<Complex64>,
    /// Unitary whose first columns are `m_basis`; the rest span `M^⊥`.
    pub frame: DMatrix<Complex64>,
    pub c: f64,
    pub rho_v: f64,
    pub h: Expr,
    pub cutoff: CutoffG,
    pub delta_w: f64,
    pub tube: TubeReport,
    /// Interior point of `Ω ∩ (p + M)` on the inward normal.
    pub center: Vec<Complex64>,
}

/// Orthogonal tube chart `z ↦ (w, b)` for an affine subspace `p + M`.
#[derive(Debug, Clone, Copy)]
struct Chart<'a> {
    p: &'a [Complex64],
    m: &'a DMatrix<Complex64>,
}

impl Chart<'_> {
    /// `(w, b)` with `w` the point of `p + M` and `b` the orthogonal offset.
    fn split(&self, z: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let v = DVector::from_iterator(z.len(), z.iter().zip(self.p).map(|(a, b)| a - b));
        let proj = self.m * (self.m.adjoint() * &v);
        let w = self.p.iter().zip(proj.iter()).map(|(a, b)| a + b).collect();
        let b = v.iter().zip(proj.iter()).map(|(a, b)| a - b).collect();
        (w, b)
    }

    /// Uniform unit vector of `M`.
    fn unit_in_m<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        let k = self.m.ncols();
        loop {
            let coef = DVector::from_iterator(k, (0..k).map(|_| gaussian(rng)));
            let len = coef.norm();
            if len > 1e-8 {
                return (self.m * coef / Complex64::new(len, 0.0)).iter().copied().collect();
            }
        }
    }

    /// Uniform unit vector of `M^⊥`.
    fn unit_in_complement<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        let n = self.m.nrows();
        loop {
            let v = DVector::from_iterator(n, (0..n).map(|_| gaussian(rng)));
            let perp = &v - self.m * (self.m.adjoint() * &v);
            let len = perp.norm();
            if len > 1e-8 {
                return perp.iter().map(|c| c / len).collect();
            }
        }
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn axpy(base: &[Complex64], s: f64, dir: &[Complex64]) -> Vec<Complex64> {
    base.iter().zip(dir).map(|(a, d)| a + d * s).collect()
}

/// Smallest `s > 0` with `φ(origin + s·dir) = level` for `φ(origin) < level`,
/// assuming a single crossing. `None` if no crossing inside `max_s`.
fn ray_exit(dom: &ModelDomain, origin: &[Complex64], dir: &[Complex64], level: f64, max_s: f64) -> Result<Option<f64>, PeakError> {
    let at = |s: f64| dom.phi_at(&axpy(origin, s, dir));
    if at(0.0)? >= level {
        return Ok(Some(0.0));
    }
    let mut lo = 0.0;
    let mut hi = 1e-3 * max_s;
    while at(hi)? < level {
        lo = hi;
        hi *= 2.0;
        if hi > max_s {
            return Ok(None);
        }
    }
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if at(mid)? < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn box_diameter(dom: &ModelDomain) -> f64 {
    4.0 * dom.halfwidth * (2.0 * dom.dim() as f64).sqrt()
}

/// Sample directions reused across parameter steps so that tuning is
/// monotone in the sample and deterministic.
struct TubeSamples {
    m_dirs: Vec<Vec<Complex64>>,
    /// `b / r` offsets, a quarter of them on the unit sphere.
    b_units: Vec<Vec<Complex64>>,
    /// Fractions of the cap ray used for interior cap points.
    fractions: Vec<f64>,
}

impl TubeSamples {
    fn draw<R: Rng + ?Sized>(chart: &Chart<'_>, count: usize, q: usize, rng: &mut R) -> Self {
        let m_dirs = (0..count).map(|_| chart.unit_in_m(rng)).collect();
        let b_units = (0..count)
            .map(|k| {
                let u = chart.unit_in_complement(rng);
                let rho = if k % 4 == 0 {
                    1.0 - 1e-12
                } else {
                    rng.random_range(0.0f64..1.0).powf(1.0 / (2 * q) as f64)
                };
                u.into_iter().map(|c| c * rho).collect()
            })
            .collect();
        let fractions = (0..count).map(|_| rng.random_range(0.0..=1.0)).collect();
        TubeSamples {
            m_dirs,
            b_units,
            fractions,
        }
    }
}

/// Points of `∂W` and the far ends of the cap rays for a given `δ_W`;
/// `None` when `W` leaves the box along a sampled ray.
struct WGeometry {
    boundary: Vec<Vec<Complex64>>,
    cap_ends: Vec<Vec<Complex64>>,
}

impl WGeometry {
    fn build(
        dom: &ModelDomain,
        p: &[Complex64],
        nu: &DVector<Complex64>,
        center: &[Complex64],
        delta_w: f64,
        samples: &TubeSamples,
    ) -> Result<Option<Self>, PeakError> {
        let max_s = box_diameter(dom);
        let mut boundary = Vec::with_capacity(samples.m_dirs.len());
        let mut cap_ends = Vec::with_capacity(samples.m_dirs.len());
        for d in &samples.m_dirs {
            let Some(s) = ray_exit(dom, center, d, delta_w, max_s)? else {
                return Ok(None);
            };
            boundary.push(axpy(center, s, d));
            // Orient into the half-space Re⟨d, ν⟩ ≥ 0 where |h| ≥ 1.
            let inner: Complex64 = d.iter().zip(nu.iter()).map(|(a, b)| b.conj() * a).sum();
            let sign = if inner.re >= 0.0 { 1.0 } else { -1.0 };
            let dir: Vec<Complex64> = d.iter().map(|c| c * sign).collect();
            let Some(s) = ray_exit(dom, p, &dir, delta_w, max_s)? else {
                return Ok(None);
            };
            cap_ends.push(axpy(p, s, &dir));
        }
        Ok(Some(WGeometry { boundary, cap_ends }))
    }
}

fn check_tube(
    dom: &ModelDomain,
    p: &[Complex64],
    rho_v: f64,
    r: f64,
    geo: &WGeometry,
    samples: &TubeSamples,
) -> Result<Result<(f64, f64), TubeViolation>, PeakError> {
    let mut min_phi = f64::INFINITY;
    for (w, b) in geo.boundary.iter().zip(&samples.b_units) {
        let z = axpy(w, r, b);
        let phi = dom.phi_at(&z)?;
        if phi < 0.0 {
            return Ok(Err(TubeViolation::BoundaryInDomain {
                point: CPoint::new(z)?,
                phi,
            }));
        }
        min_phi = min_phi.min(phi);
    }
    let mut max_dist = 0.0f64;
    for ((end, b), t) in geo.cap_ends.iter().zip(&samples.b_units).zip(&samples.fractions) {
        let mid: Vec<Complex64> = p.iter().zip(end).map(|(a, e)| a + (e - a) * *t).collect();
        for w in [end.as_slice(), mid.as_slice()] {
            let z = axpy(w, r, b);
            let dist = norm(&z.iter().zip(p).map(|(a, c)| a - c).collect::<Vec<_>>());
            if dist >= rho_v {
                return Ok(Err(TubeViolation::CapOutsideV {
                    point: CPoint::new(z)?,
                    distance: dist,
                }));
            }
            max_dist = max_dist.max(dist);
        }
    }
    Ok(Ok((min_phi, max_dist)))
}

/// Extends orthonormal columns to a unitary matrix by Gram–Schmidt on the
/// standard basis vectors, taking the least dependent one each time.
pub fn complete_unitary(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let mut cols: Vec<DVector<Complex64>> = m.column_iter().map(|c| c.into_owned()).collect();
    let project_out = |v: &mut DVector<Complex64>, cols: &[DVector<Complex64>]| {
        for _ in 0..2 {
            for c in cols {
                let coef = c.dotc(v);
                *v -= c * coef;
            }
        }
    };
    while cols.len() < n {
        let mut best: Option<DVector<Complex64>> = None;
        for k in 0..n {
            let mut v = DVector::<Complex64>::zeros(n);
            v[k] = Complex64::new(1.0, 0.0);
            project_out(&mut v, &cols);
            if best.as_ref().is_none_or(|b| v.norm() > b.norm()) {
                best = Some(v);
            }
        }
        let v = best.expect("n > 0");
        let len = v.norm();
        cols.push(v / Complex64::new(len, 0.0));
    }
    DMatrix::from_columns(&cols)
}

/// Builds the slice, `M`, `h` and the tube. Tuning walks `r` down by
/// halving and, for each `r`, `δ_W` up by doubling until both sampled tube
/// invariants hold.
pub fn assemble_peak<R: Rng + ?Sized>(
    dom: &ModelDomain,
    p: &CPoint,
    q: usize,
    params: &PeakParams,
    rng: &mut R,
) -> Result<PeakConstruction, PeakError> {
    params.validate()?;
    if dom.convexity().is_none() {
        return Err(PeakError::ConvexityNotCertified);
    }
    let n = dom.dim();
    if p.dim() != n {
        return Err(PeakError::Levi(LeviError::DimensionMismatch { expected: n, got: p.dim() }));
    }
    let slice = select_slice(dom, p, q, params.ztol)?;
    let nu = slice.normal();
    let m_basis = slice.basis.columns(0, n - q).into_owned();
    let h = build_peak_h(p, &nu, params.c);
    let pc = p.coords();

    let nu_vec: Vec<Complex64> = nu.iter().copied().collect();
    let inward: Vec<Complex64> = nu_vec.iter().map(|c| -c).collect();
    let s0 = 1e-6 * dom.halfwidth;
    let start = axpy(pc, s0, &inward);
    if !dom.contains(&start) {
        return Err(PeakError::Geometry("inward normal does not enter Ω".into()));
    }
    let chord = ray_exit(dom, &start, &inward, 0.0, box_diameter(dom))?
        .ok_or_else(|| PeakError::Geometry("Ω is unbounded along the inward normal".into()))?;
    let center = axpy(pc, 0.5 * (s0 + chord), &inward);

    let chart = Chart { p: pc, m: &m_basis };
    let samples = TubeSamples::draw(&chart, params.tube_rays, q, rng);
    let r0 = params.r.unwrap_or(params.rho_v);
    let halvings = if params.r.is_some() { 0 } else { params.max_r_halvings };

    // Largest r first; for each r the W margin is widened before giving up
    // on it.
    let mut geometries: Vec<Option<Option<WGeometry>>> = (0..=params.max_w_steps).map(|_| None).collect();
    let frame = complete_unitary(&m_basis);
    let mut last = None;
    for half in 0..=halvings {
        let r = r0 / 2f64.powi(half as i32);
        for (w_step, slot) in geometries.iter_mut().enumerate() {
            let delta_w = params.w_margin * 2f64.powi(w_step as i32);
            if slot.is_none() {
                *slot = Some(WGeometry::build(dom, pc, &nu, &center, delta_w, &samples)?);
            }
            let Some(geo) = slot.as_ref().and_then(Option::as_ref) else {
                break;
            };
            match check_tube(dom, pc, params.rho_v, r, geo, &samples)? {
                Ok((min_phi, max_dist)) => {
                    let tube = TubeReport {
                        r,
                        delta_w,
                        r_halvings: half,
                        w_steps: w_step,
                        boundary_samples: geo.boundary.len(),
                        cap_samples: 2 * geo.cap_ends.len(),
                        min_phi_on_w_boundary: min_phi,
                        max_cap_distance: max_dist,
                    };
                    return Ok(PeakConstruction {
                        domain: dom.clone(),
                        p: p.clone(),
                        q,
                        slice,
                        m_basis,
                        frame,
                        c: params.c,
                        rho_v: params.rho_v,
                        h,
                        cutoff: CutoffG::new(r),
                        delta_w,
                        tube,
                        center,
                    });
                }
                Err(v) => last = Some((r, delta_w, v)),
            }
        }
    }
    match last {
        Some((r, delta_w, violation)) => Err(PeakError::TubeUnsatisfiable { r, delta_w, violation }),
        None => Err(PeakError::Geometry("W leaves the bounding box for every margin".into())),
    }
}

impl PeakConstruction {
    fn chart(&self) -> Chart<'_> {
        Chart {
            p: self.p.coords(),
            m: &self.m_basis,
        }
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn r(&self) -> f64 {
        self.cutoff.r
    }

    /// `(w, ‖b‖)` for `z`.
    pub fn coordinates(&self, z: &[Complex64]) -> (Vec<Complex64>, f64) {
        let (w, b) = self.chart().split(z);
        (w, norm(&b))
    }

    pub fn in_w(&self, w: &[Complex64]) -> Result<bool, PeakError> {
        Ok(self.domain.phi_at(w)? < self.delta_w)
    }

    /// The extension `f`.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64, PeakError> {
        let (w, b) = self.coordinates(z);
        if b >= self.cutoff.r || !self.in_w(&w)? {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.h.eval_slice(&w)? * self.cutoff.eval(b))
    }

    /// Uniform unit vector of `M`.
    pub fn random_m_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        self.chart().unit_in_m(rng)
    }

    /// Uniform unit vector orthogonal to `M`.
    pub fn random_normal_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        self.chart().unit_in_complement(rng)
    }

    /// Point `center + s·d` on `∂W` for a unit `d ∈ M`.
    pub fn w_boundary_along(&self, d: &[Complex64]) -> Result<Vec<Complex64>, PeakError> {
        let s = ray_exit(&self.domain, &self.center, d, self.delta_w, box_diameter(&self.domain))?
            .ok_or_else(|| PeakError::Geometry("W is unbounded".into()))?;
        Ok(axpy(&self.center, s, d))
    }

    /// Boundary point of `Ω` on the ray from the slice center through `z`.
    pub fn boundary_through(&self, z: &[Complex64]) -> Result<Option<Vec<Complex64>>, PeakError> {
        let dir: Vec<Complex64> = z.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let len = norm(&dir);
        if len < 1e-12 {
            return Ok(None);
        }
        let unit: Vec<Complex64> = dir.iter().map(|c| c / len).collect();
        Ok(ray_exit(&self.domain, &self.center, &unit, 0.0, box_diameter(&self.domain))?
            .map(|s| axpy(&self.center, s, &unit)))
    }

    pub fn summary(&self) -> PeakSummary {
        let cols = |m: &DMatrix<Complex64>| -> Vec<Vec<String>> {
            m.column_iter()
                .map(|c| c.iter().map(|x| format_complex(*x)).collect())
                .collect()
        };
        PeakSummary {
            p: self.p.clone(),
            q: self.q,
            c: self.c,
            rho_v: self.rho_v,
            normal: self.slice.normal().iter().map(|x| format_complex(*x)).collect(),
            slice_basis: cols(&self.slice.basis),
            slice_eigenvalues: self.slice.eigenvalues.clone(),
            m_basis: cols(&self.m_basis),
            h: self.h.to_string(),
            tube: self.tube.clone(),
        }
    }
}

/// Serializable description of a construction.
#[derive(Debug, Clone, Serialize)]
pub struct PeakSummary {
    pub p: CPoint,
    pub q: usize,
    pub c: f64,
    pub rho_v: f64,
    pub normal: Vec<String>,
    pub slice_basis: Vec<Vec<String>>,
    pub slice_eigenvalues: Vec<f64>,
    pub m_basis: Vec<Vec<String>>,
    pub h: String,
    pub tube: TubeReport,
}
