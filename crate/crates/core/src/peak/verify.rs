//! Sampled verification of the almost-peak property.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{PeakConstruction, PeakError, DELTA_MIN, FD_STEP, PEAK_VALUE_TOL, RESIDUAL_TOL};
use crate::expr::{finite_diff_jet_fn, finite_diff_jet_frame, FdScheme};
use crate::forms::q_holo_form;
use crate::levi::{sample_boundary, ProjectionSettings};
use crate::point::{format_complex, norm, CPoint};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeakSamples {
    pub boundary: usize,
    pub interior: usize,
    pub tube: usize,
}

impl Default for PeakSamples {
    fn default() -> Self {
        PeakSamples {
            boundary: 200,
            interior: 200,
            tube: 200,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifySettings {
    pub samples: PeakSamples,
    pub fd_step: f64,
    pub scheme: FdScheme,
    pub residual_tol: f64,
    pub margin_min: f64,
    pub value_tol: f64,
    /// Run stencils along the unitary frame adapted to `M ⊕ M^⊥`.
    pub adapted_frame: bool,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            samples: PeakSamples::default(),
            fd_step: FD_STEP,
            scheme: FdScheme::Richardson,
            residual_tol: RESIDUAL_TOL,
            margin_min: DELTA_MIN,
            value_tol: PEAK_VALUE_TOL,
            adapted_frame: true,
        }
    }
}

/// `|f(p) − 1|`.
#[derive(Debug, Clone, Serialize)]
pub struct ValueCheck {
    pub value: String,
    pub error: f64,
    pub tol: f64,
    pub passed: bool,
}

/// `sup |f|` over the sampled `Ω̄ ∖ B(p, ρ_V)`.
#[derive(Debug, Clone, Serialize)]
pub struct SupCheck {
    pub points: usize,
    pub sup: f64,
    pub margin: f64,
    pub required_margin: f64,
    pub argmax: Option<CPoint>,
    pub passed: bool,
}

/// Sup-norm of `∂̄f ∧ (∂∂̄f)^q` from finite-difference jets.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualCheck {
    /// Holomorphicity order tested (`q + 1`).
    pub order: usize,
    pub points: usize,
    /// Points inside the tube, where `f` is not locally zero.
    pub tube_points: usize,
    pub max: f64,
    pub tol: f64,
    pub fd_step: f64,
    pub scheme: String,
    pub adapted_frame: bool,
    pub argmax: Option<CPoint>,
    pub passed: bool,
}

/// `f = 0` exactly at sampled points with `‖b‖ ≥ r`.
#[derive(Debug, Clone, Serialize)]
pub struct VanishingCheck {
    pub points: usize,
    pub max_abs: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakReport {
    pub peak_value: ValueCheck,
    pub sup_outside: SupCheck,
    pub residual: ResidualCheck,
    pub vanishing: VanishingCheck,
    pub passed: bool,
}

/// Point of `Ω` on a random ray from the center, radius weighted as in a
/// ball of real dimension `2n`.
fn point_of_domain<R: Rng + ?Sized>(pc: &PeakConstruction, rng: &mut R) -> Result<Vec<Complex64>, PeakError> {
    let n = pc.dim();
    let dir: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let through: Vec<Complex64> = pc.center.iter().zip(&dir).map(|(c, d)| c + d).collect();
    let Some(end) = pc.boundary_through(&through)? else {
        return Ok(pc.center.clone());
    };
    let t = rng.random_range(0.0f64..1.0).powf(1.0 / (2 * n) as f64);
    Ok(pc.center.iter().zip(&end).map(|(a, b)| a + (b - a) * t).collect())
}

/// Point of `W`: a uniform-radius point on a random ray from the center.
fn point_of_w<R: Rng + ?Sized>(pc: &PeakConstruction, rng: &mut R) -> Result<Vec<Complex64>, PeakError> {
    let d = pc.random_m_direction(rng);
    let end = pc.w_boundary_along(&d)?;
    let dim = 2 * pc.m_basis.ncols();
    let t = rng.random_range(0.0f64..1.0).powf(1.0 / dim as f64);
    Ok(pc.center.iter().zip(&end).map(|(a, b)| a + (b - a) * t).collect())
}

fn offset<R: Rng + ?Sized>(pc: &PeakConstruction, radius: f64, rng: &mut R) -> Vec<Complex64> {
    pc.random_normal_offset(rng).into_iter().map(|c| c * radius).collect()
}

fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Runs the four checks. Sampling is sequential on `rng`; evaluation is
/// parallel with results in sample order.
pub fn verify_peak<R: Rng + ?Sized>(
    pc: &PeakConstruction,
    settings: &VerifySettings,
    rng: &mut R,
) -> Result<PeakReport, PeakError> {
    let dom = &pc.domain;
    let q = pc.q;
    let r = pc.r();
    let s = settings.samples;

    let fp = pc.eval(pc.p.coords())?;
    let err = (fp - Complex64::new(1.0, 0.0)).norm();
    let peak_value = ValueCheck {
        value: format_complex(fp),
        error: err,
        tol: settings.value_tol,
        passed: err <= settings.value_tol,
    };

    let budget = |count: usize| 1000 * count.max(1);
    let mut interior = Vec::with_capacity(s.interior);
    let mut tries = 0;
    while interior.len() < s.interior {
        if tries == budget(s.interior) {
            return Err(PeakError::Geometry("could not sample the interior of Ω".into()));
        }
        tries += 1;
        let z = point_of_domain(pc, rng)?;
        if dom.contains(&z) {
            interior.push(z);
        }
    }
    let mut tube = Vec::with_capacity(s.tube);
    let mut tries = 0;
    while tube.len() < s.tube {
        if tries == budget(s.tube) {
            return Err(PeakError::Geometry("could not sample the tube inside Ω".into()));
        }
        tries += 1;
        let w = point_of_w(pc, rng)?;
        let rho = r * rng.random_range(0.0f64..1.0).powf(1.0 / (2 * q) as f64);
        let z = add(&w, &offset(pc, rho, rng));
        if dom.contains(&z) {
            tube.push(z);
        }
    }
    let mut boundary: Vec<Vec<Complex64>> =
        sample_boundary(&dom.phi, s.boundary, dom.halfwidth, &ProjectionSettings::default(), rng)?
            .into_iter()
            .map(CPoint::into_coords)
            .collect();
    for z in &tube {
        if let Some(b) = pc.boundary_through(z)? {
            boundary.push(b);
        }
    }
    let mut vanish = Vec::with_capacity(s.tube);
    for k in 0..s.tube {
        let w = point_of_w(pc, rng)?;
        let factor = if k % 4 == 0 { 1.0 } else { 1.0 + 2.0 * rng.random_range(0.0..1.0) };
        vanish.push(add(&w, &offset(pc, r * factor, rng)));
    }

    // (b)
    let far: Vec<&Vec<Complex64>> = interior
        .iter()
        .chain(&tube)
        .chain(&boundary)
        .filter(|z| norm(&z.iter().zip(pc.p.coords()).map(|(a, b)| a - b).collect::<Vec<_>>()) >= pc.rho_v)
        .collect();
    let values = far
        .par_iter()
        .map(|z| pc.eval(z).map(|v| v.norm()))
        .collect::<Result<Vec<f64>, PeakError>>()?;
    let (sup, argmax) = values
        .iter()
        .zip(&far)
        .fold((0.0f64, None), |(m, a), (&v, z)| if v > m { (v, Some(*z)) } else { (m, a) });
    let margin = 1.0 - sup;
    let sup_outside = SupCheck {
        points: far.len(),
        sup,
        margin,
        required_margin: settings.margin_min,
        argmax: argmax.map(|z| CPoint::new(z.clone())).transpose()?,
        passed: margin >= settings.margin_min,
    };

    // (c)
    let order = q + 1;
    let pts: Vec<&Vec<Complex64>> = interior.iter().chain(&tube).collect();
    let residuals = pts
        .par_iter()
        .map(|z| -> Result<f64, PeakError> {
            let z = CPoint::new((*z).clone())?;
            let jet = if settings.adapted_frame {
                finite_diff_jet_frame(|x| pc.eval(x), &z, settings.fd_step, settings.scheme, &pc.frame)?
            } else {
                finite_diff_jet_fn(|x| pc.eval(x), &z, settings.fd_step, settings.scheme)?
            };
            Ok(q_holo_form(&jet, order)?.sup_norm())
        })
        .collect::<Result<Vec<f64>, PeakError>>()?;
    let (max_res, res_arg) = residuals
        .iter()
        .zip(&pts)
        .fold((0.0f64, None), |(m, a), (&v, z)| if v > m { (v, Some(*z)) } else { (m, a) });
    let tube_points = tube.iter().filter(|z| pc.coordinates(z).1 < r).count();
    let residual = ResidualCheck {
        order,
        points: pts.len(),
        tube_points,
        max: max_res,
        tol: settings.residual_tol,
        fd_step: settings.fd_step,
        scheme: match settings.scheme {
            FdScheme::Central => "central".into(),
            FdScheme::Richardson => "richardson".into(),
        },
        adapted_frame: settings.adapted_frame,
        argmax: res_arg.map(|z| CPoint::new(z.clone())).transpose()?,
        passed: max_res <= settings.residual_tol,
    };

    // (d)
    let outside = vanish
        .par_iter()
        .map(|z| pc.eval(z).map(|v| v.norm()))
        .collect::<Result<Vec<f64>, PeakError>>()?;
    let max_abs = outside.iter().copied().fold(0.0, f64::max);
    let vanishing = VanishingCheck {
        points: vanish.len(),
        max_abs,
        passed: max_abs == 0.0,
    };

    let passed = peak_value.passed && sup_outside.passed && residual.passed && vanishing.passed;
    Ok(PeakReport {
        peak_value,
        sup_outside,
        residual,
        vanishing,
        passed,
    })
}
