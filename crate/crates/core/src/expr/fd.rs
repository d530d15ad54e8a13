//! Central finite-difference jets, used as an independent check of the
//! forward-mode engine and for functions that have no expression form.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{EvalError, Expr, Jet2};
use crate::point::CPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FdScheme {
    /// Second-order central stencils with step `h`.
    #[default]
    Central,
    /// Richardson combination `(4·J(h) − J(2h)) / 3` of two central jets.
    Richardson,
}

/// Finite-difference jet of `e` at `z` with second-order central stencils.
pub fn finite_diff_jet(e: &Expr, z: &CPoint, h: f64) -> Result<Jet2, EvalError> {
    if z.dim() != e.dim() {
        return Err(EvalError::DimensionMismatch {
            expected: e.dim(),
            got: z.dim(),
        });
    }
    finite_diff_jet_fn(|p| e.eval_slice(p), z, h, FdScheme::Central)
}

/// Finite-difference jet of an arbitrary function of the coordinates.
pub fn finite_diff_jet_fn<F, E>(f: F, z: &CPoint, h: f64, scheme: FdScheme) -> Result<Jet2, E>
where
    F: Fn(&[Complex64]) -> Result<Complex64, E>,
{
    assert!(h > 0.0, "finite-difference step must be positive");
    match scheme {
        FdScheme::Central => central(&f, z, h),
        FdScheme::Richardson => {
            let fine = central(&f, z, h)?;
            let coarse = central(&f, z, 2.0 * h)?;
            let mix = |a: Complex64, b: Complex64| (4.0 * a - b) / 3.0;
            Ok(Jet2 {
                value: fine.value,
                g_z: fine.g_z.zip_map(&coarse.g_z, mix),
                g_zbar: fine.g_zbar.zip_map(&coarse.g_zbar, mix),
                h_zz: fine.h_zz.zip_map(&coarse.h_zz, mix),
                h_zzbar: fine.h_zzbar.zip_map(&coarse.h_zzbar, mix),
                h_zbzb: fine.h_zbzb.zip_map(&coarse.h_zbzb, mix),
            })
        }
    }
}

/// Finite-difference jet with stencils along the columns of a unitary
/// `frame`: the jet of `ζ ↦ f(z + Uζ)` at `ζ = 0`, mapped back to the
/// standard coordinates by `g_z = Ū g_ζ`, `g_z̄ = U g_ζ̄`, `H_zz = Ū H_ζζ U*`,
/// `H_zz̄ = Ū H_ζζ̄ Uᵀ`, `H_z̄z̄ = U H_ζ̄ζ̄ Uᵀ`.
pub fn finite_diff_jet_frame<F, E>(
    f: F,
    z: &CPoint,
    h: f64,
    scheme: FdScheme,
    frame: &DMatrix<Complex64>,
) -> Result<Jet2, E>
where
    F: Fn(&[Complex64]) -> Result<Complex64, E>,
{
    let n = z.dim();
    assert_eq!((frame.nrows(), frame.ncols()), (n, n), "frame must be n x n");
    let base = z.coords();
    let local = |zeta: &[Complex64]| {
        let p: Vec<Complex64> = (0..n)
            .map(|j| base[j] + (0..n).map(|k| frame[(j, k)] * zeta[k]).sum::<Complex64>())
            .collect();
        f(&p)
    };
    let j = finite_diff_jet_fn(local, &CPoint::origin(n), h, scheme)?;
    let u = frame;
    let ubar = frame.map(|c| c.conj());
    let ut = frame.transpose();
    let ustar = frame.adjoint();
    Ok(Jet2 {
        value: j.value,
        g_z: &ubar * &j.g_z,
        g_zbar: u * &j.g_zbar,
        h_zz: &ubar * &j.h_zz * &ustar,
        h_zzbar: &ubar * &j.h_zzbar * &ut,
        h_zbzb: u * &j.h_zbzb * &ut,
    })
}

/// Real coordinate `r` of ℂⁿ: `x_r` for `r < n`, `y_{r-n}` otherwise.
fn shift(base: &mut [Complex64], r: usize, n: usize, delta: f64) {
    if r < n {
        base[r].re += delta;
    } else {
        base[r - n].im += delta;
    }
}

fn central<F, E>(f: &F, z: &CPoint, h: f64) -> Result<Jet2, E>
where
    F: Fn(&[Complex64]) -> Result<Complex64, E>,
{
    let n = z.dim();
    let m = 2 * n;
    let origin = z.coords().to_vec();
    let at = |moves: &[(usize, f64)]| -> Result<Complex64, E> {
        let mut p = origin.clone();
        for &(r, d) in moves {
            shift(&mut p, r, n, d);
        }
        f(&p)
    };

    let f0 = f(&origin)?;
    // Real gradient and Hessian in (x_1..x_n, y_1..y_n).
    let mut grad = vec![Complex64::new(0.0, 0.0); m];
    let mut hess = vec![Complex64::new(0.0, 0.0); m * m];
    for r in 0..m {
        let fp = at(&[(r, h)])?;
        let fm = at(&[(r, -h)])?;
        grad[r] = (fp - fm) / (2.0 * h);
        hess[r * m + r] = (fp - 2.0 * f0 + fm) / (h * h);
        for s in (r + 1)..m {
            let d = (at(&[(r, h), (s, h)])? - at(&[(r, h), (s, -h)])? - at(&[(r, -h), (s, h)])?
                + at(&[(r, -h), (s, -h)])?)
                / (4.0 * h * h);
            hess[r * m + s] = d;
            hess[s * m + r] = d;
        }
    }

    let i = Complex64::new(0.0, 1.0);
    let dx = |j: usize| grad[j];
    let dy = |j: usize| grad[n + j];
    let xx = |j: usize, k: usize| hess[j * m + k];
    let yy = |j: usize, k: usize| hess[(n + j) * m + n + k];
    let xy = |j: usize, k: usize| hess[j * m + n + k];

    Ok(Jet2 {
        value: f0,
        g_z: DVector::from_fn(n, |j, _| (dx(j) - i * dy(j)) * 0.5),
        g_zbar: DVector::from_fn(n, |j, _| (dx(j) + i * dy(j)) * 0.5),
        h_zz: DMatrix::from_fn(n, n, |j, k| {
            (xx(j, k) - yy(j, k) - i * (xy(j, k) + xy(k, j))) * 0.25
        }),
        h_zzbar: DMatrix::from_fn(n, n, |j, k| {
            (xx(j, k) + yy(j, k) + i * (xy(j, k) - xy(k, j))) * 0.25
        }),
        h_zbzb: DMatrix::from_fn(n, n, |j, k| {
            (xx(j, k) - yy(j, k) + i * (xy(j, k) + xy(k, j))) * 0.25
        }),
    })
}
