//! Cyclic Jacobi diagonalization of Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::LeviError;

/// Sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;
/// Convergence when the off-diagonal Frobenius norm drops below this
/// fraction of the full norm.
pub const OFF_DIAG_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Unsorted eigenvalues.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: DMatrix<Complex64>,
}

impl HermitianEigen {
    /// Indices ordered by decreasing eigenvalue (ties by index).
    pub fn order_desc(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[b].total_cmp(&self.values[a]).then(a.cmp(&b)));
        idx
    }
}

fn off_norm(a: &DMatrix<Complex64>) -> f64 {
    let m = a.nrows();
    let mut s = 0.0;
    for p in 0..m {
        for q in 0..m {
            if p != q {
                s += a[(p, q)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Diagonalizes a Hermitian matrix by complex Jacobi rotations. Each
/// rotation first rephases column `q` so the pivot `a_pq` becomes real and
/// positive, then applies the real symmetric rotation that annihilates it.
pub fn jacobi_eigen(h: &DMatrix<Complex64>) -> Result<HermitianEigen, LeviError> {
    let m = h.nrows();
    assert_eq!(m, h.ncols(), "Jacobi needs a square matrix");
    let mut a = h.clone();
    let mut v = DMatrix::<Complex64>::identity(m, m);
    let norm = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= OFF_DIAG_TOL * norm {
            converged = true;
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U restricted to (p, q): [[c, s], [-s·conj(phase), c·conj(phase)]]
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;

                for k in 0..m {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..m {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for k in 0..m {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }
    if !converged && off_norm(&a) > OFF_DIAG_TOL * norm {
        return Err(LeviError::NoConvergence {
            residual: off_norm(&a) / norm.max(f64::MIN_POSITIVE),
        });
    }
    Ok(HermitianEigen {
        values: (0..m).map(|k| a[(k, k)].re).collect(),
        vectors: v,
    })
}
