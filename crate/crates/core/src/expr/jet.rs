//! Second-order forward-mode Wirtinger differentiation.
//!
//! The 2n independent variables are `z_1..z_n, z̄_1..z̄_n`; every node carries
//! its value, gradient and (symmetric) Hessian in those variables.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{check_denominator, powu, short, EvalError, Expr, Node};
use crate::point::CPoint;

/// Value plus first and second Wirtinger derivatives at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: Complex64,
    /// ∂f/∂z_i
    pub g_z: DVector<Complex64>,
    /// ∂f/∂z̄_j
    pub g_zbar: DVector<Complex64>,
    /// ∂²f/∂z_i∂z_j
    pub h_zz: DMatrix<Complex64>,
    /// ∂²f/∂z_i∂z̄_j
    pub h_zzbar: DMatrix<Complex64>,
    /// ∂²f/∂z̄_i∂z̄_j
    pub h_zbzb: DMatrix<Complex64>,
}

impl Jet2 {
    pub fn zeros(n: usize) -> Self {
        Jet2 {
            value: Complex64::new(0.0, 0.0),
            g_z: DVector::zeros(n),
            g_zbar: DVector::zeros(n),
            h_zz: DMatrix::zeros(n, n),
            h_zzbar: DMatrix::zeros(n, n),
            h_zbzb: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.g_z.len()
    }

    fn entries(&self) -> impl Iterator<Item = &Complex64> {
        std::iter::once(&self.value)
            .chain(self.g_z.iter())
            .chain(self.g_zbar.iter())
            .chain(self.h_zz.iter())
            .chain(self.h_zzbar.iter())
            .chain(self.h_zbzb.iter())
    }

    /// Largest modulus over all entries.
    pub fn max_abs(&self) -> f64 {
        self.entries().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference against another jet of the same dimension.
    pub fn max_diff(&self, other: &Jet2) -> f64 {
        self.entries()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone)]
struct Dual2 {
    v: Complex64,
    g: Vec<Complex64>,
    /// Row-major 2n×2n.
    h: Vec<Complex64>,
}

impl Dual2 {
    fn constant(v: Complex64, m: usize) -> Self {
        Dual2 {
            v,
            g: vec![Complex64::new(0.0, 0.0); m],
            h: vec![Complex64::new(0.0, 0.0); m * m],
        }
    }

    fn seed(v: Complex64, slot: usize, m: usize) -> Self {
        let mut d = Self::constant(v, m);
        d.g[slot] = Complex64::new(1.0, 0.0);
        d
    }

    fn dim(&self) -> usize {
        self.g.len()
    }

    fn add(mut self, o: &Dual2, sign: f64) -> Self {
        self.v += o.v * sign;
        for (a, b) in self.g.iter_mut().zip(&o.g) {
            *a += b * sign;
        }
        for (a, b) in self.h.iter_mut().zip(&o.h) {
            *a += b * sign;
        }
        self
    }

    fn mul(&self, o: &Dual2) -> Self {
        let m = self.dim();
        let mut h = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                h[k] = self.h[k] * o.v
                    + o.h[k] * self.v
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        Dual2 {
            v: self.v * o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a * o.v + b * self.v).collect(),
            h,
        }
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.v`.
    fn chain(&self, f0: Complex64, f1: Complex64, f2: Complex64) -> Self {
        let m = self.dim();
        let mut h = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                h[k] = self.h[k] * f1 + self.g[i] * self.g[j] * f2;
            }
        }
        Dual2 {
            v: f0,
            g: self.g.iter().map(|a| a * f1).collect(),
            h,
        }
    }

    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.g.iter().all(|c| c.is_finite()) && self.h.iter().all(|c| c.is_finite())
    }
}

fn eval_node(node: &Node, z: &[Complex64]) -> Result<Dual2, EvalError> {
    let n = z.len();
    let m = 2 * n;
    let d = match node {
        Node::Const(c) => return Ok(Dual2::constant(*c, m)),
        Node::Var(k) => return Ok(Dual2::seed(z[*k], *k, m)),
        Node::ConjVar(k) => return Ok(Dual2::seed(z[*k].conj(), n + *k, m)),
        Node::Add(a, b) => eval_node(a, z)?.add(&eval_node(b, z)?, 1.0),
        Node::Sub(a, b) => eval_node(a, z)?.add(&eval_node(b, z)?, -1.0),
        Node::Mul(a, b) => eval_node(a, z)?.mul(&eval_node(b, z)?),
        Node::Div(a, b) => {
            let num = eval_node(a, z)?;
            let den = eval_node(b, z)?;
            check_denominator(num.v, den.v, b)?;
            let r = den.v.inv();
            let recip = den.chain(r, -r * r, 2.0 * r * r * r);
            num.mul(&recip)
        }
        Node::Pow(a, k) => {
            let base = eval_node(a, z)?;
            let x = base.v;
            let kf = *k as f64;
            let f1 = if *k >= 1 { powu(x, k - 1) * kf } else { Complex64::new(0.0, 0.0) };
            let f2 = if *k >= 2 {
                powu(x, k - 2) * (kf * (kf - 1.0))
            } else {
                Complex64::new(0.0, 0.0)
            };
            base.chain(powu(x, *k), f1, f2)
        }
        Node::Exp(a) => {
            let arg = eval_node(a, z)?;
            let e = arg.v.exp();
            arg.chain(e, e, e)
        }
        Node::Neg(a) => Dual2::constant(Complex64::new(0.0, 0.0), m).add(&eval_node(a, z)?, -1.0),
    };
    if d.is_finite() {
        Ok(d)
    } else {
        Err(EvalError::NonFinite { subexpr: short(node) })
    }
}

/// Exact forward-mode jet of `e` at `z`, treating `z` and `z̄` as independent.
pub fn eval_jet2(e: &Expr, z: &CPoint) -> Result<Jet2, EvalError> {
    let n = e.dim();
    if z.dim() != n {
        return Err(EvalError::DimensionMismatch {
            expected: n,
            got: z.dim(),
        });
    }
    let d = eval_node(e.node(), z.coords())?;
    let m = 2 * n;
    let hess = |i: usize, j: usize| d.h[i * m + j];
    Ok(Jet2 {
        value: d.v,
        g_z: DVector::from_fn(n, |i, _| d.g[i]),
        g_zbar: DVector::from_fn(n, |i, _| d.g[n + i]),
        h_zz: DMatrix::from_fn(n, n, &hess),
        h_zzbar: DMatrix::from_fn(n, n, |i, j| hess(i, n + j)),
        h_zbzb: DMatrix::from_fn(n, n, |i, j| hess(n + i, n + j)),
    })
}
