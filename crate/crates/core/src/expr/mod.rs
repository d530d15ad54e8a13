//! Smooth functions ℂⁿ → ℂ written in the `z`/`conj(z)` algebra.
//!
//! An [`Expr`] is an immutable tree over the operators listed in [`Node`].
//! `re`, `im` and `abs2` exist only in the surface syntax; the parser rewrites
//! them through [`Expr::conjugate`]. All constructors fold operators whose
//! children are all constants, so every `Expr` reachable through the public
//! API is in folded form and prints to text that parses back to the same
//! tree.

mod fd;
mod jet;
mod parse;

use std::fmt;
use std::ops;

use num_complex::Complex64;
use thiserror::Error;

use crate::point::CPoint;

pub use fd::{finite_diff_jet, finite_diff_jet_fn, finite_diff_jet_frame, FdScheme};
pub use jet::{eval_jet2, Jet2};
pub use parse::{parse, ParseError};

/// Denominators with modulus below `EPS_DIV * max(1, |numerator|)` are rejected.
pub const EPS_DIV: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("point has dimension {got}, expression expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("division by near-zero value in {subexpr}")]
    DivisionByZero { subexpr: String },
    #[error("non-finite value in {subexpr}")]
    NonFinite { subexpr: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Complex64),
    /// `z_{k+1}` (indices are zero-based internally).
    Var(usize),
    /// `conj(z_{k+1})`.
    ConjVar(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
    Exp(Box<Node>),
    Neg(Box<Node>),
}

impl Node {
    fn as_const(&self) -> Option<Complex64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn add(a: Node, b: Node) -> Node {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Node::Const(x + y),
            _ => Node::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Node, b: Node) -> Node {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Node::Const(x - y),
            _ => Node::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Node, b: Node) -> Node {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Node::Const(x * y),
            _ => Node::Mul(Box::new(a), Box::new(b)),
        }
    }

    /// Constant division is folded only when the quotient is finite.
    pub fn div(a: Node, b: Node) -> Node {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if (x / y).is_finite() => Node::Const(x / y),
            _ => Node::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Node, k: u32) -> Node {
        match a.as_const() {
            Some(x) if powu(x, k).is_finite() => Node::Const(powu(x, k)),
            _ => Node::Pow(Box::new(a), k),
        }
    }

    pub fn exp(a: Node) -> Node {
        match a.as_const() {
            Some(x) if x.exp().is_finite() => Node::Const(x.exp()),
            _ => Node::Exp(Box::new(a)),
        }
    }

    pub fn neg(a: Node) -> Node {
        match a.as_const() {
            Some(x) => Node::Const(-x),
            None => Node::Neg(Box::new(a)),
        }
    }

    fn conjugate(&self) -> Node {
        match self {
            Node::Const(c) => Node::Const(c.conj()),
            Node::Var(k) => Node::ConjVar(*k),
            Node::ConjVar(k) => Node::Var(*k),
            Node::Add(a, b) => Node::Add(Box::new(a.conjugate()), Box::new(b.conjugate())),
            Node::Sub(a, b) => Node::Sub(Box::new(a.conjugate()), Box::new(b.conjugate())),
            Node::Mul(a, b) => Node::Mul(Box::new(a.conjugate()), Box::new(b.conjugate())),
            Node::Div(a, b) => Node::Div(Box::new(a.conjugate()), Box::new(b.conjugate())),
            Node::Pow(a, k) => Node::Pow(Box::new(a.conjugate()), *k),
            Node::Exp(a) => Node::Exp(Box::new(a.conjugate())),
            Node::Neg(a) => Node::Neg(Box::new(a.conjugate())),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(k) | Node::ConjVar(k) => Some(*k),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            Node::Pow(a, _) | Node::Exp(a) | Node::Neg(a) => a.max_var(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var(_) | Node::ConjVar(_) => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.depth().max(b.depth())
            }
            Node::Pow(a, _) | Node::Exp(a) | Node::Neg(a) => 1 + a.depth(),
        }
    }

    fn eval(&self, z: &[Complex64]) -> Result<Complex64, EvalError> {
        let v = match self {
            Node::Const(c) => return Ok(*c),
            Node::Var(k) => return Ok(z[*k]),
            Node::ConjVar(k) => return Ok(z[*k].conj()),
            Node::Add(a, b) => a.eval(z)? + b.eval(z)?,
            Node::Sub(a, b) => a.eval(z)? - b.eval(z)?,
            Node::Mul(a, b) => a.eval(z)? * b.eval(z)?,
            Node::Div(a, b) => {
                let num = a.eval(z)?;
                let den = b.eval(z)?;
                check_denominator(num, den, b)?;
                num / den
            }
            Node::Pow(a, k) => powu(a.eval(z)?, *k),
            Node::Exp(a) => a.eval(z)?.exp(),
            Node::Neg(a) => -a.eval(z)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite {
                subexpr: short(self),
            })
        }
    }
}

pub(crate) fn powu(x: Complex64, k: u32) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut base = x;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        e >>= 1;
        if e > 0 {
            base *= base;
        }
    }
    acc
}

pub(crate) fn check_denominator(num: Complex64, den: Complex64, node: &Node) -> Result<(), EvalError> {
    if den.norm() <= EPS_DIV * num.norm().max(1.0) {
        Err(EvalError::DivisionByZero {
            subexpr: short(node),
        })
    } else {
        Ok(())
    }
}

pub(crate) fn short(node: &Node) -> String {
    let s = node.to_string();
    if s.chars().count() > 80 {
        let head: String = s.chars().take(77).collect();
        format!("{head}...")
    } else {
        s
    }
}

/// A smooth function of `z_1..z_n` and their conjugates.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    n: usize,
    root: Node,
}

impl Expr {
    /// Wraps a node tree. Fails if a variable index exceeds `n`.
    pub fn from_node(root: Node, n: usize) -> Result<Self, ParseError> {
        if n == 0 {
            return Err(ParseError::ZeroDimension);
        }
        if let Some(k) = root.max_var() {
            if k >= n {
                return Err(ParseError::IndexOutOfRange {
                    index: k + 1,
                    n,
                    offset: 0,
                });
            }
        }
        Ok(Expr { n, root })
    }

    pub fn constant(c: Complex64, n: usize) -> Self {
        Expr {
            n,
            root: Node::Const(c),
        }
    }

    pub fn real(x: f64, n: usize) -> Self {
        Self::constant(Complex64::new(x, 0.0), n)
    }

    /// `z_k`, with `k` one-based.
    pub fn var(k: usize, n: usize) -> Self {
        assert!(k >= 1 && k <= n, "variable index {k} out of range 1..={n}");
        Expr {
            n,
            root: Node::Var(k - 1),
        }
    }

    /// `conj(z_k)`, with `k` one-based.
    pub fn conj_var(k: usize, n: usize) -> Self {
        assert!(k >= 1 && k <= n, "variable index {k} out of range 1..={n}");
        Expr {
            n,
            root: Node::ConjVar(k - 1),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Same tree viewed as a function on ℂᵐ, `m ≥` the largest index used.
    pub fn with_dim(&self, m: usize) -> Result<Self, ParseError> {
        Self::from_node(self.root.clone(), m)
    }

    pub fn pow(&self, k: u32) -> Self {
        Expr {
            n: self.n,
            root: Node::pow(self.root.clone(), k),
        }
    }

    pub fn exp(&self) -> Self {
        Expr {
            n: self.n,
            root: Node::exp(self.root.clone()),
        }
    }

    /// Syntactic conjugate: constants conjugated, `z_k ↔ conj(z_k)`.
    pub fn conjugate(&self) -> Self {
        Expr {
            n: self.n,
            root: self.root.conjugate(),
        }
    }

    /// `(e + conj e) / 2`
    pub fn re_part(&self) -> Self {
        (self.clone() + self.conjugate()) / Expr::real(2.0, self.n)
    }

    /// `(e - conj e) / 2i`
    pub fn im_part(&self) -> Self {
        (self.clone() - self.conjugate()) / Expr::constant(Complex64::new(0.0, 2.0), self.n)
    }

    /// `e * conj e`
    pub fn abs2(&self) -> Self {
        self.clone() * self.conjugate()
    }

    pub fn eval(&self, z: &CPoint) -> Result<Complex64, EvalError> {
        self.eval_slice(z.coords())
    }

    pub fn eval_slice(&self, z: &[Complex64]) -> Result<Complex64, EvalError> {
        if z.len() != self.n {
            return Err(EvalError::DimensionMismatch {
                expected: self.n,
                got: z.len(),
            });
        }
        self.root.eval(z)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $ctor:ident) => {
        impl ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr {
                    n: self.n.max(rhs.n),
                    root: Node::$ctor(self.root, rhs.root),
                }
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            n: self.n,
            root: Node::neg(self.root),
        }
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.reduce(|a, b| a + b).unwrap_or_else(|| Expr::real(0.0, 1))
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x.is_sign_negative() && x != 0.0 {
        write!(f, "(-{})", -x)
    } else {
        write!(f, "{}", x.abs())
    }
}

/// Fully parenthesised, parseable form.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => {
                if c.im == 0.0 {
                    write_real(f, c.re)
                } else if c.re == 0.0 {
                    write!(f, "(")?;
                    write_real(f, c.im)?;
                    write!(f, "*i)")
                } else {
                    write!(f, "(")?;
                    write_real(f, c.re)?;
                    write!(f, "+")?;
                    write_real(f, c.im)?;
                    write!(f, "*i)")
                }
            }
            Node::Var(k) => write!(f, "z{}", k + 1),
            Node::ConjVar(k) => write!(f, "conj(z{})", k + 1),
            Node::Add(a, b) => write!(f, "({a}+{b})"),
            Node::Sub(a, b) => write!(f, "({a}-{b})"),
            Node::Mul(a, b) => write!(f, "({a}*{b})"),
            Node::Div(a, b) => write!(f, "({a}/{b})"),
            Node::Pow(a, k) => write!(f, "({a})^{k}"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Neg(a) => write!(f, "-({a})"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
