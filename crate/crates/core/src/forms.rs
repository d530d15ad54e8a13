//! Pointwise exterior algebra of complex (a,b)-covectors.
//!
//! A basis element is `dz_I ∧ dz̄_J` with `I`, `J` strictly increasing, and
//! signs follow the ordered basis `dz_1, …, dz_n, dz̄_1, …, dz̄_n`. Index sets
//! are stored as bitmasks (bit `k` ↔ index `k`, zero-based), which keeps
//! every key canonical.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::expr::{eval_jet2, EvalError, Expr, Jet2};
use crate::point::CPoint;

/// Largest supported dimension (index sets live in a `u32`).
pub const MAX_DIM: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("bidegree mismatch: {0:?} vs {1:?}")]
    BidegreeMismatch((usize, usize), (usize, usize)),
    #[error("q = {q} is outside 1..={n}")]
    QOutOfRange { q: usize, n: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    n: usize,
    a: usize,
    b: usize,
    coeffs: BTreeMap<(u32, u32), Complex64>,
}

fn mask(indices: &[usize]) -> u32 {
    indices.iter().fold(0u32, |m, &k| m | (1 << k))
}

fn unmask(m: u32) -> Vec<usize> {
    (0..32).filter(|k| m & (1 << k) != 0).collect()
}

/// Sign of merging the sorted sets `a` then `b` into sorted order.
fn merge_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j >= 31 { 0 } else { a & !((1u32 << (j + 1)) - 1) };
        inversions += above.count_ones();
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl Form {
    pub fn zero(n: usize, a: usize, b: usize) -> Self {
        assert!(n <= MAX_DIM && a <= n && b <= n, "invalid bidegree ({a},{b}) for n = {n}");
        Form {
            n,
            a,
            b,
            coeffs: BTreeMap::new(),
        }
    }

    /// `coeff · dz_I ∧ dz̄_J` for arbitrary (possibly unsorted, zero-based)
    /// index lists; the result is sign-normalized, or zero for repeats.
    pub fn monomial(n: usize, holo: &[usize], antiholo: &[usize], coeff: Complex64) -> Self {
        let mut out = Form::zero(n, holo.len(), antiholo.len());
        let mut sign = 1.0;
        let mut acc = 0u32;
        for &k in holo {
            assert!(k < n, "index {k} out of range for n = {n}");
            if acc & (1 << k) != 0 {
                return out;
            }
            sign *= merge_sign(acc, 1 << k);
            acc |= 1 << k;
        }
        let im = acc;
        acc = 0;
        for &k in antiholo {
            assert!(k < n, "index {k} out of range for n = {n}");
            if acc & (1 << k) != 0 {
                return out;
            }
            sign *= merge_sign(acc, 1 << k);
            acc |= 1 << k;
        }
        out.set(im, acc, coeff * sign);
        out
    }

    pub fn dz(n: usize, k: usize) -> Self {
        Self::monomial(n, &[k], &[], Complex64::new(1.0, 0.0))
    }

    pub fn dzbar(n: usize, k: usize) -> Self {
        Self::monomial(n, &[], &[k], Complex64::new(1.0, 0.0))
    }

    fn set(&mut self, i: u32, j: u32, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&(i, j));
        } else {
            self.coeffs.insert((i, j), c);
        }
    }

    fn accumulate(&mut self, i: u32, j: u32, c: Complex64) {
        let slot = self.coeffs.entry((i, j)).or_insert(Complex64::new(0.0, 0.0));
        *slot += c;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    pub fn degree(&self) -> usize {
        self.a + self.b
    }

    /// Coefficient on `dz_I ∧ dz̄_J` for sorted zero-based `I`, `J`.
    pub fn coeff(&self, holo: &[usize], antiholo: &[usize]) -> Complex64 {
        self.coeffs
            .get(&(mask(holo), mask(antiholo)))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Stored components as `(I, J, coefficient)` in canonical order.
    pub fn components(&self) -> impl Iterator<Item = (Vec<usize>, Vec<usize>, Complex64)> + '_ {
        self.coeffs.iter().map(|(&(i, j), &c)| (unmask(i), unmask(j), c))
    }

    /// Maximum coefficient modulus; zero iff the form vanishes.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Form::zero(self.n, self.a, self.b);
        for (&(i, j), &c) in &self.coeffs {
            out.set(i, j, c * s);
        }
        out
    }

    pub fn add(&self, other: &Form) -> Result<Self, FormError> {
        if self.n != other.n {
            return Err(FormError::DimensionMismatch(self.n, other.n));
        }
        if self.bidegree() != other.bidegree() {
            return Err(FormError::BidegreeMismatch(self.bidegree(), other.bidegree()));
        }
        let mut out = self.clone();
        for (&(i, j), &c) in &other.coeffs {
            out.accumulate(i, j, c);
        }
        Ok(out)
    }

    /// Exterior product. Bidegrees add; overflow past `n` gives the zero form.
    pub fn wedge(&self, other: &Form) -> Result<Self, FormError> {
        if self.n != other.n {
            return Err(FormError::DimensionMismatch(self.n, other.n));
        }
        let n = self.n;
        let (a, b) = (self.a + other.a, self.b + other.b);
        if a > n || b > n {
            return Ok(Form {
                n,
                a: a.min(n),
                b: b.min(n),
                coeffs: BTreeMap::new(),
            });
        }
        let mut out = Form::zero(n, a, b);
        for (&(i1, j1), &c1) in &self.coeffs {
            for (&(i2, j2), &c2) in &other.coeffs {
                if i1 & i2 != 0 || j1 & j2 != 0 {
                    continue;
                }
                // dz_I1 dz̄_J1 dz_I2 dz̄_J2 → dz_I1 dz_I2 dz̄_J1 dz̄_J2
                let cross = if (j1.count_ones() * i2.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                let sign = cross * merge_sign(i1, i2) * merge_sign(j1, j2);
                out.accumulate(i1 | i2, j1 | j2, c1 * c2 * sign);
            }
        }
        Ok(out)
    }
}

/// `∂̄f = Σ_j ∂f/∂z̄_j dz̄_j`
pub fn dbar_form(j: &Jet2) -> Form {
    let n = j.dim();
    let mut out = Form::zero(n, 0, 1);
    for k in 0..n {
        out.set(0, 1 << k, j.g_zbar[k]);
    }
    out
}

/// `∂∂̄f = Σ_{i,j} ∂²f/∂z_i∂z̄_j dz_i ∧ dz̄_j`
pub fn ddbar_form(j: &Jet2) -> Form {
    let n = j.dim();
    let mut out = Form::zero(n, 1, 1);
    for r in 0..n {
        for c in 0..n {
            out.set(1 << r, 1 << c, j.h_zzbar[(r, c)]);
        }
    }
    out
}

fn check_q(q: usize, n: usize) -> Result<(), FormError> {
    if q == 0 || q > n {
        Err(FormError::QOutOfRange { q, n })
    } else {
        Ok(())
    }
}

/// `∂̄f ∧ (∂∂̄f)^{q−1}` by iterated wedges.
pub fn q_holo_form(j: &Jet2, q: usize) -> Result<Form, FormError> {
    check_q(q, j.dim())?;
    let ddbar = ddbar_form(j);
    let mut acc = dbar_form(j);
    for _ in 1..q {
        acc = acc.wedge(&ddbar)?;
    }
    Ok(acc)
}

/// Same form as [`q_holo_form`], assembled from determinants: the coefficient
/// on `dz_I ∧ dz̄_J` (|I| = q−1, |J| = q) is
/// `(−1)^{k + k(k−1)/2} k! det[ ∂̄f_J ; H_{I,J} ]` with `k = q − 1`.
pub fn minor_oracle_form(j: &Jet2, q: usize) -> Result<Form, FormError> {
    let n = j.dim();
    check_q(q, n)?;
    let k = q - 1;
    let mut out = Form::zero(n, k, q.min(n));
    if q > n {
        return Ok(out);
    }
    let sign = if (k + k * k.saturating_sub(1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let factorial: f64 = (1..=k).map(|x| x as f64).product();
    let subsets = |size: usize| (0u32..(1u32 << n)).filter(move |m| m.count_ones() as usize == size);
    for rows in subsets(k) {
        let row_idx = unmask(rows);
        for cols in subsets(q) {
            let col_idx = unmask(cols);
            let m = DMatrix::from_fn(q, q, |r, c| {
                if r == 0 {
                    j.g_zbar[col_idx[c]]
                } else {
                    j.h_zzbar[(row_idx[r - 1], col_idx[c])]
                }
            });
            out.set(rows, cols, m.determinant() * (sign * factorial));
        }
    }
    Ok(out)
}

/// Sup-norm of `∂̄f ∧ (∂∂̄f)^{q−1}` at `z`; zero means `f` satisfies the
/// q-holomorphicity condition at `z`.
pub fn q_holo_residual(e: &Expr, z: &CPoint, q: usize) -> Result<f64, FormError> {
    check_q(q, e.dim())?;
    let j = eval_jet2(e, z)?;
    Ok(q_holo_form(&j, q)?.sup_norm())
}

/// [`q_holo_residual`] computed through [`minor_oracle_form`].
pub fn minor_oracle_residual(e: &Expr, z: &CPoint, q: usize) -> Result<f64, FormError> {
    check_q(q, e.dim())?;
    let j = eval_jet2(e, z)?;
    Ok(minor_oracle_form(&j, q)?.sup_norm())
}

/// Magnitude against which residual discrepancies are measured:
/// `max(1, k!·|∂̄f|_∞·|H|_∞^k)` with `k = q − 1`.
pub fn residual_scale(j: &Jet2, q: usize) -> f64 {
    let g = j.g_zbar.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let h = j.h_zzbar.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let k = q.saturating_sub(1);
    let factorial: f64 = (1..=k).map(|x| x as f64).product();
    (factorial * g * h.powi(k as i32) * (j.dim() as f64).powi(k as i32)).max(1.0)
}
