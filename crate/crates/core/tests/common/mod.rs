//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qconvex::expr::{Expr, Node};
use qconvex::forms::Form;
use qconvex::CPoint;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Leaf alphabet: `z_1..z_holo`, `z̄_1..z̄_anti` and constants.
#[derive(Debug, Clone, Copy)]
pub struct Leaves {
    pub holo: usize,
    pub anti: usize,
}

impl Leaves {
    pub fn all(n: usize) -> Self {
        Leaves { holo: n, anti: n }
    }
}

fn random_leaf<R: Rng + ?Sized>(rng: &mut R, leaves: Leaves) -> Node {
    match rng.random_range(0..5) {
        0 | 1 if leaves.holo > 0 => Node::Var(rng.random_range(0..leaves.holo)),
        2 | 3 if leaves.anti > 0 => Node::ConjVar(rng.random_range(0..leaves.anti)),
        _ => Node::Const(c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
    }
}

/// Random tree of depth at most `depth` over every operator. Denominators
/// are shifted away from zero and exponents kept small so values stay
/// moderate on the unit polydisc.
pub fn random_node<R: Rng + ?Sized>(rng: &mut R, leaves: Leaves, depth: usize) -> Node {
    if depth <= 1 || rng.random_range(0..6) == 0 {
        return random_leaf(rng, leaves);
    }
    let sub = |rng: &mut R| random_node(rng, leaves, depth - 1);
    match rng.random_range(0..8) {
        0 => Node::add(sub(rng), sub(rng)),
        1 => Node::sub(sub(rng), sub(rng)),
        2 | 3 => Node::mul(sub(rng), sub(rng)),
        4 => {
            // a / (3 + u·v) with leaves u, v: |u·v| ≤ 2 on the unit box.
            let den = Node::add(
                Node::Const(c(3.0, 0.0)),
                Node::mul(random_leaf(rng, leaves), random_leaf(rng, leaves)),
            );
            Node::div(sub(rng), den)
        }
        5 => Node::pow(sub(rng), rng.random_range(0..=3)),
        6 => Node::exp(Node::mul(Node::Const(c(0.5, 0.0)), random_leaf(rng, leaves))),
        _ => Node::neg(sub(rng)),
    }
}

pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, n: usize, depth: usize) -> Expr {
    Expr::from_node(random_node(rng, Leaves::all(n), depth), n).expect("generated indices are in range")
}

/// `e(Uz)`: every `z_j` becomes `Σ_k U_jk z_k` and `z̄_j` its conjugate.
pub fn compose_linear(node: &Node, u: &DMatrix<Complex64>) -> Node {
    let row = |j: usize, conj: bool| -> Node {
        (0..u.ncols())
            .map(|k| {
                let (coef, var) = if conj {
                    (u[(j, k)].conj(), Node::ConjVar(k))
                } else {
                    (u[(j, k)], Node::Var(k))
                };
                Node::mul(Node::Const(coef), var)
            })
            .reduce(Node::add)
            .expect("nonempty row")
    };
    match node {
        Node::Const(x) => Node::Const(*x),
        Node::Var(j) => row(*j, false),
        Node::ConjVar(j) => row(*j, true),
        Node::Add(a, b) => Node::add(compose_linear(a, u), compose_linear(b, u)),
        Node::Sub(a, b) => Node::sub(compose_linear(a, u), compose_linear(b, u)),
        Node::Mul(a, b) => Node::mul(compose_linear(a, u), compose_linear(b, u)),
        Node::Div(a, b) => Node::div(compose_linear(a, u), compose_linear(b, u)),
        Node::Pow(a, k) => Node::pow(compose_linear(a, u), *k),
        Node::Exp(a) => Node::exp(compose_linear(a, u)),
        Node::Neg(a) => Node::neg(compose_linear(a, u)),
    }
}

/// `h(w) + a(w_1..w_k, w̄_1..w̄_k)` at `w = Uz` with `h` holomorphic: every
/// `dz̄` factor lives in a k-dimensional space, so the function is
/// (k+1)-holomorphic.
pub fn random_q_holomorphic<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, depth: usize) -> Expr {
    let h = random_node(rng, Leaves { holo: n, anti: 0 }, depth);
    let a = random_node(rng, Leaves { holo: k, anti: k }, depth);
    let u = random_unitary(rng, n);
    Expr::from_node(compose_linear(&Node::add(h, a), &u), n).expect("indices in range")
}

/// Uniform point of the polydisc box `[−radius, radius]^{2n}`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> CPoint {
    CPoint::new(
        (0..n)
            .map(|_| c(rng.random_range(-radius..radius), rng.random_range(-radius..radius)))
            .collect(),
    )
    .unwrap()
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DVector<Complex64> {
    DVector::from_fn(m, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(m, m, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    (&a + a.adjoint()) * c(0.5, 0.0)
}

/// Hermitian matrix with a prescribed spectrum, conjugated by a random unitary.
pub fn hermitian_with_spectrum<R: Rng + ?Sized>(rng: &mut R, eigenvalues: &[f64]) -> DMatrix<Complex64> {
    let m = eigenvalues.len();
    let u = random_unitary(rng, m);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(m, eigenvalues.iter().map(|&x| c(x, 0.0))));
    &u * d * u.adjoint()
}

/// Product of `m` random Householder reflections `I − 2vv*/‖v‖²`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<Complex64> {
    let mut u = DMatrix::<Complex64>::identity(m, m);
    for _ in 0..m {
        let v = gaussian_vector(rng, m);
        let vv = v.norm_squared();
        let h = DMatrix::<Complex64>::identity(m, m) - (&v * v.adjoint()) * c(2.0 / vv, 0.0);
        u = h * u;
    }
    u
}

/// Forms over the ordered basis `e_0..e_{2n−1}` = `dz_1..dz_n, dz̄_1..dz̄_n`,
/// keyed by sorted index lists.
pub type BruteForm = BTreeMap<Vec<usize>, Complex64>;

/// Sign of the permutation sorting `v` (no repeats), by counting inversions.
pub fn inversion_sign(v: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn brute_wedge(a: &BruteForm, b: &BruteForm) -> BruteForm {
    let mut out = BruteForm::new();
    for (i, x) in a {
        for (j, y) in b {
            let mut cat = i.clone();
            cat.extend(j);
            let mut sorted = cat.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() < cat.len() {
                continue;
            }
            *out.entry(sorted).or_insert(c(0.0, 0.0)) += x * y * inversion_sign(&cat);
        }
    }
    out
}

pub fn to_brute(f: &Form) -> BruteForm {
    let n = f.dim();
    f.components()
        .map(|(i, j, v)| {
            let mut key = i;
            key.extend(j.iter().map(|k| k + n));
            (key, v)
        })
        .collect()
}

/// Largest coefficient difference between two brute-force forms.
pub fn brute_diff(a: &BruteForm, b: &BruteForm) -> f64 {
    let zero = c(0.0, 0.0);
    a.keys()
        .chain(b.keys())
        .map(|k| (a.get(k).unwrap_or(&zero) - b.get(k).unwrap_or(&zero)).norm())
        .fold(0.0, f64::max)
}

/// Random form of bidegree `(a, b)` with a few nonzero terms.
pub fn random_form<R: Rng + ?Sized>(rng: &mut R, n: usize, a: usize, b: usize) -> Form {
    let mut f = Form::zero(n, a, b);
    for _ in 0..rng.random_range(1..=4) {
        let holo = rand::seq::index::sample(rng, n, a).into_vec();
        let anti = rand::seq::index::sample(rng, n, b).into_vec();
        let coef = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        f = f.add(&Form::monomial(n, &holo, &anti, coef)).unwrap();
    }
    f
}
