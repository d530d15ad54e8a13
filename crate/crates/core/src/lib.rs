//! Computational tools for q-pseudoconvexity and q-holomorphic convexity in ℂⁿ.
//!
//! - [`expr`]: expression language for smooth functions and second-order
//!   Wirtinger jets.
//! - [`forms`]: pointwise (a,b)-form algebra and the q-holomorphicity residual
//!   `∂̄f ∧ (∂∂̄f)^{q−1}`.
//! - [`levi`]: Levi matrices, Hermitian signatures and boundary classification.
//! - [`hull`]: discrete q-holomorphic hulls and the reciprocal-type family
//!   `f_λ(z) = (Σ λ_i z̄_i)/‖z‖²` used for separation.
//! - [`peak`]: almost-peak (q+1)-holomorphic functions on model domains.
//! - [`cli`]: the `qconvex` command-line surface.

// `!(x > t)` is deliberate throughout: it rejects NaN along with small values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `Node::add` and friends are constant-folding constructors, not operators.
#![allow(clippy::should_implement_trait)]

pub mod cli;
pub mod expr;
pub mod forms;
pub mod hull;
pub mod levi;
pub mod peak;
pub mod point;
pub mod rng;

pub use expr::{eval_jet2, finite_diff_jet, parse, Expr, Jet2};
pub use forms::{minor_oracle_residual, q_holo_residual, Form};
pub use levi::{LeviMatrix, Signature};
pub use point::CPoint;
