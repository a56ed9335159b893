//! Potential theory for Dunkl Laplacians, computable end to end.
//!
//! The Dunkl Laplacian attached to a finite root system `R` with multiplicity
//! function `k` is the differential-difference operator
//!
//! ```text
//! Δ_k f(x) = Δf(x) + Σ_{α∈R} k(α) [ ⟨∇f(x),α⟩/⟨α,x⟩
//!                                   − (|α|²/2)(f(x) − f(σ_α x))/⟨α,x⟩² ]
//! ```
//!
//! where `σ_α` is the reflection in the hyperplane `α⊥`. This crate makes the
//! objects of its potential theory concrete:
//!
//! * [`reflection`] — root systems, reflection groups, the weight `w_k`, and
//!   group-invariant domains;
//! * [`intertwine`] — quadrature realizations of the intertwining measures
//!   `μ_x^k` for products of rank-one factors, the kernel `E_k`, and radial
//!   translations;
//! * [`operator`] — exact symbolic `Δ_k` on polynomials, a finite-difference
//!   evaluator for plain functions, and a weighted symmetry check;
//! * [`kernels`] — the heat kernel `p_t^k`, its semigroup, the Green function
//!   `G^k`, and the Green potential with its excessivity property;
//! * [`means`] — mollified spherical means against the translated measures
//!   `σ_{x,r}^k`, harmonicity and minimum-principle harnesses;
//! * [`dirichlet`] — a deterministic finite-difference Dirichlet solver and an
//!   independent jump-diffusion Monte Carlo solver, plus exit-cloud audits;
//! * [`verify`] — the cross-checks tying everything together, runnable from
//!   the `dunklpot` CLI as `verify --suite <name|all>`.
//!
//! Throughout, `γ = Σ_{α∈R} k(α)` and `λ = γ/2 + d/2 − 1`; the theory is used
//! under the standing assumption `λ > 0` (the classical `k ≡ 0`, `λ = 0` case
//! is kept only as a heat-kernel reduction).

// Guards written as `!(x > 0.0)` reject NaN along with the wrong sign.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dirichlet;
pub mod domain;
pub mod error;
pub mod geom;
pub mod intertwine;
pub mod kernels;
pub mod means;
pub mod operator;
pub mod poly;
pub mod quadrature;
pub mod reflection;
pub mod special;
pub mod verify;

pub use domain::Domain;
pub use error::{Error, Result};
pub use kernels::KernelContext;
pub use reflection::{DunklModel, RootSystem};
