//! Ground states, bifurcation branches and dynamics of the cubic-type
//! nonlinear Schrödinger equation with a harmonic trap in two of three
//! directions:
//!
//! ```text
//! -Δu + (x₁² + x₂²) u = λ u + |u|^{p-2} u,   2 < p < 6,  λ < Λ₀ = 2.
//! ```

// Negated comparisons are used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branch;
pub mod discretization;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod field;
pub mod functionals;
pub mod ground_state;
pub mod krylov;
pub mod limits;
pub mod ode;
pub mod params;
pub mod quadrature;
pub mod scaling;

pub use discretization::{Discretization, GridSpec, Resolution};
pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{Field, Symmetry};
pub use params::{ModelParams, LAMBDA0};
