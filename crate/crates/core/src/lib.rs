//! Fractional Laplacians of order above one: special functions, kernels, hypersingular
//! operators, Dirichlet problems on the ball and a B-spline Galerkin solver.

// `!(a < b)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod appendix;
pub mod dirichlet;
mod error;
pub mod field;
pub mod hyperop;
pub mod kernels;
pub mod quadrature;
pub mod specialfn;
pub mod variational;

pub use error::{Error, Result};
