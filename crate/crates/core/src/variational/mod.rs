//! Galerkin discretization of the energy form on finite unions of intervals.

mod basis;
mod form;
mod solve;

pub use basis::{m4, m4_deriv, m8_centered, BasisFn, GalerkinBasis, IntervalUnionDomain, SplineKind};
pub use form::{form_entry_fd, form_entry_fourier, second_difference_constant};
pub use solve::*;
