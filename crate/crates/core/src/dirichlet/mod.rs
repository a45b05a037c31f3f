//! Dirichlet problems on the unit ball: Green potentials, boundary and exterior
//! extensions, weighted traces, the representation formula and limits in `s`.

mod limits;
mod solve;
mod traces;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{norm, DecayClass, ScalarField};
use crate::quadrature::Estimate;
use crate::specialfn::FracOrder;

pub use limits::{beam_green, limit_study, LimitFamily, LimitPath, LimitRow};
pub use solve::{
    correction_density, extend_exterior, extend_exterior_general, extend_exterior_general_with,
    extend_exterior_with, harmonic_from_boundary, harmonic_from_boundary_with, solve_full, solve_full_with,
    solve_green, solve_green_with, SolverOptions,
};
pub use traces::{
    extract_traces, extract_traces_with, verify_representation, RepresentationReport, TraceOptions,
    TraceResult,
};

type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A function on the unit sphere (for `N = 1`, on `{-1, +1}`).
#[derive(Clone)]
pub struct BoundaryData {
    f: PointFn,
    label: String,
}

impl BoundaryData {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        BoundaryData {
            f: Arc::new(f),
            label: "g".into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        BoundaryData::new(move |_| c).labeled(format!("const:{c}"))
    }

    /// For `N = 1`: the values at `-1` and `+1`.
    pub fn two_point(left: f64, right: f64) -> Self {
        BoundaryData::new(move |z: &[f64]| if z[0] < 0.0 { left } else { right })
            .labeled(format!("[{left}, {right}]"))
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        (self.f)(z)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundaryData({})", self.label)
    }
}

/// Exterior datum `psi` on `R^N \ B` together with the radius `r >= 1` such that `psi`
/// vanishes on `B_r \ B` (`r = 1` when it does not vanish near the sphere).
#[derive(Clone, Debug)]
pub struct ExteriorData {
    pub psi: ScalarField,
    pub inner_radius: f64,
    /// Caller's assertion of the continuity hypothesis needed when `inner_radius = 1`.
    pub hypothesis_asserted: bool,
}

/// Data of the full Dirichlet problem; absent entries are zero.
#[derive(Clone, Debug)]
pub struct ProblemData {
    pub dim: usize,
    pub f: Option<ScalarField>,
    pub g0: Option<BoundaryData>,
    pub g1: Option<BoundaryData>,
    pub psi: Option<ExteriorData>,
}

impl ProblemData {
    pub fn new(dim: usize) -> Self {
        ProblemData {
            dim,
            f: None,
            g0: None,
            g1: None,
            psi: None,
        }
    }

    pub fn with_f(mut self, f: ScalarField) -> Self {
        self.f = Some(f);
        self
    }

    pub fn with_g0(mut self, g: BoundaryData) -> Self {
        self.g0 = Some(g);
        self
    }

    pub fn with_g1(mut self, g: BoundaryData) -> Self {
        self.g1 = Some(g);
        self
    }

    pub fn with_psi(mut self, psi: ExteriorData) -> Self {
        self.psi = Some(psi);
        self
    }
}

type TermFn = dyn Fn(&[f64], bool) -> Estimate + Send + Sync;

/// One kernel-quadrature contribution to a solution, zero outside the ball.
#[derive(Clone)]
pub struct Term {
    eval: Arc<TermFn>,
    pub description: String,
}

impl Term {
    pub(crate) fn new<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64], bool) -> Estimate + Send + Sync + 'static,
    {
        Term {
            eval: Arc::new(f),
            description: description.into(),
        }
    }
}

/// A solution assembled as a sum of kernel terms inside the ball and the exterior datum
/// outside.
#[derive(Clone)]
pub struct SolutionField {
    order: FracOrder,
    dim: usize,
    terms: Vec<Term>,
    exterior: ScalarField,
    exterior_inner_radius: f64,
    /// Worst boundary behaviour `delta^beta` of the interior part.
    boundary_exponent: f64,
    blowup: bool,
}

impl fmt::Debug for SolutionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolutionField")
            .field("order", &self.order.s())
            .field("dim", &self.dim)
            .field("provenance", &self.provenance())
            .finish()
    }
}

impl SolutionField {
    pub(crate) fn empty(order: FracOrder, dim: usize) -> Self {
        SolutionField {
            order,
            dim,
            terms: Vec::new(),
            exterior: ScalarField::zero(dim),
            exterior_inner_radius: f64::INFINITY,
            boundary_exponent: order.s(),
            blowup: false,
        }
    }

    pub(crate) fn with_term(mut self, term: Term, boundary_exponent: f64) -> Self {
        self.terms.push(term);
        self.boundary_exponent = self.boundary_exponent.min(boundary_exponent);
        if boundary_exponent < 0.0 {
            self.blowup = true;
        }
        self
    }

    pub(crate) fn with_exterior(mut self, psi: ScalarField, inner_radius: f64) -> Self {
        self.exterior = psi;
        self.exterior_inner_radius = inner_radius;
        self
    }

    /// Sum of two solutions of the same problem class.
    pub fn plus(mut self, other: SolutionField) -> Result<SolutionField> {
        if self.dim != other.dim || self.order != other.order {
            return Err(Error::domain(
                "cannot add solutions of different order or dimension",
            ));
        }
        self.terms.extend(other.terms);
        self.boundary_exponent = self.boundary_exponent.min(other.boundary_exponent);
        self.blowup |= other.blowup;
        let self_zero = self.exterior.label() == "zero";
        let other_zero = other.exterior.label() == "zero";
        if !other_zero {
            self.exterior = if self_zero {
                other.exterior
            } else {
                ScalarField::combine(1.0, &self.exterior, 1.0, &other.exterior)?
            };
        }
        self.exterior_inner_radius = self.exterior_inner_radius.min(other.exterior_inner_radius);
        Ok(self)
    }

    /// The same function viewed as a field of another order, for instance to read the
    /// weighted traces of a lower-order potential at a higher order.
    pub fn with_order(mut self, order: FracOrder) -> SolutionField {
        self.order = order;
        self
    }

    pub fn order(&self) -> FracOrder {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Descriptions of the kernel terms, in assembly order.
    pub fn provenance(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.description.clone()).collect()
    }

    pub fn exterior(&self) -> &ScalarField {
        &self.exterior
    }

    /// Radius `r` with `u = 0` on `B_r \ B` (infinite when the exterior datum is zero).
    pub fn exterior_inner_radius(&self) -> f64 {
        self.exterior_inner_radius
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if norm(x) >= 1.0 {
            return self.exterior.eval(x);
        }
        self.terms.iter().map(|t| (t.eval)(x, false).value).sum()
    }

    /// Value with the quadrature error bound of every term.
    pub fn eval_estimate(&self, x: &[f64]) -> Estimate {
        if norm(x) >= 1.0 {
            return Estimate::exact(self.exterior.eval(x));
        }
        self.terms.iter().map(|t| (t.eval)(x, true)).sum()
    }

    /// The solution as a field on `R^N`, with the sphere declared non-smooth.
    pub fn to_field(&self) -> ScalarField {
        let me = self.clone();
        let mut kinks: Vec<f64> = if self.dim == 1 { vec![-1.0, 1.0] } else { vec![1.0] };
        kinks.extend_from_slice(self.exterior.kinks());
        let base = ScalarField::new(self.dim, move |x: &[f64]| me.eval(x));
        let mut f = match self.exterior.decay() {
            DecayClass::Compact => base.compact(self.exterior.support_radius().unwrap_or(0.0).max(1.0)),
            DecayClass::Algebraic(p) => base.algebraic(p),
            DecayClass::Unknown => base,
        };
        if self.exterior.decay() == DecayClass::Unknown && self.exterior.in_l1(self.order.s()) {
            f = f.assert_l1_above(self.order.s() - 1e-9);
        }
        f = f
            .with_kinks(kinks)
            .with_kink_exponent(self.boundary_exponent.min(self.exterior.kink_exponent()))
            .labeled(format!("u[{}]", self.provenance().join(" + ")));
        if self.blowup {
            f = f.with_boundary_blowup();
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_solution_is_zero() {
        let o = FracOrder::new(1.5).unwrap();
        let u = SolutionField::empty(o, 1);
        assert_eq!(u.eval(&[0.3]), 0.0);
        assert_eq!(u.eval(&[2.0]), 0.0);
        assert!(u.provenance().is_empty());
    }

    #[test]
    fn boundary_data_constructors() {
        let g = BoundaryData::two_point(1.0, 2.0);
        assert_eq!(g.eval(&[-1.0]), 1.0);
        assert_eq!(g.eval(&[1.0]), 2.0);
        assert_eq!(BoundaryData::constant(3.0).eval(&[0.0, 1.0]), 3.0);
    }
}
