//! Shared fixtures for the benchmarks.

use fraclap::field::ScalarField;
use fraclap::specialfn::FracOrder;
use fraclap::variational::IntervalUnionDomain;

pub fn order(s: f64) -> FracOrder {
    FracOrder::new(s).expect("order in (0, 2]")
}

pub fn gaussian() -> ScalarField {
    ScalarField::line(|x| (-0.5 * x * x).exp())
        .algebraic(40.0)
        .labeled("gaussian")
}

/// The two-interval domain of the maximum-principle experiment.
pub fn two_intervals() -> IntervalUnionDomain {
    IntervalUnionDomain::new(vec![(-1.0, 1.0), (2.0, 4.0)]).expect("disjoint intervals")
}
