//! The three torsion-like functions on `(-1, 1)` at `s = 3/2`: the Green potential `u`
//! of the constant, `v = G_{1/2} G_1 1` and `w = G_1 G_{1/2} 1`. Only `u` and `v` have
//! `(-Delta)^{3/2} = 1`; composing the Green operators the other way round leaves a
//! boundary layer in `w`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::dirichlet::{extract_traces, solve_green, SolutionField, TraceResult};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::hyperop::{frac_lap_2nd, frac_lap_4th, frac_lap_composed};
use crate::quadrature::{Estimate, QuadratureConfig};
use crate::specialfn::FracOrder;

fn half() -> FracOrder {
    FracOrder::new(0.5).expect("1/2 is a valid order")
}

fn three_halves() -> FracOrder {
    FracOrder::new(1.5).expect("3/2 is a valid order")
}

/// `W(y) = (-2 sqrt(1 - y^2)(y^2 + 2) - 6 y arcsin y + 3 pi) / 12` on `[-1, 1]`, zero outside.
pub fn w_closed(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        return 0.0;
    }
    let r = ((1.0 - y) * (1.0 + y)).sqrt();
    (-2.0 * r * (y * y + 2.0) - 6.0 * y * y.asin() + 3.0 * PI) / 12.0
}

/// `W'(y) = -(y sqrt(1 - y^2) + arcsin y) / 2` inside, zero outside.
pub fn w_prime(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        return 0.0;
    }
    let r = ((1.0 - y) * (1.0 + y)).sqrt();
    -0.5 * (y * r + y.asin())
}

/// `arcsin` on `(-1, 1)`, zero outside.
pub fn zeta_field() -> ScalarField {
    ScalarField::line(|x| if x.abs() < 1.0 { x.asin() } else { 0.0 })
        .compact(1.0)
        .with_kinks([-1.0, 1.0])
        .with_kink_exponent(0.0)
        .labeled("arcsin")
}

/// `W` as a field after checking `-W'' = delta^{1/2}` by finite differences at twenty
/// interior points, `W(1) = 0` and `W'(0) = 0`.
pub fn build_w() -> Result<ScalarField> {
    let h = 1e-4;
    for k in 0..20 {
        let y = -0.95 + 0.1 * k as f64;
        let second = (w_closed(y + h) - 2.0 * w_closed(y) + w_closed(y - h)) / (h * h);
        let want = ((1.0 - y) * (1.0 + y)).sqrt();
        if (second + want).abs() > 1e-6 {
            return Err(Error::AccuracyFailure {
                estimate: -second,
                error_bound: (second + want).abs(),
                context: format!("-W'' differs from delta^(1/2) at y = {y}"),
            });
        }
        let slope = (w_closed(y + h) - w_closed(y - h)) / (2.0 * h);
        if (slope - w_prime(y)).abs() > 1e-6 {
            return Err(Error::AccuracyFailure {
                estimate: slope,
                error_bound: (slope - w_prime(y)).abs(),
                context: format!("W' differs from its closed form at y = {y}"),
            });
        }
    }
    let at_one = w_closed(1.0 - 1e-15);
    if at_one.abs() > 1e-6 || w_prime(0.0) != 0.0 {
        return Err(Error::AccuracyFailure {
            estimate: at_one,
            error_bound: at_one.abs(),
            context: "W violates W(1) = 0 = W'(0)".into(),
        });
    }
    Ok(ScalarField::line(w_closed)
        .compact(1.0)
        .with_kinks([-1.0, 1.0])
        .labeled("W"))
}

/// The Green potential of the constant at `s = 1/2` against its closed form `delta^{1/2}`.
pub struct W1Report {
    pub field: SolutionField,
    /// `(x, quadrature value, delta(x)^{1/2})`.
    pub samples: Vec<(f64, Estimate, f64)>,
    pub residual: f64,
}

pub fn build_w1(cfg: &QuadratureConfig) -> Result<W1Report> {
    let field = solve_green(half(), &ScalarField::constant(1, 1.0), cfg)?;
    let xs: Vec<f64> = (-9..=9).map(|k| 0.1 * k as f64).chain([1.5, -2.0]).collect();
    let samples: Vec<(f64, Estimate, f64)> = xs
        .iter()
        .map(|&x| {
            let closed = if x.abs() < 1.0 {
                ((1.0 - x) * (1.0 + x)).sqrt()
            } else {
                0.0
            };
            (x, field.eval_estimate(&[x]), closed)
        })
        .collect();
    let residual = samples
        .iter()
        .map(|(_, e, c)| (e.value - c).abs())
        .fold(0.0, f64::max);
    Ok(W1Report {
        field,
        samples,
        residual,
    })
}

pub struct AppendixFields {
    /// `int G_{3/2}(., y) dy`.
    pub u: SolutionField,
    /// `G_{1/2}` applied to the classical torsion `(1 - y^2) / 2`.
    pub v: SolutionField,
    pub w: ScalarField,
    /// `delta^{1/2}`.
    pub w1: ScalarField,
    pub zeta: ScalarField,
}

pub fn appendix_fields(cfg: &QuadratureConfig) -> Result<AppendixFields> {
    let torsion = ScalarField::line(|y| {
        if y.abs() < 1.0 {
            0.5 * (1.0 - y) * (1.0 + y)
        } else {
            0.0
        }
    })
    .compact(1.0)
    .with_kinks([-1.0, 1.0])
    .labeled("(1-y^2)/2");
    Ok(AppendixFields {
        u: solve_green(three_halves(), &ScalarField::constant(1, 1.0), cfg)?,
        v: solve_green(half(), &torsion, cfg)?,
        w: build_w()?,
        w1: ScalarField::line(|x| {
            if x.abs() < 1.0 {
                ((1.0 - x) * (1.0 + x)).sqrt()
            } else {
                0.0
            }
        })
        .compact(1.0)
        .with_kinks([-1.0, 1.0])
        .with_kink_exponent(0.5)
        .labeled("delta^(1/2)"),
        zeta: zeta_field(),
    })
}

/// `x -> (-Delta)^{1/2} zeta(x)` and its derivative on `(-0.9, 0.9)`.
#[derive(Debug, Clone)]
pub struct ZetaProfile {
    pub xs: Vec<f64>,
    pub values: Vec<Estimate>,
    /// Central differences with one Richardson step; error includes the propagated
    /// quadrature error.
    pub derivative: Vec<Estimate>,
    /// `max |derivative|` exceeds ten times its error bound.
    pub derivative_nonzero: bool,
    /// Values at `0.2` and `0.6` differ beyond their error bounds.
    pub non_constant: bool,
    /// False when the error bounds swamp the signal even after one retry.
    pub conclusive: bool,
}

fn zeta_at(x: f64, zeta: &ScalarField, cfg: &QuadratureConfig) -> Result<Estimate> {
    frac_lap_2nd(0.5, zeta, &[x], cfg)
}

fn zeta_profile(cfg: &QuadratureConfig) -> Result<ZetaProfile> {
    let zeta = zeta_field();
    let xs: Vec<f64> = (-8..=8).map(|k| 0.1 * k as f64).collect();
    let rows: Vec<(Estimate, Estimate)> = xs
        .par_iter()
        .map(|&x| -> Result<(Estimate, Estimate)> {
            let v = zeta_at(x, &zeta, cfg)?;
            let h = 0.02;
            let d = |step: f64| -> Result<(f64, f64)> {
                let p = zeta_at(x + step, &zeta, cfg)?;
                let m = zeta_at(x - step, &zeta, cfg)?;
                Ok((
                    (p.value - m.value) / (2.0 * step),
                    (p.error + m.error) / (2.0 * step),
                ))
            };
            let (coarse, ec) = d(h)?;
            let (fine, ef) = d(0.5 * h)?;
            let value = (4.0 * fine - coarse) / 3.0;
            let error = (value - fine).abs() + (4.0 * ef + ec) / 3.0;
            Ok((
                v,
                Estimate {
                    value,
                    error,
                    evaluations: 0,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let (values, derivative): (Vec<Estimate>, Vec<Estimate>) = rows.into_iter().unzip();
    let biggest = derivative
        .iter()
        .max_by(|a, b| a.value.abs().total_cmp(&b.value.abs()))
        .copied()
        .unwrap_or_default();
    let derivative_nonzero = biggest.value.abs() > 10.0 * biggest.error;
    let a = zeta_at(0.2, &zeta, cfg)?;
    let b = zeta_at(0.6, &zeta, cfg)?;
    let non_constant = (a.value - b.value).abs() > a.error + b.error;
    Ok(ZetaProfile {
        xs,
        values,
        derivative,
        derivative_nonzero,
        non_constant,
        conclusive: derivative_nonzero && non_constant,
    })
}

/// Tabulate `(-Delta)^{1/2} zeta` and decide whether its derivative is nonzero. An
/// inconclusive first pass is repeated once with tolerances a hundred times tighter.
pub fn zeta_derivative_check(cfg: &QuadratureConfig) -> Result<ZetaProfile> {
    let first = zeta_profile(cfg)?;
    if first.conclusive {
        return Ok(first);
    }
    zeta_profile(&cfg.tightened(1e-2))
}

#[derive(Debug, Clone)]
pub struct UvwReport {
    pub probes: Vec<f64>,
    /// `(-Delta)^{3/2} u` by the fourth-difference operator.
    pub lap_u: Vec<Estimate>,
    /// `(-Delta) (-Delta)^{1/2} v`.
    pub lap_v: Vec<Estimate>,
    /// `(-Delta) (-Delta)^{1/2} w`.
    pub lap_w: Vec<Estimate>,
    /// `1 + (d/dx)(-Delta)^{1/2} zeta / 2` at the probes, from the tabulated profile.
    pub predicted_w: Vec<Estimate>,
    pub trace_u: TraceResult,
    pub trace_v: TraceResult,
}

impl UvwReport {
    /// Largest `|lap_w - 1|` relative to its error bound.
    pub fn w_separation(&self) -> f64 {
        self.lap_w
            .iter()
            .map(|e| (e.value - 1.0).abs() / e.error.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// Apply the operator to `u`, `v` and `w` at five interior points and compare the
/// `D^{s-1}` traces of `u` and `v` at `z = 1`.
pub fn compare_uvw(cfg: &QuadratureConfig) -> Result<UvwReport> {
    let fields = appendix_fields(cfg)?;
    let order = three_halves();
    let probes = vec![-0.6, -0.3, 0.0, 0.3, 0.6];
    let uf = fields.u.to_field();
    let vf = fields.v.to_field();
    let apply = |f: &(dyn Fn(f64) -> Result<Estimate> + Sync)| -> Result<Vec<Estimate>> {
        probes.par_iter().map(|&x| f(x)).collect()
    };
    let lap_u = apply(&|x| frac_lap_4th(order, &uf, &[x], cfg))?;
    let lap_v = apply(&|x| frac_lap_composed(order, &vf, &[x], cfg))?;
    let lap_w = apply(&|x| frac_lap_composed(order, &fields.w, &[x], cfg))?;
    let zeta = zeta_field();
    let predicted_w = apply(&|x| {
        let h = 0.01;
        let p = zeta_at(x + h, &zeta, cfg)?;
        let m = zeta_at(x - h, &zeta, cfg)?;
        let p2 = zeta_at(x + 0.5 * h, &zeta, cfg)?;
        let m2 = zeta_at(x - 0.5 * h, &zeta, cfg)?;
        let coarse = (p.value - m.value) / (2.0 * h);
        let fine = (p2.value - m2.value) / h;
        let d = (4.0 * fine - coarse) / 3.0;
        let noise = (p.error + m.error) / (2.0 * h) + (p2.error + m2.error) / h;
        Ok(Estimate {
            value: 1.0 + 0.5 * d,
            error: 0.5 * ((d - fine).abs() + noise),
            evaluations: 0,
        })
    })?;
    Ok(UvwReport {
        probes,
        lap_u,
        lap_v,
        lap_w,
        predicted_w,
        trace_u: extract_traces(&fields.u, &[1.0], cfg)?,
        trace_v: extract_traces(&fields.v.clone().with_order(order), &[1.0], cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w_closed_form_values() {
        build_w().unwrap();
        assert!(w_closed(1.0).abs() < 1e-15 && w_closed(-1.0).abs() < 1e-15);
        let want = -(0.75f64.sqrt() * 0.5 + PI / 6.0) / 2.0;
        assert!((w_prime(0.5) - want).abs() < 1e-15 && (want + 0.4783).abs() < 1e-4);
        // the slope jumps from -pi/4 to 0 across the boundary
        assert!((w_prime(1.0 - 1e-12) + PI / 4.0).abs() < 1e-5);
        assert_eq!(w_prime(1.0 + 1e-12), 0.0);
    }

    #[test]
    fn w1_is_delta_to_one_half() {
        let r = build_w1(&QuadratureConfig::default()).unwrap();
        assert!(r.residual < 1e-8, "{}", r.residual);
        let at = |x: f64| {
            r.samples
                .iter()
                .find(|s| (s.0 - x).abs() < 1e-12)
                .unwrap()
                .1
                .value
        };
        assert!((at(0.0) - 1.0).abs() < 1e-8);
        assert!((at(0.8) - 0.6).abs() < 1e-8);
        assert_eq!(at(1.5), 0.0);
    }

    #[test]
    fn half_laplacian_of_arcsin() {
        // (-Delta)^{1/2} arcsin = x / (1 - x^2) inside
        let cfg = QuadratureConfig::default();
        let zeta = zeta_field();
        for x in [0.0, 0.2, 0.6, -0.85] {
            let e = zeta_at(x, &zeta, &cfg).unwrap();
            let want = x / (1.0 - x * x);
            assert!(
                (e.value - want).abs() < 1e-7 + 10.0 * e.error,
                "x = {x}: {e:?} vs {want}"
            );
        }
    }
}
