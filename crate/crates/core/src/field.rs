//! Real-valued fields on `R^N` carrying the analytic metadata that operators need.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Far-field behaviour of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    /// Vanishes outside `support_radius`.
    Compact,
    /// `|u(x)| <= C (1 + |x|)^{-p}`; `p` may be negative for growing fields.
    Algebraic(f64),
    /// Nothing is known about the growth.
    Unknown,
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A real function on `R^N` with regularity and decay metadata.
///
/// `kinks` lists where the field fails to be smooth: points on the line for `N = 1`,
/// radii of spheres centered at the origin for `N >= 2`. Quadrature panels are split
/// there. `kink_exponent` is the worst local behaviour `|dist|^beta` at a kink, which
/// selects the endpoint grading; negative values mean integrable blow-up.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<EvalFn>,
    dim: usize,
    kinks: Vec<f64>,
    kink_exponent: f64,
    support_radius: Option<f64>,
    decay: DecayClass,
    l1_override: Option<f64>,
    boundary_blowup: bool,
    label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("kinks", &self.kinks)
            .field("support_radius", &self.support_radius)
            .field("decay", &self.decay)
            .finish()
    }
}

impl ScalarField {
    /// A field with no metadata beyond its dimension; decay is `Unknown`.
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            eval: Arc::new(f),
            dim,
            kinks: Vec::new(),
            kink_exponent: 1.0,
            support_radius: None,
            decay: DecayClass::Unknown,
            l1_override: None,
            boundary_blowup: false,
            label: String::from("field"),
        }
    }

    /// A one-dimensional field from a scalar closure.
    pub fn line<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScalarField::new(1, move |x: &[f64]| f(x[0]))
    }

    pub fn zero(dim: usize) -> Self {
        ScalarField::new(dim, |_| 0.0).compact(0.0).labeled("zero")
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        ScalarField::new(dim, move |_| c)
            .algebraic(0.0)
            .labeled(format!("const:{c}"))
    }

    /// Declare compact support in the closed ball of radius `r`.
    pub fn compact(mut self, r: f64) -> Self {
        self.support_radius = Some(r);
        self.decay = DecayClass::Compact;
        self
    }

    pub fn algebraic(mut self, p: f64) -> Self {
        self.support_radius = None;
        self.decay = DecayClass::Algebraic(p);
        self
    }

    pub fn with_kinks(mut self, kinks: impl IntoIterator<Item = f64>) -> Self {
        self.kinks.extend(kinks);
        self.kinks.sort_by(f64::total_cmp);
        self.kinks.dedup();
        self
    }

    pub fn with_kink_exponent(mut self, beta: f64) -> Self {
        self.kink_exponent = beta;
        self
    }

    /// Assert `u in L^1_t` for every `t > t_min` regardless of the decay class.
    pub fn assert_l1_above(mut self, t_min: f64) -> Self {
        self.l1_override = Some(t_min);
        self
    }

    /// Mark a field that blows up at the unit sphere.
    pub fn with_boundary_blowup(mut self) -> Self {
        self.boundary_blowup = true;
        self
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    #[inline]
    pub fn eval1(&self, x: f64) -> f64 {
        (self.eval)(&[x])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn kink_exponent(&self) -> f64 {
        self.kink_exponent
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    pub fn decay(&self) -> DecayClass {
        self.decay
    }

    pub fn boundary_blowup(&self) -> bool {
        self.boundary_blowup
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Membership in `L^1_t`: `int |u| (1 + |x|)^{-N-2t} dx < infinity`.
    pub fn in_l1(&self, t: f64) -> bool {
        if let Some(t_min) = self.l1_override {
            if t > t_min {
                return true;
            }
        }
        match self.decay {
            DecayClass::Compact => true,
            DecayClass::Algebraic(p) => p + 2.0 * t > 0.0,
            DecayClass::Unknown => false,
        }
    }

    pub(crate) fn l1_threshold(&self) -> Option<f64> {
        self.l1_override
    }

    pub(crate) fn require_l1(&self, t: f64) -> Result<()> {
        if self.in_l1(t) {
            Ok(())
        } else {
            Err(Error::integrability(format!(
                "field `{}` is not declared to lie in L^1_{t}",
                self.label
            )))
        }
    }

    /// `a u + b v`, keeping the weaker metadata of the two.
    pub fn combine(a: f64, u: &ScalarField, b: f64, v: &ScalarField) -> Result<ScalarField> {
        if u.dim != v.dim {
            return Err(Error::domain("cannot combine fields of different dimensions"));
        }
        let (fu, fv) = (u.eval.clone(), v.eval.clone());
        let decay = match (u.decay, v.decay) {
            (DecayClass::Compact, DecayClass::Compact) => DecayClass::Compact,
            (DecayClass::Unknown, _) | (_, DecayClass::Unknown) => DecayClass::Unknown,
            (DecayClass::Algebraic(p), DecayClass::Algebraic(q)) => DecayClass::Algebraic(p.min(q)),
            (DecayClass::Algebraic(p), DecayClass::Compact)
            | (DecayClass::Compact, DecayClass::Algebraic(p)) => DecayClass::Algebraic(p),
        };
        let support_radius = match (u.support_radius, v.support_radius) {
            (Some(r1), Some(r2)) => Some(r1.max(r2)),
            _ => None,
        };
        let l1_override = match (u.l1_override, v.l1_override) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        Ok(ScalarField {
            eval: Arc::new(move |x: &[f64]| a * fu(x) + b * fv(x)),
            dim: u.dim,
            kinks: {
                let mut k = u.kinks.clone();
                k.extend_from_slice(&v.kinks);
                k.sort_by(f64::total_cmp);
                k.dedup();
                k
            },
            kink_exponent: u.kink_exponent.min(v.kink_exponent),
            support_radius,
            decay,
            l1_override,
            boundary_blowup: u.boundary_blowup || v.boundary_blowup,
            label: format!("{a}*{} + {b}*{}", u.label, v.label),
        })
    }

    /// `x -> u(x - shift)`.
    pub fn translated(&self, shift: &[f64]) -> Result<ScalarField> {
        if shift.len() != self.dim {
            return Err(Error::domain("shift has the wrong dimension"));
        }
        if self.dim != 1 && (!self.kinks.is_empty() || self.support_radius.is_some()) {
            return Err(Error::capability(
                "translation of radially described metadata is only supported for N = 1",
            ));
        }
        let f = self.eval.clone();
        let sh = shift.to_vec();
        let mut out = self.clone();
        out.eval = Arc::new(move |x: &[f64]| {
            let y: Vec<f64> = x.iter().zip(&sh).map(|(a, b)| a - b).collect();
            f(&y)
        });
        if self.dim == 1 {
            out.kinks = self.kinks.iter().map(|k| k + shift[0]).collect();
            out.support_radius = self.support_radius.map(|r| r + shift[0].abs());
        }
        out.label = format!("{}(x - {:?})", self.label, shift);
        Ok(out)
    }

    /// `x -> u(lambda x)`, for `lambda > 0`.
    pub fn dilated(&self, lambda: f64) -> Result<ScalarField> {
        if !(lambda > 0.0) {
            return Err(Error::domain("dilation factor must be positive"));
        }
        let f = self.eval.clone();
        let mut out = self.clone();
        out.eval = Arc::new(move |x: &[f64]| {
            let y: Vec<f64> = x.iter().map(|a| a * lambda).collect();
            f(&y)
        });
        out.kinks = self.kinks.iter().map(|k| k / lambda).collect();
        out.support_radius = self.support_radius.map(|r| r / lambda);
        out.label = format!("{}({lambda} x)", self.label);
        Ok(out)
    }
}

/// `delta(x)^beta = (1 - |x|^2)^beta` inside the unit ball and `0` outside.
///
/// The base is evaluated as `(1 - |x|)(1 + |x|)` to keep relative accuracy near the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaWeight {
    pub beta: f64,
}

impl DeltaWeight {
    pub fn new(beta: f64) -> Self {
        DeltaWeight { beta }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = delta(x);
        if d <= 0.0 {
            0.0
        } else {
            d.powf(self.beta)
        }
    }

    /// The weight as a field on `R^N`.
    pub fn field(&self, dim: usize) -> ScalarField {
        let beta = self.beta;
        ScalarField::new(dim, move |x: &[f64]| DeltaWeight { beta }.eval(x))
            .compact(1.0)
            .with_kinks(if dim == 1 { vec![-1.0, 1.0] } else { vec![1.0] })
            .with_kink_exponent(beta)
            .labeled(format!("delta^{beta}"))
    }
}

/// Euclidean norm.
#[inline]
pub fn norm(x: &[f64]) -> f64 {
    match x.len() {
        1 => x[0].abs(),
        _ => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

#[inline]
pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    match x.len() {
        1 => (x[0] - y[0]).abs(),
        _ => x
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
    }
}

/// `1 - |x|^2` computed as `(1 - |x|)(1 + |x|)`; negative outside the ball.
#[inline]
pub fn delta(x: &[f64]) -> f64 {
    let r = norm(x);
    (1.0 - r) * (1.0 + r)
}

/// Distance from `x` to the nearest kink of `u` (infinite when there are none).
pub(crate) fn kink_distance(u: &ScalarField, x: &[f64]) -> f64 {
    if u.dim() == 1 {
        u.kinks()
            .iter()
            .map(|k| (k - x[0]).abs())
            .fold(f64::INFINITY, f64::min)
    } else {
        let r = norm(x);
        u.kinks()
            .iter()
            .map(|k| (k - r).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_weight_conventions() {
        let w = DeltaWeight::new(1.5);
        assert_eq!(w.eval(&[1.2]), 0.0);
        assert_eq!(w.eval(&[0.0]), 1.0);
        assert!((w.eval(&[0.5]) - 0.75f64.powf(1.5)).abs() < 1e-15);
        let near = delta(&[1.0 - 1e-12]);
        assert!((near - 2e-12).abs() < 1e-3 * 2e-12);
    }

    #[test]
    fn l1_membership() {
        let c = ScalarField::constant(1, 1.0);
        assert!(c.in_l1(0.1));
        let affine = ScalarField::line(|x| x).algebraic(-1.0);
        assert!(affine.in_l1(1.5));
        assert!(!affine.in_l1(0.5));
        let unknown = ScalarField::line(|x| x);
        assert!(!unknown.in_l1(1.5));
        assert!(unknown.assert_l1_above(0.5).in_l1(1.5));
        assert!(DeltaWeight::new(0.5).field(1).in_l1(0.01));
    }

    #[test]
    fn combine_and_translate() {
        let u = DeltaWeight::new(1.0).field(1);
        let v = ScalarField::constant(1, 2.0);
        let w = ScalarField::combine(2.0, &u, -1.0, &v).unwrap();
        assert_eq!(w.eval1(0.0), 0.0);
        assert_eq!(w.decay(), DecayClass::Algebraic(0.0));
        let t = u.translated(&[3.0]).unwrap();
        assert_eq!(t.eval1(3.0), 1.0);
        assert_eq!(t.kinks(), &[2.0, 4.0]);
        assert_eq!(t.support_radius(), Some(4.0));
    }
}
