use num_complex::Complex64;

use crate::error::{Error, Result};

/// A finite union of disjoint open intervals, sorted left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnionDomain {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnionDomain {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::domain("domain needs at least one interval"));
        }
        if intervals
            .iter()
            .any(|&(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::domain("intervals must be finite with a < b"));
        }
        intervals.sort_by(|p, q| p.0.total_cmp(&q.0));
        for w in intervals.windows(2) {
            if w[0].1 >= w[1].0 {
                return Err(Error::domain(format!(
                    "intervals ({}, {}) and ({}, {}) overlap or touch",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(IntervalUnionDomain { intervals })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Index of the interval containing `x`, if any.
    pub fn locate(&self, x: f64) -> Option<usize> {
        self.intervals.iter().position(|&(a, b)| a < x && x < b)
    }
}

/// Cardinal cubic B-spline on `[0, 4]` (unit mass).
pub fn m4(t: f64) -> f64 {
    if !(0.0..4.0).contains(&t) {
        return 0.0;
    }
    if t < 1.0 {
        t * t * t / 6.0
    } else if t < 2.0 {
        (((-3.0 * t + 12.0) * t - 12.0) * t + 4.0) / 6.0
    } else if t < 3.0 {
        (((3.0 * t - 24.0) * t + 60.0) * t - 44.0) / 6.0
    } else {
        let u = 4.0 - t;
        u * u * u / 6.0
    }
}

/// `k`-th derivative of [`m4`], `k <= 3`.
pub fn m4_deriv(t: f64, k: u32) -> f64 {
    if k == 0 {
        return m4(t);
    }
    if !(0.0..4.0).contains(&t) {
        return 0.0;
    }
    // mirror the right half: m4(t) = m4(4 - t)
    let (u, sign) = if t < 2.0 {
        (t, 1.0)
    } else {
        (4.0 - t, if k.is_multiple_of(2) { 1.0 } else { -1.0 })
    };
    let v = if u < 1.0 {
        match k {
            1 => 0.5 * u * u,
            2 => u,
            _ => 1.0,
        }
    } else {
        match k {
            1 => (-1.5 * u + 4.0) * u - 2.0,
            2 => -3.0 * u + 4.0,
            _ => -3.0,
        }
    };
    sign * v
}

/// Centered cardinal B-spline of order 8 on `[-4, 4]`, the autocorrelation of `m4`.
pub fn m8_centered(tau: f64) -> f64 {
    let t = tau + 4.0;
    if !(0.0..8.0).contains(&t) {
        return 0.0;
    }
    // evaluate from the nearer end to limit cancellation
    let t = if t > 4.0 { 8.0 - t } else { t };
    const BINOM: [f64; 9] = [1.0, 8.0, 28.0, 56.0, 70.0, 56.0, 28.0, 8.0, 1.0];
    let mut sum = 0.0;
    for (k, b) in BINOM.iter().enumerate() {
        let d = t - k as f64;
        if d <= 0.0 {
            break;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * b * d.powi(7);
    }
    sum / 5040.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplineKind {
    /// A full cubic B-spline.
    Interior,
    /// `m4(t + 3) - m4(t + 2) / 2 + m4(t + 1)` cut at an interval end: the spline of the
    /// end cell with `u = u' = 0` there and free `u''`.
    LeftEdge,
    RightEdge,
}

/// One basis function. Interior: `x -> m4((x - left) / h)` on `[left, left + 4h]`;
/// edges live on `[left, left + 3h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFn {
    pub interval: usize,
    pub left: f64,
    pub h: f64,
    pub kind: SplineKind,
}

fn edge_profile(t: f64, k: u32) -> f64 {
    if !(0.0..3.0).contains(&t) {
        return 0.0;
    }
    m4_deriv(t + 3.0, k) - 0.5 * m4_deriv(t + 2.0, k) + m4_deriv(t + 1.0, k)
}

impl BasisFn {
    pub fn interior(interval: usize, left: f64, h: f64) -> Self {
        BasisFn {
            interval,
            left,
            h,
            kind: SplineKind::Interior,
        }
    }

    pub fn is_interior(&self) -> bool {
        self.kind == SplineKind::Interior
    }

    pub fn width(&self) -> f64 {
        match self.kind {
            SplineKind::Interior => 4.0 * self.h,
            _ => 3.0 * self.h,
        }
    }

    pub fn center(&self) -> f64 {
        self.left + 0.5 * self.width()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.deriv(x, 0)
    }

    /// `k`-th derivative, `k <= 3` (one-sided at the knots).
    pub fn deriv(&self, x: f64, k: u32) -> f64 {
        let scale = self.h.powi(-(k as i32));
        match self.kind {
            SplineKind::Interior => scale * m4_deriv((x - self.left) / self.h, k),
            SplineKind::LeftEdge => scale * edge_profile((x - self.left) / self.h, k),
            SplineKind::RightEdge => {
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * scale * edge_profile((self.left + 3.0 * self.h - x) / self.h, k)
            }
        }
    }

    /// Knots bounding the polynomial pieces of the support.
    pub fn knots(&self) -> Vec<f64> {
        let cells = (self.width() / self.h).round() as usize;
        (0..=cells).map(|m| self.left + m as f64 * self.h).collect()
    }

    /// `int b(x) e^{-i xi x} dx`, in closed form for interior splines.
    pub fn transform(&self, xi: f64) -> Option<Complex64> {
        if !self.is_interior() {
            return None;
        }
        let z = 0.5 * xi * self.h;
        let sinc = if z.abs() < 1e-4 {
            1.0 - z * z / 6.0
        } else {
            z.sin() / z
        };
        Some(Complex64::from_polar(self.h * sinc.powi(4), -xi * self.center()))
    }
}

/// Cubic splines on uniform grids of spacing `h`, one grid per interval: every B-spline
/// whose support lies in the closed interval plus one edge spline at each end. Together
/// they span the `C^2` cubic splines with `u = u' = 0` at the interval ends.
#[derive(Debug, Clone)]
pub struct GalerkinBasis {
    domain: IntervalUnionDomain,
    h: f64,
    functions: Vec<BasisFn>,
    /// First global index of each interval.
    offsets: Vec<usize>,
    edges: bool,
}

impl GalerkinBasis {
    pub fn new(domain: &IntervalUnionDomain, h: f64) -> Result<Self> {
        Self::build(domain, h, true)
    }

    /// Full B-splines only, so that `u = u' = u'' = 0` at every interval end.
    pub fn interior_only(domain: &IntervalUnionDomain, h: f64) -> Result<Self> {
        Self::build(domain, h, false)
    }

    fn build(domain: &IntervalUnionDomain, h: f64, edges: bool) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::domain(format!("spacing must be positive, got {h}")));
        }
        let mut functions = Vec::new();
        let mut offsets = Vec::new();
        for (iv, &(a, b)) in domain.intervals().iter().enumerate() {
            let cells = ((b - a) / h + 1e-9).floor() as usize;
            if cells < 4 {
                return Err(Error::domain(format!(
                    "interval ({a}, {b}) is shorter than one spline support at h = {h}"
                )));
            }
            offsets.push(functions.len());
            if edges {
                functions.push(BasisFn {
                    interval: iv,
                    left: a,
                    h,
                    kind: SplineKind::LeftEdge,
                });
            }
            functions.extend((0..cells - 3).map(|j| BasisFn::interior(iv, a + j as f64 * h, h)));
            if edges {
                functions.push(BasisFn {
                    interval: iv,
                    left: a + (cells - 3) as f64 * h,
                    h,
                    kind: SplineKind::RightEdge,
                });
            }
        }
        Ok(GalerkinBasis {
            domain: domain.clone(),
            h,
            functions,
            offsets,
            edges,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn domain(&self) -> &IntervalUnionDomain {
        &self.domain
    }

    pub fn get(&self, i: usize) -> Result<&BasisFn> {
        self.functions
            .get(i)
            .ok_or_else(|| Error::domain(format!("basis index {i} out of range (size {})", self.len())))
    }

    pub fn functions(&self) -> &[BasisFn] {
        &self.functions
    }

    /// `sum_i c_i b_i(x)`, touching only the splines alive at `x`.
    pub fn combine(&self, coef: &[f64], x: f64) -> f64 {
        let Some(iv) = self.domain.locate(x) else {
            return 0.0;
        };
        let a = self.domain.intervals()[iv].0;
        let first = self.offsets[iv];
        let end = self.offsets.get(iv + 1).copied().unwrap_or(self.len());
        let e = usize::from(self.edges);
        let mut v = 0.0;
        if self.edges {
            v +=
                coef[first] * self.functions[first].eval(x) + coef[end - 1] * self.functions[end - 1].eval(x);
        }
        // global index first + e + j is the interior spline starting at a + j h
        let cell = ((x - a) / self.h).floor() as isize;
        for j in (cell - 3).max(0)..=cell {
            let g = first + e + j as usize;
            if g < end - e {
                v += coef[g] * self.functions[g].eval(x);
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;
    use approx::assert_relative_eq;

    #[test]
    fn m4_partition_and_mass() {
        for t in [0.0, 0.3, 0.77, 0.99] {
            let s: f64 = (0..4).map(|k| m4(t + k as f64)).sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-14);
        }
        assert_relative_eq!(m4(2.0), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn m8_is_autocorrelation_of_m4() {
        let gl = GaussLegendre::new(8);
        for tau in [0.0, 0.5, 1.3, 3.2, -2.7] {
            let mut pts: Vec<f64> = (0..5)
                .flat_map(|k| [k as f64, k as f64 - tau])
                .filter(|p| (0.0..=4.0).contains(p))
                .collect();
            pts.sort_by(f64::total_cmp);
            let c: f64 = pts
                .windows(2)
                .map(|w| gl.integrate(|t| m4(t) * m4(t + tau), w[0], w[1]))
                .sum();
            assert_relative_eq!(m8_centered(tau), c, epsilon = 1e-14);
        }
        assert_eq!(m8_centered(4.5), 0.0);
    }

    #[test]
    fn edge_spline_boundary_behaviour() {
        let l = BasisFn {
            interval: 0,
            left: 0.0,
            h: 0.5,
            kind: SplineKind::LeftEdge,
        };
        let r = BasisFn {
            interval: 0,
            left: 0.0,
            h: 0.5,
            kind: SplineKind::RightEdge,
        };
        assert_relative_eq!(l.deriv(0.0, 0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(l.deriv(0.0, 1), 0.0, epsilon = 1e-14);
        assert!(l.deriv(0.0, 2) > 1.0);
        for x in [0.1, 0.7, 1.2] {
            assert_relative_eq!(l.eval(x), r.eval(1.5 - x), epsilon = 1e-15);
            // C^2 inside the support: derivatives match finite differences
            let fd = (l.eval(x + 1e-6) - l.eval(x - 1e-6)) / 2e-6;
            assert_relative_eq!(l.deriv(x, 1), fd, epsilon = 1e-8);
            let fd2 = (r.deriv(x + 1e-6, 1) - r.deriv(x - 1e-6, 1)) / 2e-6;
            assert_relative_eq!(r.deriv(x, 2), fd2, epsilon = 1e-7);
        }
        assert_eq!(l.eval(1.5), 0.0);
    }

    #[test]
    fn domain_validation() {
        assert!(IntervalUnionDomain::new(vec![(-1.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(IntervalUnionDomain::new(vec![]).is_err());
        let d = IntervalUnionDomain::new(vec![(2.0, 4.0), (-1.0, 1.0)]).unwrap();
        assert_eq!(d.intervals()[0], (-1.0, 1.0));
        assert_eq!(d.locate(3.0), Some(1));
        assert_eq!(d.locate(1.5), None);
    }

    #[test]
    fn basis_layout_and_transform() {
        let d = IntervalUnionDomain::new(vec![(-1.0, 1.0), (2.0, 4.0)]).unwrap();
        let b = GalerkinBasis::new(&d, 0.25).unwrap();
        assert_eq!(b.len(), 2 * (8 - 1));
        let f = b.get(1).unwrap();
        assert_eq!(f.left, -1.0);
        assert_eq!(b.get(5).unwrap().knots()[4], 1.0);
        assert_eq!(b.get(6).unwrap().kind, SplineKind::RightEdge);
        assert_eq!(b.get(6).unwrap().knots()[3], 1.0);
        // transform at 0 is the mass
        assert_relative_eq!(f.transform(0.0).unwrap().re, 0.25, epsilon = 1e-15);
        assert!(b.get(0).unwrap().transform(1.0).is_none());
        let coef: Vec<f64> = (0..b.len()).map(|i| 1.0 + i as f64).collect();
        for x in [-0.99, -0.6, 0.1, 0.97, 2.3, 3.99] {
            let direct: f64 = b.functions().iter().zip(&coef).map(|(f, c)| c * f.eval(x)).sum();
            assert_relative_eq!(b.combine(&coef, x), direct, epsilon = 1e-13);
        }
        assert_eq!(b.combine(&coef, 1.5), 0.0);
        let b = GalerkinBasis::interior_only(&d, 0.25).unwrap();
        assert_eq!(b.len(), 2 * (8 - 3));
        let coef = vec![1.0; b.len()];
        assert_relative_eq!(b.combine(&coef, 0.1), 1.0, epsilon = 1e-14);
    }
}
