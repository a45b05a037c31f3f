use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::basis::{BasisFn, GalerkinBasis, IntervalUnionDomain};
use super::form::pair_entry;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::hyperop::{frac_lap, FourierData, SpectralDecay, Transform};
use crate::quadrature::{integrate_adaptive, GaussLegendre, QuadratureConfig};
use crate::specialfn::FracOrder;

/// Stiffness matrix and load vector of the discrete weak problem.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub basis: GalerkinBasis,
    pub stiffness: DMatrix<f64>,
    pub load: DVector<f64>,
}

/// `E_s(b_i, b_j)` for every pair. Entries only depend on the two intervals, the spline
/// kinds and the index offset, so each distinct value is computed once.
pub fn stiffness_matrix(order: FracOrder, basis: &GalerkinBasis) -> Result<DMatrix<f64>> {
    let fns = basis.functions();
    let n = fns.len();
    let mut first: HashMap<usize, usize> = HashMap::new();
    for (g, f) in fns.iter().enumerate() {
        first.entry(f.interval).or_insert(g);
    }
    let key = |i: usize, j: usize| {
        let (fi, fj) = (&fns[i], &fns[j]);
        let li = (i - first[&fi.interval]) as isize;
        let lj = (j - first[&fj.interval]) as isize;
        (fi.interval, fi.kind, fj.interval, fj.kind, lj - li)
    };
    let mut reps: Vec<(usize, usize)> = Vec::new();
    let mut seen: HashMap<_, usize> = HashMap::new();
    let mut slot = vec![0usize; n * (n + 1) / 2];
    let tri = |i: usize, j: usize| i * n - i * (i + 1) / 2 + j;
    for i in 0..n {
        for j in i..n {
            let idx = *seen.entry(key(i, j)).or_insert_with(|| {
                reps.push((i, j));
                reps.len() - 1
            });
            slot[tri(i, j)] = idx;
        }
    }
    let values: Vec<f64> = reps
        .par_iter()
        .map(|&(i, j)| pair_entry(order, &fns[i], &fns[j]))
        .collect::<Result<_>>()?;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = values[slot[tri(i, j)]];
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(a)
}

/// `int f b` over the support of `b`, Gauss rules on each knot cell split at the kinks of `f`.
pub fn load_entry(f: &ScalarField, b: &BasisFn) -> f64 {
    static GL: std::sync::OnceLock<GaussLegendre> = std::sync::OnceLock::new();
    let gl = GL.get_or_init(|| GaussLegendre::new(8));
    let k = b.knots();
    let mut total = 0.0;
    for w in k.windows(2) {
        let mut pts = vec![w[0]];
        pts.extend(f.kinks().iter().copied().filter(|&c| c > w[0] && c < w[1]));
        pts.push(w[1]);
        for p in pts.windows(2) {
            total += gl.integrate(|x| f.eval1(x) * b.eval(x), p[0], p[1]);
        }
    }
    total
}

pub fn assemble(order: FracOrder, basis: &GalerkinBasis, f: &ScalarField) -> Result<GalerkinSystem> {
    if f.dim() != 1 {
        return Err(Error::domain("the Galerkin solver works on the line"));
    }
    let load = DVector::from_vec(basis.functions().par_iter().map(|b| load_entry(f, b)).collect());
    Ok(GalerkinSystem {
        basis: basis.clone(),
        stiffness: stiffness_matrix(order, basis)?,
        load,
    })
}

/// Discrete weak solution `u_h = sum c_i b_i`.
#[derive(Debug, Clone)]
pub struct WeakSolution {
    pub order: FracOrder,
    pub system: GalerkinSystem,
    pub coefficients: Vec<f64>,
}

impl WeakSolution {
    pub fn eval(&self, x: f64) -> f64 {
        self.system.basis.combine(&self.coefficients, x)
    }

    pub fn basis(&self) -> &GalerkinBasis {
        &self.system.basis
    }

    /// `E_s(u_h, u_h)`, which equals `int f u_h`.
    pub fn energy(&self) -> f64 {
        self.system
            .load
            .iter()
            .zip(&self.coefficients)
            .map(|(f, c)| f * c)
            .sum()
    }

    /// `max_j |E_s(u_h, b_j) - int f b_j|`.
    pub fn galerkin_residual(&self) -> f64 {
        let c = DVector::from_column_slice(&self.coefficients);
        (&self.system.stiffness * c - &self.system.load).amax()
    }
}

pub fn solve_system(order: FracOrder, system: GalerkinSystem) -> Result<WeakSolution> {
    let chol = nalgebra::linalg::Cholesky::new(system.stiffness.clone()).ok_or_else(|| {
        let eig = system.stiffness.clone().symmetric_eigenvalues();
        Error::Singular(format!(
            "stiffness is not positive definite: eigenvalues in [{:e}, {:e}], {} unknowns",
            eig.min(),
            eig.max(),
            eig.len()
        ))
    })?;
    let c = chol.solve(&system.load);
    Ok(WeakSolution {
        order,
        coefficients: c.iter().copied().collect(),
        system,
    })
}

/// Galerkin approximation of `(-Delta)^s u = f` in the domain, `u = 0` outside, with
/// cubic B-splines of spacing `h`.
pub fn solve_weak(
    order: FracOrder,
    domain: &IntervalUnionDomain,
    f: &ScalarField,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<WeakSolution> {
    cfg.validate()?;
    let basis = GalerkinBasis::new(domain, h)?;
    solve_system(order, assemble(order, &basis, f)?)
}

/// Extremes of `u_h` over one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalExtremes {
    pub interval: (f64, f64),
    pub min: f64,
    pub argmin: f64,
    pub max: f64,
    pub argmax: f64,
    /// The same extremes at half the spacing.
    pub min_refined: f64,
    pub max_refined: f64,
    /// `max |u_h - u_{h/2}|` over the interval.
    pub refinement_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignReport {
    pub s: f64,
    pub h: f64,
    pub intervals: Vec<IntervalExtremes>,
    /// `max |u_h - u_{h/2}|` over all sample points.
    pub refinement_change: f64,
}

impl SignReport {
    /// Whether the minimum over interval `k` is negative beyond `factor` times that
    /// interval's discretization scale, at both spacings.
    pub fn clearly_negative(&self, k: usize, factor: f64) -> bool {
        let e = &self.intervals[k];
        let tol = factor * e.refinement_change;
        e.min < -tol && e.min_refined < -tol
    }

    /// Whether the minimum over interval `k` is positive beyond `factor` times that
    /// interval's discretization scale, at both spacings.
    pub fn clearly_positive(&self, k: usize, factor: f64) -> bool {
        let e = &self.intervals[k];
        let tol = factor * e.refinement_change;
        e.min > tol && e.min_refined > tol
    }

    /// Whether the minimum over interval `k` is positive at both spacings.
    pub fn positive(&self, k: usize) -> bool {
        let e = &self.intervals[k];
        e.min > 0.0 && e.min_refined > 0.0
    }
}

fn samples(a: f64, b: f64, m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |k| a + (b - a) * (k as f64 + 0.5) / m as f64)
}

/// Solve at `h` and `h/2` and report extremes over each interval.
///
/// Samples stay one coarse spline support (`4h`) away from the interval ends: every
/// solution vanishes there, so the infimum over the open interval is zero and only the
/// interior carries sign information.
pub fn max_principle_experiment(
    order: FracOrder,
    domain: &IntervalUnionDomain,
    f: &ScalarField,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<SignReport> {
    let coarse = solve_weak(order, domain, f, h, cfg)?;
    let fine = solve_weak(order, domain, f, 0.5 * h, cfg)?;
    let mut change: f64 = 0.0;
    let mut rows = Vec::new();
    for &(a, b) in domain.intervals() {
        let m = (((b - a) / h).ceil() as usize * 8).max(200);
        let mut row = IntervalExtremes {
            interval: (a, b),
            min: f64::INFINITY,
            argmin: a,
            max: f64::NEG_INFINITY,
            argmax: a,
            min_refined: f64::INFINITY,
            max_refined: f64::NEG_INFINITY,
            refinement_change: 0.0,
        };
        let margin = 4.0 * h;
        for x in samples(a + margin, b - margin, m) {
            let (uc, uf) = (coarse.eval(x), fine.eval(x));
            row.refinement_change = row.refinement_change.max((uc - uf).abs());
            if uc < row.min {
                row.min = uc;
                row.argmin = x;
            }
            if uc > row.max {
                row.max = uc;
                row.argmax = x;
            }
            row.min_refined = row.min_refined.min(uf);
            row.max_refined = row.max_refined.max(uf);
        }
        change = change.max(row.refinement_change);
        rows.push(row);
    }
    Ok(SignReport {
        s: order.s(),
        h,
        intervals: rows,
        refinement_change: change,
    })
}

/// `(1 - x^2)^6` on `(-1, 1)` with its transform `92160 xi^{-6} j_6(xi) / sqrt(2 pi)`.
pub fn sextic_bump() -> (ScalarField, FourierData) {
    let u = ScalarField::line(|x| if x.abs() < 1.0 { (1.0 - x * x).powi(6) } else { 0.0 })
        .compact(1.0)
        .with_kinks([-1.0, 1.0])
        .labeled("(1-x^2)^6");
    let data = FourierData {
        transform: Transform::Line(Arc::new(|xi: f64| {
            Complex64::new(sextic_transform(xi) / (2.0 * PI).sqrt(), 0.0)
        })),
        decay: SpectralDecay::Algebraic(7.0),
    };
    (u, data)
}

/// `int_{-1}^{1} (1 - t^2)^6 cos(xi t) dt`.
fn sextic_transform(xi: f64) -> f64 {
    let x = xi.abs();
    if x < 8.0 {
        // a polynomial times a mildly oscillating cosine: Gauss is exact to rounding
        static GL: std::sync::OnceLock<GaussLegendre> = std::sync::OnceLock::new();
        let gl = GL.get_or_init(|| GaussLegendre::new(40));
        return gl.integrate(|t| (1.0 - t * t).powi(6) * (x * t).cos(), -1.0, 1.0);
    }
    // upward recurrence for j_6 is stable once x exceeds the order
    let (mut j0, mut j1) = (x.sin() / x, x.sin() / (x * x) - x.cos() / x);
    for n in 1..6 {
        let j2 = (2 * n + 1) as f64 / x * j1 - j0;
        j0 = j1;
        j1 = j2;
    }
    92160.0 * j1 / x.powi(6)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IbpReport {
    /// `E_s(u, phi)` through the frequency integral.
    pub energy: f64,
    /// `int phi (-Delta)^s u`.
    pub pointwise: f64,
    /// Quadrature error bound of the pointwise side.
    pub pointwise_error: f64,
    /// `|energy - pointwise| / |energy|`.
    pub discrepancy: f64,
}

/// Compare the two sides of `E_s(u, phi) = int phi (-Delta)^s u`.
pub fn ibp_check(
    order: FracOrder,
    u: &ScalarField,
    u_hat: &FourierData,
    phi: &BasisFn,
    cfg: &QuadratureConfig,
) -> Result<IbpReport> {
    let Transform::Line(t) = &u_hat.transform else {
        return Err(Error::capability("integration by parts is checked on the line"));
    };
    if !phi.is_interior() {
        return Err(Error::capability(
            "the test function needs a closed-form transform (an interior spline)",
        ));
    }
    let s = order.s();
    // unitary transforms: E = 2 int_0^inf xi^{2s} Re(u_hat conj(phi_hat))
    let g = |xi: f64| {
        let ph = phi.transform(xi).unwrap_or_default() / (2.0 * PI).sqrt();
        2.0 * xi.powf(2.0 * s) * (t(xi) * ph.conj()).re
    };
    let fine = cfg.tightened(1e-2);
    let mut energy = integrate_adaptive(g, 0.0, 1.0, &fine)?.value;
    let scale = 64.0 / phi.h;
    let mut a: f64 = 1.0;
    loop {
        let b = 2.0 * a;
        let panels = (b - a).ceil() as usize;
        let mut block = 0.0;
        for k in 0..panels {
            let lo = a + (b - a) * k as f64 / panels as f64;
            let hi = a + (b - a) * (k + 1) as f64 / panels as f64;
            block += integrate_adaptive(g, lo, hi, &fine)?.value;
        }
        energy += block;
        a = b;
        if (a > scale && block.abs() < 1e-12 * energy.abs()) || a > 1e6 {
            break;
        }
    }
    let gl = GaussLegendre::new(8);
    let k = phi.knots();
    let mut pointwise = 0.0;
    let mut err = 0.0;
    for w in k.windows(2) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
            let y = mid + half * x;
            let e = frac_lap(order, u, &[y], cfg)?;
            pointwise += half * wt * phi.eval(y) * e.value;
            err += half * wt * phi.eval(y) * e.error;
        }
    }
    let discrepancy = if energy == 0.0 && pointwise == 0.0 {
        0.0
    } else {
        (energy - pointwise).abs() / energy.abs().max(pointwise.abs())
    };
    Ok(IbpReport {
        energy,
        pointwise,
        pointwise_error: err,
        discrepancy,
    })
}
