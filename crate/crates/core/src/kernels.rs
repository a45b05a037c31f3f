//! Closed-form kernels on the unit ball: Boggio's Green function, the two boundary
//! Poisson kernels and the nonlocal Poisson kernel.

use crate::error::{Error, Result};
use crate::field::{delta, dist, norm};
use crate::specialfn::{boggio_raw, constants, FracOrder};

/// Pairs closer than this are refused by [`green_g`].
pub const DIAGONAL_GUARD: f64 = 1e-8;

/// How a kernel value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    Regular,
    DiagonalSingular,
    /// One of the points lies on or outside the sphere, where the kernel vanishes.
    BoundaryDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub regularity: Regularity,
}

/// Which boundary Poisson kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    /// `E_{s-2}`, paired with the trace `D^{s-2}`.
    SMinus2,
    /// `E_{s-1}`, paired with the trace `D^{s-1}`.
    SMinus1,
}

impl std::fmt::Display for TraceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceKind::SMinus2 => f.write_str("s-2"),
            TraceKind::SMinus1 => f.write_str("s-1"),
        }
    }
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<usize> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(Error::domain("points must share a positive dimension"));
    }
    Ok(n)
}

/// Boggio's Green function `G_s(x, y)` on the unit ball.
pub fn green_g(order: FracOrder, x: &[f64], y: &[f64]) -> Result<KernelValue> {
    let n = check_dims(x, y)?;
    let r = dist(x, y);
    if r < DIAGONAL_GUARD {
        return Err(Error::DiagonalSingularity { distance: r });
    }
    let dx = delta(x);
    let dy = delta(y);
    if dx <= 0.0 || dy <= 0.0 {
        return Ok(KernelValue {
            value: 0.0,
            regularity: Regularity::BoundaryDegenerate,
        });
    }
    Ok(KernelValue {
        value: green_unchecked(order, n, r, dx, dy)?,
        regularity: Regularity::Regular,
    })
}

/// `G_s` from precomputed `|x - y|`, `delta(x)` and `delta(y)` (both positive).
pub(crate) fn green_unchecked(order: FracOrder, n: usize, r: f64, dx: f64, dy: f64) -> Result<f64> {
    let c = constants(order, n)?;
    let s = order.s();
    let rho = dx * dy / (r * r);
    Ok(c.k_ns * r.powf(2.0 * s - n as f64) * boggio_raw(rho, s, n as f64 / 2.0))
}

/// The boundary Poisson kernel `E_{s-2}` or `E_{s-1}` at `x` and `z` on the unit sphere.
pub fn eden_e(order: FracOrder, kind: TraceKind, x: &[f64], z: &[f64]) -> Result<f64> {
    let n = check_dims(x, z)?;
    if (norm(z) - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!(
            "boundary kernel needs |z| = 1, got |z| = {}",
            norm(z)
        )));
    }
    let d = delta(x);
    if d <= 0.0 {
        return Ok(0.0);
    }
    let c = constants(order, n)?;
    let r = dist(x, z);
    let nf = n as f64;
    let ds = d.powf(order.s());
    Ok(match kind {
        TraceKind::SMinus1 => ds / (2.0 * c.omega_n * r.powi(n as i32)),
        TraceKind::SMinus2 => ds * (nf * d - (nf - 4.0) * r * r) / (4.0 * c.omega_n * r.powi(n as i32 + 2)),
    })
}

/// The nonlocal Poisson kernel `Gamma_s(x, y)` for `x` in `R^N` and `|y| > 1`.
///
/// Carries the sign `(-1)^m`: negative in the ball when `s` lies in `(1, 2)`.
pub fn nonlocal_gamma(order: FracOrder, x: &[f64], y: &[f64]) -> Result<f64> {
    let n = check_dims(x, y)?;
    let ry = norm(y);
    if ry <= 1.0 {
        return Err(Error::domain(format!(
            "nonlocal Poisson kernel needs |y| > 1, got |y| = {ry}"
        )));
    }
    let d = delta(x);
    if d <= 0.0 {
        return Ok(0.0);
    }
    gamma_unchecked(order, n, dist(x, y), d, (ry - 1.0) * (ry + 1.0))
}

/// `Gamma_s` from `|x - y|`, `delta(x) > 0` and `|y|^2 - 1 > 0`.
pub(crate) fn gamma_unchecked(order: FracOrder, n: usize, r: f64, dx: f64, ey: f64) -> Result<f64> {
    let c = constants(order, n)?;
    let s = order.s();
    Ok(order.parity_sign() * c.gamma_nsigma * (dx / ey).powf(s) / r.powi(n as i32))
}

/// `E_{s-2}(x, -1) + E_{s-2}(x, 1)` on the interval, which equals `(1 - x^2)^{s-2}`.
pub fn harmonic_sum_1d(order: FracOrder, x: f64) -> Result<f64> {
    if x.abs() >= 1.0 {
        return Err(Error::domain(format!("harmonic_sum_1d needs |x| < 1, got {x}")));
    }
    Ok(eden_e(order, TraceKind::SMinus2, &[x], &[-1.0])? + eden_e(order, TraceKind::SMinus2, &[x], &[1.0])?)
}

/// The four kernels bound to one order and dimension.
#[derive(Debug, Clone, Copy)]
pub struct BallKernels {
    pub order: FracOrder,
    pub dim: usize,
}

impl BallKernels {
    pub fn new(order: FracOrder, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::capability(format!(
                "kernel evaluation is supported for N in {{1, 2, 3}}, got {dim}"
            )));
        }
        constants(order, dim)?;
        Ok(BallKernels { order, dim })
    }

    pub fn green(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(green_g(self.order, x, y)?.value)
    }

    pub fn eden(&self, kind: TraceKind, x: &[f64], z: &[f64]) -> Result<f64> {
        eden_e(self.order, kind, x, z)
    }

    pub fn poisson(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        nonlocal_gamma(self.order, x, y)
    }
}
