use nalgebra::{SMatrix, SVector};

use super::solve::extend_exterior;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::kernels::{green_g, harmonic_sum_1d};
use crate::quadrature::QuadratureConfig;
use crate::specialfn::FracOrder;

/// Direction of the limit in `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitPath {
    /// `s -> 2^-`, towards the bilaplacian.
    ToTwo,
    /// `s -> 1^+`, towards the Laplacian.
    ToOne,
}

/// The family of objects followed along the `s`-grid (all on the interval).
#[derive(Debug, Clone)]
pub enum LimitFamily {
    /// `G_s(x, y)`.
    Green { x: f64, y: f64 },
    /// `u_s = E_{s-2}(x, -1) + E_{s-2}(x, 1)`, which equals `(1 - x^2)^{s-2}`.
    HarmonicPower { x: f64 },
    /// `sup` over the probes of the exterior extension of `psi` (vanishing on `B_r \ B`).
    PoissonExtension {
        psi: ScalarField,
        inner_radius: f64,
        probes: Vec<f64>,
    },
}

/// One row of a limit table.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitRow {
    pub s: f64,
    pub value: f64,
    /// Closed form of the member itself, when there is one.
    pub closed_form: Option<f64>,
    /// The object the family tends to along the path.
    pub limit: Option<f64>,
    /// `|value - limit|`.
    pub deviation: Option<f64>,
}

/// Green function of `u'''' = delta_y` on `(-1, 1)` with `u = u' = 0` at both ends.
pub fn beam_green(x: f64, y: f64) -> Result<f64> {
    if !(x.abs() < 1.0 && y.abs() < 1.0) {
        return Err(Error::domain("beam Green function needs x, y in (-1, 1)"));
    }
    // cubic a0 + a1 t + a2 t^2 + a3 t^3 left of y, b0.. right of y
    let row = |t: f64, d: usize| -> [f64; 4] {
        match d {
            0 => [1.0, t, t * t, t * t * t],
            1 => [0.0, 1.0, 2.0 * t, 3.0 * t * t],
            2 => [0.0, 0.0, 2.0, 6.0 * t],
            _ => [0.0, 0.0, 0.0, 6.0],
        }
    };
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut rhs = SVector::<f64, 8>::zeros();
    let mut put = |i: usize, left: [f64; 4], right: [f64; 4]| {
        for j in 0..4 {
            a[(i, j)] = left[j];
            a[(i, 4 + j)] = right[j];
        }
    };
    put(0, row(-1.0, 0), [0.0; 4]);
    put(1, row(-1.0, 1), [0.0; 4]);
    put(2, [0.0; 4], row(1.0, 0));
    put(3, [0.0; 4], row(1.0, 1));
    for d in 0..3 {
        let l = row(y, d);
        put(4 + d, l, row(y, d).map(|v| -v));
    }
    put(7, row(y, 3).map(|v| -v), row(y, 3));
    rhs[7] = 1.0;
    let c = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("beam Green system".into()))?;
    let off = if x <= y { 0 } else { 4 };
    Ok((0..4).map(|j| c[off + j] * x.powi(j as i32)).sum())
}

/// Tabulate a family along an `s`-grid in `(1, 2)`.
pub fn limit_study(
    path: LimitPath,
    family: &LimitFamily,
    s_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<LimitRow>> {
    let mut rows = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if !(s > 1.0 && s < 2.0) {
            return Err(Error::domain(format!(
                "limit studies run over s in (1, 2), got {s}"
            )));
        }
        let order = FracOrder::new(s)?;
        let (value, closed_form, limit) = match family {
            LimitFamily::Green { x, y } => {
                let v = green_g(order, &[*x], &[*y])?.value;
                let lim = match path {
                    LimitPath::ToTwo => beam_green(*x, *y)?,
                    LimitPath::ToOne => green_g(FracOrder::new(1.0)?, &[*x], &[*y])?.value,
                };
                (v, None, Some(lim))
            }
            LimitFamily::HarmonicPower { x } => {
                let v = harmonic_sum_1d(order, *x)?;
                let closed = (1.0 - x * x).powf(s - 2.0);
                let lim = match path {
                    LimitPath::ToTwo => 1.0,
                    LimitPath::ToOne => 1.0 / (1.0 - x * x),
                };
                (v, Some(closed), Some(lim))
            }
            LimitFamily::PoissonExtension {
                psi,
                inner_radius,
                probes,
            } => {
                let u = extend_exterior(order, psi, *inner_radius, cfg)?;
                let v = probes.iter().map(|&x| u.eval(&[x]).abs()).fold(0.0, f64::max);
                // gamma_{N, sigma} vanishes at both ends of the range
                (v, None, Some(0.0))
            }
        };
        rows.push(LimitRow {
            s,
            value,
            closed_form,
            limit,
            deviation: limit.map(|l| (value - l).abs()),
        });
    }
    Ok(rows)
}
