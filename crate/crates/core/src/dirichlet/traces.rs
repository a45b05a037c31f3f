use nalgebra::{DMatrix, DVector};

use super::solve::{exterior_limit, solve_full};
use super::{BoundaryData, ExteriorData, ProblemData, SolutionField};
use crate::error::{Error, Result};
use crate::field::{norm, ScalarField};
use crate::hyperop::frac_lap_4th;
use crate::quadrature::QuadratureConfig;

/// Weighted boundary traces of a solution at one boundary point.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceResult {
    pub z: Vec<f64>,
    pub d_sm2: f64,
    pub d_sm1: f64,
    /// Error estimates of the two traces: change between the last two extrapolants plus
    /// propagated quadrature error.
    pub error_sm2: f64,
    pub error_sm1: f64,
    /// The larger of the two estimates.
    pub extrapolation_error: f64,
    /// `D^{s-1}` from `2 lim u / delta^{s-1}`, computed when the outer limit is zero and
    /// `D^{s-2}` vanishes within its error; with its own error estimate.
    pub d_sm1_shortcut: Option<(f64, f64)>,
}

/// Sampling of the radial approach to the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    /// Offsets are `t = 2^{-k}` for `k = first_k ..= first_k + depth`.
    pub first_k: i32,
    pub depth: usize,
    /// Exponents of the model `h(t) = sum c_j t^{e_j}`; must contain 0 and 1.
    pub exponents: Vec<f64>,
}

impl TraceOptions {
    pub fn from_config(cfg: &QuadratureConfig) -> Self {
        let depth = cfg.extrap_depth.max(2);
        TraceOptions {
            first_k: 4,
            depth,
            exponents: (0..=depth).map(|j| j as f64).collect(),
        }
    }
}

/// Coefficients of the fit through all points and through all but the coarsest one,
/// with the weights of the full fit (for error propagation).
struct Fit {
    full: Vec<f64>,
    reduced: Vec<f64>,
    weights: DMatrix<f64>,
}

fn fit(ts: &[f64], hs: &[f64], exps: &[f64]) -> Result<Fit> {
    let solve = |ts: &[f64], hs: &[f64]| -> Result<(Vec<f64>, DMatrix<f64>)> {
        let m = ts.len();
        let scale = ts.iter().copied().fold(0.0, f64::max);
        let a = DMatrix::from_fn(m, m, |i, j| (ts[i] / scale).powf(exps[j]));
        let inv = a
            .try_inverse()
            .ok_or_else(|| Error::Singular("trace extrapolation system".into()))?;
        let c = &inv * DVector::from_column_slice(hs);
        let coef = (0..m).map(|j| c[j] / scale.powf(exps[j])).collect();
        let mut w = inv;
        for (j, e) in exps.iter().enumerate().take(m) {
            let f = scale.powf(*e);
            w.row_mut(j).iter_mut().for_each(|v| *v /= f);
        }
        Ok((coef, w))
    };
    let (full, weights) = solve(ts, hs)?;
    let (reduced, _) = solve(&ts[1..], &hs[1..])?;
    Ok(Fit {
        full,
        reduced,
        weights,
    })
}

/// Traces `D^{s-2} u(z)` and `D^{s-1} u(z)` by extrapolating
/// `h(t) = delta^{2-s} (u((1 - t) z) - u(z^+))` to `t = 0`.
pub fn extract_traces(u: &SolutionField, z: &[f64], cfg: &QuadratureConfig) -> Result<TraceResult> {
    extract_traces_with(u, z, &TraceOptions::from_config(cfg))
}

pub fn extract_traces_with(u: &SolutionField, z: &[f64], opts: &TraceOptions) -> Result<TraceResult> {
    if z.len() != u.dim() || (norm(z) - 1.0).abs() > 1e-12 {
        return Err(Error::domain("trace point must lie on the unit sphere"));
    }
    let i0 = opts.exponents.iter().position(|&e| e == 0.0);
    let i1 = opts.exponents.iter().position(|&e| e == 1.0);
    let (Some(i0), Some(i1)) = (i0, i1) else {
        return Err(Error::domain("trace exponents must contain 0 and 1"));
    };
    let m = opts.depth + 1;
    if opts.exponents.len() < m || i0 >= m - 1 || i1 >= m - 1 {
        return Err(Error::domain("too few trace exponents for the requested depth"));
    }
    let exps = &opts.exponents[..m];
    let s = u.order().s();
    let outer = exterior_limit(u.exterior(), z);

    let mut ts = Vec::with_capacity(m);
    let mut hs = Vec::with_capacity(m);
    let mut noise = Vec::with_capacity(m);
    let mut raw = Vec::with_capacity(m);
    for k in (opts.first_k..=opts.first_k + opts.depth as i32).rev() {
        let t = 2f64.powi(-k);
        let x: Vec<f64> = z.iter().map(|c| c * (1.0 - t)).collect();
        let d = t * (2.0 - t);
        let e = u.eval_estimate(&x);
        let w = d.powf(2.0 - s);
        ts.push(t);
        hs.push(w * (e.value - outer));
        noise.push(w * e.error);
        raw.push((d, e));
    }
    let f = fit(&ts, &hs, exps)?;
    let propagated = |row: usize| -> f64 { (0..m).map(|k| f.weights[(row, k)].abs() * noise[k]).sum() };
    let d_sm2 = f.full[i0];
    let d_sm1 = f.full[i1];
    let error_sm2 = (f.full[i0] - f.reduced[i0]).abs() + propagated(i0);
    let error_sm1 = (f.full[i1] - f.reduced[i1]).abs() + propagated(i1);

    for (d, e, name, last) in [
        (d_sm2, error_sm2, "D^(s-2)", (f.reduced[i0], f.full[i0])),
        (d_sm1, error_sm1, "D^(s-1)", (f.reduced[i1], f.full[i1])),
    ] {
        if !(e <= 0.1 * (1.0 + d.abs())) {
            return Err(Error::AccuracyFailure {
                estimate: d,
                error_bound: e,
                context: format!(
                    "{name} extrapolation at z = {z:?} did not settle; last two iterates {} and {}",
                    last.0, last.1
                ),
            });
        }
    }

    let d_sm1_shortcut = if outer == 0.0 && d_sm2.abs() <= 10.0 * error_sm2 {
        let gs: Vec<f64> = raw.iter().map(|(d, e)| e.value / d.powf(s - 1.0)).collect();
        let gn: Vec<f64> = raw.iter().map(|(d, e)| e.error / d.powf(s - 1.0)).collect();
        let g = fit(&ts, &gs, exps)?;
        let err = (g.full[i0] - g.reduced[i0]).abs()
            + (0..m).map(|k| g.weights[(i0, k)].abs() * gn[k]).sum::<f64>();
        Some((2.0 * g.full[i0], 2.0 * err))
    } else {
        None
    };

    Ok(TraceResult {
        z: z.to_vec(),
        d_sm2,
        d_sm1,
        error_sm2,
        error_sm1,
        extrapolation_error: error_sm2.max(error_sm1),
        d_sm1_shortcut,
    })
}

/// Outcome of rebuilding a solution from its own measured data.
#[derive(Debug, Clone)]
pub struct RepresentationReport {
    /// Points where `(-Delta)^s u` was measured, with the measured values.
    pub rhs_samples: Vec<(f64, f64)>,
    pub traces: Vec<TraceResult>,
    pub probes: Vec<f64>,
    pub discrepancies: Vec<f64>,
    pub max_discrepancy: f64,
}

const RHS_NODES: usize = 14;
const RHS_HALF_WIDTH: f64 = 0.94;

/// Recompute `u` on a probe grid from the representation formula fed with `(-Delta)^s u`
/// measured on `{delta >= 0.1}` (interpolated), the exterior values and the extracted
/// traces. Implemented for `N = 1` with `u = 0` on `B_r \ B` for some `r > 1`.
pub fn verify_representation(u: &SolutionField, cfg: &QuadratureConfig) -> Result<RepresentationReport> {
    if u.dim() != 1 {
        return Err(Error::capability(
            "verify_representation is implemented for N = 1",
        ));
    }
    if !(u.exterior_inner_radius() > 1.0) {
        return Err(Error::domain(
            "the representation formula needs u = 0 on B_r \\ B for some r > 1",
        ));
    }
    let order = u.order();
    let field = u.to_field();
    let nodes: Vec<f64> = (0..RHS_NODES)
        .map(|j| RHS_HALF_WIDTH * (std::f64::consts::PI * (j as f64 + 0.5) / RHS_NODES as f64).cos())
        .collect();
    let mut rhs_samples = Vec::with_capacity(RHS_NODES);
    for &x in &nodes {
        rhs_samples.push((x, frac_lap_4th(order, &field, &[x], cfg)?.value));
    }
    let values: Vec<f64> = rhs_samples.iter().map(|p| p.1).collect();
    let interp = chebyshev_interpolant(nodes.clone(), values);
    let f = ScalarField::line(move |x| if x.abs() < 1.0 { interp(x) } else { 0.0 })
        .compact(1.0)
        .labeled("measured rhs");

    let left = extract_traces(u, &[-1.0], cfg)?;
    let right = extract_traces(u, &[1.0], cfg)?;
    let mut data = ProblemData::new(1)
        .with_f(f)
        .with_g0(BoundaryData::two_point(left.d_sm2, right.d_sm2))
        .with_g1(BoundaryData::two_point(left.d_sm1, right.d_sm1));
    if u.exterior().label() != "zero" {
        data = data.with_psi(ExteriorData {
            psi: u.exterior().clone(),
            inner_radius: u.exterior_inner_radius(),
            hypothesis_asserted: false,
        });
    }
    let rebuilt = solve_full(order, &data, cfg)?;

    let probes: Vec<f64> = (-9..=9).map(|i| i as f64 / 10.0).collect();
    let discrepancies: Vec<f64> = probes
        .iter()
        .map(|&x| (rebuilt.eval(&[x]) - u.eval(&[x])).abs())
        .collect();
    let max_discrepancy = discrepancies.iter().copied().fold(0.0, f64::max);
    Ok(RepresentationReport {
        rhs_samples,
        traces: vec![left, right],
        probes,
        discrepancies,
        max_discrepancy,
    })
}

/// Barycentric interpolant through Chebyshev points of the first kind, evaluated
/// anywhere (extrapolating polynomially outside the nodes).
fn chebyshev_interpolant(nodes: Vec<f64>, values: Vec<f64>) -> impl Fn(f64) -> f64 + Send + Sync {
    let n = nodes.len();
    let weights: Vec<f64> = (0..n)
        .map(|j| {
            let th = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * th.sin()
        })
        .collect();
    move |x: f64| {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..n {
            let d = x - nodes[j];
            if d == 0.0 {
                return values[j];
            }
            let w = weights[j] / d;
            num += w * values[j];
            den += w;
        }
        num / den
    }
}
