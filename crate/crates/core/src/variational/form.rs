use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::basis::{m8_centered, BasisFn, GalerkinBasis};
use crate::error::{Error, Result};
use crate::quadrature::{GaussLegendre, QuadratureConfig};
use crate::specialfn::{gamma_fn, rgamma, FracOrder};

/// `sin^8(eta) cos(a eta) = sum_j D[j + 4] cos((a + 2j) eta)`.
const D: [f64; 9] = [
    1.0 / 256.0,
    -8.0 / 256.0,
    28.0 / 256.0,
    -56.0 / 256.0,
    70.0 / 256.0,
    -56.0 / 256.0,
    28.0 / 256.0,
    -8.0 / 256.0,
    1.0 / 256.0,
];

/// `J(a) = int_0^inf eta^{2s-8} sin^8(eta) cos(a eta) d eta` in closed form.
///
/// Uses `int_0^inf eta^{mu-1} cos(b eta) = Gamma(mu) cos(pi mu / 2) |b|^{-mu}`, continued
/// to `mu = 2s - 7`; the sum over the eight frequencies converges. When `p = 7 - 2s` is
/// close to an even integer the expression is `0/0` and a series in `p - 2k` is used.
fn sinc8_moment(s: f64, a: f64) -> f64 {
    let p = 7.0 - 2.0 * s;
    let k = (p / 2.0).round();
    let eps = p - 2.0 * k;
    let g = rgamma(8.0 - 2.0 * s);
    if eps.abs() < 1e-3 {
        // sum_j D_j |x|^{2k} (e^{eps L} - 1) / sin(pi p / 2), sin(pi p/2) = (-1)^k sin(pi eps/2)
        let sign = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
        let ratio = if eps == 0.0 {
            2.0 / PI
        } else {
            eps / (0.5 * PI * eps).sin()
        };
        let mut sum = 0.0;
        for (j, d) in D.iter().enumerate() {
            let x = (a + 2.0 * (j as f64 - 4.0)).abs();
            if x == 0.0 {
                continue;
            }
            let l = x.ln();
            // (e^{eps L} - 1) / eps
            let mut term = 0.0;
            let mut c = l;
            for m in 1..10 {
                term += c;
                c *= eps * l / (m as f64 + 1.0);
            }
            sum += d * x.powi(2 * k as i32) * term;
        }
        // J = pi / (2 sin(pi mu / 2) Gamma(8 - 2s)) sum, sin(pi mu/2) = -sin(pi p/2)
        return -PI * g * sum * ratio / (2.0 * sign);
    }
    let sum: f64 = D
        .iter()
        .enumerate()
        .map(|(j, d)| d * (a + 2.0 * (j as f64 - 4.0)).abs().powf(p))
        .sum();
    PI * g * sum / (2.0 * (0.5 * PI * (2.0 * s - 7.0)).sin())
}

/// `c_s` with `(-Delta)^s u(x) = c_s int u(y) |x - y|^{-1-2s} dy` off the support of `u`.
fn offsupport_constant(s: f64) -> f64 {
    4f64.powf(s) * gamma_fn(0.5 + s).unwrap_or(f64::NAN) * rgamma(-s) / PI.sqrt()
}

/// `E_s(b_i, b_j)` for two splines of spacing `h` whose centers are `delta_c` apart.
pub(crate) fn entry_by_offset(s: f64, h: f64, delta_c: f64) -> f64 {
    let a = 2.0 * delta_c / h;
    if a.abs() < 8.0 {
        return 2f64.powf(2.0 * s + 1.0) * h.powf(1.0 - 2.0 * s) / PI * sinc8_moment(s, a);
    }
    // disjoint supports: E = c_s int int b_i(x) b_j(y) |x - y|^{-1-2s}
    let c = offsupport_constant(s);
    if c == 0.0 {
        return 0.0;
    }
    let gl = gl12();
    let mut sum = 0.0;
    for piece in -4..4 {
        let lo = piece as f64;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let t = lo + 0.5 * (x + 1.0);
            sum += 0.5 * w * m8_centered(t) * (0.5 * a.abs() + t).powf(-1.0 - 2.0 * s);
        }
    }
    c * h.powf(1.0 - 2.0 * s) * sum
}

fn gl12() -> &'static GaussLegendre {
    static RULE: std::sync::OnceLock<GaussLegendre> = std::sync::OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(12))
}

fn pair(basis: &GalerkinBasis, i: usize, j: usize) -> Result<(&BasisFn, &BasisFn)> {
    Ok((basis.get(i)?, basis.get(j)?))
}

/// `E_s(b_i, b_j) = (1/2pi) int |xi|^{2s} b_i^(xi) conj(b_j^(xi)) d xi`.
///
/// For two interior splines the frequency integral is evaluated in closed form
/// (overlapping supports) or through the off-support kernel (disjoint supports). Pairs
/// involving an edge spline, which has no power-of-sinc transform, go through the local
/// form at integer orders, the off-support kernel when the supports are at least one cell
/// apart, and the exact second-difference form otherwise.
pub fn form_entry_fourier(
    order: FracOrder,
    i: usize,
    j: usize,
    basis: &GalerkinBasis,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    let (bi, bj) = pair(basis, i, j)?;
    pair_entry(order, bi, bj)
}

pub(crate) fn pair_entry(order: FracOrder, bi: &BasisFn, bj: &BasisFn) -> Result<f64> {
    let s = order.s();
    if bi.is_interior() && bj.is_interior() {
        return Ok(entry_by_offset(s, bi.h, bj.center() - bi.center()));
    }
    let (lo, hi) = if bi.left <= bj.left { (bi, bj) } else { (bj, bi) };
    let gap = hi.left - (lo.left + lo.width());
    if order.is_local() {
        if gap >= 0.0 {
            return Ok(0.0);
        }
        let k = order.m();
        let mut pts: Vec<f64> = bi.knots().into_iter().chain(bj.knots()).collect();
        pts.sort_by(f64::total_cmp);
        let gl = GaussLegendre::new(4);
        return Ok(pts
            .windows(2)
            .map(|w| gl.integrate(|x| bi.deriv(x, k) * bj.deriv(x, k), w[0], w[1]))
            .sum());
    }
    if gap >= 0.999 * bi.h.min(bj.h) {
        return Ok(offsupport_entry(s, bi, bj));
    }
    fd_entry(s, bi, bj)
}

/// `c_s int int b_i(x) b_j(y) |x - y|^{-1-2s}` for supports at least a cell apart.
fn offsupport_entry(s: f64, bi: &BasisFn, bj: &BasisFn) -> f64 {
    let c = offsupport_constant(s);
    if c == 0.0 {
        return 0.0;
    }
    let gl = gl12();
    let (ki, kj) = (bi.knots(), bj.knots());
    let mut sum = 0.0;
    for wi in ki.windows(2) {
        let (mi, ri) = (0.5 * (wi[0] + wi[1]), 0.5 * (wi[1] - wi[0]));
        for wj in kj.windows(2) {
            let (mj, rj) = (0.5 * (wj[0] + wj[1]), 0.5 * (wj[1] - wj[0]));
            for (xa, wa) in gl.nodes.iter().zip(&gl.weights) {
                let x = mi + ri * xa;
                let fx = bi.eval(x);
                for (xb, wb) in gl.nodes.iter().zip(&gl.weights) {
                    let y = mj + rj * xb;
                    sum += ri * rj * wa * wb * fx * bj.eval(y) * (x - y).abs().powf(-1.0 - 2.0 * s);
                }
            }
        }
    }
    c * sum
}

/// `K(s) = int_R (2 - 2 cos t)^2 |t|^{-1-2s} dt`, so that `E_s` is `1/K` times the
/// double integral of second differences.
pub fn second_difference_constant(s: f64) -> f64 {
    if (s - 1.0).abs() < 1e-9 {
        return 8.0 * 2f64.ln();
    }
    -PI * (2f64.powf(2.0 * s + 1.0) - 8.0) / ((PI * s).sin() * gamma_fn(1.0 + 2.0 * s).unwrap_or(f64::NAN))
}

/// `E_s(b_i, b_j)` from the double integral
/// `(1/K) int int D_y b_i(x) D_y b_j(x) |y|^{-1-2s} dx dy`, `D_y b = 2 b(x) - b(x + y) - b(x - y)`.
///
/// The `x`-integral is exact (piecewise polynomial); in `y` the pieces between knot
/// coincidences are integrated by Gauss rules, the first one by an exact moment fit, and
/// the constant tail in closed form. Meant as an independent oracle.
pub fn form_entry_fd(
    order: FracOrder,
    i: usize,
    j: usize,
    basis: &GalerkinBasis,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    let (bi, bj) = pair(basis, i, j)?;
    fd_entry(order.s(), bi, bj)
}

fn fd_entry(s: f64, bi: &BasisFn, bj: &BasisFn) -> Result<f64> {
    if s >= 2.0 {
        return Err(Error::capability("the second-difference form needs s < 2"));
    }
    let mut knots: Vec<f64> = bi.knots().into_iter().chain(bj.knots()).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let span = knots[knots.len() - 1] - knots[0];

    let gl4 = GaussLegendre::new(4);
    let f_of_y = |y: f64| -> f64 {
        let mut xs: Vec<f64> = knots.iter().flat_map(|&k| [k - y, k, k + y]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let d2 = |b: &BasisFn, x: f64| 2.0 * b.eval(x) - b.eval(x + y) - b.eval(x - y);
        xs.windows(2)
            .map(|w| gl4.integrate(|x| d2(bi, x) * d2(bj, x), w[0], w[1]))
            .sum()
    };

    let mut breaks: Vec<f64> = Vec::new();
    for (p, &k1) in knots.iter().enumerate() {
        for &k2 in &knots[p + 1..] {
            let d = k2 - k1;
            breaks.extend([d, 0.5 * d]);
        }
    }
    breaks.retain(|&b| b > 1e-12 && b <= span);
    breaks.push(span);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * span);

    let e = -1.0 - 2.0 * s;
    // first piece: F(y) = y^4 (f4 + f5 y + f6 y^2 + f7 y^3)
    let y1 = breaks[0];
    let first = |m: usize| -> Result<f64> {
        let nodes: Vec<f64> = (0..m)
            .map(|q| 0.5 * y1 * (1.0 - (PI * (q as f64 + 0.5) / m as f64).cos()))
            .collect();
        let v = DMatrix::from_fn(m, m, |r, c| (nodes[r] / y1).powi(c as i32));
        let rhs = DVector::from_iterator(m, nodes.iter().map(|&y| f_of_y(y) / y.powi(4)));
        let coef = v
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("moment fit of the first piece".into()))?;
        Ok((0..m)
            .map(|c| coef[c] * y1.powf(4.0 - 2.0 * s) / (4.0 + c as f64 - 2.0 * s))
            .sum())
    };
    let (lead4, lead5) = (first(4)?, first(5)?);
    if (lead4 - lead5).abs() > 1e-8 * lead5.abs().max(1e-300) + 1e-300 {
        return Err(Error::AccuracyFailure {
            estimate: lead5,
            error_bound: (lead4 - lead5).abs(),
            context: "first piece of the second-difference form is not polynomial".into(),
        });
    }
    let gl = GaussLegendre::new(16);
    let mut total = lead4;
    for w in breaks.windows(2) {
        total += gl.integrate(|y| f_of_y(y) * y.powf(e), w[0], w[1]);
    }
    // beyond the span F(y) = 6 int b_i b_j
    let overlap: f64 = knots
        .windows(2)
        .map(|w| gl4.integrate(|x| bi.eval(x) * bj.eval(x), w[0], w[1]))
        .sum();
    total += 6.0 * overlap * span.powf(-2.0 * s) / (2.0 * s);
    Ok(2.0 * total / second_difference_constant(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::c_ns;
    use crate::variational::basis::IntervalUnionDomain;
    use approx::assert_relative_eq;

    fn o(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    #[test]
    fn second_difference_constant_is_half_the_fourth_difference_constant() {
        for s in [0.3, 0.7, 1.0, 1.25, 1.5, 1.9] {
            assert_relative_eq!(
                1.0 / second_difference_constant(s),
                0.5 * c_ns(1, s),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn sinc8_moment_at_small_order_is_plancherel() {
        // s -> 0: int sin^8 / eta^8 over (0, inf) = 151 pi / 630
        let v = sinc8_moment(1e-9, 0.0);
        assert_relative_eq!(v, 151.0 * PI / 630.0, max_relative = 1e-7);
    }

    #[test]
    fn local_order_one_is_dirichlet_energy() {
        let d = IntervalUnionDomain::interval(0.0, 10.0).unwrap();
        let b = GalerkinBasis::new(&d, 1.0).unwrap();
        let gl = GaussLegendre::new(6);
        for (i, j) in [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 5)] {
            let (bi, bj) = (b.get(i).unwrap(), b.get(j).unwrap());
            let dv = |f: &BasisFn, x: f64| (f.eval(x + 1e-6) - f.eval(x - 1e-6)) / 2e-6;
            let want: f64 = (0..10)
                .map(|k| gl.integrate(|x| dv(bi, x) * dv(bj, x), k as f64, k as f64 + 1.0))
                .sum();
            let got = form_entry_fourier(o(1.0), i, j, &b, &QuadratureConfig::default()).unwrap();
            assert!((got - want).abs() < 1e-8, "({i},{j}): {got} vs {want}");
        }
    }

    #[test]
    fn fourier_matches_second_difference_oracle() {
        let d = IntervalUnionDomain::new(vec![(-1.0, 1.0), (2.0, 4.0)]).unwrap();
        let b = GalerkinBasis::new(&d, 0.125).unwrap();
        let cfg = QuadratureConfig::default();
        for s in [0.5, 0.8, 1.0, 1.3, 1.5, 1.75] {
            for (i, j) in [(3, 3), (3, 4), (3, 5), (3, 6), (3, 7), (3, 9), (0, 12), (2, 20)] {
                let f = form_entry_fourier(o(s), i, j, &b, &cfg).unwrap();
                let o = form_entry_fd(o(s), i, j, &b, &cfg).unwrap();
                assert_relative_eq!(f, o, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn continuity_across_one() {
        let d = IntervalUnionDomain::interval(-1.0, 1.0).unwrap();
        let b = GalerkinBasis::new(&d, 0.25).unwrap();
        let cfg = QuadratureConfig::default();
        for (i, j) in [(1, 1), (1, 2), (0, 4)] {
            let lo = form_entry_fourier(o(1.0 - 1e-7), i, j, &b, &cfg).unwrap();
            let mid = form_entry_fourier(o(1.0), i, j, &b, &cfg).unwrap();
            let hi = form_entry_fourier(o(1.0 + 1e-7), i, j, &b, &cfg).unwrap();
            let scale = form_entry_fourier(o(1.0), i, i, &b, &cfg).unwrap();
            assert!(
                (lo - mid).abs() < 1e-5 * scale && (hi - mid).abs() < 1e-5 * scale,
                "({i},{j}) {lo} {mid} {hi}"
            );
        }
    }

    #[test]
    fn order_validation() {
        let d = IntervalUnionDomain::interval(-1.0, 1.0).unwrap();
        let b = GalerkinBasis::new(&d, 0.25).unwrap();
        let cfg = QuadratureConfig::default();
        assert!(form_entry_fourier(o(2.0), 0, 0, &b, &cfg).unwrap() > 0.0);
        assert!(matches!(
            form_entry_fd(o(2.0), 0, 0, &b, &cfg),
            Err(Error::Capability(_))
        ));
    }
}
