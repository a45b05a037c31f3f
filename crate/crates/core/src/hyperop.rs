//! Pointwise fractional Laplacians: second- and fourth-difference hypersingular
//! integrals, the composition `(-Delta) (-Delta)^{s-1}`, and a Fourier-symbol reference.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{delta, kink_distance, norm, DecayClass, ScalarField};
use crate::quadrature::{
    grade_for_exponent, integrate_adaptive, integrate_panel_graded, integrate_tail, sphere_rule, Estimate,
    GaussLegendre, QuadratureConfig,
};
use crate::specialfn::{c_ns, e_ns, FracOrder};

/// Which symmetric difference the hypersingular integral uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difference {
    /// `2u(x) - u(x + y) - u(x - y)`, for orders in `(0, 1)`.
    Second,
    /// `u(x + 2y) - 4u(x + y) + 6u(x) - 4u(x - y) + u(x - 2y)`, for orders in `(1, 2)`.
    Fourth,
}

impl Difference {
    fn reach(self) -> f64 {
        match self {
            Difference::Second => 1.0,
            Difference::Fourth => 2.0,
        }
    }

    /// Value of the difference once every shifted point has left the support.
    fn far_weight(self) -> f64 {
        match self {
            Difference::Second => 2.0,
            Difference::Fourth => 6.0,
        }
    }

    /// Order of vanishing at `y = 0`.
    fn vanishing(self) -> i32 {
        match self {
            Difference::Second => 2,
            Difference::Fourth => 4,
        }
    }
}

/// Directions for the radial factorization; for `N = 1` the evenness of the
/// difference folds `{-1, +1}` into one direction of weight 2.
fn directions(n: usize) -> Result<&'static [(Vec<f64>, f64)]> {
    static D1: OnceLock<Vec<(Vec<f64>, f64)>> = OnceLock::new();
    static D2: OnceLock<Vec<(Vec<f64>, f64)>> = OnceLock::new();
    static D3: OnceLock<Vec<(Vec<f64>, f64)>> = OnceLock::new();
    let build = |n: usize, res: usize| -> Vec<(Vec<f64>, f64)> {
        let rule = sphere_rule(n, res).expect("supported dimension");
        rule.nodes.into_iter().zip(rule.weights).collect()
    };
    match n {
        1 => Ok(D1.get_or_init(|| vec![(vec![1.0], 2.0)])),
        2 => Ok(D2.get_or_init(|| build(2, 64))),
        3 => Ok(D3.get_or_init(|| build(3, 12))),
        _ => Err(Error::capability(format!(
            "hypersingular integrals are implemented for N in {{1, 2, 3}}, got {n}"
        ))),
    }
}

struct Radial<'a> {
    u: &'a ScalarField,
    x: &'a [f64],
    theta: &'a [f64],
    kind: Difference,
    ux: f64,
}

impl Radial<'_> {
    fn shifted(&self, a: f64, r: f64, buf: &mut [f64]) -> f64 {
        for ((b, xi), ti) in buf.iter_mut().zip(self.x).zip(self.theta) {
            *b = xi + a * r * ti;
        }
        self.u.eval(buf)
    }

    fn diff(&self, r: f64) -> f64 {
        let mut buf = [0.0; 3];
        let buf = &mut buf[..self.x.len()];
        match self.kind {
            Difference::Second => 2.0 * self.ux - self.shifted(1.0, r, buf) - self.shifted(-1.0, r, buf),
            Difference::Fourth => {
                self.shifted(2.0, r, buf) - 4.0 * self.shifted(1.0, r, buf) + 6.0 * self.ux
                    - 4.0 * self.shifted(-1.0, r, buf)
                    + self.shifted(-2.0, r, buf)
            }
        }
    }

    /// Radii at which some shifted point crosses a kink of `u`.
    fn kink_radii(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let reaches: &[f64] = match self.kind {
            Difference::Second => &[1.0],
            Difference::Fourth => &[1.0, 2.0],
        };
        if self.x.len() == 1 {
            for k in self.u.kinks() {
                for a in reaches {
                    out.push((k - self.x[0]).abs() / a);
                }
            }
        } else {
            let xt: f64 = self.x.iter().zip(self.theta).map(|(a, b)| a * b).sum();
            let xx: f64 = self.x.iter().map(|a| a * a).sum();
            for rho in self.u.kinks() {
                let disc = xt * xt - xx + rho * rho;
                if disc < 0.0 {
                    continue;
                }
                let sq = disc.sqrt();
                for a in reaches {
                    for root in [-xt + sq, -xt - sq, xt + sq, xt - sq] {
                        if root > 0.0 {
                            out.push(root / a);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Inner zone `(0, eps)`: the difference vanishes like `r^p`; `D(r) / r^p` is even and
/// smooth in `r`, so it is fitted as a polynomial in `r^2` on `[eps, 2 eps]` and
/// integrated against `r^{p - 1 - 2t}` exactly.
fn inner_zone(rad: &Radial, t: f64, eps: f64, scale: f64) -> (Estimate, f64) {
    const NODES: usize = 6;
    let p = rad.kind.vanishing();
    let e = p as f64 - 2.0 * t;
    let mut zeta = [0.0; NODES];
    let mut g = [0.0; NODES];
    for j in 0..NODES {
        // Chebyshev points of [1, 4] in zeta = (r / eps)^2
        let c = (PI * (j as f64 + 0.5) / NODES as f64).cos();
        zeta[j] = 2.5 - 1.5 * c;
        let r = eps * zeta[j].sqrt();
        g[j] = rad.diff(r) / r.powi(p);
    }
    let integrate_fit = |m: usize| -> (f64, f64) {
        let v = DMatrix::from_fn(m, m, |i, k| zeta[i].powi(k as i32));
        let rhs = DVector::from_iterator(m, g[..m].iter().copied());
        let lu = v.clone().lu();
        let coef = lu.solve(&rhs).unwrap_or_else(|| DVector::zeros(m));
        // sensitivity of the integral to the data: weights w = V^{-T} mu
        let mu = DVector::from_fn(m, |k, _| 1.0 / (2.0 * k as f64 + e));
        let w = v.transpose().lu().solve(&mu).unwrap_or_else(|| DVector::zeros(m));
        let val = coef.iter().zip(mu.iter()).map(|(c, m)| c * m).sum::<f64>();
        (val, w.iter().map(|x| x.abs()).sum())
    };
    let (hi, lebesgue) = integrate_fit(NODES);
    let (lo, _) = integrate_fit(NODES - 1);
    let factor = eps.powf(e);
    // cancellation in the difference: ~ 16 ulp of the largest sample over r^p
    let noise = 16.0 * f64::EPSILON * scale / eps.powi(p);
    let noise = lebesgue * noise * factor;
    let est = Estimate {
        value: hi * factor,
        error: (hi - lo).abs() * factor + noise,
        evaluations: NODES * 5,
    };
    (est, noise)
}

/// `int_{R^N} D(x, y) |y|^{-N-2t} dy` without the normalization constant.
fn hypersingular(
    u: &ScalarField,
    x: &[f64],
    kind: Difference,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    let n = u.dim();
    if x.len() != n {
        return Err(Error::domain(format!(
            "point has dimension {} but the field lives in R^{n}",
            x.len()
        )));
    }
    if u.boundary_blowup() && delta(x) < 0.1 {
        return Err(Error::capability(
            "fields that blow up at the sphere are only evaluated where delta(x) >= 0.1",
        ));
    }
    let d = kink_distance(u, x);
    if d < 1e-10 {
        return Err(Error::capability(format!(
            "x = {x:?} lies on a non-smooth point of `{}`",
            u.label()
        )));
    }
    let eps0 = cfg.inner_cut.min(d / (8.0 * kind.reach()));
    let ux = u.eval(x);
    let far = kind.far_weight();
    let grade = grade_for_exponent(u.kink_exponent());
    // near a blow-up |d|^beta the field itself is only known to relative eps / d, which
    // limits kink panels to about eps^{1 + beta}
    let kink_rel = if u.kink_exponent() < 0.0 {
        16.0 * f64::EPSILON.powf(1.0 + u.kink_exponent())
    } else {
        0.0
    };

    let (r_end, tail_decay) = match u.decay() {
        DecayClass::Compact => {
            let rs = u.support_radius().unwrap_or(0.0);
            ((rs + norm(x)).max(4.0 * eps0), None)
        }
        DecayClass::Algebraic(p) => (cfg.outer_cut, Some(1.0 + 2.0 * t + p)),
        DecayClass::Unknown => {
            // membership asserted by the caller: growth at most |x|^{2 t_min}
            let t_min = u.l1_threshold().unwrap_or(t);
            (cfg.outer_cut, Some(1.0 + 2.0 * (t - t_min)))
        }
    };

    let mut total = Estimate::default();
    let mut noise = 0.0;
    for (theta, weight) in directions(n)? {
        let rad = Radial {
            u,
            x,
            theta,
            kind,
            ux,
        };
        let scale = 16.0 * ux.abs()
            + [eps0, 2.0 * eps0]
                .iter()
                .map(|&r| {
                    let mut b = [0.0; 3];
                    let b = &mut b[..n];
                    rad.shifted(kind.reach(), r, b).abs() + rad.shifted(-kind.reach(), r, b).abs()
                })
                .fold(0.0, f64::max)
                * 8.0;
        let (mut est, inner_noise) = inner_zone(&rad, t, eps0, scale);
        noise += inner_noise * weight;

        let kinks = rad.kink_radii();
        let mut breaks = vec![eps0];
        let mut b = 2.0 * eps0;
        while b < r_end {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.extend(kinks.iter().copied().filter(|&k| k > eps0 && k < r_end));
        let mut r_far = r_end;
        if tail_decay.is_some() {
            if let Some(kmax) = kinks
                .iter()
                .copied()
                .fold(None, |m: Option<f64>, k| Some(m.map_or(k, |m| m.max(k))))
            {
                r_far = r_far.max(2.0 * kmax);
            }
            let mut b = r_end;
            while b < r_far {
                b *= 2.0;
                breaks.push(b);
            }
            r_far = b;
        }
        breaks.push(r_far);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs().max(1e-300));
        let is_kink = |r: f64| kinks.iter().any(|k| (k - r).abs() <= 1e-12 * r.max(1.0));
        // roundoff floor of the difference, integrated against r^{-1-2t}
        let floor = |lo: f64, hi: f64| {
            8.0 * f64::EPSILON * scale * (lo.powf(-2.0 * t) - hi.powf(-2.0 * t)) / (2.0 * t)
        };
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let at_kink = is_kink(lo) || is_kink(hi);
            let k = if at_kink { grade } else { 2.0 };
            let rel = if at_kink {
                cfg.rel_tol.max(kink_rel)
            } else {
                cfg.rel_tol
            };
            let f = floor(lo, hi);
            noise += f * weight;
            let panel_cfg = cfg.with_tolerances(rel, cfg.abs_tol.max(f));
            let e = absorb(integrate_panel_graded(
                |r| rad.diff(r) * r.powf(-1.0 - 2.0 * t),
                lo,
                hi,
                k,
                &panel_cfg,
            ))?;
            if at_kink {
                noise += kink_rel * e.value.abs() * weight;
            }
            est += e;
        }
        // far zone: the difference tends to `far * u(x)`
        est += Estimate::exact(far * ux * r_far.powf(-2.0 * t) / (2.0 * t));
        if let Some(decay) = tail_decay {
            if decay <= 1.0 {
                return Err(Error::integrability(format!(
                    "field `{}` decays too slowly for order {t}",
                    u.label()
                )));
            }
            let f = floor(r_far, f64::INFINITY);
            noise += f * weight;
            est += absorb(integrate_tail(
                |r| (rad.diff(r) - far * ux) * r.powf(-1.0 - 2.0 * t),
                r_far,
                decay,
                &cfg.with_tolerances(cfg.rel_tol, cfg.abs_tol.max(f)),
            ))?;
        }
        total += est.scale(*weight);
    }
    let target = cfg.rel_tol * total.value.abs() + cfg.abs_tol + noise;
    if !(total.error <= 1e3 * target) {
        return Err(Error::AccuracyFailure {
            estimate: total.value,
            error_bound: total.error,
            context: format!("hypersingular integral of `{}` at {x:?}", u.label()),
        });
    }
    Ok(total)
}

/// Keep the best estimate of a panel that missed its tolerance; the caller judges the
/// accumulated bound.
fn absorb(r: Result<Estimate>) -> Result<Estimate> {
    match r {
        Err(Error::AccuracyFailure {
            estimate,
            error_bound,
            ..
        }) if estimate.is_finite() && error_bound.is_finite() => Ok(Estimate {
            value: estimate,
            error: error_bound,
            evaluations: 0,
        }),
        other => other,
    }
}

fn check_point(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain("evaluation point must be finite"))
    }
}

/// `(-Delta)^sigma u(x)` for `sigma` in `(0, 1)` through the second-difference integral.
pub fn frac_lap_2nd(sigma: f64, u: &ScalarField, x: &[f64], cfg: &QuadratureConfig) -> Result<Estimate> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::domain(format!(
            "second-difference order must lie in (0, 1), got {sigma}"
        )));
    }
    check_point(x)?;
    u.require_l1(sigma)?;
    let c = 0.5 * e_ns(u.dim(), sigma + 1.0);
    Ok(hypersingular(u, x, Difference::Second, sigma, cfg)?.scale(c))
}

/// `(-Delta)^s u(x)` for `s` in `(1, 2)` through the fourth-difference integral.
pub fn frac_lap_4th(
    order: FracOrder,
    u: &ScalarField,
    x: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    if !order.is_higher_order() {
        return Err(Error::domain(format!(
            "fourth-difference evaluation needs s in (1, 2), got {}",
            order.s()
        )));
    }
    check_point(x)?;
    u.require_l1(order.s())?;
    let c = 0.5 * c_ns(u.dim(), order.s());
    Ok(hypersingular(u, x, Difference::Fourth, order.s(), cfg)?.scale(c))
}

/// `(-Delta)^s u(x)` for any non-integer `s` in `(0, 2)`.
pub fn frac_lap(order: FracOrder, u: &ScalarField, x: &[f64], cfg: &QuadratureConfig) -> Result<Estimate> {
    if order.is_local() {
        return Err(Error::capability(
            "integer orders are local operators; use a finite-difference Laplacian",
        ));
    }
    if order.m() == 0 {
        frac_lap_2nd(order.s(), u, x, cfg)
    } else {
        frac_lap_4th(order, u, x, cfg)
    }
}

/// `(-Delta) [(-Delta)^{s-1} u](x)`: the inner operator by [`frac_lap_2nd`], the outer
/// Laplacian by centered differences with one Richardson step.
///
/// The step is `min(d / 8, 1e-2)` where `d` is the distance from `x` to the nearest
/// non-smooth point of `u`.
pub fn frac_lap_composed(
    order: FracOrder,
    u: &ScalarField,
    x: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    if !order.is_higher_order() {
        return Err(Error::domain(format!(
            "the composed evaluation needs s in (1, 2), got {}",
            order.s()
        )));
    }
    check_point(x)?;
    let sigma = order.s() - 1.0;
    u.require_l1(sigma)?;
    let d = kink_distance(u, x);
    let h = (d / 8.0).min(1e-2);
    let inner_cfg = QuadratureConfig {
        rel_tol: (cfg.rel_tol * 1e-2).max(1e-13),
        abs_tol: (cfg.abs_tol * 1e-2).max(1e-15),
        ..*cfg
    };
    let n = x.len();
    let center = frac_lap_2nd(sigma, u, x, &inner_cfg)?;
    let mut evaluations = center.evaluations;
    let mut noise = 0.0;
    let mut lap = |step: f64| -> Result<f64> {
        let mut acc = 0.0;
        let mut err = 0.0;
        for i in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += step;
            xm[i] -= step;
            let fp = frac_lap_2nd(sigma, u, &xp, &inner_cfg)?;
            let fm = frac_lap_2nd(sigma, u, &xm, &inner_cfg)?;
            evaluations += fp.evaluations + fm.evaluations;
            acc += 2.0 * center.value - fp.value - fm.value;
            err += 2.0 * center.error + fp.error + fm.error;
        }
        noise += err / (step * step);
        Ok(acc / (step * step))
    };
    let coarse = lap(h)?;
    let fine = lap(0.5 * h)?;
    let value = (4.0 * fine - coarse) / 3.0;
    Ok(Estimate {
        value,
        error: (value - fine).abs() + noise,
        evaluations,
    })
}

/// Spectral decay of a transform, which decides how the frequency integral is truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralDecay {
    /// `u_hat` vanishes for `|xi| > cutoff`.
    BandLimited(f64),
    /// `|u_hat(xi)| <= C |xi|^{-p}`.
    Algebraic(f64),
    /// Faster than any power.
    Rapid,
}

/// A transform in the unitary convention `u_hat(xi) = (2 pi)^{-N/2} int u(x) e^{-i x.xi} dx`.
#[derive(Clone)]
pub enum Transform {
    /// `N = 1`, arbitrary complex transform.
    Line(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
    /// Radial field in `R^N`: `u_hat` as a function of `|xi|`.
    Radial(usize, Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

#[derive(Clone)]
pub struct FourierData {
    pub transform: Transform,
    pub decay: SpectralDecay,
}

impl FourierData {
    pub fn dim(&self) -> usize {
        match self.transform {
            Transform::Line(_) => 1,
            Transform::Radial(n, _) => n,
        }
    }

    /// The transform of `e^{-|x|^2 / 2}` in `R^N`, which is `e^{-|xi|^2 / 2}`.
    pub fn gaussian(n: usize) -> Self {
        let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|r: f64| (-0.5 * r * r).exp());
        FourierData {
            transform: if n == 1 {
                Transform::Line(Arc::new(move |xi: f64| Complex64::new(f(xi), 0.0)))
            } else {
                Transform::Radial(n, f)
            },
            decay: SpectralDecay::Rapid,
        }
    }
}

/// `J_0(z)` from its integral representation for moderate `z`, Hankel asymptotics beyond.
pub fn bessel_j0(z: f64) -> f64 {
    let z = z.abs();
    if z <= 60.0 {
        static GL: OnceLock<GaussLegendre> = OnceLock::new();
        let gl = GL.get_or_init(|| GaussLegendre::new(128));
        return gl.integrate(|tau| (z * tau.sin()).cos(), 0.0, PI) / PI;
    }
    let z8 = 8.0 * z;
    let z2 = z8 * z8;
    let p = 1.0 - 9.0 / (2.0 * z2) + 11025.0 / (24.0 * z2 * z2);
    let q = -1.0 / z8 + 225.0 / (6.0 * z2 * z8);
    let chi = z - PI / 4.0;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `(2 pi)^{-N/2} int |xi|^{2s} u_hat(xi) e^{i x.xi} d xi` by radial quadrature.
pub fn fourier_reference(
    order: FracOrder,
    data: &FourierData,
    x: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let n = data.dim();
    if x.len() != n {
        return Err(Error::domain("point dimension does not match the transform"));
    }
    let s = order.s();
    let integrand = |xi: f64| -> f64 {
        let w = xi.powf(2.0 * s);
        match &data.transform {
            Transform::Line(f) => {
                let e = Complex64::from_polar(1.0, x[0] * xi);
                let v = f(xi) * e + f(-xi) * e.conj();
                w * v.re / (2.0 * PI).sqrt()
            }
            Transform::Radial(n, f) => {
                let r = norm(x);
                match n {
                    2 => w * xi * f(xi) * bessel_j0(r * xi),
                    3 => {
                        let z = r * xi;
                        let sinc = if z.abs() < 1e-8 {
                            1.0 - z * z / 6.0
                        } else {
                            z.sin() / z
                        };
                        w * xi * xi * f(xi) * sinc * 4.0 * PI / (2.0 * PI).powf(1.5)
                    }
                    _ => f64::NAN,
                }
            }
        }
    };
    if let Transform::Radial(nd, _) = data.transform {
        if !(2..=3).contains(&nd) {
            return Err(Error::capability(
                "radial transforms are supported for N in {2, 3}",
            ));
        }
    }
    // panels of unit length keep the oscillation per panel bounded
    let panel = |a: f64, b: f64| integrate_adaptive(integrand, a, b, cfg);
    match data.decay {
        SpectralDecay::BandLimited(cut) => {
            let mut total = Estimate::default();
            let m = cut.ceil().max(1.0) as usize;
            for k in 0..m {
                let a = cut * k as f64 / m as f64;
                let b = cut * (k + 1) as f64 / m as f64;
                total += panel(a, b)?;
            }
            Ok(total)
        }
        SpectralDecay::Algebraic(p) => {
            let decay = p - 2.0 * s - (n as f64 - 1.0);
            if decay <= 1.0 {
                return Err(Error::Divergence(format!(
                    "transform decay |xi|^-{p} is not integrable against |xi|^{}",
                    2.0 * s
                )));
            }
            let r = cfg.outer_cut;
            let mut total = Estimate::default();
            let m = r.ceil() as usize;
            for k in 0..m {
                total += panel(r * k as f64 / m as f64, r * (k + 1) as f64 / m as f64)?;
            }
            total += integrate_tail(integrand, r, decay, cfg)?;
            Ok(total)
        }
        SpectralDecay::Rapid => {
            let mut total = Estimate::default();
            let mut a = 0.0;
            let mut quiet = 0;
            while a < 1e4 {
                let e = panel(a, a + 1.0)?;
                total += e;
                a += 1.0;
                if e.value.abs() <= cfg.abs_tol.max(1e-17 * total.value.abs()) && a > 4.0 {
                    quiet += 1;
                    if quiet >= 3 {
                        return Ok(total);
                    }
                } else {
                    quiet = 0;
                }
            }
            Err(Error::Divergence(
                "declared rapid spectral decay not observed".into(),
            ))
        }
    }
}

/// `y -> G_s(x, y)` as a field, with its diagonal and the sphere declared as kinks.
pub fn green_column(order: FracOrder, x: &[f64]) -> Result<ScalarField> {
    let n = x.len();
    if n != 1 {
        return Err(Error::capability("Green columns are tabulated for N = 1"));
    }
    let x0 = x[0];
    let f = move |y: &[f64]| {
        let mut yy = y[0];
        if (yy - x0).abs() < 2e-8 {
            yy = x0 + 2e-8;
        }
        crate::kernels::green_g(order, &[x0], &[yy])
            .map(|k| k.value)
            .unwrap_or(0.0)
    };
    Ok(ScalarField::new(1, f)
        .compact(1.0)
        .with_kinks([-1.0, 1.0, x0])
        .with_kink_exponent(order.s().min(1.0))
        .labeled(format!("G_{}({x0}, .)", order.s())))
}
