use std::sync::Arc;

use super::{BoundaryData, ExteriorData, ProblemData, SolutionField, Term};
use crate::error::{Error, Result};
use crate::field::{norm, DecayClass, ScalarField};
use crate::kernels::TraceKind;
use crate::quadrature::{
    integrate_panel_graded, integrate_tail, sphere_rule, Estimate, GradedRule, QuadratureConfig, SphereRule,
};
use crate::specialfn::{boggio_raw, constants, FracOrder};

/// Discretisation of the kernel quadratures behind a [`SolutionField`].
///
/// Fields are built from fixed graded rules (not adaptive ones) so that they are smooth
/// functions of `x` and can be fed back into the hypersingular operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Fine-rule size per panel.
    pub nodes: usize,
    /// Grading exponent at panel ends.
    pub grade: f64,
    /// Circle points (`N = 2`) or latitudes (`N = 3`) of the angular rules.
    pub sphere_resolution: usize,
    /// Split radius used by [`solve_full`] when the exterior datum reaches the sphere.
    pub split_radius: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            nodes: 40,
            grade: 3.0,
            sphere_resolution: 0,
            split_radius: 1.5,
        }
    }
}

impl SolverOptions {
    fn sphere(&self, dim: usize) -> Result<SphereRule> {
        let res = match (dim, self.sphere_resolution) {
            (_, r) if r > 0 => r,
            (2, _) => 64,
            _ => 14,
        };
        sphere_rule(dim, res)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::capability(format!(
            "Dirichlet solvers are implemented for N in {{1, 2, 3}}, got {dim}"
        )))
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    v
}

/// `G_s` with `k_{N,s}` supplied; `r`, `dx`, `dy` positive.
#[inline]
fn green_fast(k: f64, s: f64, n: usize, r: f64, dx: f64, dy: f64) -> f64 {
    if r <= 0.0 || dx <= 0.0 || dy <= 0.0 {
        return 0.0;
    }
    k * r.powf(2.0 * s - n as f64) * boggio_raw(dx * dy / (r * r), s, n as f64 / 2.0)
}

/// The Green potential `x -> int_B G_s(x, y) f(y) dy`.
pub fn solve_green(order: FracOrder, f: &ScalarField, cfg: &QuadratureConfig) -> Result<SolutionField> {
    solve_green_with(order, f, &SolverOptions::default(), cfg)
}

pub fn solve_green_with(
    order: FracOrder,
    f: &ScalarField,
    opts: &SolverOptions,
    cfg: &QuadratureConfig,
) -> Result<SolutionField> {
    cfg.validate()?;
    let n = f.dim();
    check_dim(n)?;
    let k = constants(order, n)?.k_ns;
    let s = order.s();
    let rule = Arc::new(GradedRule::new(opts.nodes, opts.grade));
    let f = f.clone();
    let label = format!("G_s * f[{}]", f.label());
    let term = if n == 1 {
        let inner: Vec<f64> = f.kinks().iter().copied().filter(|k| k.abs() < 1.0).collect();
        Term::new(label, move |x: &[f64], want_err: bool| {
            let x = x[0];
            let mut breaks = inner.clone();
            breaks.extend([-1.0, 1.0, x]);
            let breaks = sorted_unique(breaks);
            let dx = (1.0 - x) * (1.0 + x);
            let mut total = Estimate::default();
            for w in breaks.windows(2) {
                let (a, b) = (w[0], w[1]);
                let g = |y: f64, da: f64, db: f64| {
                    let r = if x <= a { (a - x) + da } else { (x - b) + db };
                    let dy = ((1.0 + a) + da) * ((1.0 - b) + db);
                    green_fast(k, s, 1, r, dx, dy) * f.eval1(y)
                };
                total += if want_err {
                    rule.estimate_offsets(g, a, b)
                } else {
                    Estimate::exact(rule.apply_offsets(g, a, b))
                };
            }
            total
        })
    } else {
        let dirs = Arc::new(opts.sphere(n)?);
        Term::new(label, move |x: &[f64], want_err: bool| {
            let dx = 1.0 - norm(x).powi(2);
            let mut total = Estimate::default();
            let mut y = vec![0.0; n];
            for (theta, wt) in dirs.nodes.iter().zip(&dirs.weights) {
                let b: f64 = x.iter().zip(theta).map(|(a, t)| a * t).sum();
                let root = (b * b + dx).sqrt();
                let rmax = dx / (b + root);
                let g = |rho: f64, _da: f64, db: f64| {
                    for i in 0..n {
                        y[i] = x[i] + rho * theta[i];
                    }
                    let dy = db * (rho + rmax + 2.0 * b);
                    green_fast(k, s, n, rho, dx, dy) * f.eval(&y) * rho.powi(n as i32 - 1)
                };
                let e = if want_err {
                    rule.estimate_offsets(g, 0.0, rmax)
                } else {
                    Estimate::exact(rule.apply_offsets(g, 0.0, rmax))
                };
                total += e.scale(*wt);
            }
            total
        })
    };
    Ok(SolutionField::empty(order, n).with_term(term, s))
}

/// `x -> int_{dB} E_k(x, theta) g(theta) d theta`, the s-harmonic function with the
/// weighted trace of kind `k` equal to `g` and the other one zero.
pub fn harmonic_from_boundary(
    order: FracOrder,
    kind: TraceKind,
    g: &BoundaryData,
    dim: usize,
    cfg: &QuadratureConfig,
) -> Result<SolutionField> {
    harmonic_from_boundary_with(order, kind, g, dim, &SolverOptions::default(), cfg)
}

pub fn harmonic_from_boundary_with(
    order: FracOrder,
    kind: TraceKind,
    g: &BoundaryData,
    dim: usize,
    opts: &SolverOptions,
    cfg: &QuadratureConfig,
) -> Result<SolutionField> {
    cfg.validate()?;
    check_dim(dim)?;
    let fine = opts.sphere(dim)?;
    // the coarse rule only feeds the error estimate
    let coarse = if dim == 1 {
        fine.clone()
    } else {
        let res = if dim == 2 {
            fine.len() / 2
        } else {
            (fine.len() as f64 / 2.0).sqrt() as usize * 2 / 3
        };
        sphere_rule(dim, res.max(4))?
    };
    let sample = |r: &SphereRule| -> Vec<(Vec<f64>, f64)> {
        r.nodes
            .iter()
            .zip(&r.weights)
            .map(|(z, w)| (z.clone(), w * g.eval(z)))
            .collect()
    };
    let fine = Arc::new(sample(&fine));
    let coarse = Arc::new(sample(&coarse));
    let kernel = boundary_kernel(order, kind, dim)?;
    let s = order.s();
    let label = format!("E_{}[{}]", kind, g.label());
    let term = Term::new(label, move |x: &[f64], want_err: bool| {
        let sum = |nodes: &[(Vec<f64>, f64)]| nodes.iter().map(|(z, wg)| wg * kernel(x, z)).sum::<f64>();
        let v = sum(&fine);
        if !want_err || dim == 1 {
            return Estimate {
                value: v,
                error: 1e-15 * v.abs(),
                evaluations: fine.len(),
            };
        }
        let c = sum(&coarse);
        Estimate {
            value: v,
            error: (v - c).abs() + 1e-15 * v.abs(),
            evaluations: fine.len() + coarse.len(),
        }
    });
    let beta = match kind {
        TraceKind::SMinus2 => s - 2.0,
        TraceKind::SMinus1 => s - 1.0,
    };
    Ok(SolutionField::empty(order, dim).with_term(term, beta))
}

/// `E_k(x, z)` with the constants resolved once.
fn boundary_kernel(
    order: FracOrder,
    kind: TraceKind,
    dim: usize,
) -> Result<impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + Clone> {
    let om = constants(order, dim)?.omega_n;
    let s = order.s();
    let nf = dim as f64;
    Ok(move |x: &[f64], z: &[f64]| {
        let d = 1.0 - norm(x).powi(2);
        if d <= 0.0 {
            return 0.0;
        }
        let r = crate::field::dist(x, z);
        let ds = d.powf(s);
        match kind {
            TraceKind::SMinus1 => ds / (2.0 * om * r.powi(dim as i32)),
            TraceKind::SMinus2 => ds * (nf * d - (nf - 4.0) * r * r) / (4.0 * om * r.powi(dim as i32 + 2)),
        }
    })
}

/// Radial panels and tail for integrals over the shell `r_in < |y| < r_out` (or
/// `|y| > r_in` when `r_out` is infinite).
struct ShellQuad {
    dim: usize,
    /// `(a, b, rule index)`; rule 1 is the graded one for a singular inner end.
    panels: Vec<(f64, f64, usize)>,
    /// Tail start and the exponent `q` of `y = R t^{-q}`.
    tail: Option<(f64, f64)>,
    rules: [GradedRule; 2],
    dirs: Option<SphereRule>,
}

impl ShellQuad {
    /// `t` is the order of the kernel, which decays like `|y|^{-N-2t}`; `inner_beta` the
    /// exponent of `(|y| - 1)^beta` at the inner end when that end is the sphere.
    fn new(
        psi: &ScalarField,
        r_in: f64,
        r_out: f64,
        t: f64,
        inner_beta: f64,
        opts: &SolverOptions,
    ) -> Result<ShellQuad> {
        let n = psi.dim();
        check_dim(n)?;
        let mut radii: Vec<f64> = psi
            .kinks()
            .iter()
            .map(|k| k.abs())
            .filter(|&k| k > r_in && k < r_out)
            .collect();
        let (end, tail) = match (r_out.is_finite(), psi.decay(), psi.support_radius()) {
            (true, _, _) => (r_out, None),
            (false, DecayClass::Compact, Some(rs)) => (rs.max(r_in), None),
            (false, decay, _) => {
                let far = radii.iter().copied().fold(2.0 * r_in, f64::max).max(4.0) * 1.5;
                let decay_exp = match decay {
                    DecayClass::Algebraic(p) => n as f64 + 2.0 * t + p - (n as f64 - 1.0),
                    _ => match psi.l1_threshold() {
                        Some(t0) => 1.0 + 2.0 * (t - t0),
                        None => {
                            return Err(Error::integrability(format!(
                                "exterior datum `{}` has no declared decay",
                                psi.label()
                            )))
                        }
                    },
                };
                if !(decay_exp > 1.0) {
                    return Err(Error::integrability(format!(
                        "exterior datum `{}` is not in L^1_{t}",
                        psi.label()
                    )));
                }
                (far, Some((far, 1.0 / (decay_exp - 1.0))))
            }
        };
        radii.retain(|&k| k < end);
        radii.push(r_in);
        radii.push(end);
        let radii = sorted_unique(radii);
        let panels = radii
            .windows(2)
            .enumerate()
            .map(|(i, w)| (w[0], w[1], usize::from(i == 0 && inner_beta < 0.0)))
            .collect();
        let k_inner = (4.0 / (1.0 + inner_beta)).max(opts.grade);
        Ok(ShellQuad {
            dim: n,
            panels,
            tail,
            rules: [
                GradedRule::new(opts.nodes, opts.grade),
                GradedRule::new(2 * opts.nodes, k_inner),
            ],
            dirs: if n == 1 { None } else { Some(opts.sphere(n)?) },
        })
    }

    /// `int kernel(|x - y|, |y|^2 - 1) psi(y) dy` over the shell.
    fn integrate(
        &self,
        x: &[f64],
        psi: &ScalarField,
        kernel: &dyn Fn(f64, f64) -> f64,
        want_err: bool,
    ) -> Estimate {
        let run = |g: &mut dyn FnMut(f64, f64, f64) -> f64, rule: &GradedRule, a: f64, b: f64| {
            if want_err {
                rule.estimate_offsets(g, a, b)
            } else {
                Estimate::exact(rule.apply_offsets(g, a, b))
            }
        };
        let mut total = Estimate::default();
        if self.dim == 1 {
            let x = x[0];
            for side in [1.0, -1.0] {
                // distance from x to the sphere point on this side
                let gap = 1.0 - side * x;
                for &(a, b, ri) in &self.panels {
                    let mut g = |rho: f64, da: f64, _db: f64| {
                        let m1 = (a - 1.0) + da;
                        kernel(m1 + gap, m1 * (rho + 1.0)) * psi.eval1(side * rho)
                    };
                    total += run(&mut g, &self.rules[ri], a, b);
                }
                if let Some((r0, q)) = self.tail {
                    let mut g = |t: f64, _da: f64, _db: f64| {
                        if t <= 0.0 {
                            return 0.0;
                        }
                        let rho = r0 * t.powf(-q);
                        let jac = r0 * q * t.powf(-q - 1.0);
                        let v =
                            kernel(rho - side * x, (rho - 1.0) * (rho + 1.0)) * psi.eval1(side * rho) * jac;
                        if v.is_finite() {
                            v
                        } else {
                            0.0
                        }
                    };
                    total += run(&mut g, &self.rules[0], 0.0, 1.0);
                }
            }
            return total;
        }
        let n = self.dim;
        let dirs = self.dirs.as_ref().expect("angular rule for N >= 2");
        let mut y = vec![0.0; n];
        for (theta, wt) in dirs.nodes.iter().zip(&dirs.weights) {
            let mut at = |rho: f64, m1: f64| {
                for i in 0..n {
                    y[i] = rho * theta[i];
                }
                let r = crate::field::dist(x, &y);
                kernel(r, m1 * (rho + 1.0)) * psi.eval(&y) * rho.powi(n as i32 - 1)
            };
            let mut part = Estimate::default();
            for &(a, b, ri) in &self.panels {
                let mut g = |rho: f64, da: f64, _db: f64| at(rho, (a - 1.0) + da);
                part += run(&mut g, &self.rules[ri], a, b);
            }
            if let Some((r0, q)) = self.tail {
                let mut g = |t: f64, _da: f64, _db: f64| {
                    if t <= 0.0 {
                        return 0.0;
                    }
                    let rho = r0 * t.powf(-q);
                    let v = at(rho, rho - 1.0) * r0 * q * t.powf(-q - 1.0);
                    if v.is_finite() {
                        v
                    } else {
                        0.0
                    }
                };
                part += run(&mut g, &self.rules[0], 0.0, 1.0);
            }
            total += part.scale(*wt);
        }
        total
    }
}

/// `x -> c delta(x)^t int kernel` for the nonlocal Poisson kernel of order `t`.
fn gamma_term(t_order: FracOrder, psi: &ScalarField, quad: ShellQuad, label: String) -> Result<Term> {
    let n = psi.dim();
    let t = t_order.s();
    let c = t_order.parity_sign() * constants(t_order, n)?.gamma_nsigma;
    let psi = psi.clone();
    Ok(Term::new(label, move |x: &[f64], want_err: bool| {
        let dx = 1.0 - norm(x).powi(2);
        if dx <= 0.0 {
            return Estimate::default();
        }
        let kernel = |r: f64, ey: f64| {
            if r <= 0.0 || ey <= 0.0 {
                0.0
            } else {
                ey.powf(-t) / r.powi(n as i32)
            }
        };
        quad.integrate(x, &psi, &kernel, want_err).scale(c * dx.powf(t))
    }))
}

/// The solution with zero data in the ball and exterior datum `psi`, which must vanish
/// on `B_r \ B` for the given `r > 1`.
pub fn extend_exterior(
    order: FracOrder,
    psi: &ScalarField,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<SolutionField> {
    extend_exterior_with(order, psi, r, &SolverOptions::default(), cfg)
}

pub fn extend_exterior_with(
    order: FracOrder,
    psi: &ScalarField,
    r: f64,
    opts: &SolverOptions,
    cfg: &QuadratureConfig,
) -> Result<SolutionField> {
    cfg.validate()?;
    if !(r > 1.0) {
        return Err(Error::domain(format!(
            "extend_exterior needs psi = 0 on B_r \\ B with r > 1 (got r = {r}); use extend_exterior_general"
        )));
    }
    psi.require_l1(order.s())?;
    let quad = ShellQuad::new(psi, r, f64::INFINITY, order.s(), 0.0, opts)?;
    let term = gamma_term(order, psi, quad, format!("Gamma_s * psi[{}]", psi.label()))?;
    Ok(SolutionField::empty(order, psi.dim())
        .with_term(term, order.s())
        .with_exterior(psi.clone(), r))
}

/// The boundary limit `psi(z^+)` taken from outside.
pub(crate) fn exterior_limit(psi: &ScalarField, z: &[f64]) -> f64 {
    let out: Vec<f64> = z.iter().map(|c| c * (1.0 + 1e-13)).collect();
    psi.eval(&out)
}

/// The density `phi(z) = gamma_{N,s-1} int (psi_1(y) - psi_1(z)) |z - y|^{-N} (|y|^2 - 1)^{1-s} dy`
/// of the boundary correction, with `psi_1 = psi` on `B_r \ B` and zero beyond.
pub fn correction_density(
    order: FracOrder,
    psi: &ScalarField,
    r: f64,
    z: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    if psi.dim() != 1 {
        return Err(Error::capability(
            "the boundary correction density is implemented for N = 1",
        ));
    }
    let sigma = order.s() - 1.0;
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::domain(format!(
            "the exterior correction needs s in (1, 2), got s = {}",
            order.s()
        )));
    }
    let g = constants(order.minus_one()?, 1)?.gamma_nsigma;
    let zs = z[0].signum();
    let l = exterior_limit(psi, z);
    let mut kinks: Vec<f64> = psi
        .kinks()
        .iter()
        .map(|k| k.abs())
        .filter(|&k| k > 1.0 && k < r)
        .collect();
    kinks.extend([1.0, r]);
    let kinks = sorted_unique(kinks);
    let grade = (2.0 / (1.0 - sigma)).clamp(2.0, 16.0);
    let mut total = Estimate::default();
    for side in [1.0, -1.0] {
        let near = side == zs;
        // |z - y| for y = side * rho
        let gap = |m1: f64| if near { m1 } else { m1 + 2.0 };
        for w in kinks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let e = integrate_panel_graded(
                |rho| {
                    let m1 = rho - 1.0;
                    if m1 <= 0.0 {
                        return 0.0;
                    }
                    (psi.eval1(side * rho) - l) / (gap(m1) * (m1 * (rho + 1.0)).powf(sigma))
                },
                a,
                b,
                grade,
                cfg,
            )?;
            total += e;
        }
        if l != 0.0 {
            let tail = integrate_tail(
                |rho| -l / (gap(rho - 1.0) * ((rho - 1.0) * (rho + 1.0)).powf(sigma)),
                r,
                1.0 + 2.0 * sigma,
                cfg,
            )?;
            total += tail;
        }
    }
    let out = total.scale(g);
    if !out.value.is_finite() {
        return Err(Error::AccuracyFailure {
            estimate: out.value,
            error_bound: f64::INFINITY,
            context: "correction density diverged".into(),
        });
    }
    Ok(out)
}

/// The solution with zero data in the ball and an exterior datum that may reach the
/// sphere, split at radius `r > 1` into the near part `psi_1` and the far part `psi_2`.
///
/// Requires the caller's assertion (in `data`) that the correction integrand depends
/// continuously on the boundary point. Implemented for `N = 1` and `s` in `(1, 2)`.
pub fn extend_exterior_general(
    order: FracOrder,
    data: &ExteriorData,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<SolutionField> {
    extend_exterior_general_with(order, data, r, &SolverOptions::default(), cfg)
}

pub fn extend_exterior_general_with(
    order: FracOrder,
    data: &ExteriorData,
    r: f64,
    opts: &SolverOptions,
    cfg: &QuadratureConfig,
) -> Result<SolutionField> {
    cfg.validate()?;
    if !data.hypothesis_asserted {
        return Err(Error::domain(
            "extend_exterior_general refused: the continuity hypothesis on the correction integrand was not asserted",
        ));
    }
    if !(r > 1.0) {
        return Err(Error::domain(format!("split radius must exceed 1, got {r}")));
    }
    let psi = &data.psi;
    psi.require_l1(order.s())?;
    let n = psi.dim();
    if n != 1 {
        return Err(Error::capability(
            "extend_exterior_general is implemented for N = 1",
        ));
    }
    let lower = order.minus_one()?;
    let sigma = lower.s();

    let far = ShellQuad::new(psi, r, f64::INFINITY, order.s(), 0.0, opts)?;
    let t_far = gamma_term(
        order,
        psi,
        far,
        format!("Gamma_s * psi_2[{}, |y| > {r}]", psi.label()),
    )?;
    let near = ShellQuad::new(psi, 1.0, r, sigma, -sigma, opts)?;
    let t_near = gamma_term(
        lower,
        psi,
        near,
        format!("Gamma_(s-1) * psi_1[{}, |y| < {r}]", psi.label()),
    )?;

    // frozen before any evaluation
    let mut density = Vec::new();
    for z in [[-1.0], [1.0]] {
        let phi = correction_density(order, psi, r, &z, cfg)?;
        density.push((z.to_vec(), phi));
    }
    let kernel = boundary_kernel(order, TraceKind::SMinus1, 1)?;
    let t_corr = Term::new(
        format!("-2 E_(s-1) * phi[{}]", psi.label()),
        move |x: &[f64], want_err: bool| {
            let mut e = Estimate::default();
            for (z, phi) in &density {
                let k = -2.0 * kernel(x, z);
                e += Estimate {
                    value: k * phi.value,
                    error: if want_err { (k * phi.error).abs() } else { 0.0 },
                    evaluations: 1,
                };
            }
            e
        },
    );
    Ok(SolutionField::empty(order, n)
        .with_term(t_far, order.s())
        .with_term(t_near, sigma)
        .with_term(t_corr, order.s())
        .with_exterior(psi.clone(), 1.0))
}

/// The solution of the full problem: Green potential, exterior extension and both
/// boundary terms, summed.
pub fn solve_full(order: FracOrder, data: &ProblemData, cfg: &QuadratureConfig) -> Result<SolutionField> {
    solve_full_with(order, data, &SolverOptions::default(), cfg)
}

pub fn solve_full_with(
    order: FracOrder,
    data: &ProblemData,
    opts: &SolverOptions,
    cfg: &QuadratureConfig,
) -> Result<SolutionField> {
    let n = data.dim;
    check_dim(n)?;
    let mut u = SolutionField::empty(order, n);
    if let Some(f) = &data.f {
        if f.dim() != n {
            return Err(Error::domain("right-hand side has the wrong dimension"));
        }
        u = u.plus(solve_green_with(order, f, opts, cfg)?)?;
    }
    if let Some(ext) = &data.psi {
        if ext.psi.dim() != n {
            return Err(Error::domain("exterior datum has the wrong dimension"));
        }
        let part = if ext.inner_radius > 1.0 {
            extend_exterior_with(order, &ext.psi, ext.inner_radius, opts, cfg)?
        } else {
            extend_exterior_general_with(order, ext, opts.split_radius, opts, cfg)?
        };
        u = u.plus(part)?;
    }
    if let Some(g) = &data.g0 {
        u = u.plus(harmonic_from_boundary_with(
            order,
            TraceKind::SMinus2,
            g,
            n,
            opts,
            cfg,
        )?)?;
    }
    if let Some(g) = &data.g1 {
        u = u.plus(harmonic_from_boundary_with(
            order,
            TraceKind::SMinus1,
            g,
            n,
            opts,
            cfg,
        )?)?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::delta;
    use crate::kernels::harmonic_sum_1d;
    use approx::assert_relative_eq;

    fn o(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn torsion_closed_form() {
        let u = solve_green(o(1.5), &ScalarField::constant(1, 1.0), &cfg()).unwrap();
        assert_relative_eq!(u.eval(&[0.0]), 1.0 / 6.0, max_relative = 1e-10);
        for x in [-0.97, -0.5, 0.2, 0.8, 0.95] {
            let want = delta(&[x]).powf(1.5) / 6.0;
            let e = u.eval_estimate(&[x]);
            assert_relative_eq!(e.value, want, max_relative = 1e-9);
            assert!(e.error < 1e-8 * want.max(1e-3));
        }
        assert_eq!(u.eval(&[1.2]), 0.0);
    }

    #[test]
    fn torsion_for_other_orders() {
        // (-Delta)^s delta^s = 4^s Gamma(1 + s) Gamma(1/2 + s) / Gamma(1/2) for N = 1
        for s in [1.2, 1.8] {
            let c = 4f64.powf(s)
                * crate::specialfn::gamma_fn(1.0 + s).unwrap()
                * crate::specialfn::gamma_fn(0.5 + s).unwrap()
                / std::f64::consts::PI.sqrt();
            let u = solve_green(o(s), &ScalarField::constant(1, 1.0), &cfg()).unwrap();
            for x in [0.0, 0.6] {
                assert_relative_eq!(u.eval(&[x]), delta(&[x]).powf(s) / c, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn zero_data_give_zero() {
        let u = solve_green(o(1.5), &ScalarField::zero(1), &cfg()).unwrap();
        assert_eq!(u.eval(&[0.3]), 0.0);
        let h = harmonic_from_boundary(
            o(1.5),
            TraceKind::SMinus2,
            &BoundaryData::constant(0.0),
            1,
            &cfg(),
        )
        .unwrap();
        assert_eq!(h.eval(&[0.3]), 0.0);
        let e = extend_exterior(o(1.5), &ScalarField::zero(1), 1.5, &cfg()).unwrap();
        assert_eq!(e.eval(&[0.3]), 0.0);
        let full = solve_full(o(1.5), &ProblemData::new(1), &cfg()).unwrap();
        assert_eq!(full.eval(&[0.3]), 0.0);
    }

    #[test]
    fn harmonic_power() {
        let h = harmonic_from_boundary(
            o(1.5),
            TraceKind::SMinus2,
            &BoundaryData::constant(1.0),
            1,
            &cfg(),
        )
        .unwrap();
        for x in [0.0, 0.5, 0.9] {
            assert_relative_eq!(h.eval(&[x]), (1.0 - x * x).powf(-0.5), max_relative = 1e-13);
            assert_relative_eq!(
                h.eval(&[x]),
                harmonic_sum_1d(o(1.5), x).unwrap(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn green_potential_in_two_and_three_dimensions() {
        // torsion: (-Delta)^s delta^s = 4^s Gamma(1 + s) Gamma(N/2 + s) / Gamma(N/2)
        use crate::specialfn::gamma_fn;
        let s = 1.5;
        for n in [2usize, 3] {
            let h = n as f64 / 2.0;
            let c =
                4f64.powf(s) * gamma_fn(1.0 + s).unwrap() * gamma_fn(h + s).unwrap() / gamma_fn(h).unwrap();
            let u = solve_green(o(s), &ScalarField::constant(n, 1.0), &cfg()).unwrap();
            let mut x = vec![0.0; n];
            x[0] = 0.3;
            x[1] = -0.2;
            assert_relative_eq!(u.eval(&x), delta(&x).powf(s) / c, max_relative = 1e-6);
        }
    }

    #[test]
    fn exterior_sign_pattern() {
        let psi = ScalarField::line(|y| if (2.0..3.0).contains(&y) { 1.0 } else { 0.0 })
            .compact(3.0)
            .with_kinks([2.0, 3.0]);
        let hi = extend_exterior(o(1.5), &psi, 2.0, &cfg()).unwrap();
        assert!(hi.eval(&[0.0]) < 0.0);
        assert_eq!(hi.eval(&[2.5]), 1.0);
        let lo = extend_exterior(o(0.5), &psi, 2.0, &cfg()).unwrap();
        assert!(lo.eval(&[0.0]) > 0.0);
        assert!(matches!(
            extend_exterior(o(1.5), &psi, 1.0, &cfg()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn classical_poisson_extension() {
        let psi = ScalarField::line(|y| if y.abs() > 2.0 { 1.0 } else { 0.0 })
            .algebraic(0.0)
            .with_kinks([-2.0, 2.0]);
        let u = extend_exterior(o(0.5), &psi, 2.0, &cfg()).unwrap();
        // against adaptive quadrature of the same kernel
        let g = constants(o(0.5), 1).unwrap().gamma_nsigma;
        let x: f64 = 0.4;
        let f = |y: f64| g * ((1.0 - x * x) / (y * y - 1.0)).sqrt() * (1.0 / (y - x) + 1.0 / (y + x));
        let want = crate::quadrature::integrate_panel(f, 2.0, 50.0, &cfg())
            .unwrap()
            .value
            + integrate_tail(f, 50.0, 2.0, &cfg()).unwrap().value;
        assert_relative_eq!(u.eval(&[x]), want, max_relative = 1e-9);
    }

    #[test]
    fn general_path_requires_hypothesis() {
        let psi = ScalarField::line(|y| if (1.0..2.0).contains(&y) { 1.0 } else { 0.0 }).compact(2.0);
        let data = ExteriorData {
            psi,
            inner_radius: 1.0,
            hypothesis_asserted: false,
        };
        assert!(matches!(
            extend_exterior_general(o(1.5), &data, 1.5, &cfg()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn general_path_matches_plain_extension_when_psi_vanishes_near_sphere() {
        let psi = ScalarField::line(|y| if (2.0..3.0).contains(&y) { 1.0 } else { 0.0 })
            .compact(3.0)
            .with_kinks([2.0, 3.0]);
        let plain = extend_exterior(o(1.5), &psi, 2.0, &cfg()).unwrap();
        let data = ExteriorData {
            psi,
            inner_radius: 1.0,
            hypothesis_asserted: true,
        };
        let general = extend_exterior_general(o(1.5), &data, 2.5, &cfg()).unwrap();
        for x in [-0.9, -0.3, 0.0, 0.5, 0.95] {
            let (a, b) = (plain.eval(&[x]), general.eval(&[x]));
            assert!((a - b).abs() < 1e-8, "x = {x}: {a} vs {b}");
        }
    }
}
