//! Gamma function, the ball normalization constants and Boggio's radial integral.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};

/// A fractional exponent `s = m + sigma` with `s` in `(0, 2]`.
///
/// Integer exponents (`s = 1`, `s = 2`) are accepted and flagged as local;
/// for them `sigma = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    s: f64,
    m: u32,
    sigma: f64,
}

impl FracOrder {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || s <= 0.0 || s > 2.0 {
            return Err(Error::domain(format!(
                "fractional order s = {s} must lie in (0, 2]"
            )));
        }
        let m = s.floor();
        Ok(FracOrder {
            s,
            m: m as u32,
            sigma: s - m,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Integer part `m`.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Fractional part `sigma = s - m`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// True for `s = 1` and `s = 2`, where the operator is a local differential operator.
    pub fn is_local(&self) -> bool {
        self.sigma == 0.0
    }

    /// True when `s` lies in the higher-order range `(1, 2)`.
    pub fn is_higher_order(&self) -> bool {
        self.m == 1 && self.sigma > 0.0
    }

    /// The order `s - 1`, defined when `s > 1`.
    pub fn minus_one(&self) -> Result<FracOrder> {
        FracOrder::new(self.s - 1.0)
    }

    /// `(-1)^m`.
    pub fn parity_sign(&self) -> f64 {
        if self.m.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

impl std::fmt::Display for FracOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "s={}", self.s)
    }
}

/// Normalization constants attached to a pair `(N, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationSet {
    /// Surface measure of the unit sphere in `R^N`.
    pub omega_n: f64,
    /// Prefactor of Boggio's Green function.
    pub k_ns: f64,
    /// Prefactor of the nonlocal Poisson kernel, taken at the fractional part `sigma`.
    pub gamma_nsigma: f64,
    /// Constant of the fourth-difference hypersingular integral.
    pub c_ns: f64,
    /// Constant of the second-difference hypersingular integral for `(-Delta)^(s-1)`.
    pub e_ns: f64,
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `sin(pi x)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

fn lanczos(x: f64) -> f64 {
    // valid for x >= 0.5
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// The Gamma function on the real line.
///
/// Lanczos approximation for `x >= 0.5`, reflection formula below.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("Gamma of non-finite argument {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::GammaPole(x));
    }
    if x < 0.5 {
        Ok(PI / (sin_pi(x) * lanczos(1.0 - x)))
    } else {
        Ok(lanczos(x))
    }
}

/// `1 / Gamma(x)`, which is entire: zero at the non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x < 0.5 {
        sin_pi(x) * lanczos(1.0 - x) / PI
    } else {
        1.0 / lanczos(x)
    }
}

fn gamma_unchecked(x: f64) -> f64 {
    gamma_fn(x).unwrap_or(f64::NAN)
}

/// Surface measure `|S^{N-1}| = 2 pi^{N/2} / Gamma(N/2)`.
pub fn omega(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma_unchecked(h)
}

/// `gamma_{N,sigma} = 2 / (Gamma(sigma) Gamma(1 - sigma) omega_N)`; zero when `sigma` is an integer.
pub fn gamma_n_sigma(n: usize, sigma: f64) -> f64 {
    // Gamma(sigma) Gamma(1 - sigma) = pi / sin(pi sigma)
    2.0 * sin_pi(sigma) / (PI * omega(n))
}

/// `k_{N,s} = 2^{1-2s} / (omega_N Gamma(s)^2)`.
pub fn k_ns(n: usize, s: f64) -> f64 {
    let g = gamma_unchecked(s);
    2f64.powf(1.0 - 2.0 * s) / (omega(n) * g * g)
}

/// `e_{N,s} = -4^{s-1} Gamma(N/2 + s - 1) / (pi^{N/2} Gamma(1 - s))`.
pub fn e_ns(n: usize, s: f64) -> f64 {
    let h = n as f64 / 2.0;
    -4f64.powf(s - 1.0) * gamma_unchecked(h + s - 1.0) * rgamma(1.0 - s) / PI.powf(h)
}

/// `c_{N,s} = Gamma(N/2 + s) / (pi^{N/2} Gamma(-s) (1 - 4^{1-s}))`, continuous through `s = 1`.
pub fn c_ns(n: usize, s: f64) -> f64 {
    let h = n as f64 / 2.0;
    if (s - 1.0).abs() < 1e-12 {
        // Gamma(-s) (1 - 4^{1-s}) -> ln 4 as s -> 1
        return gamma_unchecked(h + 1.0) / (PI.powf(h) * 4f64.ln());
    }
    gamma_unchecked(h + s) * rgamma(-s) / (PI.powf(h) * (1.0 - 4f64.powf(1.0 - s)))
}

fn cache() -> &'static RwLock<HashMap<(usize, u64), NormalizationSet>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, u64), NormalizationSet>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// All normalization constants for `(N, s)`; memoized per pair.
pub fn constants(order: FracOrder, n: usize) -> Result<NormalizationSet> {
    if n == 0 {
        return Err(Error::domain("dimension N must be at least 1"));
    }
    let key = (n, order.s().to_bits());
    if let Some(set) = cache().read().ok().and_then(|c| c.get(&key).copied()) {
        return Ok(set);
    }
    let s = order.s();
    let set = NormalizationSet {
        omega_n: omega(n),
        k_ns: k_ns(n, s),
        gamma_nsigma: gamma_n_sigma(n, order.sigma()),
        c_ns: c_ns(n, s),
        e_ns: e_ns(n, s),
    };
    if let Ok(mut c) = cache().write() {
        c.insert(key, set);
    }
    Ok(set)
}

/// Boggio's radial integral `int_0^rho t^{s-1} (1 + t)^{-N/2} dt`.
///
/// Reduced to an incomplete beta integral `B_x(s, N/2 - s)` with `x = rho / (1 + rho)`,
/// expanded around `x = 0` for `x <= 1/2` and around `x = 1` otherwise. The second
/// parameter may be non-positive; the expansion around 1 handles it term by term.
pub fn boggio_integral(rho: f64, order: FracOrder, n: usize) -> Result<f64> {
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::domain(format!(
            "Boggio integral needs rho >= 0, got {rho}"
        )));
    }
    Ok(boggio_raw(rho, order.s(), n as f64 / 2.0))
}

pub(crate) fn boggio_raw(rho: f64, s: f64, half_n: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    if rho == f64::INFINITY {
        return f64::INFINITY;
    }
    let p = s;
    let q = half_n - s;
    let x = rho / (1.0 + rho);
    if x <= 0.5 {
        return beta_head(x, p, q);
    }
    let w0 = 1.0 / (1.0 + rho);
    let log_ratio = (0.5 / w0).ln();
    let mut sum = 0.0;
    let mut coef = 1.0; // (1-p)_k / k!
    for k in 0..400 {
        let e = q + k as f64;
        let term = if e == 0.0 {
            log_ratio
        } else if e.abs() < 0.5 {
            w0.powf(e) * (e * log_ratio).exp_m1() / e
        } else {
            (0.5f64.powf(e) - w0.powf(e)) / e
        };
        let t = coef * term;
        sum += t;
        if k > 2 && t.abs() <= 1e-17 * sum.abs() {
            break;
        }
        coef *= (k as f64 + 1.0 - p) / (k as f64 + 1.0);
        if coef == 0.0 {
            break;
        }
    }
    beta_head(0.5, p, q) + sum
}

/// `int_0^x v^{p-1} (1 - v)^{q-1} dv` for `x <= 1/2` by the binomial series.
fn beta_head(x: f64, p: f64, q: f64) -> f64 {
    let mut sum = 0.0;
    let mut coef = 1.0; // (1-q)_k / k!
    let mut xk = 1.0;
    for k in 0..400 {
        let t = coef * xk / (p + k as f64);
        sum += t;
        if k > 2 && t.abs() <= 1e-17 * sum.abs() {
            break;
        }
        coef *= (k as f64 + 1.0 - q) / (k as f64 + 1.0);
        xk *= x;
        if coef == 0.0 {
            break;
        }
    }
    x.powf(p) * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_classical_values() {
        assert_relative_eq!(gamma_fn(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(5.0).unwrap(), 24.0, max_relative = 1e-14);
        // Gamma(-1.5) = Gamma(0.5) / ((-1.5)(-0.5))
        let oracle = gamma_fn(0.5).unwrap() / (-1.5 * -0.5);
        assert_relative_eq!(gamma_fn(-1.5).unwrap(), oracle, max_relative = 1e-13);
        assert_relative_eq!(oracle, 4.0 * PI.sqrt() / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn gamma_poles_are_reported() {
        assert_eq!(gamma_fn(0.0), Err(Error::GammaPole(0.0)));
        assert_eq!(gamma_fn(-3.0), Err(Error::GammaPole(-3.0)));
        assert_eq!(rgamma(-2.0), 0.0);
    }

    #[test]
    fn gamma_recurrence_on_grid() {
        for i in 0..100 {
            let x = 0.5 + 19.5 * (i as f64 + 0.5) / 100.0;
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs(), "x = {x}");
        }
    }

    #[test]
    fn gamma_negative_range_matches_recurrence() {
        for i in 0..40 {
            let x = -4.95 + 0.25 * i as f64;
            if x.fract() == 0.0 {
                continue;
            }
            let direct = gamma_fn(x).unwrap();
            let shifted = gamma_fn(x + 6.0).unwrap() / (0..6).map(|k| x + k as f64).product::<f64>();
            assert!((direct - shifted).abs() <= 1e-12 * shifted.abs(), "x = {x}");
        }
    }

    #[test]
    fn constants_examples() {
        let one = FracOrder::new(1.0).unwrap();
        let c = constants(one, 1).unwrap();
        assert_relative_eq!(c.omega_n, 2.0, max_relative = 1e-14);
        assert_relative_eq!(c.k_ns, 0.25, max_relative = 1e-14);
        let c15 = constants(FracOrder::new(1.5).unwrap(), 1).unwrap();
        assert!(c15.c_ns > 0.0 && c15.e_ns > 0.0 && c15.gamma_nsigma > 0.0);
        assert_relative_eq!(omega(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(omega(3), 4.0 * PI, max_relative = 1e-14);
    }

    #[test]
    fn constants_finite_across_higher_range() {
        for n in 1..=3 {
            for i in 0..=98 {
                let s = 1.01 + 0.01 * i as f64;
                let c = constants(FracOrder::new(s).unwrap(), n).unwrap();
                for v in [c.omega_n, c.k_ns, c.gamma_nsigma, c.c_ns, c.e_ns] {
                    assert!(v.is_finite() && v > 0.0, "N={n} s={s} {c:?}");
                }
            }
        }
    }

    #[test]
    fn c_ns_continuous_through_one() {
        let at = c_ns(1, 1.0);
        assert_relative_eq!(c_ns(1, 1.0 + 1e-7), at, max_relative = 1e-6);
        assert_relative_eq!(c_ns(1, 1.0 - 1e-7), at, max_relative = 1e-6);
    }

    #[test]
    fn order_validation() {
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(2.5).is_err());
        assert!(FracOrder::new(f64::NAN).is_err());
        let o = FracOrder::new(1.25).unwrap();
        assert_eq!(o.m(), 1);
        assert_relative_eq!(o.sigma(), 0.25);
        assert!(FracOrder::new(1.0).unwrap().is_local());
        assert!(FracOrder::new(2.0).unwrap().is_local());
    }

    #[test]
    fn boggio_closed_forms() {
        let one = FracOrder::new(1.0).unwrap();
        assert_eq!(boggio_integral(0.0, one, 1).unwrap(), 0.0);
        // 2 (sqrt(1 + rho) - 1)
        assert_relative_eq!(boggio_integral(3.0, one, 1).unwrap(), 2.0, max_relative = 1e-13);
        for rho in [0.01f64, 0.3, 1.0, 7.0, 1e3, 1e8] {
            let exact = 2.0 * ((1.0 + rho).sqrt() - 1.0);
            assert_relative_eq!(boggio_integral(rho, one, 1).unwrap(), exact, max_relative = 1e-12);
        }
        // N = 2, s = 1: ln(1 + rho)
        for rho in [0.2, 1.0, 50.0] {
            let exact = (1.0f64 + rho).ln();
            assert_relative_eq!(boggio_integral(rho, one, 2).unwrap(), exact, max_relative = 1e-12);
        }
        // N = 2, s = 1.5, rho = 1: 2 - pi/2 from the antiderivative 2 sqrt(t) - 2 atan(sqrt(t))
        let s15 = FracOrder::new(1.5).unwrap();
        assert_relative_eq!(
            boggio_integral(1.0, s15, 2).unwrap(),
            2.0 - PI / 2.0,
            max_relative = 1e-12
        );
        // N = 1, s = 2: int t (1+t)^{-1/2} = 2/3 (1+t)^{3/2} - 2 (1+t)^{1/2} + 4/3
        let two = FracOrder::new(2.0).unwrap();
        for rho in [0.5, 3.0, 99.0] {
            let r: f64 = 1.0 + rho;
            let exact = 2.0 / 3.0 * r.powf(1.5) - 2.0 * r.sqrt() + 4.0 / 3.0;
            assert_relative_eq!(boggio_integral(rho, two, 1).unwrap(), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn boggio_rejects_negative() {
        assert!(boggio_integral(-1.0, FracOrder::new(1.5).unwrap(), 1).is_err());
    }
}
