//! Data selectors: `const:c`, `bump:center,radius`, `chi:a,b`, `poly:c0,c1,...`,
//! `gauss:center`, `delta:beta`.
//!
//! On the line the selector is a function of `x`; for `N > 1` it is a function of `|x|`.

use std::fmt;
use std::str::FromStr;

use fraclap::field::{DeltaWeight, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    Const(f64),
    /// `15 / (16 r) (1 - ((x - c) / r)^2)^2` on `|x - c| < r`: unit mass.
    Bump {
        center: f64,
        radius: f64,
    },
    Chi {
        a: f64,
        b: f64,
    },
    /// Polynomial on the unit ball, zero outside.
    Poly(Vec<f64>),
    Gauss {
        center: f64,
    },
    Delta {
        beta: f64,
    },
}

fn numbers(body: &str, want: Option<usize>) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = body
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: '{t}'"))
        })
        .collect::<Result<_, _>>()?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err("selector parameters must be finite".into());
    }
    match want {
        Some(n) if v.len() != n => Err(format!("expected {n} parameter(s), got {}", v.len())),
        _ => Ok(v),
    }
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| format!("selector '{s}' must look like kind:params"))?;
        let sel = match kind {
            "const" => Selector::Const(numbers(body, Some(1))?[0]),
            "bump" => {
                let v = numbers(body, Some(2))?;
                if v[1] <= 0.0 {
                    return Err("bump radius must be positive".into());
                }
                Selector::Bump {
                    center: v[0],
                    radius: v[1],
                }
            }
            "chi" => {
                let v = numbers(body, Some(2))?;
                if v[0] >= v[1] {
                    return Err("chi:a,b needs a < b".into());
                }
                Selector::Chi { a: v[0], b: v[1] }
            }
            "poly" => Selector::Poly(numbers(body, None)?),
            "gauss" => Selector::Gauss {
                center: numbers(body, Some(1))?[0],
            },
            "delta" => Selector::Delta {
                beta: numbers(body, Some(1))?[0],
            },
            other => return Err(format!("unknown selector kind '{other}'")),
        };
        Ok(sel)
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::Const(c) => write!(f, "const:{c}"),
            Selector::Bump { center, radius } => write!(f, "bump:{center},{radius}"),
            Selector::Chi { a, b } => write!(f, "chi:{a},{b}"),
            Selector::Poly(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            Selector::Gauss { center } => write!(f, "gauss:{center}"),
            Selector::Delta { beta } => write!(f, "delta:{beta}"),
        }
    }
}

impl Selector {
    /// Interval `[lo, hi]` outside which the selector vanishes, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Selector::Bump { center, radius } => Some((center - radius, center + radius)),
            Selector::Chi { a, b } => Some((a, b)),
            Selector::Poly(_) | Selector::Delta { .. } => Some((-1.0, 1.0)),
            Selector::Const(0.0) => Some((0.0, 0.0)),
            Selector::Const(_) | Selector::Gauss { .. } => None,
        }
    }

    /// Radius `r >= 1` such that the selector vanishes on `B_r \ B`, used for exterior data.
    pub fn exterior_inner_radius(&self) -> Result<f64, String> {
        let (lo, hi) = self
            .support()
            .ok_or_else(|| format!("exterior datum {self} must have bounded support"))?;
        if lo > -1.0 && hi < 1.0 && lo < hi {
            return Err(format!("exterior datum {self} is supported inside the ball"));
        }
        let r = if lo >= 1.0 {
            lo
        } else if hi <= -1.0 {
            -hi
        } else {
            1.0
        };
        Ok(r)
    }

    pub fn field(&self, dim: usize) -> ScalarField {
        let sel = self.clone();
        let label = self.to_string();
        if let Selector::Delta { beta } = *self {
            return DeltaWeight::new(beta).field(dim).labeled(label);
        }
        let scalar = move |t: f64| -> f64 {
            match &sel {
                Selector::Const(c) => *c,
                Selector::Bump { center, radius } => {
                    let z = (t - center) / radius;
                    if z.abs() < 1.0 {
                        15.0 / (16.0 * radius) * (1.0 - z * z).powi(2)
                    } else {
                        0.0
                    }
                }
                Selector::Chi { a, b } => {
                    if t > *a && t < *b {
                        1.0
                    } else {
                        0.0
                    }
                }
                Selector::Poly(c) => {
                    if t.abs() < 1.0 {
                        c.iter().rev().fold(0.0, |acc, &k| acc * t + k)
                    } else {
                        0.0
                    }
                }
                Selector::Gauss { center } => (-0.5 * (t - center) * (t - center)).exp(),
                Selector::Delta { .. } => unreachable!(),
            }
        };
        let field = if dim == 1 {
            ScalarField::line(scalar)
        } else {
            ScalarField::new(dim, move |x: &[f64]| scalar(fraclap::field::norm(x)))
        };
        let field = match *self {
            Selector::Const(_) => field,
            Selector::Gauss { .. } => field.algebraic(40.0),
            Selector::Bump { center, radius } => field
                .compact(center.abs() + radius)
                .with_kinks([center - radius, center + radius]),
            Selector::Chi { a, b } => field
                .compact(a.abs().max(b.abs()))
                .with_kinks([a, b])
                .with_kink_exponent(0.0),
            Selector::Poly(_) => field.compact(1.0).with_kinks([-1.0, 1.0]).with_kink_exponent(0.0),
            Selector::Delta { .. } => unreachable!(),
        };
        field.labeled(label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        for s in [
            "const:1",
            "bump:3,0.5",
            "chi:2,3",
            "poly:1,0,-1",
            "gauss:0",
            "delta:0.5",
        ] {
            let sel: Selector = s.parse().unwrap();
            assert_eq!(sel.to_string(), s);
        }
    }

    #[test]
    fn rejects_malformed() {
        for s in [
            "const",
            "const:x",
            "bump:1",
            "bump:0,-1",
            "chi:3,2",
            "foo:1",
            "const:inf",
        ] {
            assert!(s.parse::<Selector>().is_err(), "{s}");
        }
    }

    #[test]
    fn values() {
        let bump: Selector = "bump:3,0.5".parse().unwrap();
        let f = bump.field(1);
        assert!((f.eval1(3.0) - 15.0 / 8.0).abs() < 1e-15);
        assert_eq!(f.eval1(2.4), 0.0);
        let p: Selector = "poly:1,2,3".parse().unwrap();
        assert_eq!(p.field(1).eval1(0.5), 1.0 + 1.0 + 0.75);
        assert_eq!(p.field(1).eval1(1.5), 0.0);
        let c: Selector = "chi:-0.5,0.5".parse().unwrap();
        assert_eq!(c.field(2).eval(&[0.3, 0.3]), 1.0);
    }

    #[test]
    fn exterior_radius() {
        let c: Selector = "chi:2,3".parse().unwrap();
        assert_eq!(c.exterior_inner_radius().unwrap(), 2.0);
        let c: Selector = "chi:-3,-1.5".parse().unwrap();
        assert_eq!(c.exterior_inner_radius().unwrap(), 1.5);
        let c: Selector = "chi:1,2".parse().unwrap();
        assert_eq!(c.exterior_inner_radius().unwrap(), 1.0);
        assert!("const:1"
            .parse::<Selector>()
            .unwrap()
            .exterior_inner_radius()
            .is_err());
    }
}
