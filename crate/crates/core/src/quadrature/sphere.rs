use std::f64::consts::PI;

use super::GaussLegendre;
use crate::error::{Error, Result};

/// Quadrature on the unit sphere `S^{N-1}`; weights sum to its surface measure.
///
/// For `N = 1` the "sphere" is `{-1, +1}` with unit weights, so that boundary
/// integrals read `f(-1) + f(1)`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Highest polynomial degree integrated exactly.
    pub degree: usize,
}

impl SphereRule {
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Build a boundary rule for `N` in `{1, 2, 3}`.
///
/// `resolution` is the number of circle points for `N = 2` and the number of
/// Gauss–Legendre latitudes for `N = 3` (with twice as many longitudes).
pub fn sphere_rule(n: usize, resolution: usize) -> Result<SphereRule> {
    match n {
        1 => Ok(SphereRule {
            dim: 1,
            nodes: vec![vec![-1.0], vec![1.0]],
            weights: vec![1.0, 1.0],
            degree: usize::MAX,
        }),
        2 => {
            let m = resolution.max(4);
            let w = 2.0 * PI / m as f64;
            let nodes = (0..m)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / m as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect();
            Ok(SphereRule {
                dim: 2,
                nodes,
                weights: vec![w; m],
                degree: m - 1,
            })
        }
        3 => {
            let nlat = resolution.max(2);
            let nlon = 2 * nlat;
            let gl = GaussLegendre::new(nlat);
            let dphi = 2.0 * PI / nlon as f64;
            let mut nodes = Vec::with_capacity(nlat * nlon);
            let mut weights = Vec::with_capacity(nlat * nlon);
            for (ct, wt) in gl.nodes.iter().zip(&gl.weights) {
                let st = (1.0 - ct * ct).sqrt();
                for k in 0..nlon {
                    let phi = dphi * (k as f64 + 0.5);
                    nodes.push(vec![st * phi.cos(), st * phi.sin(), *ct]);
                    weights.push(wt * dphi);
                }
            }
            Ok(SphereRule {
                dim: 3,
                nodes,
                weights,
                degree: 2 * nlat - 1,
            })
        }
        _ => Err(Error::capability(format!(
            "boundary rules are implemented for N in {{1, 2, 3}}, got N = {n}"
        ))),
    }
}
