//! Antipodally paired equal-weight integration rules on S(V).
//!
//! Nodes are stored as pairs `(x, -x)` at positions `2k, 2k+1`. With equal
//! weights every odd integrand integrates to exactly zero.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{circle_half, gaussian_half, spiral_half, AmbientSpace, SpherePoint};

/// Default number of node pairs for S^2.
pub const DEFAULT_N_PAIRS: usize = 20_000;

/// Surface area of the unit sphere in R^dim.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        n => 2.0 * PI / (n - 2) as f64 * sphere_area(n - 2),
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    space: AmbientSpace,
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
    total_weight: f64,
}

impl QuadratureRule {
    pub fn space(&self) -> AmbientSpace {
        self.space
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Builds `2 * n_pairs` nodes: equispaced on the circle, a golden-angle
/// spiral on S^2, and seeded uniform draws in higher dimensions. Each node
/// is followed by its antipode and all weights are equal.
pub fn build_symmetric_rule(space: AmbientSpace, n_pairs: usize, seed: u64) -> Result<QuadratureRule> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("n_pairs must be at least 1".into()));
    }
    let half = match space.dim() {
        2 => circle_half(n_pairs),
        3 => spiral_half(n_pairs),
        d => gaussian_half(d, n_pairs, seed),
    };
    let total_weight = sphere_area(space.dim());
    let w = total_weight / (2 * n_pairs) as f64;
    let mut nodes = Vec::with_capacity(2 * n_pairs);
    for c in half {
        let x = SpherePoint::new(c)?;
        let minus = x.antipode();
        nodes.push(x);
        nodes.push(minus);
    }
    Ok(QuadratureRule {
        space,
        weights: vec![w; nodes.len()],
        nodes,
        total_weight,
    })
}

/// `sum_k w_k h(x_k)`, each antipodal pair summed first.
pub fn integrate<H>(rule: &QuadratureRule, h: H) -> Result<f64>
where
    H: Fn(&SpherePoint) -> f64,
{
    let mut total = 0.0;
    for (k, (pair, w)) in rule
        .nodes
        .chunks_exact(2)
        .zip(rule.weights.chunks_exact(2))
        .enumerate()
    {
        let a = h(&pair[0]);
        if !a.is_finite() {
            return Err(Error::NonFiniteIntegrand { node: 2 * k, value: a });
        }
        let b = h(&pair[1]);
        if !b.is_finite() {
            return Err(Error::NonFiniteIntegrand { node: 2 * k + 1, value: b });
        }
        total += w[0] * a + w[1] * b;
    }
    Ok(total)
}
