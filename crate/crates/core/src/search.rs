//! Derivative-free local search on the sphere.

use crate::geometry::{complement_basis, SpherePoint};

pub const INITIAL_STEP: f64 = 0.3;
pub const MIN_STEP: f64 = 1e-6;
pub const SHRINK: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub point: SpherePoint,
    pub value: f64,
    pub evals: usize,
}

/// Compass search: at each iteration try `normalize(v +- step * b_j)` for an
/// orthonormal basis `b_j` of the tangent space, move to the best candidate
/// if it strictly improves, otherwise halve the step. Stops when the step
/// falls below `min_step`, after `max_iters` iterations, or once the value
/// is at or below `stop_below`.
pub fn pattern_search<F>(
    mut objective: F,
    start: SpherePoint,
    initial_step: f64,
    min_step: f64,
    max_iters: usize,
    stop_below: f64,
) -> SearchOutcome
where
    F: FnMut(&SpherePoint) -> f64,
{
    let mut point = start;
    let mut value = objective(&point);
    let mut evals = 1;
    let mut step = initial_step;
    let mut iters = 0;
    while step >= min_step && iters < max_iters && value > stop_below {
        iters += 1;
        let mut best: Option<(f64, SpherePoint)> = None;
        for b in complement_basis(&point) {
            for sign in [1.0, -1.0] {
                let Ok(cand) = point.moved(&b, sign * step) else {
                    continue;
                };
                let val = objective(&cand);
                evals += 1;
                if best.as_ref().is_none_or(|(bv, _)| val < *bv) {
                    best = Some((val, cand));
                }
            }
        }
        match best {
            Some((val, cand)) if val < value => {
                value = val;
                point = cand;
            }
            _ => step *= SHRINK,
        }
    }
    SearchOutcome { point, value, evals }
}
