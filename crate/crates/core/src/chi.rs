//! The odd cut-off function built from distances to the sampled level set
//! `A = { v : |f_i(v)| <= |t_i| for all i }` split into its two halves.
//!
//! `chi(v) = (rho_-(v) - rho_+(v)) / (rho_-(v) + rho_+(v))` where `rho_+-`
//! are geodesic distances to the finite sets `a_plus` and
//! `a_minus = -a_plus`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fieldmap::OddMap;
use crate::geometry::{random_point, SpherePoint};
use crate::search::{pattern_search, INITIAL_STEP, MIN_STEP};
use crate::separation::{Labeler, OmegaLabel};

/// Additive slack on `|f_i| <= |t_i|` when sampling A.
pub const LEVEL_SET_TOL: f64 = 1e-3;

pub const DEFAULT_SAMPLE_PAIRS: usize = 5_000;

/// Closest misses that get pushed into A by local search.
const REFINE_CANDIDATES: usize = 8;
const REFINE_MAX_ITERS: usize = 400;

/// `rho_+ + rho_-` at or below this makes `chi` undefined.
pub const DEGENERATE_EPS: f64 = 1e-14;

fn chord_to_arc(squared_chord: f64) -> f64 {
    2.0 * (squared_chord.sqrt() / 2.0).min(1.0).asin()
}

#[derive(Debug, Clone)]
pub struct ChiFunction {
    a_plus: Vec<SpherePoint>,
    a_minus: Vec<SpherePoint>,
    targets: Vec<f64>,
}

/// `max_i (|f_i| - |t_i|)`; at most zero exactly on A.
pub fn level_set_excess(f: &[f64], t: &[f64]) -> f64 {
    f.iter()
        .zip(t)
        .map(|(fi, ti)| fi.abs() - ti.abs())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Samples A, labels it, and keeps the `+` half.
///
/// Draws `sample_pairs` antipodal pairs. When A is thin (some `t_i` near
/// zero) random draws rarely land in it, so the closest misses are also
/// pushed into A with a local search on the excess.
pub fn build_chi<M, L>(map: &M, labeler: &L, t: &[f64], sample_pairs: usize, seed: u64) -> Result<ChiFunction>
where
    M: OddMap + ?Sized,
    L: Labeler + ?Sized,
{
    let space = map.space();
    if t.len() != space.m() {
        return Err(Error::DimensionMismatch {
            expected: space.m(),
            got: t.len(),
        });
    }
    if let Some(bad) = t.iter().find(|ti| !(ti.abs() < 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "targets must satisfy |t_i| < 1, got {bad}"
        )));
    }
    if sample_pairs == 0 {
        return Err(Error::InvalidArgument("sample_pairs must be at least 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = Vec::new();
    let mut misses: Vec<(f64, SpherePoint)> = Vec::new();
    for _ in 0..sample_pairs {
        let v = random_point(&mut rng, space);
        // |f| is even, so v and -v share the excess.
        let e = level_set_excess(&map.eval(&v), t);
        if e <= LEVEL_SET_TOL {
            kept.push(v);
        } else {
            misses.push((e, v));
        }
    }
    misses.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, start) in misses.into_iter().take(REFINE_CANDIDATES) {
        let out = pattern_search(
            |v| level_set_excess(&map.eval(v), t),
            start,
            INITIAL_STEP,
            MIN_STEP,
            REFINE_MAX_ITERS,
            0.0,
        );
        if out.value <= LEVEL_SET_TOL {
            kept.push(out.point);
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyLevelSet(sample_pairs));
    }

    let mut a_plus = Vec::with_capacity(kept.len());
    for v in kept {
        let minus = v.antipode();
        match (labeler.label(&v)?, labeler.label(&minus)?) {
            (OmegaLabel::Plus, OmegaLabel::Minus) => a_plus.push(v),
            (OmegaLabel::Minus, OmegaLabel::Plus) => a_plus.push(minus),
            _ => {
                return Err(Error::InvalidArgument(
                    "labeler gave v and -v the same label".into(),
                ))
            }
        }
    }
    let a_minus = a_plus.iter().map(SpherePoint::antipode).collect();
    Ok(ChiFunction {
        a_plus,
        a_minus,
        targets: t.to_vec(),
    })
}

impl ChiFunction {
    pub fn a_plus(&self) -> &[SpherePoint] {
        &self.a_plus
    }

    pub fn a_minus(&self) -> &[SpherePoint] {
        &self.a_minus
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// A copy with `p` added to `a_plus` (and `-p` to `a_minus`).
    pub fn with_plus_point(&self, p: SpherePoint) -> ChiFunction {
        let mut out = self.clone();
        out.a_minus.push(p.antipode());
        out.a_plus.push(p);
        out
    }

    /// `(rho_+, rho_-)`, geodesic distances to `a_plus` and `a_minus`.
    pub fn distances(&self, v: &SpherePoint) -> (f64, f64) {
        // Chord lengths |v - p| and |v + p| give the geodesic distances to p
        // and -p without the cancellation of acos near 1, so members of
        // a_plus sit at distance exactly zero.
        let (mut near, mut far) = (f64::INFINITY, f64::INFINITY);
        for p in &self.a_plus {
            let (mut dm, mut dp) = (0.0, 0.0);
            for (a, b) in v.coords().iter().zip(p.coords()) {
                dm += (a - b) * (a - b);
                dp += (a + b) * (a + b);
            }
            near = near.min(dm);
            far = far.min(dp);
        }
        (chord_to_arc(near), chord_to_arc(far))
    }

    /// `chi(v)` and whether the denominator degenerated (then the value
    /// is 0).
    pub fn eval_checked(&self, v: &SpherePoint) -> (f64, bool) {
        let (plus, minus) = self.distances(v);
        let denom = plus + minus;
        if denom <= DEGENERATE_EPS {
            return (0.0, true);
        }
        (((minus - plus) / denom).clamp(-1.0, 1.0), false)
    }

    pub fn eval(&self, v: &SpherePoint) -> f64 {
        self.eval_checked(v).0
    }
}

pub fn eval_chi(chi: &ChiFunction, v: &SpherePoint) -> f64 {
    chi.eval(v)
}
