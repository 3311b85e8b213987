//! Finding `v` with `f(v) = t` for targets `t` in the cube, exhaustive
//! oracles for `m <= 2`, and cube-coverage sweeps.
//!
//! The existence argument is nonconstructive, so the solvers are local
//! searches from antipodally paired starts. Results report their residual
//! honestly; nothing here certifies a zero.

use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chi::{build_chi, level_set_excess, ChiFunction, DEFAULT_SAMPLE_PAIRS, LEVEL_SET_TOL};
use crate::error::{Error, Result};
use crate::fieldmap::OddMap;
use crate::geometry::{random_point, SpherePoint};
use crate::search::{pattern_search, INITIAL_STEP, MIN_STEP};
use crate::separation::{Labeler, OmegaLabel};

pub const DEFAULT_TOL: f64 = 0.02;
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Slack on the cube bound so that grid targets like `-1 + margin` pass.
const TARGET_SLACK: f64 = 1e-12;

/// Refinement rounds of the chi endgame and their initial step (radians).
const ENDGAME_ROUNDS: usize = 8;
const ENDGAME_STEP: f64 = 0.05;

/// Bisection stops once the bracket is this narrow (radians).
const BISECTION_WIDTH: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    ChiHomotopy,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::ChiHomotopy => "chi_homotopy",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "chi_homotopy" | "chi-homotopy" => Ok(Method::ChiHomotopy),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    pub n_starts: usize,
    /// Iteration cap of each local search.
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Targets must satisfy `|t_i| <= 1 - margin`.
    pub margin: f64,
    /// Antipodal sample pairs used to discretize the level set for chi.
    pub chi_sample_pairs: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Direct,
            n_starts: 16,
            max_iters: 2_000,
            tol: DEFAULT_TOL,
            seed: 0,
            margin: DEFAULT_MARGIN,
            chi_sample_pairs: DEFAULT_SAMPLE_PAIRS,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.margin) {
            return Err(Error::InvalidArgument("margin must lie in [0, 1)".into()));
        }
        if self.n_starts == 0 {
            return Err(Error::InvalidArgument("n_starts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub v_star: SpherePoint,
    pub f_at_v: Vec<f64>,
    pub target: Vec<f64>,
    /// `max_i |f_i(v_star) - t_i|`.
    pub residual: f64,
    pub method: String,
    pub n_evals: usize,
    pub converged: bool,
    /// `chi(v_star)` for chi-homotopy runs.
    pub chi_value: Option<f64>,
    pub warnings: Vec<String>,
}

impl SolveResult {
    fn at<M: OddMap + ?Sized>(map: &M, v: SpherePoint, target: &[f64], tol: f64, method: &str, n_evals: usize) -> Self {
        let f_at_v = map.eval(&v);
        let residual = residual(&f_at_v, target);
        Self {
            v_star: v,
            f_at_v,
            target: target.to_vec(),
            residual,
            method: method.to_string(),
            n_evals: n_evals + 1,
            converged: residual <= tol,
            chi_value: None,
            warnings: Vec::new(),
        }
    }
}

/// Sup-norm distance between `f` and `t`.
pub fn residual(f: &[f64], t: &[f64]) -> f64 {
    f.iter()
        .zip(t)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn check_targets(m: usize, t: &[f64], margin: f64) -> Result<()> {
    if t.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: t.len(),
        });
    }
    let bound = 1.0 - margin + TARGET_SLACK;
    if let Some(bad) = t.iter().find(|ti| !(ti.abs() <= bound)) {
        return Err(Error::InvalidArgument(format!(
            "target component {bad} outside [-{0}, {0}]",
            1.0 - margin
        )));
    }
    Ok(())
}

/// Starts `p_0, -p_0, p_1, -p_1, ..` from a seeded generator.
fn paired_starts<M: OddMap + ?Sized>(map: &M, n: usize, seed: u64) -> Vec<SpherePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = random_point(&mut rng, map.space());
        let q = p.antipode();
        out.push(p);
        if out.len() < n {
            out.push(q);
        }
    }
    out
}

/// Solve `f(v) = t`. `labeler` is needed only by the chi homotopy; without
/// one (or when the level set cannot be built) the direct method runs and
/// the result carries a warning.
pub fn solve_targets<M: OddMap + ?Sized>(
    map: &M,
    labeler: Option<&dyn Labeler>,
    t: &[f64],
    opts: &SolveOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    check_targets(map.space().m(), t, opts.margin)?;
    match opts.method {
        Method::Direct => Ok(solve_direct(map, t, opts)),
        Method::ChiHomotopy => {
            let Some(labeler) = labeler else {
                let mut r = solve_direct(map, t, opts);
                r.warnings
                    .push("chi homotopy needs a separation witness; fell back to direct".into());
                return Ok(r);
            };
            match build_chi(map, labeler, t, opts.chi_sample_pairs, opts.seed) {
                Ok(chi) => Ok(solve_with_chi(map, labeler, chi, t, opts)),
                Err(e) => {
                    let mut r = solve_direct(map, t, opts);
                    r.warnings
                        .push(format!("chi build failed ({e}); fell back to direct"));
                    Ok(r)
                }
            }
        }
    }
}

fn solve_direct<M: OddMap + ?Sized>(map: &M, t: &[f64], opts: &SolveOptions) -> SolveResult {
    let mut evals = 0;
    let mut best: Option<(f64, SpherePoint)> = None;
    for start in paired_starts(map, opts.n_starts, opts.seed) {
        let out = pattern_search(
            |v| residual(&map.eval(v), t),
            start,
            INITIAL_STEP,
            MIN_STEP,
            opts.max_iters,
            0.0,
        );
        evals += out.evals;
        if best.as_ref().is_none_or(|(b, _)| out.value < *b) {
            best = Some((out.value, out.point));
        }
        if best.as_ref().is_some_and(|(b, _)| *b <= opts.tol) {
            break;
        }
    }
    let (_, v) = best.expect("n_starts >= 1");
    SolveResult::at(map, v, t, opts.tol, Method::Direct.as_str(), evals)
}

fn homotopy_gap<M: OddMap + ?Sized>(map: &M, chi: &ChiFunction, t: &[f64], v: &SpherePoint) -> f64 {
    let c = chi.eval(v);
    map.eval(v)
        .iter()
        .zip(t)
        .map(|(fi, ti)| (fi - ti * c).powi(2))
        .sum()
}

/// Minimizes `g(v) = sum_i (f_i(v) - t_i chi(v))^2`.
///
/// Starts are the members of `a_plus` closest to the target (where
/// `chi = 1`) followed by paired random points. A zero with `chi < 0` is
/// replaced by its antipode, which is a zero with `chi > 0`.
///
/// Endgame: a zero of `g` with `|f_i| <= |t_i|` lies in A, where `chi`
/// should be 1. Such a point labeled `+` is added to the sample of A and
/// the search resumes from it, until it no longer moves. If the result
/// still misses the tolerance it is polished by the direct search.
fn solve_with_chi<M: OddMap + ?Sized>(
    map: &M,
    labeler: &dyn Labeler,
    chi: ChiFunction,
    t: &[f64],
    opts: &SolveOptions,
) -> SolveResult {
    let mut chi = chi;
    let mut evals = 0;
    let mut ranked: Vec<(f64, &SpherePoint)> = chi
        .a_plus()
        .iter()
        .map(|p| (residual(&map.eval(p), t), p))
        .collect();
    evals += ranked.len();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let from_a = (opts.n_starts / 2).max(1).min(ranked.len());
    let mut starts: Vec<SpherePoint> = ranked[..from_a].iter().map(|(_, p)| (*p).clone()).collect();
    starts.extend(paired_starts(map, opts.n_starts.saturating_sub(from_a), opts.seed));

    let near_zero = opts.tol * opts.tol;
    // (residual, point) of the best near-zero so far, and of any point.
    let mut best: Option<(f64, SpherePoint)> = None;
    let mut fallback: Option<(f64, SpherePoint)> = None;
    for start in starts {
        let out = pattern_search(
            |v| homotopy_gap(map, &chi, t, v),
            start,
            INITIAL_STEP,
            MIN_STEP,
            opts.max_iters,
            0.0,
        );
        evals += out.evals;
        let mut v = out.point;
        if chi.eval(&v) < 0.0 {
            v = v.antipode();
        }
        let r = residual(&map.eval(&v), t);
        evals += 2;
        if out.value <= near_zero && best.as_ref().is_none_or(|b| r < b.0) {
            best = Some((r, v.clone()));
        }
        if fallback.as_ref().is_none_or(|(fr, _)| r < *fr) {
            fallback = Some((r, v));
        }
        if best.as_ref().is_some_and(|b| b.0 <= opts.tol) {
            break;
        }
    }
    let mut warnings = Vec::new();
    let mut v = match best {
        Some((_, v)) => v,
        None => {
            warnings.push("no near-zero of the homotopy; kept the lowest residual".to_string());
            fallback.expect("at least one start").1
        }
    };

    for _ in 0..ENDGAME_ROUNDS {
        let f = map.eval(&v);
        evals += 1;
        if level_set_excess(&f, t) > LEVEL_SET_TOL || !matches!(labeler.label(&v), Ok(OmegaLabel::Plus)) {
            break;
        }
        chi = chi.with_plus_point(v.clone());
        let here = homotopy_gap(map, &chi, t, &v);
        let out = pattern_search(
            |p| homotopy_gap(map, &chi, t, p),
            v.clone(),
            ENDGAME_STEP,
            MIN_STEP,
            opts.max_iters,
            0.0,
        );
        evals += out.evals;
        if !(out.value < here) {
            break;
        }
        v = out.point;
        if chi.eval(&v) < 0.0 {
            v = v.antipode();
        }
    }

    let mut result = SolveResult::at(map, v, t, opts.tol, Method::ChiHomotopy.as_str(), evals);
    if !result.converged {
        let out = pattern_search(
            |v| residual(&map.eval(v), t),
            result.v_star.clone(),
            INITIAL_STEP,
            MIN_STEP,
            opts.max_iters,
            0.0,
        );
        if out.value < result.residual {
            result = SolveResult::at(map, out.point, t, opts.tol, "chi_homotopy+polish", result.n_evals + out.evals);
        } else {
            result.n_evals += out.evals;
        }
    }
    result.chi_value = Some(chi.eval(&result.v_star));
    result.warnings = warnings;
    result
}

/// Precomputed values of `f` on the exhaustive oracle grid.
///
/// `m = 1`: `resolution` equispaced angles `v = (cos a, sin a)`.
/// `m = 2`: a `resolution x 2 resolution` latitude-longitude grid of cell
/// centres with `e_0` as the polar axis.
#[derive(Debug, Clone)]
pub struct OracleGrid {
    m: usize,
    resolution: usize,
    points: Vec<SpherePoint>,
    values: Vec<Vec<f64>>,
}

impl OracleGrid {
    pub fn new<M: OddMap + ?Sized>(map: &M, resolution: usize) -> Result<Self> {
        let m = map.space().m();
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be at least 1".into()));
        }
        let points: Vec<SpherePoint> = match m {
            1 => (0..resolution)
                .map(|k| circle_point(2.0 * PI * k as f64 / resolution as f64))
                .collect(),
            2 => {
                let r = resolution as f64;
                (0..resolution)
                    .flat_map(|a| {
                        let theta = PI * (a as f64 + 0.5) / r;
                        (0..2 * resolution).map(move |b| {
                            let phi = PI * (b as f64 + 0.5) / r;
                            SpherePoint::new(vec![
                                theta.cos(),
                                theta.sin() * phi.cos(),
                                theta.sin() * phi.sin(),
                            ])
                            .expect("unit vector")
                        })
                    })
                    .collect()
            }
            _ => {
                return Err(Error::UnsupportedDimension(
                    "oracle supports m <= 2".into(),
                ))
            }
        };
        let values = points.par_iter().map(|v| map.eval(v)).collect();
        Ok(Self {
            m,
            resolution,
            points,
            values,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Grid minimizer of the residual, refined: bisection on sign changes
    /// for `m = 1`, one compass-search pass for `m = 2`.
    pub fn scan<M: OddMap + ?Sized>(&self, map: &M, t: &[f64]) -> Result<SolveResult> {
        if map.space().m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: map.space().m(),
            });
        }
        check_targets(self.m, t, 0.0).or_else(|e| match e {
            Error::DimensionMismatch { .. } => Err(e),
            // Targets outside the cube are legal probes for the oracle.
            _ => Ok(()),
        })?;
        let mut evals = self.points.len();
        let (best_idx, best_r) = self
            .values
            .iter()
            .enumerate()
            .map(|(k, f)| (k, residual(f, t)))
            .fold((0, f64::INFINITY), |acc, (k, r)| if r < acc.1 { (k, r) } else { acc });
        let (v, _) = if self.m == 1 {
            let (v, r, e) = self.bisect(map, t[0], best_idx, best_r);
            evals += e;
            (v, r)
        } else {
            let out = pattern_search(
                |v| residual(&map.eval(v), t),
                self.points[best_idx].clone(),
                PI / self.resolution as f64,
                MIN_STEP,
                SolveOptions::default().max_iters,
                0.0,
            );
            evals += out.evals;
            (out.point, out.value)
        };
        Ok(SolveResult::at(map, v, t, DEFAULT_TOL, "oracle", evals))
    }

    fn bisect<M: OddMap + ?Sized>(&self, map: &M, t: f64, best_idx: usize, best_r: f64) -> (SpherePoint, f64, usize) {
        let n = self.resolution;
        let step = 2.0 * PI / n as f64;
        let g = |a: f64| map.eval(&circle_point(a))[0] - t;
        let mut best = (self.points[best_idx].clone(), best_r);
        let mut evals = 0;
        for k in 0..n {
            let (gl, gr) = (self.values[k][0] - t, self.values[(k + 1) % n][0] - t);
            if gl == 0.0 || gl * gr > 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (k as f64 * step, (k + 1) as f64 * step);
            let mut glo = gl;
            while hi - lo > BISECTION_WIDTH {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = g(mid);
                evals += 1;
                if gm.abs() < best.1 {
                    best = (circle_point(mid), gm.abs());
                }
                if gm == 0.0 {
                    break;
                }
                if (gm < 0.0) == (glo < 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
        }
        (best.0, best.1, evals)
    }
}

fn circle_point(a: f64) -> SpherePoint {
    SpherePoint::new(vec![a.cos(), a.sin()]).expect("unit vector")
}

/// Exhaustive deterministic search for `m <= 2`.
pub fn oracle_scan<M: OddMap + ?Sized>(map: &M, t: &[f64], resolution: usize) -> Result<SolveResult> {
    OracleGrid::new(map, resolution)?.scan(map, t)
}

#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub rows: Vec<SolveResult>,
    pub max_residual: f64,
    pub fraction_converged: f64,
}

impl CoverageReport {
    pub fn targets(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.iter().map(|r| r.target.as_slice())
    }

    pub fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.residual)
    }
}

/// The `grid_per_axis^m` targets with components equispaced in
/// `[-1 + margin, 1 - margin]`, first component varying slowest.
pub fn cube_targets(m: usize, grid_per_axis: usize, margin: f64) -> Vec<Vec<f64>> {
    // Written so that the axis is exactly symmetric under t -> -t.
    let span = (grid_per_axis - 1) as f64;
    let axis: Vec<f64> = (0..grid_per_axis)
        .map(|k| (1.0 - margin) * ((2 * k) as f64 - span) / span)
        .collect();
    let total = grid_per_axis.pow(m as u32);
    (0..total)
        .map(|mut idx| {
            let mut t = vec![0.0; m];
            for slot in t.iter_mut().rev() {
                *slot = axis[idx % grid_per_axis];
                idx /= grid_per_axis;
            }
            t
        })
        .collect()
}

/// Solves every target of the cube grid. Targets run in parallel; rows
/// come back in grid order.
pub fn sweep_cube<M: OddMap + ?Sized>(
    map: &M,
    labeler: Option<&dyn Labeler>,
    grid_per_axis: usize,
    opts: &SolveOptions,
) -> Result<CoverageReport> {
    if grid_per_axis < 2 {
        return Err(Error::InvalidArgument("grid_per_axis must be at least 2".into()));
    }
    opts.validate()?;
    let targets = cube_targets(map.space().m(), grid_per_axis, opts.margin);
    let rows = targets
        .par_iter()
        .map(|t| solve_targets(map, labeler, t, opts))
        .collect::<Result<Vec<_>>>()?;
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let fraction_converged = rows.iter().filter(|r| r.converged).count() as f64 / rows.len() as f64;
    Ok(CoverageReport {
        rows,
        max_residual,
        fraction_converged,
    })
}
