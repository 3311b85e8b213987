//! Separation witnesses and the splitting of the set where every
//! `|f_i| < 1` into two antipodal halves.
//!
//! Witness (a) is a unit normal `w` whose hyperplane `U = w^perp` sees some
//! `|f_i(u)| >= 1` at every `u` in `S(U)`; it labels by the sign of `<v, w>`.
//! Witness (b) is a family `v_I` indexed by subsets of `{1..m}` with
//! `v_{I'} = -v_I`; it labels by the orientation of `(v, x_1, .., x_m)`
//! where `x_i` lies on the equator of `v` inside the region `U_i`.

use std::fmt;
use std::ops::Neg;

use crate::density::Density;
use crate::error::{Error, Result};
use crate::fieldmap::{in_omega, sup_norm, OddMap};
use crate::geometry::{great_subsphere_samples, orientation_sign, AmbientSpace, SpherePoint};
use crate::quadrature::QuadratureRule;

/// Slack on the `|f_i(u)| >= 1` test for witness (a).
pub const DEFAULT_TOL_A: f64 = 1e-3;

/// `|<v, w>|` at or below this cannot be labeled by witness (a).
pub const LABEL_EPS: f64 = 1e-12;

/// Default equatorial sample count for witness (b) labels.
pub const DEFAULT_N_EQ: usize = 360;

const MAX_RECORDED_VIOLATIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OmegaLabel {
    Plus,
    Minus,
}

impl OmegaLabel {
    pub fn sign(self) -> i8 {
        match self {
            OmegaLabel::Plus => 1,
            OmegaLabel::Minus => -1,
        }
    }

    fn from_sign(s: i8) -> Self {
        if s > 0 {
            OmegaLabel::Plus
        } else {
            OmegaLabel::Minus
        }
    }
}

impl Neg for OmegaLabel {
    type Output = OmegaLabel;
    fn neg(self) -> OmegaLabel {
        match self {
            OmegaLabel::Plus => OmegaLabel::Minus,
            OmegaLabel::Minus => OmegaLabel::Plus,
        }
    }
}

impl fmt::Display for OmegaLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OmegaLabel::Plus => "+",
            OmegaLabel::Minus => "-",
        })
    }
}

/// Anything that assigns points of the open set to one of its two halves.
pub trait Labeler: Send + Sync {
    fn label(&self, v: &SpherePoint) -> Result<OmegaLabel>;
}

/// Hyperplane witness: the unit normal `w` of `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessA {
    w: SpherePoint,
}

impl WitnessA {
    pub fn new(w: SpherePoint) -> Self {
        Self { w }
    }

    pub fn normal(&self) -> &SpherePoint {
        &self.w
    }
}

/// Subset witness. Subsets are bitmasks: bit `i - 1` set iff `i` is in `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessB {
    space: AmbientSpace,
    by_subset: Vec<SpherePoint>,
}

impl WitnessB {
    /// Takes `v_I` for every subset, indexed by bitmask. Fails unless all
    /// `2^m` vectors are present with the right dimension and
    /// `v_{I'} = -v_I` holds exactly.
    pub fn new(space: AmbientSpace, by_subset: Vec<SpherePoint>) -> Result<Self> {
        let count = 1usize << space.m();
        if by_subset.len() != count {
            return Err(Error::InvalidArgument(format!(
                "witness (b) needs {count} vectors, got {}",
                by_subset.len()
            )));
        }
        if let Some(v) = by_subset.iter().find(|v| v.dim() != space.dim()) {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: v.dim(),
            });
        }
        let full = count - 1;
        for (mask, v) in by_subset.iter().enumerate() {
            if by_subset[full ^ mask] != v.antipode() {
                return Err(Error::WitnessAntisymmetry(format!(
                    "v_{} is not -v_{}",
                    subset_name(full ^ mask),
                    subset_name(mask)
                )));
            }
        }
        Ok(Self { space, by_subset })
    }

    /// `v_I = (sum_{i in I} e_i - sum_{i not in I} e_i) / sqrt(m)`.
    pub fn standard(space: AmbientSpace) -> Self {
        let m = space.m();
        let by_subset = (0..1usize << m)
            .map(|mask| {
                let mut c = vec![0.0; space.dim()];
                for (i, ci) in c.iter_mut().enumerate().skip(1) {
                    *ci = if mask & (1 << (i - 1)) != 0 { 1.0 } else { -1.0 };
                }
                SpherePoint::new(c).expect("nonzero")
            })
            .collect();
        Self { space, by_subset }
    }

    pub fn space(&self) -> AmbientSpace {
        self.space
    }

    pub fn get(&self, mask: usize) -> &SpherePoint {
        &self.by_subset[mask]
    }

    pub fn vectors(&self) -> &[SpherePoint] {
        &self.by_subset
    }

    /// Subsets containing index `i` (1-based).
    pub fn subsets_containing(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let bit = 1usize << (i - 1);
        (0..self.by_subset.len()).filter(move |mask| mask & bit != 0)
    }
}

/// `{1,3}` style name of a subset bitmask.
pub fn subset_name(mask: usize) -> String {
    let items: Vec<String> = (0..usize::BITS as usize)
        .filter(|b| mask & (1 << b) != 0)
        .map(|b| (b + 1).to_string())
        .collect();
    format!("{{{}}}", items.join(","))
}

/// Result of scanning `S(U)` for witness (a). Sampled evidence, not proof.
#[derive(Debug, Clone)]
pub struct ConditionAReport {
    pub holds: bool,
    /// Sample of `S(U)` with the smallest `max_i |f_i(u)|`.
    pub worst_u: SpherePoint,
    pub worst_value: f64,
    pub n_samples: usize,
    pub tol_a: f64,
    /// Direct support-side form: for every sampled line some support lies
    /// in one open hemisphere of `u` or `-u`. `None` if the map has no
    /// densities.
    pub support_side_holds: Option<bool>,
}

pub fn check_condition_a<M: OddMap + ?Sized>(map: &M, wit: &WitnessA, n_grid: usize) -> Result<ConditionAReport> {
    check_condition_a_with_tol(map, wit, n_grid, DEFAULT_TOL_A)
}

pub fn check_condition_a_with_tol<M: OddMap + ?Sized>(
    map: &M,
    wit: &WitnessA,
    n_grid: usize,
    tol_a: f64,
) -> Result<ConditionAReport> {
    let space = map.space();
    if n_grid < 2 {
        return Err(Error::InvalidArgument("n_grid must be at least 2".into()));
    }
    if wit.w.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: wit.w.dim(),
        });
    }
    let samples = great_subsphere_samples(&wit.w, n_grid);
    let mut worst: Option<(f64, &SpherePoint)> = None;
    let mut support_side = Some(true);
    for u in &samples {
        let value = sup_norm(&map.eval(u));
        if worst.is_none_or(|(w, _)| value < w) {
            worst = Some((value, u));
        }
        if let Some(true) = support_side {
            let minus = u.antipode();
            let mut any = None;
            for i in 1..=space.m() {
                match (
                    map.support_in_open_hemisphere(i, u),
                    map.support_in_open_hemisphere(i, &minus),
                ) {
                    (Some(a), Some(b)) => {
                        if a || b {
                            any = Some(true);
                            break;
                        }
                        any = Some(false);
                    }
                    _ => {
                        any = None;
                        break;
                    }
                }
            }
            support_side = any;
        }
    }
    let (worst_value, worst_u) = worst.expect("at least one sample");
    Ok(ConditionAReport {
        holds: worst_value >= 1.0 - tol_a,
        worst_u: worst_u.clone(),
        worst_value,
        n_samples: samples.len(),
        tol_a,
        support_side_holds: support_side,
    })
}

pub fn label_omega_a(wit: &WitnessA, v: &SpherePoint) -> Result<OmegaLabel> {
    let p = v.dot(&wit.w);
    if p.abs() <= LABEL_EPS {
        return Err(Error::AmbiguousLabel(p.abs()));
    }
    Ok(OmegaLabel::from_sign(if p > 0.0 { 1 } else { -1 }))
}

/// One support node of density `i` lying outside `<x, v_I> > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub density: usize,
    pub subset: usize,
    pub node: usize,
}

#[derive(Debug, Clone)]
pub struct ConditionBReport {
    pub holds: bool,
    pub n_violations: usize,
    /// First violations in scan order (at most 64).
    pub violations: Vec<Violation>,
}

pub fn check_condition_b(densities: &[Density], wit: &WitnessB, rule: &QuadratureRule) -> Result<ConditionBReport> {
    let space = wit.space();
    if densities.len() != space.m() {
        return Err(Error::DimensionMismatch {
            expected: space.m(),
            got: densities.len(),
        });
    }
    if rule.space() != space {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: rule.space().dim(),
        });
    }
    let mut violations = Vec::new();
    let mut n_violations = 0;
    for (node, x) in rule.nodes().iter().enumerate() {
        for (idx, d) in densities.iter().enumerate() {
            if !d.support_test(x) {
                continue;
            }
            for mask in wit.subsets_containing(idx + 1) {
                if x.dot(wit.get(mask)) <= 0.0 {
                    n_violations += 1;
                    if violations.len() < MAX_RECORDED_VIOLATIONS {
                        violations.push(Violation {
                            density: idx + 1,
                            subset: mask,
                            node,
                        });
                    }
                }
            }
        }
    }
    Ok(ConditionBReport {
        holds: n_violations == 0,
        n_violations,
        violations,
    })
}

/// Membership in `U_i = { x : <x, v_I> > 0 for all I containing i }`.
pub fn u_region_contains(wit: &WitnessB, i: usize, x: &SpherePoint) -> bool {
    assert!(i >= 1 && i <= wit.space.m(), "region index {i} out of range");
    wit.subsets_containing(i).all(|mask| x.dot(wit.get(mask)) > 0.0)
}

/// Orientation label of `v` from witness (b).
///
/// Each `x_i` is the first equatorial sample (scan order) inside `U_i`.
pub fn label_omega_b<M: OddMap + ?Sized>(map: &M, wit: &WitnessB, v: &SpherePoint, n_eq: usize) -> Result<OmegaLabel> {
    let space = wit.space();
    if n_eq < space.dim() {
        return Err(Error::InvalidArgument(format!(
            "n_eq must be at least {}",
            space.dim()
        )));
    }
    if !in_omega(map, v, 0.0) {
        return Err(Error::NotInOmega(sup_norm(&map.eval(v))));
    }
    let samples = great_subsphere_samples(v, n_eq);
    let mut basis = Vec::with_capacity(space.dim());
    basis.push(v.clone());
    for i in 1..=space.m() {
        let x = samples
            .iter()
            .find(|x| u_region_contains(wit, i, x))
            .ok_or(Error::RegionNotMet(i))?;
        basis.push(x.clone());
    }
    match orientation_sign(&basis)? {
        0 => Err(Error::DegenerateBasis),
        s => Ok(OmegaLabel::from_sign(s)),
    }
}

pub struct LabelerA {
    pub witness: WitnessA,
}

impl Labeler for LabelerA {
    fn label(&self, v: &SpherePoint) -> Result<OmegaLabel> {
        label_omega_a(&self.witness, v)
    }
}

pub struct LabelerB<'a, M: OddMap + ?Sized> {
    pub map: &'a M,
    pub witness: WitnessB,
    pub n_eq: usize,
}

impl<M: OddMap + ?Sized> Labeler for LabelerB<'_, M> {
    fn label(&self, v: &SpherePoint) -> Result<OmegaLabel> {
        label_omega_b(self.map, &self.witness, v, self.n_eq)
    }
}
