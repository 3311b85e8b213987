//! Odd maps S(V) -> R^m, in particular the hemisphere-imbalance map of a
//! family of densities.

use crate::density::{normalize, Density};
use crate::error::{Error, Result};
use crate::geometry::{dot, AmbientSpace, SpherePoint};
use crate::quadrature::QuadratureRule;

/// `|<x, v>|` at or below this puts a node on the cut hyperplane.
pub const CUT_EPS: f64 = 1e-14;

/// Default shrink of the discretized set where every `|f_i| < 1`.
pub const DEFAULT_OMEGA_MARGIN: f64 = 1e-6;

/// A continuous map `f: S(V) -> R^m` with `f(-v) = -f(v)`.
pub trait OddMap: Send + Sync {
    fn space(&self) -> AmbientSpace;

    fn eval(&self, v: &SpherePoint) -> Vec<f64>;

    /// Whether the support of component `i` (1-based) lies in the open
    /// hemisphere `<x, u> > 0`. `None` when the map is not built from
    /// densities.
    fn support_in_open_hemisphere(&self, _i: usize, _u: &SpherePoint) -> Option<bool> {
        None
    }
}

impl<T: OddMap + ?Sized> OddMap for &T {
    fn space(&self) -> AmbientSpace {
        (**self).space()
    }
    fn eval(&self, v: &SpherePoint) -> Vec<f64> {
        (**self).eval(v)
    }
    fn support_in_open_hemisphere(&self, i: usize, u: &SpherePoint) -> Option<bool> {
        (**self).support_in_open_hemisphere(i, u)
    }
}

/// Nodes of one density with nonzero mass, in rule order.
#[derive(Debug, Clone)]
struct Support {
    coords: Vec<f64>,
    masses: Vec<f64>,
}

/// `f_i(v) = int_{<x,v> >= 0} psi_i - int_{<x,v> <= 0} psi_i`, discretized
/// with a paired quadrature rule.
#[derive(Debug, Clone)]
pub struct FieldMap {
    space: AmbientSpace,
    densities: Vec<Density>,
    rule: QuadratureRule,
    supports: Vec<Support>,
}

impl FieldMap {
    /// Normalizes every density against `rule` and caches its weighted
    /// support.
    pub fn new(densities: Vec<Density>, rule: QuadratureRule) -> Result<Self> {
        let space = rule.space();
        if densities.len() != space.m() {
            return Err(Error::DimensionMismatch {
                expected: space.m(),
                got: densities.len(),
            });
        }
        let densities = densities
            .iter()
            .map(|d| normalize(d, &rule))
            .collect::<Result<Vec<_>>>()?;
        let supports = densities
            .iter()
            .map(|d| {
                let mut coords = Vec::new();
                let mut masses = Vec::new();
                for (x, w) in rule.nodes().iter().zip(rule.weights()) {
                    let val = d.eval(x);
                    if val < 0.0 {
                        return Err(Error::InvalidArgument(format!(
                            "density `{}` is negative at a node",
                            d.label()
                        )));
                    }
                    if val > 0.0 {
                        coords.extend_from_slice(x.coords());
                        masses.push(w * val);
                    }
                }
                Ok(Support { coords, masses })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            space,
            densities,
            rule,
            supports,
        })
    }

    pub fn densities(&self) -> &[Density] {
        &self.densities
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn eval_f(&self, v: &SpherePoint) -> Vec<f64> {
        let dim = self.space.dim();
        assert_eq!(v.dim(), dim, "point dimension does not match the field map");
        let vc = v.coords();
        self.supports
            .iter()
            .map(|s| {
                let mut acc = 0.0;
                if dim == 3 {
                    let (a, b, c) = (vc[0], vc[1], vc[2]);
                    for (x, &mass) in s.coords.chunks_exact(3).zip(&s.masses) {
                        acc += signed(x[0] * a + x[1] * b + x[2] * c, mass);
                    }
                } else {
                    for (x, &mass) in s.coords.chunks_exact(dim).zip(&s.masses) {
                        acc += signed(dot(x, vc), mass);
                    }
                }
                acc
            })
            .collect()
    }
}

#[inline(always)]
fn signed(r: f64, mass: f64) -> f64 {
    if r > CUT_EPS {
        mass
    } else if r < -CUT_EPS {
        -mass
    } else {
        0.0
    }
}

impl OddMap for FieldMap {
    fn space(&self) -> AmbientSpace {
        self.space
    }

    fn eval(&self, v: &SpherePoint) -> Vec<f64> {
        self.eval_f(v)
    }

    fn support_in_open_hemisphere(&self, i: usize, u: &SpherePoint) -> Option<bool> {
        let s = self.supports.get(i.checked_sub(1)?)?;
        let dim = self.space.dim();
        Some(s.coords.chunks_exact(dim).all(|x| dot(x, u.coords()) > 0.0))
    }
}

/// `f_i(v) = sum_j linear[i][j] v_j + cubic[i][j] v_j^3`, an odd map that
/// is not tied to densities and may leave [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct OddPolynomialMap {
    space: AmbientSpace,
    linear: Vec<Vec<f64>>,
    cubic: Vec<Vec<f64>>,
}

impl OddPolynomialMap {
    pub fn new(space: AmbientSpace, linear: Vec<Vec<f64>>, cubic: Vec<Vec<f64>>) -> Result<Self> {
        for rows in [&linear, &cubic] {
            if rows.len() != space.m() {
                return Err(Error::DimensionMismatch {
                    expected: space.m(),
                    got: rows.len(),
                });
            }
            if let Some(r) = rows.iter().find(|r| r.len() != space.dim()) {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    got: r.len(),
                });
            }
        }
        Ok(Self {
            space,
            linear,
            cubic,
        })
    }
}

impl OddMap for OddPolynomialMap {
    fn space(&self) -> AmbientSpace {
        self.space
    }

    fn eval(&self, v: &SpherePoint) -> Vec<f64> {
        let c = v.coords();
        self.linear
            .iter()
            .zip(&self.cubic)
            .map(|(l, q)| {
                l.iter()
                    .zip(q)
                    .zip(c)
                    .map(|((a, b), x)| a * x + b * x * x * x)
                    .sum()
            })
            .collect()
    }
}

/// `max_i |f_i(v)| < 1 - margin`.
pub fn in_omega<M: OddMap + ?Sized>(map: &M, v: &SpherePoint, margin: f64) -> bool {
    sup_norm(&map.eval(v)) < 1.0 - margin
}

pub fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |a: f64, x| a.max(x.abs()))
}
