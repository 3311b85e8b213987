//! Points, metric and orientation on the unit sphere S(V) in R^{m+1}.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Determinants at or below this magnitude count as degenerate.
pub const ORIENTATION_EPS: f64 = 1e-10;

const SUBSPHERE_SEED: u64 = 0x5eed_0fe9a7;

/// The ambient Euclidean space V of dimension `m + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AmbientSpace {
    m: usize,
}

impl AmbientSpace {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        Ok(Self { m })
    }

    /// Number of functions (and of densities).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m + 1
    }

    /// The standard basis vector e_k, 0 <= k <= m.
    pub fn basis(&self, k: usize) -> SpherePoint {
        assert!(k < self.dim(), "basis index {k} out of range");
        let mut c = vec![0.0; self.dim()];
        c[k] = 1.0;
        SpherePoint(c)
    }
}

/// A unit vector. Construction renormalizes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if !n.is_finite() || n == 0.0 || coords.is_empty() {
            return Err(Error::DegenerateVector);
        }
        Ok(Self(coords.into_iter().map(|c| c / n).collect()))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot(&self.0, &other.0)
    }

    /// `-v`. Negation is exact, so `antipode(antipode(v)) == v`.
    pub fn antipode(&self) -> SpherePoint {
        SpherePoint(self.0.iter().map(|c| -c).collect())
    }

    /// Renormalized `self + step * dir`.
    pub fn moved(&self, dir: &[f64], step: f64) -> Result<SpherePoint> {
        SpherePoint::new(
            self.0
                .iter()
                .zip(dir)
                .map(|(a, d)| a + step * d)
                .collect(),
        )
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Neg for &SpherePoint {
    type Output = SpherePoint;
    fn neg(self) -> SpherePoint {
        self.antipode()
    }
}

pub fn antipode(v: &SpherePoint) -> SpherePoint {
    v.antipode()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Great-circle distance in radians.
pub fn geodesic_distance(u: &SpherePoint, v: &SpherePoint) -> f64 {
    u.dot(v).clamp(-1.0, 1.0).acos()
}

/// Sign of the determinant of the matrix whose columns are `vectors`.
pub fn orientation_sign(vectors: &[SpherePoint]) -> Result<i8> {
    let dim = vectors.first().map(|v| v.dim()).unwrap_or(0);
    if vectors.len() != dim || dim == 0 {
        return Err(Error::InvalidArgument(format!(
            "orientation needs exactly dim vectors, got {} of dimension {}",
            vectors.len(),
            dim
        )));
    }
    if let Some(bad) = vectors.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.dim(),
        });
    }
    let det = determinant(vectors.iter().map(|v| v.coords()));
    Ok(if det.abs() <= ORIENTATION_EPS {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    })
}

/// Determinant of the square matrix with the given columns.
pub fn determinant<'a>(columns: impl ExactSizeIterator<Item = &'a [f64]>) -> f64 {
    let n = columns.len();
    let mut data = Vec::with_capacity(n * n);
    for c in columns {
        assert_eq!(c.len(), n, "determinant needs a square matrix");
        data.extend_from_slice(c);
    }
    DMatrix::from_column_slice(n, n, &data).determinant()
}

/// `|det(x_1, .., x_m, n)|` for `m = dim - 1` vectors and `n` a unit
/// normal to their span: the m-volume of the parallelotope they span.
pub fn span_volume(xs: &[SpherePoint]) -> f64 {
    let dim = xs.first().map(|x| x.dim()).unwrap_or(0);
    assert!(dim >= 2 && xs.len() == dim - 1, "span_volume needs dim - 1 vectors");
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for x in xs {
        let mut c = x.0.clone();
        for b in &ortho {
            let p = dot(&c, b);
            c.iter_mut().zip(b).for_each(|(ci, bi)| *ci -= p * bi);
        }
        let n = norm(&c);
        if n > 1e-14 {
            c.iter_mut().for_each(|ci| *ci /= n);
            ortho.push(c);
        }
    }
    let normal = (0..dim)
        .map(|k| {
            let mut c = vec![0.0; dim];
            c[k] = 1.0;
            for b in &ortho {
                let p = dot(&c, b);
                c.iter_mut().zip(b).for_each(|(ci, bi)| *ci -= p * bi);
            }
            c
        })
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .expect("dim >= 2");
    let n = norm(&normal);
    let normal: Vec<f64> = normal.into_iter().map(|c| c / n).collect();
    let cols: Vec<&[f64]> = xs.iter().map(|x| x.coords()).chain([normal.as_slice()]).collect();
    determinant(cols.into_iter()).abs()
}

/// Orthonormal basis of the orthogonal complement of `v` (m vectors).
///
/// Gram-Schmidt over the standard basis, skipping near-dependent candidates.
/// Depends on `v` only through the line it spans, so `v` and `-v` get the
/// same basis.
pub fn complement_basis(v: &SpherePoint) -> Vec<Vec<f64>> {
    let dim = v.dim();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim - 1);
    let mut order: Vec<usize> = (0..dim).collect();
    // Least aligned axes first keeps the projection well conditioned.
    order.sort_by(|&a, &b| v.0[a].abs().total_cmp(&v.0[b].abs()).then(a.cmp(&b)));
    for k in order {
        if basis.len() == dim - 1 {
            break;
        }
        let mut c = vec![0.0; dim];
        c[k] = 1.0;
        let p = v.0[k];
        for (ci, vi) in c.iter_mut().zip(&v.0) {
            *ci -= p * vi;
        }
        for b in &basis {
            let p = dot(&c, b);
            for (ci, bi) in c.iter_mut().zip(b) {
                *ci -= p * bi;
            }
        }
        let n = norm(&c);
        if n > 1e-6 {
            c.iter_mut().for_each(|x| *x /= n);
            basis.push(c);
        }
    }
    basis
}

/// Antipodally closed, quasi-uniform samples of the great subsphere
/// S((Rv)^perp).
///
/// The output is a list of pairs `x, -x`, so `n` is rounded up to an even
/// count. On the circle (dim 3) the samples are equally spaced; on S^2
/// (dim 4) they follow a golden-angle spiral; above that they are seeded
/// Gaussian draws. When dim = 2 the subsphere is S^0 and only its two points
/// are returned.
pub fn great_subsphere_samples(v: &SpherePoint, n: usize) -> Vec<SpherePoint> {
    let basis = complement_basis(v);
    let k = basis.len();
    let lift = |local: &[f64]| -> SpherePoint {
        let mut c = vec![0.0; v.dim()];
        for (coef, b) in local.iter().zip(&basis) {
            for (ci, bi) in c.iter_mut().zip(b) {
                *ci += coef * bi;
            }
        }
        SpherePoint::new(c).expect("combination of orthonormal vectors is nonzero")
    };
    let local = match k {
        1 => vec![vec![1.0]],
        2 => circle_half(n.div_ceil(2).max(1)),
        3 => spiral_half(n.div_ceil(2).max(1)),
        _ => gaussian_half(k, n.div_ceil(2).max(1), SUBSPHERE_SEED),
    };
    let mut out = Vec::with_capacity(2 * local.len());
    for l in &local {
        let x = lift(l);
        let minus = x.antipode();
        out.push(x);
        out.push(minus);
    }
    out
}

/// `n` points on a half circle whose antipodes complete an equispaced set.
pub(crate) fn circle_half(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let a = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

/// Golden-angle spiral on the upper hemisphere of S^2, first coordinate as
/// the polar axis.
pub(crate) fn spiral_half(n: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            vec![z, r * phi.cos(), r * phi.sin()]
        })
        .collect()
}

pub(crate) fn gaussian_half(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_unit(&mut rng, dim)).collect()
}

/// Uniform random unit vector.
pub fn random_unit<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let c: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&c);
        if n > 1e-9 {
            return c.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform random point of S(V).
pub fn random_point<R: rand::Rng + ?Sized>(rng: &mut R, space: AmbientSpace) -> SpherePoint {
    SpherePoint(random_unit(rng, space.dim()))
}
