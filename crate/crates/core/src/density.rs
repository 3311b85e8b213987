//! Continuous nonnegative densities on S(V) with a pointwise support test.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{AmbientSpace, SpherePoint};
use crate::quadrature::{integrate, QuadratureRule};

type EvalFn = dyn Fn(&SpherePoint) -> f64 + Send + Sync;
type SupportFn = dyn Fn(&SpherePoint) -> bool + Send + Sync;

/// A density `psi` together with a predicate that is true wherever
/// `psi > 0`.
#[derive(Clone)]
pub struct Density {
    eval: Arc<EvalFn>,
    support: Arc<SupportFn>,
    scale: f64,
    label: String,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("label", &self.label)
            .field("scale", &self.scale)
            .finish()
    }
}

impl Density {
    pub fn new<E, S>(label: impl Into<String>, eval: E, support: S) -> Self
    where
        E: Fn(&SpherePoint) -> f64 + Send + Sync + 'static,
        S: Fn(&SpherePoint) -> bool + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            support: Arc::new(support),
            scale: 1.0,
            label: label.into(),
        }
    }

    /// Constant density 1 with full support.
    pub fn uniform() -> Self {
        Self::new("uniform", |_| 1.0, |_| true)
    }

    pub fn eval(&self, x: &SpherePoint) -> f64 {
        self.scale * (self.eval)(x)
    }

    pub fn support_test(&self, x: &SpherePoint) -> bool {
        (self.support)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Threshold `sqrt((m-1)/m)` beyond which the cap-bump densities vanish.
pub fn cap_threshold(m: usize) -> f64 {
    ((m as f64 - 1.0) / m as f64).sqrt()
}

/// `psi_i(x) = max(0, <x, e_i> - c)^2` with `c = sqrt((m-1)/m)`,
/// un-normalized.
pub fn cap_bump(space: AmbientSpace, i: usize) -> Result<Density> {
    if i == 0 || i > space.m() {
        return Err(Error::InvalidArgument(format!(
            "cap-bump index {i} outside 1..={}",
            space.m()
        )));
    }
    Ok(cap_bump_about(
        space.basis(i),
        cap_threshold(space.m()),
        format!("cap_bump_{i}"),
    ))
}

/// `max(0, <x, center> - threshold)^2`, supported on the open cap
/// `<x, center> > threshold`.
pub fn cap_bump_about(center: SpherePoint, threshold: f64, label: impl Into<String>) -> Density {
    let c2 = center.clone();
    Density::new(
        label,
        move |x| {
            let d = x.dot(&center) - threshold;
            if d > 0.0 {
                d * d
            } else {
                0.0
            }
        },
        move |x| x.dot(&c2) > threshold,
    )
}

/// Rescales `d` so that it integrates to one under `rule`.
pub fn normalize(d: &Density, rule: &QuadratureRule) -> Result<Density> {
    let mass = integrate(rule, |x| d.eval(x))?;
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::Normalization {
            label: d.label.clone(),
            mass,
        });
    }
    Ok(Density {
        scale: d.scale / mass,
        ..d.clone()
    })
}
