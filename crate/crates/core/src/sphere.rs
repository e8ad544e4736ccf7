//! Parameter sets on the unit circle and the unit sphere.
//!
//! Circle parameters are angles `λ ∈ [-π, π)`. Sphere parameters are
//! longitude/latitude pairs `(λ, θ) ∈ [-π, π) × [-π/2, π/2)` with the
//! embedding `ξ(λ, θ) = (cos λ cos θ, sin λ cos θ, sin θ)`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::PointSet;

/// Slack on the closed parameter intervals accepted by [`embed`].
const RANGE_SLACK: f64 = 1e-12;
/// Latitudes are kept this far away from the poles.
pub const POLE_CLEARANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    /// S¹, embedded in the plane.
    Circle,
    /// S², embedded in space.
    Sphere,
}

impl Manifold {
    pub fn for_dim(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Manifold::Circle),
            3 => Ok(Manifold::Sphere),
            _ => Err(Error::Dimension {
                expected: 3,
                found: dim,
            }),
        }
    }

    /// Number of parameters per point.
    pub fn param_count(self) -> usize {
        match self {
            Manifold::Circle => 1,
            Manifold::Sphere => 2,
        }
    }

    /// Dimension of the embedding space.
    pub fn ambient_dim(self) -> usize {
        self.param_count() + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Manifold::Circle => "S1",
            Manifold::Sphere => "S2",
        }
    }
}

/// Parameter tuples on S¹ or S², stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricNodeSet {
    manifold: Manifold,
    values: Vec<f64>,
}

impl ParametricNodeSet {
    /// Validates every tuple against the closed parameter ranges.
    pub fn new(manifold: Manifold, values: Vec<f64>) -> Result<Self> {
        let k = manifold.param_count();
        if values.len() % k != 0 {
            return Err(Error::Dimension {
                expected: k,
                found: values.len() % k,
            });
        }
        for p in values.chunks_exact(k) {
            check_range(manifold, p)?;
        }
        Ok(Self { manifold, values })
    }

    pub fn empty(manifold: Manifold) -> Self {
        Self {
            manifold,
            values: Vec::new(),
        }
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.manifold.param_count()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        let k = self.manifold.param_count();
        &self.values[i * k..(i + 1) * k]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.manifold.param_count())
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.manifold.param_count());
        for &i in indices {
            values.extend_from_slice(self.get(i));
        }
        Self {
            manifold: self.manifold,
            values,
        }
    }

    /// Embedded unit vectors for every tuple.
    pub fn embedded(&self) -> PointSet {
        let mut out = PointSet::with_capacity(self.manifold.ambient_dim(), self.len());
        for p in self.iter() {
            out.push(&embed_unchecked(p));
        }
        out
    }
}

fn check_range(manifold: Manifold, p: &[f64]) -> Result<()> {
    if p.len() != manifold.param_count() {
        return Err(Error::Dimension {
            expected: manifold.param_count(),
            found: p.len(),
        });
    }
    let lam = p[0];
    if !(lam >= -PI - RANGE_SLACK && lam <= PI + RANGE_SLACK) {
        return Err(Error::ParameterRange(format!(
            "longitude {lam} outside [-pi, pi]"
        )));
    }
    if manifold == Manifold::Sphere {
        let th = p[1];
        if !(th >= -FRAC_PI_2 - RANGE_SLACK && th <= FRAC_PI_2 + RANGE_SLACK) {
            return Err(Error::ParameterRange(format!(
                "latitude {th} outside [-pi/2, pi/2]"
            )));
        }
    }
    Ok(())
}

/// `λ_k = -π + 2πk/N`, `k = 0..N`.
pub fn equispaced_circle(n: usize) -> Result<ParametricNodeSet> {
    if n < 3 {
        return Err(Error::TooFew { needed: 3, got: n });
    }
    let values = (0..n)
        .map(|k| -PI + 2.0 * PI * k as f64 / n as f64)
        .collect();
    Ok(ParametricNodeSet {
        manifold: Manifold::Circle,
        values,
    })
}

/// Generalized spiral points on S².
///
/// Heights follow Thomsen's pole-free offset `z_k = 1 - (2k + 1)/N`, so no
/// point sits on a pole; consecutive longitudes advance by the golden angle
/// `π(3 - √5)`. Returns the Cartesian points together with their `(λ, θ)`
/// parameters.
pub fn spiral_points(n: usize) -> Result<(PointSet, ParametricNodeSet)> {
    if n < 4 {
        return Err(Error::TooFew { needed: 4, got: n });
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut pts = PointSet::with_capacity(3, n);
    let mut values = Vec::with_capacity(2 * n);
    for k in 0..n {
        let z = 1.0 - (2 * k + 1) as f64 / n as f64;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let phi = (golden * k as f64).rem_euclid(2.0 * PI);
        let (s, c) = phi.sin_cos();
        let x = [rho * c, rho * s, z];
        let p = to_params(&x);
        // store the point that the stored parameters embed to exactly
        pts.push(&embed_unchecked(&p));
        values.extend_from_slice(&p);
    }
    Ok((
        pts,
        ParametricNodeSet {
            manifold: Manifold::Sphere,
            values,
        },
    ))
}

/// Unit vector for a parameter tuple.
pub fn embed(p: &[f64], manifold: Manifold) -> Result<Vec<f64>> {
    check_range(manifold, p)?;
    Ok(embed_unchecked(p))
}

pub(crate) fn embed_unchecked(p: &[f64]) -> Vec<f64> {
    let (sl, cl) = p[0].sin_cos();
    if p.len() == 1 {
        vec![cl, sl]
    } else {
        let (st, ct) = p[1].sin_cos();
        vec![cl * ct, sl * ct, st]
    }
}

/// Inverse of [`embed`] for a nonzero vector: `λ` via `atan2`, wrapped into
/// `[-π, π)`, and (in 3D) `θ` clamped away from the poles.
pub fn to_params(x: &[f64]) -> Vec<f64> {
    let mut lam = x[1].atan2(x[0]);
    if lam >= PI {
        lam -= 2.0 * PI;
    }
    if x.len() == 2 {
        return vec![lam];
    }
    let horiz = x[0].hypot(x[1]);
    let theta = x[2]
        .atan2(horiz)
        .clamp(-FRAC_PI_2 + POLE_CLEARANCE, FRAC_PI_2 - POLE_CLEARANCE);
    vec![lam, theta]
}
