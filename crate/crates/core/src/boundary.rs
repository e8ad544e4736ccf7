//! Boundary sampling by parametric supersampling and Cartesian decimation.

use crate::error::{Error, Result};
use crate::obb::OrientedBox;
use crate::points::PointSet;
use crate::sbf::GeometricModel;
use crate::spatial::SpatialIndex;
use crate::sphere::{equispaced_circle, spiral_points, Manifold, ParametricNodeSet};

pub const DEFAULT_TAU: f64 = 2.0;
/// Relative slack when rounding target counts up, so padded boxes do not
/// add a node.
const COUNT_SLACK: f64 = 1e-8;

/// Boundary nodes with their parameters and unit outward normals.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub params: ParametricNodeSet,
    pub points: PointSet,
    pub normals: PointSet,
    pub h: f64,
    pub tau: f64,
}

impl BoundarySample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_spacing(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "spacing must be positive, got {h}"
        )));
    }
    Ok(())
}

/// Boundary node count for spacing `h`: the OBB perimeter (2D) or surface
/// area (3D) of the seeds over `h^(d-1)`, rounded up.
pub fn estimate_target_count(seeds: &PointSet, h: f64) -> Result<usize> {
    check_spacing(h)?;
    let bbox = OrientedBox::from_points(seeds)?;
    let d = seeds.dim() as i32;
    let n = bbox.boundary_measure() / h.powi(d - 1);
    Ok(((n * (1.0 - COUNT_SLACK)).ceil() as usize).max(1))
}

/// Greedy elimination in index order: every still-active point removes all
/// other points within distance `h` (closed ball). Returns survivors
/// ascending.
pub fn decimate(points: &PointSet, h: f64) -> Result<Vec<usize>> {
    if !(h >= 0.0) {
        return Err(Error::NegativeRadius(h));
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let index = SpatialIndex::build(points.clone())?;
    let mut active = vec![true; points.len()];
    for k in 0..points.len() {
        if !active[k] {
            continue;
        }
        for j in index.within_radius(points.point(k), h)? {
            if j != k {
                active[j] = false;
            }
        }
    }
    Ok((0..points.len()).filter(|&k| active[k]).collect())
}

/// Candidate parameters: equispaced on the circle, spiral points on the
/// sphere.
pub fn candidate_params(manifold: Manifold, n: usize) -> Result<ParametricNodeSet> {
    match manifold {
        Manifold::Circle => equispaced_circle(n),
        Manifold::Sphere => Ok(spiral_points(n)?.1),
    }
}

/// Samples the model at spacing `h`, with the target count estimated from the
/// seeds' bounding box.
pub fn sample_boundary(model: &GeometricModel, h: f64, tau: f64) -> Result<BoundarySample> {
    let target = estimate_target_count(model.sites(), h)?;
    sample_boundary_count(model, target, h, tau)
}

/// Evaluates `⌈τ·target⌉` candidates and decimates them at spacing `h`.
pub fn sample_boundary_count(
    model: &GeometricModel,
    target: usize,
    h: f64,
    tau: f64,
) -> Result<BoundarySample> {
    check_spacing(h)?;
    if !(tau >= 1.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tau must be at least 1, got {tau}"
        )));
    }
    let n_hat = (tau * target as f64).ceil() as usize;
    if n_hat < 4 {
        return Err(Error::TooFew {
            needed: 4,
            got: n_hat,
        });
    }
    let candidates = candidate_params(model.manifold(), n_hat)?;
    let points = model.evaluate(&candidates)?;
    let keep = decimate(&points, h)?;
    let params = candidates.select(&keep);
    let (points, normals) = model.evaluate_with_normals(&params)?;
    Ok(BoundarySample {
        params,
        points,
        normals,
        h,
        tau,
    })
}
