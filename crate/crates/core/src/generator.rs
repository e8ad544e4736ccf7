//! End-to-end node generation for a domain bounded by a fitted model.
//!
//! Boundary nodes are sampled at spacing `h` and pushed inward by `h` along
//! their normals to form an inner boundary. The oriented box of the inner
//! boundary is filled by Poisson disk sampling, and a sample is kept when it
//! lies strictly behind the nearest inner-boundary point:
//! `(x − ζ)·n(ζ) < 0`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::boundary::{sample_boundary, BoundarySample};
use crate::error::{Error, Result};
use crate::obb::OrientedBox;
use crate::points::{dot, PointSet};
use crate::poisson::{sample_box, SamplerConfig};
use crate::sbf::GeometricModel;
use crate::spatial::SpatialIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Boundary,
    Interior,
    Ghost,
    Refined,
    EmbeddedBoundary,
}

impl NodeClass {
    pub const ALL: [NodeClass; 5] = [
        NodeClass::Boundary,
        NodeClass::Interior,
        NodeClass::Ghost,
        NodeClass::Refined,
        NodeClass::EmbeddedBoundary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::Boundary => "boundary",
            NodeClass::Interior => "interior",
            NodeClass::Ghost => "ghost",
            NodeClass::Refined => "refined",
            NodeClass::EmbeddedBoundary => "embedded-boundary",
        }
    }

    /// Whether nodes of this class carry a normal.
    pub fn has_normal(self) -> bool {
        matches!(self, NodeClass::Boundary | NodeClass::EmbeddedBoundary)
    }
}

impl fmt::Display for NodeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NodeClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Format(format!("unknown node class {s:?}")))
    }
}

/// Labelled nodes. Every node has a normal slot; it is zero unless the class
/// carries a normal.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    h: f64,
    points: PointSet,
    normals: PointSet,
    classes: Vec<NodeClass>,
    owners: Vec<u32>,
}

impl NodeSet {
    pub fn new(dim: usize, h: f64) -> Self {
        Self {
            h,
            points: PointSet::new(dim),
            normals: PointSet::new(dim),
            classes: Vec::new(),
            owners: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn set_h(&mut self, h: f64) {
        self.h = h;
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn normals(&self) -> &PointSet {
        &self.normals
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.point(i)
    }

    pub fn normal(&self, i: usize) -> &[f64] {
        self.normals.point(i)
    }

    pub fn class(&self, i: usize) -> NodeClass {
        self.classes[i]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.classes
    }

    /// Embedded-boundary id that contributed the node, 0 otherwise.
    pub fn owner(&self, i: usize) -> u32 {
        self.owners[i]
    }

    pub fn push(&mut self, x: &[f64], normal: Option<&[f64]>, class: NodeClass, owner: u32) {
        self.points.push(x);
        match normal {
            Some(n) => self.normals.push(n),
            None => self.normals.push(&vec![0.0; x.len()]),
        }
        self.classes.push(class);
        self.owners.push(owner);
    }

    /// Appends `points` of one class, with optional matching normals.
    pub fn extend_class(
        &mut self,
        points: &PointSet,
        normals: Option<&PointSet>,
        class: NodeClass,
        owner: u32,
    ) {
        for i in 0..points.len() {
            self.push(points.point(i), normals.map(|n| n.point(i)), class, owner);
        }
    }

    pub fn indices_of(&self, class: NodeClass) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.classes[i] == class)
            .collect()
    }

    pub fn points_of(&self, class: NodeClass) -> PointSet {
        self.points.select(&self.indices_of(class))
    }

    pub fn count(&self, class: NodeClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// Nodes at the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> NodeSet {
        NodeSet {
            h: self.h,
            points: self.points.select(indices),
            normals: self.normals.select(indices),
            classes: indices.iter().map(|&i| self.classes[i]).collect(),
            owners: indices.iter().map(|&i| self.owners[i]).collect(),
        }
    }
}

/// Wall time spent in each stage of [`generate`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub boundary: Duration,
    pub obb: Duration,
    pub poisson: Duration,
    pub classify: Duration,
    pub total: Duration,
}

/// Output of [`generate`].
#[derive(Debug, Clone)]
pub struct Generated {
    pub nodes: NodeSet,
    pub boundary: BoundarySample,
    pub inner: PointSet,
    /// Poisson samples drawn before classification.
    pub samples: usize,
    pub timings: StageTimings,
}

/// Boundary nodes moved a distance `h` along the inward normal.
pub fn project_inward(boundary: &BoundarySample, h: f64) -> PointSet {
    offset(&boundary.points, &boundary.normals, -h)
}

fn offset(points: &PointSet, normals: &PointSet, by: f64) -> PointSet {
    let mut out = PointSet::with_capacity(points.dim(), points.len());
    let mut y = vec![0.0; points.dim()];
    for (x, n) in points.iter().zip(normals.iter()) {
        for j in 0..y.len() {
            y[j] = x[j] + by * n[j];
        }
        out.push(&y);
    }
    out
}

/// Keep mask: `x` is kept iff `(x − ζ)·n(ζ) < 0` for the nearest inner-boundary
/// point `ζ` (looked up in `index`, whose ids index `normals`).
pub fn classify_interior(
    samples: &PointSet,
    normals: &PointSet,
    index: &SpatialIndex,
) -> Result<Vec<bool>> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let mut keep = Vec::with_capacity(samples.len());
    let mut diff = vec![0.0; samples.dim()];
    for x in samples.iter() {
        let (id, _) = index.nearest(x)?;
        let z = index.point(id);
        for j in 0..diff.len() {
            diff[j] = x[j] - z[j];
        }
        keep.push(dot(&diff, normals.point(id)) < 0.0);
    }
    Ok(keep)
}

/// Boundary sampling, inward projection, box fill and classification.
/// Output order: boundary nodes, then interior nodes.
pub fn generate(model: &GeometricModel, tau: f64, cfg: &SamplerConfig) -> Result<Generated> {
    cfg.validate()?;
    let h = cfg.h;
    let start = Instant::now();

    let boundary = sample_boundary(model, h, tau)?;
    let t_boundary = start.elapsed();

    let inner = project_inward(&boundary, h);
    let index = SpatialIndex::build(inner.clone())?;
    let bbox = OrientedBox::from_points(&inner)?;
    let t_obb = start.elapsed();

    let samples = sample_box(&bbox, cfg)?;
    let t_poisson = start.elapsed();

    let keep = classify_interior(&samples, &boundary.normals, &index)?;
    let t_classify = start.elapsed();

    let mut nodes = NodeSet::new(model.dim(), h);
    nodes.extend_class(
        &boundary.points,
        Some(&boundary.normals),
        NodeClass::Boundary,
        0,
    );
    for (i, &k) in keep.iter().enumerate() {
        if k {
            nodes.push(samples.point(i), None, NodeClass::Interior, 0);
        }
    }
    let total = start.elapsed();
    Ok(Generated {
        nodes,
        boundary,
        inner,
        samples: samples.len(),
        timings: StageTimings {
            boundary: t_boundary,
            obb: t_obb - t_boundary,
            poisson: t_poisson - t_obb,
            classify: t_classify - t_poisson,
            total,
        },
    })
}

/// Boundary nodes moved a distance `h` along the outward normal.
pub fn ghost_nodes(nodes: &NodeSet, h: f64) -> PointSet {
    let idx = nodes.indices_of(NodeClass::Boundary);
    offset(&nodes.points.select(&idx), &nodes.normals.select(&idx), h)
}

/// One layer of boundary nodes moved inward by each offset; offsets must be strictly
/// ascending inside `(0, h)`.
pub fn refine_boundary(nodes: &NodeSet, offsets: &[f64]) -> Result<PointSet> {
    let h = nodes.h();
    for (i, &o) in offsets.iter().enumerate() {
        if !(o > 0.0 && o < h) {
            return Err(Error::ParameterRange(format!(
                "refinement offset {o} outside (0, {h})"
            )));
        }
        if i > 0 && o <= offsets[i - 1] {
            return Err(Error::ParameterRange(
                "refinement offsets must ascend".into(),
            ));
        }
    }
    let idx = nodes.indices_of(NodeClass::Boundary);
    let pts = nodes.points.select(&idx);
    let nrm = nodes.normals.select(&idx);
    let mut out = PointSet::with_capacity(nodes.dim(), pts.len() * offsets.len());
    for &o in offsets {
        out.extend(&offset(&pts, &nrm, -o));
    }
    Ok(out)
}

/// Distance diagnostics between interior and boundary nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clearance {
    /// Smallest interior-to-boundary distance.
    pub min_distance: f64,
    /// Interior nodes closer than `h/2` to a boundary node.
    pub close_count: usize,
}

pub fn boundary_clearance(nodes: &NodeSet) -> Result<Clearance> {
    let mut bnd = nodes.points_of(NodeClass::Boundary);
    bnd.extend(&nodes.points_of(NodeClass::EmbeddedBoundary));
    let index = SpatialIndex::build(bnd)?;
    let mut min_distance = f64::INFINITY;
    let mut close_count = 0;
    for i in nodes.indices_of(NodeClass::Interior) {
        let (_, d) = index.nearest(nodes.point(i))?;
        min_distance = min_distance.min(d);
        if d < 0.5 * nodes.h() {
            close_count += 1;
        }
    }
    Ok(Clearance {
        min_distance,
        close_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::{dist2, norm};
    use crate::sphere::equispaced_circle;

    fn circle_model() -> GeometricModel {
        let params = equispaced_circle(32).unwrap();
        GeometricModel::fit_default(&params.embedded(), &params).unwrap()
    }

    fn min_pair(p: &PointSet) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..p.len() {
            for j in 0..i {
                m = m.min(dist2(p.point(i), p.point(j)));
            }
        }
        m.sqrt()
    }

    #[test]
    fn class_names_round_trip() {
        for c in NodeClass::ALL {
            assert_eq!(c.as_str().parse::<NodeClass>().unwrap(), c);
        }
        assert!("edge".parse::<NodeClass>().is_err());
    }

    #[test]
    fn inward_projection() {
        let m = circle_model();
        let b = sample_boundary(&m, 0.05, 2.0).unwrap();
        let inner = project_inward(&b, 0.1);
        for (x, y) in b.points.iter().zip(inner.iter()) {
            assert!((dist2(x, y).sqrt() - 0.1).abs() < 1e-12);
            assert!((norm(y) - 0.9).abs() < 1e-6);
        }
        assert_eq!(project_inward(&b, 0.0), b.points);
    }

    #[test]
    fn classification_rules() {
        // inner boundary: unit circle with radial normals
        let params = equispaced_circle(64).unwrap();
        let pts = params.embedded();
        let index = SpatialIndex::build(pts.clone()).unwrap();
        let samples = PointSet::from_rows(&[[0.0, 0.0], [1.5, 0.0], [1.0, 0.0]]).unwrap();
        let keep = classify_interior(&samples, &pts, &index).unwrap();
        assert_eq!(keep, vec![true, false, false]);
        let empty = SpatialIndex::build(PointSet::new(2)).unwrap();
        assert!(classify_interior(&samples, &pts, &empty).is_err());
    }

    #[test]
    fn unit_disk() {
        let m = circle_model();
        let h = 0.05;
        let cfg = SamplerConfig {
            seed: 7,
            ..SamplerConfig::new(h)
        };
        let g = generate(&m, 2.0, &cfg).unwrap();
        let interior = g.nodes.points_of(NodeClass::Interior);
        assert!(interior.len() > 600, "{}", interior.len());
        assert!(min_pair(&interior) >= h);
        assert!(min_pair(&g.nodes.points_of(NodeClass::Boundary)) >= h);
        let c = boundary_clearance(&g.nodes).unwrap();
        assert!(c.min_distance >= 0.8 * h, "{}", c.min_distance);
        assert_eq!(c.close_count, 0);
        for x in interior.iter() {
            assert!(norm(x) < 1.0 - 0.8 * h);
        }
        let again = generate(&m, 2.0, &cfg).unwrap();
        assert_eq!(again.nodes, g.nodes);
    }

    #[test]
    fn ghosts_and_layers() {
        let m = circle_model();
        let h = 0.1;
        let g = generate(&m, 2.0, &SamplerConfig::new(h)).unwrap();
        let nb = g.nodes.count(NodeClass::Boundary);
        let ghosts = ghost_nodes(&g.nodes, h);
        assert_eq!(ghosts.len(), nb);
        for x in ghosts.iter() {
            assert!((norm(x) - 1.1).abs() < 1e-6);
        }
        let index = SpatialIndex::build(g.inner.clone()).unwrap();
        let keep = classify_interior(&ghosts, &g.boundary.normals, &index).unwrap();
        assert!(keep.iter().all(|k| !k));

        let layer = refine_boundary(&g.nodes, &[h / 2.0]).unwrap();
        for x in layer.iter() {
            assert!((norm(x) - (1.0 - h / 2.0)).abs() < 1e-6);
        }
        assert!(refine_boundary(&g.nodes, &[]).unwrap().is_empty());
        let two = refine_boundary(&g.nodes, &[h / 3.0, 2.0 * h / 3.0]).unwrap();
        assert_eq!(two.len(), 2 * nb);
        for (k, x) in two.iter().enumerate() {
            let layer = (k / nb) as f64 + 1.0;
            let b = g.nodes.point(k % nb);
            assert!((dist2(x, b).sqrt() - layer * h / 3.0).abs() < 1e-12);
        }
        assert!(refine_boundary(&g.nodes, &[h]).is_err());
        assert!(refine_boundary(&g.nodes, &[0.05, 0.02]).is_err());
    }
}
