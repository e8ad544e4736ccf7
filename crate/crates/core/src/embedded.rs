//! Local modification of a node set for closed embedded boundaries.
//!
//! Each embedded object is fitted, sampled at the node spacing and inflated by
//! `h` along its normals (which point away from the object). A node is removed
//! when it lies in the oriented box of an inflated boundary and on or behind
//! the nearest inflated point: `(x − ζ)·n(ζ) ≤ 0`. Nodes outside every box are
//! never touched. The membership map records which object swallowed each
//! original node so that an object can later be removed and its nodes
//! restored.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::boundary::{candidate_params, sample_boundary_count, BoundarySample, DEFAULT_TAU};
use crate::error::{Error, Result};
use crate::generator::{NodeClass, NodeSet};
use crate::obb::OrientedBox;
use crate::points::{dist2, dot, PointSet};
use crate::sbf::GeometricModel;
use crate::shapes::ShapeSpec;
use crate::spatial::SpatialIndex;
use crate::sphere::ParametricNodeSet;

/// Seeds of one embedded object.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSpec {
    pub seeds: PointSet,
    pub params: ParametricNodeSet,
}

impl EmbeddedSpec {
    pub fn new(seeds: PointSet, params: ParametricNodeSet) -> Self {
        Self { seeds, params }
    }

    /// `n` seeds of a closed-form shape.
    pub fn from_shape(shape: &ShapeSpec, n: usize) -> Result<Self> {
        let params = candidate_params(shape.manifold(), n)?;
        Ok(Self {
            seeds: shape.sample(&params)?,
            params,
        })
    }
}

/// Ratio of embedded to domain boundary node counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Fixed(f64),
    /// Ratio of the seed-cloud OBB perimeter (surface area) to that of the
    /// domain boundary nodes.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedOptions {
    pub h: f64,
    pub alpha: Alpha,
    pub tau: f64,
}

impl EmbedOptions {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            alpha: Alpha::Auto,
            tau: DEFAULT_TAU,
        }
    }
}

/// A fitted, sampled and inflated embedded object.
#[derive(Debug, Clone)]
pub struct EmbeddedBoundary {
    pub id: u32,
    pub model: GeometricModel,
    pub boundary: BoundarySample,
    pub inflated: PointSet,
    pub bbox: OrientedBox,
}

/// Per original node: the embedded object that removed it (0 if present).
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMap {
    /// Shared between successive maps; never modified.
    originals: Arc<NodeSet>,
    owners: Vec<u32>,
    active: Vec<u32>,
    removed: Vec<u32>,
}

impl MembershipMap {
    /// All-zero map over an unmodified node set.
    pub fn new(originals: &NodeSet) -> Self {
        Self {
            owners: vec![0; originals.len()],
            originals: Arc::new(originals.clone()),
            active: Vec::new(),
            removed: Vec::new(),
        }
    }

    /// Rebuilds a map from stored rows; `active` and `removed` list object ids.
    pub fn from_parts(
        originals: NodeSet,
        owners: Vec<u32>,
        active: Vec<u32>,
        removed: Vec<u32>,
    ) -> Result<Self> {
        if owners.len() != originals.len() {
            return Err(Error::Format(format!(
                "{} owners for {} nodes",
                owners.len(),
                originals.len()
            )));
        }
        if let Some(o) = owners.iter().find(|&&o| o != 0 && !active.contains(&o)) {
            return Err(Error::Format(format!(
                "owner {o} is not an active embedded id"
            )));
        }
        if let Some(r) = removed.iter().find(|r| active.contains(r)) {
            return Err(Error::Format(format!("id {r} is both active and removed")));
        }
        Ok(Self {
            originals: Arc::new(originals),
            owners,
            active,
            removed,
        })
    }

    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    pub fn originals(&self) -> &NodeSet {
        &self.originals
    }

    pub fn flag(&self, i: usize) -> bool {
        self.owners[i] != 0
    }

    pub fn owner(&self, i: usize) -> u32 {
        self.owners[i]
    }

    pub fn owners(&self) -> &[u32] {
        &self.owners
    }

    /// Embedded ids currently in place.
    pub fn active_ids(&self) -> &[u32] {
        &self.active
    }

    pub fn removed_ids(&self) -> &[u32] {
        &self.removed
    }

    fn next_id(&self) -> u32 {
        self.active
            .iter()
            .chain(&self.removed)
            .copied()
            .max()
            .unwrap_or(0)
            + 1
    }

    /// Original nodes not currently removed, in original order.
    fn present(&self) -> NodeSet {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.owners[i] == 0).collect();
        self.originals.select(&keep)
    }

    /// Checks that `nodes` is this map's present originals followed by
    /// embedded-boundary nodes.
    fn check_matches(&self, nodes: &NodeSet) -> Result<()> {
        let present = (0..self.len()).filter(|&i| self.owners[i] == 0);
        let mut n = 0;
        let mut ok = true;
        for i in present {
            ok = n < nodes.len()
                && nodes.class(n) == self.originals.class(i)
                && nodes.point(n) == self.originals.point(i);
            if !ok {
                break;
            }
            n += 1;
        }
        ok &= (n..nodes.len()).all(|i| nodes.class(i) == NodeClass::EmbeddedBoundary);
        if ok {
            Ok(())
        } else {
            Err(Error::Format(
                "node set does not match the membership map".into(),
            ))
        }
    }
}

/// Result of [`embed`].
#[derive(Debug, Clone)]
pub struct Embedding {
    pub nodes: NodeSet,
    pub map: MembershipMap,
    pub boundaries: Vec<EmbeddedBoundary>,
    /// Embedded boundary nodes closer than `h/2` to a domain boundary node.
    pub collisions: usize,
    pub elapsed: Duration,
}

fn fit_and_sample(
    spec: &EmbeddedSpec,
    id: u32,
    domain_boundary: &PointSet,
    opts: &EmbedOptions,
) -> Result<EmbeddedBoundary> {
    let model = GeometricModel::fit_default(&spec.seeds, &spec.params)?;
    let n_b = domain_boundary.len() as f64;
    let alpha = match opts.alpha {
        Alpha::Fixed(a) => a,
        Alpha::Auto => {
            let own = OrientedBox::from_points(&spec.seeds)?.boundary_measure();
            let dom = OrientedBox::from_points(domain_boundary)?.boundary_measure();
            own / dom
        }
    };
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let target = (alpha * n_b).ceil() as usize;
    if target < 4 {
        return Err(Error::TooFew {
            needed: 4,
            got: target,
        });
    }
    let boundary = sample_boundary_count(&model, target, opts.h, opts.tau)?;
    let mut inflated = PointSet::with_capacity(boundary.points.dim(), boundary.len());
    let mut y = vec![0.0; boundary.points.dim()];
    for (x, n) in boundary.points.iter().zip(boundary.normals.iter()) {
        for j in 0..y.len() {
            y[j] = x[j] + opts.h * n[j];
        }
        inflated.push(&y);
    }
    let bbox = OrientedBox::from_points(&inflated)?;
    Ok(EmbeddedBoundary {
        id,
        model,
        boundary,
        inflated,
        bbox,
    })
}

/// Embeds `specs` into `nodes`, whose state is described by `map`.
///
/// New objects get ids after every id the map has seen. Surviving original
/// nodes keep their order and are followed by all embedded-boundary nodes.
pub fn embed(
    nodes: &NodeSet,
    map: &MembershipMap,
    specs: &[EmbeddedSpec],
    opts: &EmbedOptions,
) -> Result<Embedding> {
    if !(opts.h > 0.0 && opts.h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "spacing must be positive, got {}",
            opts.h
        )));
    }
    map.check_matches(nodes)?;
    let start = Instant::now();
    let domain_boundary = nodes.points_of(NodeClass::Boundary);

    let first_id = map.next_id();
    let mut boundaries = Vec::with_capacity(specs.len());
    for (k, spec) in specs.iter().enumerate() {
        if spec.seeds.dim() != nodes.dim() {
            return Err(Error::Dimension {
                expected: nodes.dim(),
                found: spec.seeds.dim(),
            });
        }
        boundaries.push(fit_and_sample(
            spec,
            first_id + k as u32,
            &domain_boundary,
            opts,
        )?);
    }

    // inflated points share the domain index, each object owning an id range
    let mut index = SpatialIndex::build(domain_boundary.clone())?;
    let mut ranges = Vec::with_capacity(boundaries.len());
    for b in &boundaries {
        ranges.push(index.insert_batch(&b.inflated)?);
    }

    let mut owners = map.owners.clone();
    let present: Vec<usize> = (0..map.len()).filter(|&i| map.owners[i] == 0).collect();
    let mut survivors = Vec::with_capacity(nodes.len());
    let mut diff = vec![0.0; nodes.dim()];
    for (pos, &orig) in present.iter().enumerate() {
        let x = nodes.point(pos);
        let mut owner = 0;
        for (b, range) in boundaries.iter().zip(&ranges) {
            if !b.bbox.contains(x) {
                continue;
            }
            let Some((id, _)) = index.nearest_in_range(x, range.clone())? else {
                continue;
            };
            let z = index.point(id);
            for j in 0..diff.len() {
                diff[j] = x[j] - z[j];
            }
            if dot(&diff, b.boundary.normals.point(id - range.start)) <= 0.0 {
                owner = b.id;
                break;
            }
        }
        if owner == 0 {
            survivors.push(pos);
        } else {
            owners[orig] = owner;
        }
    }

    let mut out = nodes.select(&survivors);
    for i in present.len()..nodes.len() {
        out.push(
            nodes.point(i),
            Some(nodes.normal(i)),
            nodes.class(i),
            nodes.owner(i),
        );
    }
    for b in &boundaries {
        out.extend_class(
            &b.boundary.points,
            Some(&b.boundary.normals),
            NodeClass::EmbeddedBoundary,
            b.id,
        );
    }

    // domain boundary nodes keep ids 0..n_b in the shared index; a ball
    // query stays cheap where a far nearest query would not
    let n_b = domain_boundary.len();
    let r2 = 0.25 * opts.h * opts.h;
    let mut collisions = 0;
    for b in &boundaries {
        for x in b.boundary.points.iter() {
            let near = index.within_radius(x, 0.5 * opts.h)?;
            if near
                .iter()
                .any(|&id| id < n_b && dist2(x, index.point(id)) < r2)
            {
                collisions += 1;
            }
        }
    }

    let mut active = map.active.clone();
    active.extend(boundaries.iter().map(|b| b.id));
    Ok(Embedding {
        nodes: out,
        map: MembershipMap {
            originals: Arc::clone(&map.originals),
            owners,
            active,
            removed: map.removed.clone(),
        },
        boundaries,
        collisions,
        elapsed: start.elapsed(),
    })
}

/// Removes embedded object `id`: its boundary nodes are deleted and every
/// original node it swallowed is restored in its original position.
///
/// A node records only the first object that contained it, so with
/// overlapping objects a restored node is not re-tested against the others.
pub fn remove_embedded(
    nodes: &NodeSet,
    map: &MembershipMap,
    id: u32,
) -> Result<(NodeSet, MembershipMap)> {
    if map.removed.contains(&id) {
        return Err(Error::AlreadyRemoved(id));
    }
    if !map.active.contains(&id) {
        return Err(Error::UnknownBoundary(id));
    }
    map.check_matches(nodes)?;
    let present_before = map.owners.iter().filter(|&&o| o == 0).count();

    let mut next = map.clone();
    for o in next.owners.iter_mut() {
        if *o == id {
            *o = 0;
        }
    }
    next.active.retain(|&a| a != id);
    next.removed.push(id);

    let mut out = next.present();
    for i in present_before..nodes.len() {
        if nodes.owner(i) != id {
            out.push(
                nodes.point(i),
                Some(nodes.normal(i)),
                nodes.class(i),
                nodes.owner(i),
            );
        }
    }
    Ok((out, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::generate;
    use crate::points::norm;
    use crate::poisson::SamplerConfig;
    use crate::sphere::equispaced_circle;

    fn disk_nodes(h: f64) -> NodeSet {
        let params = equispaced_circle(32).unwrap();
        let m = GeometricModel::fit_default(&params.embedded(), &params).unwrap();
        generate(&m, 2.0, &SamplerConfig::new(h)).unwrap().nodes
    }

    fn small_disk(cx: f64, cy: f64, r: f64) -> EmbeddedSpec {
        let shape = ShapeSpec::named("circle")
            .unwrap()
            .with("xc", cx)
            .unwrap()
            .with("yc", cy)
            .unwrap()
            .with("radius", r)
            .unwrap();
        EmbeddedSpec::from_shape(&shape, 24).unwrap()
    }

    #[test]
    fn empty_embedding_is_identity() {
        let nodes = disk_nodes(0.1);
        let map = MembershipMap::new(&nodes);
        let e = embed(&nodes, &map, &[], &EmbedOptions::new(0.1)).unwrap();
        assert_eq!(e.nodes, nodes);
        assert!(e.map.owners().iter().all(|&o| o == 0));
    }

    #[test]
    fn disk_removal_is_local_and_reversible() {
        let h = 0.04;
        let nodes = disk_nodes(h);
        let map = MembershipMap::new(&nodes);
        let r = 3.0 * h;
        let e = embed(
            &nodes,
            &map,
            &[small_disk(0.0, 0.0, r)],
            &EmbedOptions::new(h),
        )
        .unwrap();
        let removed: Vec<usize> = (0..nodes.len()).filter(|&i| e.map.flag(i)).collect();
        assert!(!removed.is_empty());
        for &i in &removed {
            assert_eq!(e.map.owner(i), 1);
            // inside the disk or within about h of it
            assert!(norm(nodes.point(i)) <= r + 1.1 * h);
        }
        let bbox = &e.boundaries[0].bbox;
        for i in 0..nodes.len() {
            if !bbox.contains(nodes.point(i)) {
                assert!(!e.map.flag(i));
            }
            // every node well outside the inflated disk survives
            if norm(nodes.point(i)) > r + 1.5 * h {
                assert!(!e.map.flag(i));
            }
        }
        let added = e.nodes.indices_of(NodeClass::EmbeddedBoundary);
        assert_eq!(added.len(), e.boundaries[0].boundary.len());
        for &k in &added {
            assert!((norm(e.nodes.point(k)) - r).abs() < 1e-6);
            // normals point away from the object
            assert!(dot(e.nodes.point(k), e.nodes.normal(k)) > 0.0);
        }

        let (back, map_back) = remove_embedded(&e.nodes, &e.map, 1).unwrap();
        assert_eq!(back, nodes);
        assert!(map_back.owners().iter().all(|&o| o == 0));
        assert!(matches!(
            remove_embedded(&back, &map_back, 1),
            Err(Error::AlreadyRemoved(1))
        ));
        assert!(matches!(
            remove_embedded(&e.nodes, &e.map, 7),
            Err(Error::UnknownBoundary(7))
        ));
    }

    #[test]
    fn removing_one_of_two_disks() {
        let h = 0.04;
        let nodes = disk_nodes(h);
        let map = MembershipMap::new(&nodes);
        let specs = [small_disk(-0.4, 0.0, 0.12), small_disk(0.4, 0.0, 0.12)];
        let e = embed(&nodes, &map, &specs, &EmbedOptions::new(h)).unwrap();
        let owned = |m: &MembershipMap, j| m.owners().iter().filter(|&&o| o == j).count();
        assert!(owned(&e.map, 1) > 0 && owned(&e.map, 2) > 0);
        for i in 0..nodes.len() {
            let x = nodes.point(i);
            match e.map.owner(i) {
                1 => assert!(x[0] < 0.0),
                2 => assert!(x[0] > 0.0),
                _ => {}
            }
        }
        let (after, m2) = remove_embedded(&e.nodes, &e.map, 1).unwrap();
        assert_eq!(owned(&m2, 1), 0);
        assert_eq!(owned(&m2, 2), owned(&e.map, 2));
        assert_eq!(
            after.count(NodeClass::EmbeddedBoundary),
            e.boundaries[1].boundary.len()
        );
        for i in 0..nodes.len() {
            if e.map.owner(i) == 2 {
                assert!(after.points().iter().all(|p| p != nodes.point(i)));
            }
        }
        // then the second one restores the original set
        let (orig, _) = remove_embedded(&after, &m2, 2).unwrap();
        assert_eq!(orig, nodes);
    }

    #[test]
    fn incremental_embedding_assigns_new_ids() {
        let h = 0.05;
        let nodes = disk_nodes(h);
        let map = MembershipMap::new(&nodes);
        let opts = EmbedOptions::new(h);
        let e1 = embed(&nodes, &map, &[small_disk(-0.4, 0.0, 0.12)], &opts).unwrap();
        let e2 = embed(&e1.nodes, &e1.map, &[small_disk(0.4, 0.0, 0.12)], &opts).unwrap();
        assert_eq!(e2.map.active_ids(), &[1, 2]);
        let (a, m) = remove_embedded(&e2.nodes, &e2.map, 1).unwrap();
        let (b, _) = remove_embedded(&a, &m, 2).unwrap();
        assert_eq!(b, nodes);
        // a node set that does not belong to the map is rejected
        assert!(embed(&e1.nodes, &map, &[], &opts).is_err());
    }

    #[test]
    fn tiny_object_only_adds_boundary_nodes() {
        let h = 0.05;
        let nodes = disk_nodes(h);
        let map = MembershipMap::new(&nodes);
        let opts = EmbedOptions::new(h);
        // far from every node, so nothing is swallowed
        let e = embed(&nodes, &map, &[small_disk(5.0, 5.0, 0.1)], &opts).unwrap();
        assert!(e.map.owners().iter().all(|&o| o == 0));
        assert!(e.nodes.count(NodeClass::EmbeddedBoundary) > 0);
        let (back, _) = remove_embedded(&e.nodes, &e.map, 1).unwrap();
        assert_eq!(back, nodes);
        let bad = EmbedOptions {
            alpha: Alpha::Fixed(1e-4),
            ..opts
        };
        assert!(embed(&nodes, &map, &[small_disk(0.0, 0.0, 0.1)], &bad).is_err());
    }
}
