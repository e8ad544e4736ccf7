//! kd-tree over `d`-dimensional points with stable integer ids.
//!
//! Trees split at the median of the widest-spread axis. Batch insertion either
//! adds a secondary tree over the new ids or, once the batch is large relative
//! to the index, rebuilds a single tree. Queries compare squared distances, so
//! results match a linear scan that uses [`dist2`] exactly.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::points::{dist2, PointSet};

const LEAF_SIZE: usize = 8;
const NO_CHILD: u32 = u32::MAX;
/// Batches larger than this fraction of the current size trigger a rebuild.
const REBUILD_FRACTION: f64 = 0.25;
const MAX_TREES: usize = 8;

#[derive(Debug, Clone)]
struct Node {
    start: u32,
    end: u32,
    left: u32,
    right: u32,
    axis: usize,
    split: f64,
    min_id: u32,
    max_id: u32,
    /// Bounding box of the node's points (unused axes stay zero).
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Node {
    /// Squared distance from `q` to the node's bounding box.
    #[inline]
    fn box_dist2(&self, q: &[f64]) -> f64 {
        let mut d2 = 0.0;
        for (j, &x) in q.iter().enumerate() {
            let e = (self.lo[j] - x).max(x - self.hi[j]).max(0.0);
            d2 += e * e;
        }
        d2
    }
}

#[derive(Debug, Clone)]
struct Tree {
    ids: Vec<u32>,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy)]
struct Filter {
    range: (usize, usize),
    exclude: Option<usize>,
}

impl Filter {
    const ALL: Filter = Filter {
        range: (0, usize::MAX),
        exclude: None,
    };

    #[inline]
    fn accepts(&self, id: usize) -> bool {
        id >= self.range.0 && id < self.range.1 && self.exclude != Some(id)
    }

    #[inline]
    fn overlaps(&self, node: &Node) -> bool {
        (node.max_id as usize) >= self.range.0 && (node.min_id as usize) < self.range.1
    }
}

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: PointSet,
    trees: Vec<Tree>,
}

impl SpatialIndex {
    /// Builds an index over `points`; ids are the point positions.
    pub fn build(points: PointSet) -> Result<Self> {
        if !(2..=3).contains(&points.dim()) {
            return Err(Error::Dimension {
                expected: 3,
                found: points.dim(),
            });
        }
        let n = points.len();
        if n > u32::MAX as usize - 1 {
            return Err(Error::InvalidArgument(
                "too many points for the index".into(),
            ));
        }
        let mut index = Self {
            points,
            trees: Vec::new(),
        };
        if n > 0 {
            let tree = Tree::build(&index.points, 0..n);
            index.trees.push(tree);
        }
        Ok(index)
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn point(&self, id: usize) -> &[f64] {
        self.points.point(id)
    }

    /// Appends `points` with ids continuing from the current length and
    /// returns the id range assigned to them.
    pub fn insert_batch(&mut self, points: &PointSet) -> Result<Range<usize>> {
        if points.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: points.dim(),
            });
        }
        let old = self.len();
        self.points.extend(points);
        let new = self.len();
        if new == old {
            return Ok(old..new);
        }
        let rebuild = old == 0
            || (new - old) as f64 > REBUILD_FRACTION * old as f64
            || self.trees.len() >= MAX_TREES;
        if rebuild {
            self.trees = vec![Tree::build(&self.points, 0..new)];
        } else {
            self.trees.push(Tree::build(&self.points, old..new));
        }
        Ok(old..new)
    }

    fn check_query(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: q.len(),
            });
        }
        Ok(())
    }

    fn nearest_with(&self, q: &[f64], filter: Filter) -> Result<Option<(usize, f64)>> {
        self.check_query(q)?;
        if self.is_empty() {
            return Err(Error::EmptyIndex);
        }
        let mut best = (f64::INFINITY, usize::MAX);
        for tree in &self.trees {
            tree.nearest(&self.points, 0, q, filter, &mut best);
        }
        Ok((best.1 != usize::MAX).then(|| (best.1, best.0.sqrt())))
    }

    /// Closest stored point to `q` and its distance; ties go to the smaller id.
    pub fn nearest(&self, q: &[f64]) -> Result<(usize, f64)> {
        Ok(self
            .nearest_with(q, Filter::ALL)?
            .expect("non-empty index always has a nearest point"))
    }

    /// Closest stored point other than `exclude`; `None` if it is the only one.
    pub fn nearest_excluding(&self, q: &[f64], exclude: usize) -> Result<Option<(usize, f64)>> {
        self.nearest_with(
            q,
            Filter {
                range: (0, usize::MAX),
                exclude: Some(exclude),
            },
        )
    }

    /// Closest stored point whose id lies in `ids`.
    pub fn nearest_in_range(&self, q: &[f64], ids: Range<usize>) -> Result<Option<(usize, f64)>> {
        self.nearest_with(
            q,
            Filter {
                range: (ids.start, ids.end),
                exclude: None,
            },
        )
    }

    /// Ids of all points with distance ≤ `r` from `q`, ascending.
    pub fn within_radius(&self, q: &[f64], r: f64) -> Result<Vec<usize>> {
        self.check_query(q)?;
        if r < 0.0 || r.is_nan() {
            return Err(Error::NegativeRadius(r));
        }
        let mut out = Vec::new();
        for tree in &self.trees {
            tree.within(&self.points, 0, q, r * r, &mut out);
        }
        out.sort_unstable();
        Ok(out)
    }
}

impl Tree {
    fn build(points: &PointSet, ids: Range<usize>) -> Tree {
        let mut tree = Tree {
            ids: ids.map(|i| i as u32).collect(),
            nodes: Vec::new(),
        };
        let n = tree.ids.len();
        tree.build_node(points, 0, n);
        tree
    }

    fn build_node(&mut self, points: &PointSet, start: usize, end: usize) -> u32 {
        let dim = points.dim();
        let slice = &mut self.ids[start..end];
        let (min_id, max_id) = slice
            .iter()
            .fold((u32::MAX, 0u32), |(lo, hi), &id| (lo.min(id), hi.max(id)));

        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        lo[..dim].fill(f64::INFINITY);
        hi[..dim].fill(f64::NEG_INFINITY);
        for &id in slice.iter() {
            for (a, &x) in points.point(id as usize).iter().enumerate() {
                lo[a] = lo[a].min(x);
                hi[a] = hi[a].max(x);
            }
        }
        let (axis, spread) = (0..dim)
            .map(|a| (a, hi[a] - lo[a]))
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });

        let this = self.nodes.len() as u32;
        self.nodes.push(Node {
            start: start as u32,
            end: end as u32,
            left: NO_CHILD,
            right: NO_CHILD,
            axis,
            split: 0.0,
            min_id,
            max_id,
            lo,
            hi,
        });
        if end - start <= LEAF_SIZE || spread <= 0.0 {
            return this;
        }

        let mid = (end - start) / 2;
        let key = |id: &u32| points.point(*id as usize)[axis];
        slice.select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)));
        let split = key(&slice[mid]);

        let left = self.build_node(points, start, start + mid);
        let right = self.build_node(points, start + mid, end);
        let node = &mut self.nodes[this as usize];
        node.left = left;
        node.right = right;
        node.split = split;
        this
    }

    fn nearest(
        &self,
        points: &PointSet,
        node: u32,
        q: &[f64],
        filter: Filter,
        best: &mut (f64, usize),
    ) {
        let nd = &self.nodes[node as usize];
        if !filter.overlaps(nd) {
            return;
        }
        if nd.left == NO_CHILD {
            for &id in &self.ids[nd.start as usize..nd.end as usize] {
                let id = id as usize;
                if !filter.accepts(id) {
                    continue;
                }
                let d2 = dist2(points.point(id), q);
                if d2 < best.0 || (d2 == best.0 && id < best.1) {
                    *best = (d2, id);
                }
            }
            return;
        }
        let diff = q[nd.axis] - nd.split;
        let (near, far) = if diff <= 0.0 {
            (nd.left, nd.right)
        } else {
            (nd.right, nd.left)
        };
        if self.nodes[near as usize].box_dist2(q) <= best.0 {
            self.nearest(points, near, q, filter, best);
        }
        if self.nodes[far as usize].box_dist2(q) <= best.0 {
            self.nearest(points, far, q, filter, best);
        }
    }

    fn within(&self, points: &PointSet, node: u32, q: &[f64], r2: f64, out: &mut Vec<usize>) {
        let nd = &self.nodes[node as usize];
        if nd.left == NO_CHILD {
            for &id in &self.ids[nd.start as usize..nd.end as usize] {
                if dist2(points.point(id as usize), q) <= r2 {
                    out.push(id as usize);
                }
            }
            return;
        }
        let diff = q[nd.axis] - nd.split;
        let reach = diff * diff <= r2;
        if diff <= 0.0 || reach {
            self.within(points, nd.left, q, r2, out);
        }
        if diff >= 0.0 || reach {
            self.within(points, nd.right, q, r2, out);
        }
    }
}
