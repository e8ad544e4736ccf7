//! Oriented bounding boxes from principal component analysis.
//!
//! The box axes are the eigenvectors of the covariance of the cloud. Points are
//! expressed in the box frame as `y = x·V` (rows), bounded per axis, and the
//! `2^d` corners are mapped back with `x = y·Vᵀ`.

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, DenseMatrix};
use crate::points::PointSet;

/// Each face is pushed outward by this fraction of the longest side.
pub const FACE_PADDING: f64 = 1e-9;
/// Eigenvalue ratio below which the cloud is flat or collinear.
const DEGENERATE_RATIO: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedBox {
    rotation: DenseMatrix,
    min: Vec<f64>,
    max: Vec<f64>,
    vertices: PointSet,
    degenerate: bool,
}

impl OrientedBox {
    /// PCA box of `points`, padded on every face.
    ///
    /// Flat or collinear clouds still produce a box (zero sides are widened to
    /// the padding width) but are flagged by [`OrientedBox::is_degenerate`].
    pub fn from_points(points: &PointSet) -> Result<Self> {
        let d = points.dim();
        if d != 2 && d != 3 {
            return Err(Error::Dimension {
                expected: 3,
                found: d,
            });
        }
        if points.len() < d + 1 {
            return Err(Error::TooFew {
                needed: d + 1,
                got: points.len(),
            });
        }
        let mean = points.centroid();
        let mut cov = DenseMatrix::zeros(d, d);
        for p in points.iter() {
            for i in 0..d {
                for j in 0..=i {
                    cov[(i, j)] += (p[i] - mean[i]) * (p[j] - mean[j]);
                }
            }
        }
        let n = points.len() as f64;
        for i in 0..d {
            for j in 0..=i {
                let v = cov[(i, j)] / n;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        let (rotation, eigenvalues) = sym_eig(&cov)?;
        let top = eigenvalues[d - 1];
        if !(top > 0.0) {
            return Err(Error::DegenerateCloud("all points coincide".into()));
        }
        let degenerate = eigenvalues[0] < DEGENERATE_RATIO * top;

        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        let mut y = vec![0.0; d];
        for p in points.iter() {
            to_frame(&rotation, p, &mut y);
            for j in 0..d {
                min[j] = min[j].min(y[j]);
                max[j] = max[j].max(y[j]);
            }
        }
        let longest = (0..d).map(|j| max[j] - min[j]).fold(0.0, f64::max);
        let pad = FACE_PADDING * longest;
        for j in 0..d {
            min[j] -= pad;
            max[j] += pad;
        }

        let mut vertices = PointSet::with_capacity(d, 1 << d);
        for mask in 0..(1usize << d) {
            let corner: Vec<f64> = (0..d)
                .map(|j| if mask >> j & 1 == 1 { max[j] } else { min[j] })
                .collect();
            vertices.push(&from_frame(&rotation, &corner));
        }
        Ok(Self {
            rotation,
            min,
            max,
            vertices,
            degenerate,
        })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Eigenvector columns, ascending eigenvalue order.
    pub fn rotation(&self) -> &DenseMatrix {
        &self.rotation
    }

    /// Lower corner in the box frame.
    pub fn min(&self) -> &[f64] {
        &self.min
    }

    /// Upper corner in the box frame.
    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn vertices(&self) -> &PointSet {
        &self.vertices
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn sides(&self) -> Vec<f64> {
        self.min.iter().zip(&self.max).map(|(a, b)| b - a).collect()
    }

    /// Box-frame coordinates of a world point.
    pub fn to_frame(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        to_frame(&self.rotation, x, &mut y);
        y
    }

    /// World coordinates of a box-frame point.
    pub fn from_frame(&self, y: &[f64]) -> Vec<f64> {
        from_frame(&self.rotation, y)
    }

    /// Closed containment test in the box frame.
    pub fn contains(&self, x: &[f64]) -> bool {
        let d = self.dim();
        (0..d).all(|j| {
            let y: f64 = (0..d).map(|i| x[i] * self.rotation[(i, j)]).sum();
            y >= self.min[j] && y <= self.max[j]
        })
    }

    /// `(perimeter, area)` in 2D, `(surface area, volume)` in 3D.
    pub fn measure(&self) -> (f64, f64) {
        let s = self.sides();
        if s.len() == 2 {
            (2.0 * (s[0] + s[1]), s[0] * s[1])
        } else {
            (
                2.0 * (s[0] * s[1] + s[1] * s[2] + s[0] * s[2]),
                s[0] * s[1] * s[2],
            )
        }
    }

    /// Perimeter in 2D, surface area in 3D.
    pub fn boundary_measure(&self) -> f64 {
        self.measure().0
    }
}

#[inline]
fn to_frame(v: &DenseMatrix, x: &[f64], y: &mut [f64]) {
    for (j, yj) in y.iter_mut().enumerate() {
        *yj = x.iter().enumerate().map(|(i, xi)| xi * v[(i, j)]).sum();
    }
}

fn from_frame(v: &DenseMatrix, y: &[f64]) -> Vec<f64> {
    (0..y.len())
        .map(|i| y.iter().enumerate().map(|(j, yj)| v[(i, j)] * yj).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::dist2;
    use crate::rng::Rng;
    use std::f64::consts::FRAC_PI_4;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn unit_square() {
        let pts = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let b = OrientedBox::from_points(&pts).unwrap();
        let (per, area) = b.measure();
        assert!((per - 4.0).abs() < 1e-8 && (area - 1.0).abs() < 1e-8);
        for p in pts.iter() {
            assert!(b.contains(p));
        }
        assert!(b.contains(&[0.5, 0.5]));
        assert!(!b.contains(&[0.5 + 2.0 * 2f64.sqrt(), 0.5]));
        for v in b.vertices().iter() {
            assert!(b.contains(v));
            assert!(pts.iter().any(|p| dist2(p, v).sqrt() < 1e-8));
        }
    }

    fn rotate(rows: &[[f64; 2]], angle: f64) -> PointSet {
        let (s, c) = angle.sin_cos();
        let turned: Vec<[f64; 2]> = rows
            .iter()
            .map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]])
            .collect();
        PointSet::from_rows(&turned).unwrap()
    }

    #[test]
    fn rotated_rectangle_keeps_its_sides() {
        let rect = [[0.0, 0.0], [2.0, 0.0], [0.0, 1.0], [2.0, 1.0]];
        let b = OrientedBox::from_points(&rotate(&rect, FRAC_PI_4)).unwrap();
        let sides = sorted(b.sides());
        assert!((sides[0] - 1.0).abs() < 1e-8 && (sides[1] - 2.0).abs() < 1e-8);
        // the axis-aligned box of the tilted rectangle has area 4.5
        assert!(b.measure().1 < 2.0 + 1e-7);
    }

    #[test]
    fn rotated_square_gets_a_valid_box() {
        // the corners of a square have isotropic covariance, so any frame is
        // a principal frame
        let sq = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let pts = rotate(&sq, FRAC_PI_4);
        let b = OrientedBox::from_points(&pts).unwrap();
        assert!(pts.iter().all(|p| b.contains(p)));
        assert!(b.measure().1 <= 2.0 + 1e-7);
    }

    #[test]
    fn box_measures() {
        let mut rows = Vec::new();
        for mask in 0..8 {
            rows.push([
                (mask & 1) as f64,
                2.0 * (mask >> 1 & 1) as f64,
                3.0 * (mask >> 2 & 1) as f64,
            ]);
        }
        let b = OrientedBox::from_points(&PointSet::from_rows(&rows).unwrap()).unwrap();
        let (area, vol) = b.measure();
        assert!(
            (area - 22.0).abs() < 1e-6 && (vol - 6.0).abs() < 1e-6,
            "{area} {vol}"
        );
        assert!((sorted(b.sides())[2] - 3.0).abs() < 1e-7);
        assert!(!b.is_degenerate());
    }

    #[test]
    fn degenerate_cloud_is_flagged_and_padded() {
        let pts = PointSet::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        let b = OrientedBox::from_points(&pts).unwrap();
        assert!(b.is_degenerate());
        let (per, area) = b.measure();
        assert!(per > 0.0 && area > 0.0);
        for p in pts.iter() {
            assert!(b.contains(p));
        }
        let same = PointSet::from_rows(&[[1.0, 1.0]; 4]).unwrap();
        assert!(OrientedBox::from_points(&same).is_err());
        assert!(OrientedBox::from_points(&PointSet::from_rows(&[[0.0, 0.0]]).unwrap()).is_err());
    }

    #[test]
    fn ellipsoid_cloud_containment_and_rotation_invariance() {
        let mut rng = Rng::new(3);
        let mut pts = PointSet::new(3);
        for _ in 0..2000 {
            let g: Vec<f64> = (0..3).map(|_| rng.uniform() * 2.0 - 1.0).collect();
            pts.push(&[3.0 * g[0] + 0.5 * g[1], g[1], 0.2 * g[2] + 1.0]);
        }
        let b = OrientedBox::from_points(&pts).unwrap();
        assert!(pts.iter().all(|p| b.contains(p)));

        // rotate the cloud about z and x
        let (s1, c1) = 0.7f64.sin_cos();
        let (s2, c2) = 1.9f64.sin_cos();
        let mut turned = PointSet::new(3);
        for p in pts.iter() {
            let q = [c1 * p[0] - s1 * p[1], s1 * p[0] + c1 * p[1], p[2]];
            turned.push(&[q[0], c2 * q[1] - s2 * q[2], s2 * q[1] + c2 * q[2]]);
        }
        let bt = OrientedBox::from_points(&turned).unwrap();
        assert!(turned.iter().all(|p| bt.contains(p)));
        for (a, b) in b.sides().iter().zip(bt.sides()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
