//! Small dense linear algebra: LU with partial pivoting for the interpolation
//! systems and symmetric eigendecomposition of 2×2 / 3×3 covariance matrices.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is reported singular.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Allowed relative asymmetry for [`sym_eig`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

const JACOBI_TOLERANCE: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i / cols.max(1)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::Dimension {
                expected: cols,
                found: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Builds an `rows × cols` matrix from a generator over `(i, j)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization `P·A = L·U` of a square matrix, kept so that several
/// right-hand sides can be solved against one factorization.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::Shape(format!(
                "expected a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        let col_scale: Vec<f64> = (0..n)
            .map(|j| (0..n).fold(0.0f64, |m, i| m.max(a[(i, j)].abs())))
            .collect();

        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            let threshold = PIVOT_TOLERANCE * col_scale[k];
            if pivot <= threshold || pivot == 0.0 {
                return Err(Error::Singular {
                    column: k,
                    pivot,
                    threshold,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let (upper, lower) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..(k + 1) * n];
            let inv = 1.0 / pivot_row[k];
            for row in lower.chunks_exact_mut(n) {
                let factor = row[k] * inv;
                row[k] = factor;
                if factor != 0.0 {
                    for (r, u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *r -= factor * u;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A·X = B` for every column of `B`.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.n;
        if b.rows != n {
            return Err(Error::Dimension {
                expected: n,
                found: b.rows,
            });
        }
        let k = b.cols;
        let mut x = DenseMatrix::zeros(n, k);
        for (i, &p) in self.perm.iter().enumerate() {
            x.data[i * k..(i + 1) * k].copy_from_slice(b.row(p));
        }
        // forward substitution, unit lower triangle
        for i in 0..n {
            let (done, rest) = x.data.split_at_mut(i * k);
            let xi = &mut rest[..k];
            for j in 0..i {
                let l = self.lu[i * n + j];
                if l != 0.0 {
                    for (a, b) in xi.iter_mut().zip(&done[j * k..(j + 1) * k]) {
                        *a -= l * b;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = x.data.split_at_mut((i + 1) * k);
            let xi = &mut head[i * k..];
            for j in i + 1..n {
                let u = self.lu[i * n + j];
                if u != 0.0 {
                    let xj = &tail[(j - i - 1) * k..(j - i) * k];
                    for (a, b) in xi.iter_mut().zip(xj) {
                        *a -= u * b;
                    }
                }
            }
            let d = self.lu[i * n + i];
            for a in xi.iter_mut() {
                *a /= d;
            }
        }
        Ok(x)
    }
}

/// Solves `A·X = B` by Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    LuFactorization::new(a)?.solve(b)
}

/// Eigendecomposition of a symmetric 2×2 or 3×3 matrix.
///
/// Eigenvalues are returned in ascending order with matching orthonormal
/// eigenvector columns in `V`. Each eigenvector is signed so that its
/// largest-magnitude component is positive.
pub fn sym_eig(c: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    let d = c.rows;
    if c.cols != d || !(d == 2 || d == 3) {
        return Err(Error::Shape(format!(
            "sym_eig supports 2x2 and 3x3 matrices, got {}x{}",
            c.rows, c.cols
        )));
    }
    let scale = c.max_abs();
    let mut asym = 0.0f64;
    for i in 0..d {
        for j in 0..i {
            asym = asym.max((c[(i, j)] - c[(j, i)]).abs());
        }
    }
    if scale > 0.0 && asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::Asymmetric(asym / scale));
    }

    let (mut vecs, vals) = if d == 2 {
        eig2(c[(0, 0)], 0.5 * (c[(0, 1)] + c[(1, 0)]), c[(1, 1)])
    } else {
        jacobi3(c)
    };

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut v = DenseMatrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        let e = &mut vecs[src];
        let lead = e
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            e.iter_mut().for_each(|x| *x = -*x);
        }
        for row in 0..d {
            v[(row, col)] = e[row];
        }
    }
    Ok((v, sorted_vals))
}

fn eig2(a: f64, b: f64, c: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    if b == 0.0 {
        return (vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![a, c]);
    }
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    let hi = mean + radius;
    let lo = mean - radius;
    let (x, y) = if a >= c { (hi - c, b) } else { (b, hi - a) };
    let norm = x.hypot(y);
    let (x, y) = (x / norm, y / norm);
    (vec![vec![-y, x], vec![x, y]], vec![lo, hi])
}

fn jacobi3(c: &DenseMatrix) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut a = [[0.0f64; 3]; 3];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = 0.5 * (c[(i, j)] + c[(j, i)]);
        }
    }
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let frob = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = (2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2])).sqrt();
        if off <= JACOBI_TOLERANCE * frob {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let cs = 1.0 / (t * t + 1.0).sqrt();
            let sn = t * cs;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = cs * akp - sn * akq;
                a[k][q] = sn * akp + cs * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = cs * apk - sn * aqk;
                a[q][k] = sn * apk + cs * aqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = cs * vp - sn * vq;
                row[q] = sn * vp + cs * vq;
            }
        }
    }
    let vecs = (0..3).map(|j| (0..3).map(|i| v[i][j]).collect()).collect();
    (vecs, vec![a[0][0], a[1][1], a[2][2]])
}
