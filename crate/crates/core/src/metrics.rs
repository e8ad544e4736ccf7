//! Node-quality histograms, model error norms and convergence slopes.

use crate::error::{Error, Result};
use crate::points::{dist2, PointSet};
use crate::sbf::{GeometricModel, Kernel};
use crate::shapes::ShapeSpec;
use crate::spatial::SpatialIndex;
use crate::sphere::{equispaced_circle, spiral_points, Manifold, ParametricNodeSet};

/// Distance from every point to its nearest other point.
pub fn nearest_distances(points: &PointSet) -> Result<Vec<f64>> {
    if points.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: points.len(),
        });
    }
    let index = SpatialIndex::build(points.clone())?;
    (0..points.len())
        .map(|i| {
            Ok(index
                .nearest_excluding(points.point(i), i)?
                .expect("at least two points")
                .1)
        })
        .collect()
}

/// Relative slack (in bin widths) for assigning a distance to an edge.
const EDGE_TOL: f64 = 1e-9;

/// Uniform bins `[i·w, (i+1)·w)` over `[0, max]` plus an overflow bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub max_dist: f64,
    pub counts: Vec<usize>,
    pub overflow: usize,
    /// Smallest nearest-neighbour distance seen.
    pub min_distance: f64,
}

impl Histogram {
    pub fn new(bin_width: f64, max_dist: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bin width must be positive, got {bin_width}"
            )));
        }
        if !(max_dist >= bin_width && max_dist.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "maximum distance {max_dist} is below the bin width"
            )));
        }
        let ratio = max_dist / bin_width;
        let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio {
            ratio.round()
        } else {
            ratio.ceil()
        } as usize;
        Ok(Self {
            bin_width,
            max_dist,
            counts: vec![0; n],
            overflow: 0,
            min_distance: f64::INFINITY,
        })
    }

    /// Bin holding distance `x`, or `None` past the last bin.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let w = self.bin_width;
        let mut i = (x / w).floor().max(0.0) as usize;
        // a distance within rounding of an edge belongs to the bin above it
        let tol = EDGE_TOL * w;
        if i > 0 && x < i as f64 * w - tol {
            i -= 1;
        } else if x >= (i + 1) as f64 * w - tol {
            i += 1;
        }
        let n = self.counts.len();
        if i < n {
            Some(i)
        } else if x <= self.max_dist {
            Some(n - 1)
        } else {
            None
        }
    }

    pub fn add(&mut self, x: f64) {
        self.min_distance = self.min_distance.min(x);
        match self.bin_of(x) {
            Some(i) => self.counts[i] += 1,
            None => self.overflow += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.overflow
    }

    pub fn left_edge(&self, i: usize) -> f64 {
        i as f64 * self.bin_width
    }

    /// Whether the bin containing `x` has the largest count.
    pub fn mode_at(&self, x: f64) -> bool {
        match self.bin_of(x) {
            Some(b) => {
                let top = self.counts.iter().copied().max().unwrap_or(0);
                self.counts[b] == top && top >= self.overflow
            }
            None => false,
        }
    }

    /// Whether counts do not increase from the bin containing `x` over the
    /// following `k` bins.
    pub fn non_increasing_after(&self, x: f64, k: usize) -> bool {
        match self.bin_of(x) {
            Some(b) if b + k < self.counts.len() => {
                self.counts[b..=b + k].windows(2).all(|w| w[0] >= w[1])
            }
            _ => false,
        }
    }

    /// Rows `left_edge,count`, the last row being the overflow bin.
    pub fn to_text(&self) -> String {
        let mut out = String::from("left_edge,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{:.16e},{}\n", self.left_edge(i), c));
        }
        out.push_str(&format!("{:.16e},{}\n", self.max_dist, self.overflow));
        out
    }
}

/// Histogram of nearest-neighbour distances.
pub fn nn_histogram(points: &PointSet, bin_width: f64, max_dist: f64) -> Result<Histogram> {
    let mut hist = Histogram::new(bin_width, max_dist)?;
    for d in nearest_distances(points)? {
        hist.add(d);
    }
    Ok(hist)
}

/// `h/4` bins up to `4h`.
pub fn default_histogram(points: &PointSet, h: f64) -> Result<Histogram> {
    nn_histogram(points, h / 4.0, 4.0 * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    /// Root mean square of pointwise Euclidean errors.
    L2,
    Max,
}

fn reduce(errors: impl Iterator<Item = f64>, norm: ErrorNorm) -> f64 {
    let mut count = 0usize;
    let mut acc = 0.0f64;
    for e in errors {
        count += 1;
        match norm {
            ErrorNorm::L2 => acc += e * e,
            ErrorNorm::Max => acc = acc.max(e),
        }
    }
    match norm {
        ErrorNorm::L2 if count > 0 => (acc / count as f64).sqrt(),
        _ => acc,
    }
}

/// Error of the model against the exact shape at `eval`.
pub fn shape_error(
    model: &GeometricModel,
    shape: &ShapeSpec,
    eval: &ParametricNodeSet,
    norm: ErrorNorm,
) -> Result<f64> {
    let got = model.evaluate(eval)?;
    let want = shape.sample(eval)?;
    Ok(reduce(
        got.iter().zip(want.iter()).map(|(a, b)| dist2(a, b).sqrt()),
        norm,
    ))
}

/// Error of the model's λ-derivative against the exact shape derivative.
pub fn derivative_error(
    model: &GeometricModel,
    shape: &ShapeSpec,
    eval: &ParametricNodeSet,
    norm: ErrorNorm,
) -> Result<f64> {
    let got = model.tangents(eval)?;
    let want = shape.derivative(eval)?;
    Ok(reduce(
        got[0]
            .iter()
            .zip(want.iter())
            .map(|(a, b)| dist2(a, b).sqrt()),
        norm,
    ))
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("xs and ys differ in length".into()));
    }
    if xs.len() < 3 {
        return Err(Error::TooFew {
            needed: 3,
            got: xs.len(),
        });
    }
    if let Some(v) = xs.iter().chain(ys).find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "slope fit needs positive values, got {v}"
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "slope fit needs distinct x values".into(),
        ));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// One rung of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n_d: usize,
    pub max_error: f64,
    pub l2_error: f64,
    /// λ-derivative max error (planar shapes with a closed-form derivative).
    pub derivative_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Slope of log max error against log `N_d`.
    pub slope: f64,
    pub derivative_slope: Option<f64>,
}

impl ConvergenceTable {
    /// Algebraic order in the seed spacing `h_d ∝ N_d^{-1/(d-1)}`.
    pub fn order(&self, manifold: Manifold) -> f64 {
        -self.slope * manifold.param_count() as f64
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("n_d,max_error,l2_error,derivative_error\n");
        for r in &self.rows {
            let d = r
                .derivative_error
                .map(|e| format!("{e:.16e}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{}\n",
                r.n_d, r.max_error, r.l2_error, d
            ));
        }
        out.push_str(&format!("# slope,{:.6}\n", self.slope));
        if let Some(s) = self.derivative_slope {
            out.push_str(&format!("# derivative_slope,{s:.6}\n"));
        }
        out
    }
}

/// Seed parameters for `n` seeds on the shape's manifold.
pub fn seed_params(manifold: Manifold, n: usize) -> Result<ParametricNodeSet> {
    match manifold {
        Manifold::Circle => equispaced_circle(n),
        Manifold::Sphere => Ok(spiral_points(n)?.1),
    }
}

/// Fits the shape at each `N_d` of the ladder and measures the error at
/// `10·N_d` evaluation parameters.
pub fn convergence_study(
    shape: &ShapeSpec,
    order: Option<u32>,
    ladder: &[usize],
) -> Result<ConvergenceTable> {
    let manifold = shape.manifold();
    let kernel = match order {
        Some(m) => Kernel::new(manifold, m)?,
        None => Kernel::default_for(manifold),
    };
    let with_derivative =
        manifold == Manifold::Circle && shape.derivative(&seed_params(manifold, 3)?).is_ok();
    let mut rows = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let params = seed_params(manifold, n)?;
        let seeds = shape.sample(&params)?;
        let model = GeometricModel::fit(&seeds, &params, kernel)?;
        let eval = seed_params(manifold, 10 * n)?;
        rows.push(ConvergenceRow {
            n_d: n,
            max_error: shape_error(&model, shape, &eval, ErrorNorm::Max)?,
            l2_error: shape_error(&model, shape, &eval, ErrorNorm::L2)?,
            derivative_error: if with_derivative {
                Some(derivative_error(&model, shape, &eval, ErrorNorm::Max)?)
            } else {
                None
            },
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n_d as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_error).collect();
    let slope = fit_slope(&xs, &ys)?;
    let derivative_slope = if with_derivative {
        let ds: Vec<f64> = rows
            .iter()
            .map(|r| r.derivative_error.unwrap_or(0.0))
            .collect();
        Some(fit_slope(&xs, &ds)?)
    } else {
        None
    };
    Ok(ConvergenceTable {
        rows,
        slope,
        derivative_slope,
    })
}
