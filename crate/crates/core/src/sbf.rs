//! Parametric boundary models built from polyharmonic spherical basis
//! functions.
//!
//! Each Cartesian coordinate `j` of the boundary is interpolated on the
//! parameter sphere as
//!
//! ```text
//! s^j(λ) = Σ_k c^j_k φ(‖ξ(λ) − ξ(λ_k)‖)
//! ```
//!
//! with `φ(r) = r^m` (odd `m`) on S¹ and `φ(r) = r^m log r` (even `m`) on S².
//! The chordal distance equals `√(2(1 − ξ·ξ_k))` for unit vectors; it is
//! computed from the difference vector to avoid cancellation near `r = 0`.
//! There is no shape parameter and no polynomial augmentation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LuFactorization};
use crate::points::{dot, norm, PointSet};
use crate::sphere::{embed_unchecked, Manifold, ParametricNodeSet};

pub const DEFAULT_CIRCLE_ORDER: u32 = 7;
pub const DEFAULT_SPHERE_ORDER: u32 = 6;

/// Data sites closer than this on the parameter sphere are duplicates.
const DUPLICATE_TOLERANCE: f64 = 1e-12;
/// Tangents shorter than this fraction of the model extent count as zero.
const ZERO_TANGENT_TOLERANCE: f64 = 1e-14;

/// Polyharmonic kernel of a fixed order on S¹ or S².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kernel {
    manifold: Manifold,
    order: u32,
}

impl Kernel {
    /// Odd orders on the circle, even orders on the sphere.
    pub fn new(manifold: Manifold, order: u32) -> Result<Self> {
        let ok = match manifold {
            Manifold::Circle => order % 2 == 1,
            Manifold::Sphere => order % 2 == 0 && order >= 2,
        };
        if !ok {
            return Err(Error::KernelOrder {
                order,
                manifold: manifold.name(),
            });
        }
        Ok(Self { manifold, order })
    }

    pub fn default_for(manifold: Manifold) -> Self {
        match manifold {
            Manifold::Circle => Self {
                manifold,
                order: DEFAULT_CIRCLE_ORDER,
            },
            Manifold::Sphere => Self {
                manifold,
                order: DEFAULT_SPHERE_ORDER,
            },
        }
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        let rm = r.powi(self.order as i32);
        match self.manifold {
            Manifold::Circle => rm,
            Manifold::Sphere => {
                if r == 0.0 {
                    0.0
                } else {
                    rm * r.ln()
                }
            }
        }
    }

    /// `φ'(r) / r`, continued by 0 at `r = 0` (valid for orders ≥ 3).
    #[inline]
    fn slope_over_r(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let m = self.order as i32;
        let rm2 = r.powi(m - 2);
        match self.manifold {
            Manifold::Circle => m as f64 * rm2,
            Manifold::Sphere => rm2 * (m as f64 * r.ln() + 1.0),
        }
    }
}

/// `φ(r)` for the kernel of `order` on `manifold`.
pub fn kernel(r: f64, order: u32, manifold: Manifold) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::InvalidArgument(format!("negative distance {r}")));
    }
    Ok(Kernel::new(manifold, order)?.value(r))
}

/// Value and parametric derivatives of the model at one parameter.
struct Jet {
    value: Vec<f64>,
    /// `∂s/∂λ`.
    d_lambda: Vec<f64>,
    /// `∂s/∂λ / cos θ` on the sphere (equal to `d_lambda` on the circle).
    d_lambda_unit: Vec<f64>,
    /// `∂s/∂θ` (sphere only).
    d_theta: Vec<f64>,
}

/// A fitted closed curve (d = 2) or closed surface (d = 3).
#[derive(Debug, Clone)]
pub struct GeometricModel {
    kernel: Kernel,
    params: ParametricNodeSet,
    unit: PointSet,
    sites: PointSet,
    coeffs: Vec<f64>,
    orientation: f64,
    extent: f64,
}

impl GeometricModel {
    /// Fits the model with the default kernel for the seeds' dimension.
    pub fn fit_default(seeds: &PointSet, params: &ParametricNodeSet) -> Result<Self> {
        Self::fit(seeds, params, Kernel::default_for(params.manifold()))
    }

    /// Solves the interpolation system for every coordinate with a single
    /// factorization.
    pub fn fit(seeds: &PointSet, params: &ParametricNodeSet, kernel: Kernel) -> Result<Self> {
        let manifold = params.manifold();
        if kernel.manifold() != manifold {
            return Err(Error::KernelOrder {
                order: kernel.order(),
                manifold: manifold.name(),
            });
        }
        let d = manifold.ambient_dim();
        if seeds.dim() != d {
            return Err(Error::Dimension {
                expected: d,
                found: seeds.dim(),
            });
        }
        if seeds.len() != params.len() {
            return Err(Error::InvalidArgument(format!(
                "{} seeds but {} parameters",
                seeds.len(),
                params.len()
            )));
        }
        let needed = d + 1;
        let n = seeds.len();
        if n < needed {
            return Err(Error::TooFew { needed, got: n });
        }

        let unit = params.embedded();
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for k in 0..i {
                let r = chord(unit.point(i), unit.point(k));
                if r < DUPLICATE_TOLERANCE {
                    return Err(Error::DuplicateParameter(k, i));
                }
                let v = kernel.value(r);
                a[(i, k)] = v;
                a[(k, i)] = v;
            }
            a[(i, i)] = kernel.value(0.0);
        }
        let rhs = DenseMatrix::new(n, d, seeds.as_flat().to_vec())?;
        let coeffs = LuFactorization::new(&a)?.solve(&rhs)?;

        let extent = seeds.iter().map(norm).fold(0.0, f64::max);
        let mut model = Self {
            kernel,
            params: params.clone(),
            unit,
            sites: seeds.clone(),
            coeffs: coeffs.as_slice().to_vec(),
            orientation: 1.0,
            extent,
        };
        model.orientation = model.vote_orientation();
        Ok(model)
    }

    /// Majority vote of `(x − centroid)·n` over the data sites.
    fn vote_orientation(&self) -> f64 {
        let c = self.sites.centroid();
        let mut balance = 0i64;
        for i in 0..self.params.len() {
            let p = self.params.get(i);
            if let Some(n) = self.raw_normal(&self.jet(p, true)) {
                let x = self.sites.point(i);
                let s: f64 = x
                    .iter()
                    .zip(&c)
                    .zip(&n)
                    .map(|((x, c), n)| (x - c) * n)
                    .sum();
                if s > 0.0 {
                    balance += 1;
                } else if s < 0.0 {
                    balance -= 1;
                }
            }
        }
        if balance >= 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn dim(&self) -> usize {
        self.sites.dim()
    }

    pub fn manifold(&self) -> Manifold {
        self.kernel.manifold()
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn params(&self) -> &ParametricNodeSet {
        &self.params
    }

    pub fn sites(&self) -> &PointSet {
        &self.sites
    }

    /// Coefficients, row `k` holding `c^1_k .. c^d_k`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn check_params(&self, eval: &ParametricNodeSet) -> Result<()> {
        if eval.manifold() != self.manifold() {
            return Err(Error::ParameterRange(format!(
                "model lives on {} but parameters are on {}",
                self.manifold().name(),
                eval.manifold().name()
            )));
        }
        Ok(())
    }

    fn jet(&self, p: &[f64], derivs: bool) -> Jet {
        let d = self.dim();
        let xi = embed_unchecked(p);
        let mut value = vec![0.0; d];
        let mut du = vec![0.0; d];
        let mut dt = vec![0.0; d];

        let (sl, cl) = p[0].sin_cos();
        // unit longitude direction and latitude derivative of ξ
        let (u, w, cos_t) = if d == 2 {
            (vec![-sl, cl], Vec::new(), 1.0)
        } else {
            let (st, ct) = p[1].sin_cos();
            (vec![-sl, cl, 0.0], vec![-cl * st, -sl * st, ct], ct)
        };

        for k in 0..self.unit.len() {
            let xk = self.unit.point(k);
            let r = chord(&xi, xk);
            let c = &self.coeffs[k * d..(k + 1) * d];
            let phi = self.kernel.value(r);
            for j in 0..d {
                value[j] += c[j] * phi;
            }
            if derivs {
                let g = self.kernel.slope_over_r(r);
                if g != 0.0 {
                    let fu = -g * dot(&u, xk);
                    for j in 0..d {
                        du[j] += c[j] * fu;
                    }
                    if d == 3 {
                        let fw = -g * dot(&w, xk);
                        for j in 0..d {
                            dt[j] += c[j] * fw;
                        }
                    }
                }
            }
        }
        let d_lambda = du.iter().map(|v| v * cos_t).collect();
        Jet {
            value,
            d_lambda,
            d_lambda_unit: du,
            d_theta: dt,
        }
    }

    /// Unnormalized-orientation unit normal, or `None` for a degenerate
    /// parametrization.
    fn raw_normal(&self, jet: &Jet) -> Option<Vec<f64>> {
        let floor = ZERO_TANGENT_TOLERANCE * self.extent;
        if self.dim() == 2 {
            let t = &jet.d_lambda;
            let len = norm(t);
            if !(len > floor) {
                return None;
            }
            Some(vec![t[1] / len, -t[0] / len])
        } else {
            let a = &jet.d_lambda_unit;
            let b = &jet.d_theta;
            let n = [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ];
            let len = norm(&n);
            if !(len > floor * norm(a).max(norm(b))) || len == 0.0 {
                return None;
            }
            Some(n.iter().map(|v| v / len).collect())
        }
    }

    /// Boundary points at the given parameters.
    pub fn evaluate(&self, eval: &ParametricNodeSet) -> Result<PointSet> {
        self.check_params(eval)?;
        let mut out = PointSet::with_capacity(self.dim(), eval.len());
        for p in eval.iter() {
            out.push(&self.jet(p, false).value);
        }
        Ok(out)
    }

    /// Parametric derivatives: `[∂s/∂λ]` on the circle, `[∂s/∂λ, ∂s/∂θ]` on
    /// the sphere, one point set per direction.
    pub fn tangents(&self, eval: &ParametricNodeSet) -> Result<Vec<PointSet>> {
        self.check_params(eval)?;
        let d = self.dim();
        let mut dl = PointSet::with_capacity(d, eval.len());
        let mut dt = PointSet::with_capacity(d, eval.len());
        for p in eval.iter() {
            let jet = self.jet(p, true);
            dl.push(&jet.d_lambda);
            if d == 3 {
                dt.push(&jet.d_theta);
            }
        }
        Ok(if d == 2 { vec![dl] } else { vec![dl, dt] })
    }

    /// Unit outward normals. In 2D the unit tangent is rotated by −π/2, in 3D
    /// the normal is the normalized cross product of the two tangents; the
    /// global sign is fixed at fit time by a centroid majority vote.
    pub fn normals(&self, eval: &ParametricNodeSet) -> Result<PointSet> {
        self.check_params(eval)?;
        let mut out = PointSet::with_capacity(self.dim(), eval.len());
        for (i, p) in eval.iter().enumerate() {
            let n = self
                .raw_normal(&self.jet(p, true))
                .ok_or(Error::ZeroTangent(i))?;
            let n: Vec<f64> = n.iter().map(|v| v * self.orientation).collect();
            out.push(&n);
        }
        Ok(out)
    }

    /// Points and unit normals in one pass.
    pub fn evaluate_with_normals(&self, eval: &ParametricNodeSet) -> Result<(PointSet, PointSet)> {
        self.check_params(eval)?;
        let d = self.dim();
        let mut pts = PointSet::with_capacity(d, eval.len());
        let mut nrm = PointSet::with_capacity(d, eval.len());
        for (i, p) in eval.iter().enumerate() {
            let jet = self.jet(p, true);
            let n = self.raw_normal(&jet).ok_or(Error::ZeroTangent(i))?;
            pts.push(&jet.value);
            nrm.push(&n.iter().map(|v| v * self.orientation).collect::<Vec<_>>());
        }
        Ok((pts, nrm))
    }

    pub fn to_json(&self) -> String {
        let k = self.manifold().param_count();
        let d = self.dim();
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            dim: d,
            order: self.kernel.order(),
            orientation: self.orientation as i32,
            params: self
                .params
                .as_flat()
                .chunks(k)
                .map(<[f64]>::to_vec)
                .collect(),
            sites: self.sites.iter().map(<[f64]>::to_vec).collect(),
            coefficients: self.coeffs.chunks(d).map(<[f64]>::to_vec).collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("model file: {e}")))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(Error::Format(format!(
                "unsupported model format {} v{}",
                file.format, file.version
            )));
        }
        let manifold = Manifold::for_dim(file.dim)?;
        let kernel = Kernel::new(manifold, file.order)?;
        let n = file.sites.len();
        if file.params.len() != n || file.coefficients.len() != n {
            return Err(Error::Format(
                "params, sites and coefficients differ in length".into(),
            ));
        }
        let params = ParametricNodeSet::new(manifold, file.params.concat())?;
        if params.len() != n {
            return Err(Error::Format("malformed parameter rows".into()));
        }
        let sites =
            PointSet::from_rows(&file.sites).map_err(|e| Error::Format(format!("sites: {e}")))?;
        if sites.dim() != file.dim || file.coefficients.iter().any(|c| c.len() != file.dim) {
            return Err(Error::Format("row width does not match dim".into()));
        }
        let coeffs = file.coefficients.concat();
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite coefficient".into()));
        }
        let orientation = match file.orientation {
            1 => 1.0,
            -1 => -1.0,
            o => return Err(Error::Format(format!("orientation must be ±1, got {o}"))),
        };
        let extent = sites.iter().map(norm).fold(0.0, f64::max);
        Ok(Self {
            kernel,
            unit: params.embedded(),
            params,
            sites,
            coeffs,
            orientation,
            extent,
        })
    }
}

const MODEL_FORMAT: &str = "sbf-geometric-model";
const MODEL_VERSION: u32 = 1;

/// On-disk layout of a fitted model.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    dim: usize,
    order: u32,
    orientation: i32,
    params: Vec<Vec<f64>>,
    sites: Vec<Vec<f64>>,
    coefficients: Vec<Vec<f64>>,
}

#[inline]
fn chord(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
