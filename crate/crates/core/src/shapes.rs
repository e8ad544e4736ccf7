//! Closed-form boundary shapes used for seeding, convergence studies and
//! benchmarks.
//!
//! | name           | manifold | parameters (defaults) |
//! |----------------|----------|-----------------------|
//! | `cinf-2d`      | S¹ | `xc=yc=0.9, a=0.04, b=0.05, amplitude=0.09, width=0.1` |
//! | `c2-2d`        | S¹ | `xc=yc=0.2, a=b=0.1, amplitude=0.04, width=0.9` |
//! | `cinf-3d`      | S² | `xc=yc=zc=0.9, a=0.1, b=0.2, c=0.09, amplitude=0.09, width=0.2` |
//! | `c3-3d`        | S² | `xc=yc=0.1, zc=0.2, a=b=c=0.1, amplitude=0.04, width=0.64` |
//! | `star`         | S¹ | `xc=yc=0, scale=1` |
//! | `ellipse`      | S¹ | `xc=yc=0, a=1, b=0.5, tilt=0` |
//! | `circle`       | S¹ | `xc=yc=0, radius=1` |
//! | `sphere`       | S² | `xc=yc=zc=0, radius=1` |
//! | `rbc`          | S² | `xc=yc=zc=0, radius=1` |
//! | `bumpy-sphere` | S² | `xc=yc=zc=0, radius=1, amplitude=0.1` |
//!
//! The bump shapes scale an ellipse/ellipsoid by `1 + amplitude·exp(−g/width)`
//! where `g` vanishes at `λ = 0` (2D) or at the north pole (3D).

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::sphere::{Manifold, ParametricNodeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    CInf2d,
    C2_2d,
    CInf3d,
    C3_3d,
    Star,
    Ellipse,
    Circle,
    Sphere,
    Rbc,
    BumpySphere,
}

const KINDS: &[(&str, Kind)] = &[
    ("cinf-2d", Kind::CInf2d),
    ("c2-2d", Kind::C2_2d),
    ("cinf-3d", Kind::CInf3d),
    ("c3-3d", Kind::C3_3d),
    ("star", Kind::Star),
    ("ellipse", Kind::Ellipse),
    ("circle", Kind::Circle),
    ("sphere", Kind::Sphere),
    ("rbc", Kind::Rbc),
    ("bumpy-sphere", Kind::BumpySphere),
];

fn defaults(kind: Kind) -> Vec<(&'static str, f64)> {
    match kind {
        Kind::CInf2d => vec![
            ("xc", 0.9),
            ("yc", 0.9),
            ("a", 0.04),
            ("b", 0.05),
            ("amplitude", 0.09),
            ("width", 0.1),
        ],
        Kind::C2_2d => vec![
            ("xc", 0.2),
            ("yc", 0.2),
            ("a", 0.1),
            ("b", 0.1),
            ("amplitude", 0.04),
            ("width", 0.9),
        ],
        Kind::CInf3d => vec![
            ("xc", 0.9),
            ("yc", 0.9),
            ("zc", 0.9),
            ("a", 0.1),
            ("b", 0.2),
            ("c", 0.09),
            ("amplitude", 0.09),
            ("width", 0.2),
            ("pole_lambda", 0.0),
            ("pole_theta", FRAC_PI_2),
        ],
        Kind::C3_3d => vec![
            ("xc", 0.1),
            ("yc", 0.1),
            ("zc", 0.2),
            ("a", 0.1),
            ("b", 0.1),
            ("c", 0.1),
            ("amplitude", 0.04),
            ("width", 16.0 / 25.0),
            ("pole_lambda", 0.0),
            ("pole_theta", FRAC_PI_2),
        ],
        Kind::Star => vec![("xc", 0.0), ("yc", 0.0), ("scale", 1.0)],
        Kind::Ellipse => vec![
            ("xc", 0.0),
            ("yc", 0.0),
            ("a", 1.0),
            ("b", 0.5),
            ("tilt", 0.0),
        ],
        Kind::Circle => vec![("xc", 0.0), ("yc", 0.0), ("radius", 1.0)],
        Kind::Sphere | Kind::Rbc => vec![("xc", 0.0), ("yc", 0.0), ("zc", 0.0), ("radius", 1.0)],
        Kind::BumpySphere => vec![
            ("xc", 0.0),
            ("yc", 0.0),
            ("zc", 0.0),
            ("radius", 1.0),
            ("amplitude", 0.1),
        ],
    }
}

/// A named closed-form shape with its parameter record.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    name: &'static str,
    kind: Kind,
    params: Vec<(&'static str, f64)>,
}

impl ShapeSpec {
    /// The shape with its default parameters.
    pub fn named(name: &str) -> Result<Self> {
        let (name, kind) = KINDS
            .iter()
            .find(|(n, _)| *n == name)
            .copied()
            .ok_or_else(|| Error::UnknownShape(name.to_string()))?;
        Ok(Self {
            name,
            kind,
            params: defaults(kind),
        })
    }

    pub fn names() -> impl Iterator<Item = &'static str> {
        KINDS.iter().map(|(n, _)| *n)
    }

    /// Overrides one parameter.
    pub fn with(mut self, param: &str, value: f64) -> Result<Self> {
        self.set(param, value)?;
        Ok(self)
    }

    pub fn set(&mut self, param: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{param} = {value} is not finite"
            )));
        }
        match self.params.iter_mut().find(|(n, _)| *n == param) {
            Some(slot) => {
                slot.1 = value;
                Ok(())
            }
            None => Err(Error::UnknownShapeParameter {
                shape: self.name.to_string(),
                param: param.to_string(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn params(&self) -> &[(&'static str, f64)] {
        &self.params
    }

    pub fn get(&self, param: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| *n == param).map(|p| p.1)
    }

    fn p(&self, param: &str) -> f64 {
        self.get(param).expect("parameter defined for this shape")
    }

    pub fn manifold(&self) -> Manifold {
        match self.kind {
            Kind::CInf2d | Kind::C2_2d | Kind::Star | Kind::Ellipse | Kind::Circle => {
                Manifold::Circle
            }
            _ => Manifold::Sphere,
        }
    }

    pub fn dim(&self) -> usize {
        self.manifold().ambient_dim()
    }

    fn check(&self, params: &ParametricNodeSet) -> Result<()> {
        if params.manifold() != self.manifold() {
            return Err(Error::Dimension {
                expected: self.manifold().param_count(),
                found: params.manifold().param_count(),
            });
        }
        Ok(())
    }

    /// Exact shape points at the given parameters.
    pub fn sample(&self, params: &ParametricNodeSet) -> Result<PointSet> {
        self.check(params)?;
        let mut out = PointSet::with_capacity(self.dim(), params.len());
        for p in params.iter() {
            out.push(&self.point(p));
        }
        Ok(out)
    }

    /// Exact `d/dλ` for the smooth planar shapes.
    pub fn derivative(&self, params: &ParametricNodeSet) -> Result<PointSet> {
        self.check(params)?;
        if !matches!(
            self.kind,
            Kind::CInf2d | Kind::C2_2d | Kind::Ellipse | Kind::Circle
        ) {
            return Err(Error::InvalidArgument(format!(
                "no closed-form derivative for {}",
                self.name
            )));
        }
        let mut out = PointSet::with_capacity(2, params.len());
        for p in params.iter() {
            out.push(&self.point_derivative(p[0]));
        }
        Ok(out)
    }

    fn point(&self, p: &[f64]) -> Vec<f64> {
        match self.kind {
            Kind::CInf2d | Kind::C2_2d => {
                let l = p[0];
                let (f, _) = self.bump_2d(l);
                let (xc, yc) = (self.p("xc"), self.p("yc"));
                vec![
                    f * (xc + self.p("a") * l.cos()),
                    f * (yc + self.p("b") * l.sin()),
                ]
            }
            Kind::Star => {
                let l = p[0];
                let r = self.p("scale") * (1.5 * l).cos().abs().powf((3.0 * l).sin());
                vec![self.p("xc") + r * l.cos(), self.p("yc") + r * l.sin()]
            }
            Kind::Ellipse => {
                let (sl, cl) = p[0].sin_cos();
                let (st, ct) = self.p("tilt").sin_cos();
                let (a, b) = (self.p("a"), self.p("b"));
                vec![
                    self.p("xc") + a * cl * ct - b * sl * st,
                    self.p("yc") + a * cl * st + b * sl * ct,
                ]
            }
            Kind::Circle => {
                let r = self.p("radius");
                vec![self.p("xc") + r * p[0].cos(), self.p("yc") + r * p[0].sin()]
            }
            Kind::CInf3d | Kind::C3_3d => {
                let (l, t) = (p[0], p[1]);
                let rc = 1.0
                    - t.cos() * self.p("pole_theta").cos() * (l - self.p("pole_lambda")).cos()
                    - t.sin() * self.p("pole_theta").sin();
                let g = if self.kind == Kind::CInf3d {
                    rc * rc
                } else {
                    rc.max(0.0).powf(1.5)
                };
                let f = 1.0 + self.p("amplitude") * (-g / self.p("width")).exp();
                vec![
                    f * (self.p("xc") + self.p("a") * l.cos() * t.cos()),
                    f * (self.p("yc") + self.p("b") * l.sin() * t.cos()),
                    f * (self.p("zc") + self.p("c") * t.sin()),
                ]
            }
            Kind::Sphere => {
                let r = self.p("radius");
                let (l, t) = (p[0], p[1]);
                vec![
                    self.p("xc") + r * l.cos() * t.cos(),
                    self.p("yc") + r * l.sin() * t.cos(),
                    self.p("zc") + r * t.sin(),
                ]
            }
            Kind::Rbc => {
                // biconcave disk: half-thickness profile in cos θ
                let r = self.p("radius");
                let (l, t) = (p[0], p[1]);
                let c2 = t.cos() * t.cos();
                let profile = 0.207161 + 2.002558 * c2 - 1.122762 * c2 * c2;
                vec![
                    self.p("xc") + r * t.cos() * l.cos(),
                    self.p("yc") + r * t.cos() * l.sin(),
                    self.p("zc") + 0.5 * r * t.sin() * profile,
                ]
            }
            Kind::BumpySphere => {
                let (l, t) = (p[0], p[1]);
                let (x, y, z) = (l.cos() * t.cos(), l.sin() * t.cos(), t.sin());
                let bump = x * x * x - 3.0 * x * y * y + 0.5 * (5.0 * z * z * z - 3.0 * z);
                let r = self.p("radius") * (1.0 + self.p("amplitude") * bump);
                vec![
                    self.p("xc") + r * x,
                    self.p("yc") + r * y,
                    self.p("zc") + r * z,
                ]
            }
        }
    }

    /// Scale factor and its λ-derivative for the planar bump shapes.
    fn bump_2d(&self, l: f64) -> (f64, f64) {
        let (amp, width) = (self.p("amplitude"), self.p("width"));
        let (s, c) = l.sin_cos();
        let (g, dg) = if self.kind == Kind::CInf2d {
            let u = 1.0 - c;
            (u * u, 2.0 * u * s)
        } else {
            // (1 − cos²λ)^1.5 = |sin λ|³
            let a = s.abs();
            (a * a * a, 3.0 * a * s * c)
        };
        let e = amp * (-g / width).exp();
        (1.0 + e, -e * dg / width)
    }

    fn point_derivative(&self, l: f64) -> Vec<f64> {
        let (s, c) = l.sin_cos();
        match self.kind {
            Kind::CInf2d | Kind::C2_2d => {
                let (f, df) = self.bump_2d(l);
                let (a, b) = (self.p("a"), self.p("b"));
                let x = [self.p("xc") + a * c, self.p("yc") + b * s];
                let dx = [-a * s, b * c];
                vec![df * x[0] + f * dx[0], df * x[1] + f * dx[1]]
            }
            Kind::Ellipse => {
                let (st, ct) = self.p("tilt").sin_cos();
                let (a, b) = (self.p("a"), self.p("b"));
                vec![-a * s * ct - b * c * st, -a * s * st + b * c * ct]
            }
            Kind::Circle => {
                let r = self.p("radius");
                vec![-r * s, r * c]
            }
            _ => unreachable!("checked by caller"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::dist2;
    use crate::sphere::{equispaced_circle, spiral_points};
    use std::f64::consts::PI;

    fn one(l: f64) -> ParametricNodeSet {
        ParametricNodeSet::new(Manifold::Circle, vec![l]).unwrap()
    }

    #[test]
    fn star_at_zero() {
        let s = ShapeSpec::named("star").unwrap();
        assert_eq!(s.sample(&one(0.0)).unwrap().point(0), &[1.0, 0.0]);
    }

    #[test]
    fn smooth_bump_at_zero() {
        // (1 − cos 0)² = 0, so the factor is 1 + 0.09 on (0.94, 0.9)
        let s = ShapeSpec::named("cinf-2d").unwrap();
        let p = s.sample(&one(0.0)).unwrap();
        assert!(dist2(p.point(0), &[1.0246, 0.981]).sqrt() < 1e-12);
    }

    #[test]
    fn surface_bump_at_pole() {
        // at θ = π/2 the pole distance is zero: factor 1 + 0.09 on (0.9, 0.9, 0.99)
        let s = ShapeSpec::named("cinf-3d").unwrap();
        let p = ParametricNodeSet::new(Manifold::Sphere, vec![0.0, FRAC_PI_2]).unwrap();
        let x = s.sample(&p).unwrap();
        let want = [0.9 * 1.09, 0.9 * 1.09, 0.99 * 1.09];
        assert!(dist2(x.point(0), &want).sqrt() < 1e-12);
    }

    #[test]
    fn zero_amplitude_gives_ellipse() {
        let params = equispaced_circle(37).unwrap();
        for name in ["cinf-2d", "c2-2d"] {
            let s = ShapeSpec::named(name)
                .unwrap()
                .with("amplitude", 0.0)
                .unwrap();
            let pts = s.sample(&params).unwrap();
            for (x, l) in pts.iter().zip(params.iter()) {
                let want = [
                    s.p("xc") + s.p("a") * l[0].cos(),
                    s.p("yc") + s.p("b") * l[0].sin(),
                ];
                assert_eq!(x, &want);
            }
        }
    }

    #[test]
    fn resampling_is_bitwise_identical() {
        let (_, params) = spiral_points(200).unwrap();
        for name in ["cinf-3d", "c3-3d", "rbc", "bumpy-sphere", "sphere"] {
            let s = ShapeSpec::named(name).unwrap();
            assert_eq!(s.sample(&params).unwrap(), s.sample(&params).unwrap());
        }
    }

    #[test]
    fn tilted_ellipse_axes() {
        let s = ShapeSpec::named("ellipse")
            .unwrap()
            .with("tilt", PI / 4.0)
            .unwrap();
        let x = s.sample(&one(0.0)).unwrap();
        let h = 0.5f64.sqrt();
        assert!(dist2(x.point(0), &[h, h]).sqrt() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let step = 1e-6;
        for name in ["cinf-2d", "c2-2d", "ellipse", "circle"] {
            let s = ShapeSpec::named(name).unwrap().with("xc", 0.3).unwrap();
            for k in 0..40 {
                let l = -3.0 + 0.15 * k as f64;
                let d = s.derivative(&one(l)).unwrap();
                let a = s.sample(&one(l - step)).unwrap();
                let b = s.sample(&one(l + step)).unwrap();
                for j in 0..2 {
                    let fd = (b.point(0)[j] - a.point(0)[j]) / (2.0 * step);
                    assert!((fd - d.point(0)[j]).abs() < 1e-7, "{name} {l}");
                }
            }
        }
        assert!(ShapeSpec::named("star")
            .unwrap()
            .derivative(&one(0.0))
            .is_err());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            ShapeSpec::named("blob"),
            Err(Error::UnknownShape(_))
        ));
        assert!(matches!(
            ShapeSpec::named("star").unwrap().with("a", 1.0),
            Err(Error::UnknownShapeParameter { .. })
        ));
        let p = ParametricNodeSet::new(Manifold::Sphere, vec![0.0, 0.0]).unwrap();
        assert!(ShapeSpec::named("star").unwrap().sample(&p).is_err());
    }
}
