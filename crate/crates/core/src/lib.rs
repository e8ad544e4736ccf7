//! Quasi-uniform scattered node generation on irregular 2D and 3D domains.
//!
//! A closed boundary is modelled from a few seed points by polyharmonic
//! spherical basis function interpolation, sampled to a target spacing, and
//! the interior is filled by Poisson disk sampling of an oriented bounding
//! box. Node sets can be modified locally for embedded boundaries.

pub mod bench;
pub mod boundary;
pub mod embedded;
pub mod error;
pub mod generator;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod obb;
pub mod points;
pub mod poisson;
pub mod rng;
pub mod sbf;
pub mod shapes;
pub mod spatial;
pub mod sphere;

pub use error::{Error, Result};
pub use points::PointSet;
pub use sbf::{GeometricModel, Kernel};
pub use shapes::ShapeSpec;
pub use sphere::{Manifold, ParametricNodeSet};
