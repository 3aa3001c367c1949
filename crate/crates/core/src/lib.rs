//! Boundary-element solver for a pressurized cavity in an elastic
//! half-space, with a point-source (moment tensor) engine and closed-form
//! reference solutions.

pub mod asymptotics;
pub mod config;
pub mod error;
pub mod geom;
pub mod kernels;
pub mod layers;
pub mod linalg;
pub mod mesh;
pub mod moduli;
pub mod par;
pub mod quadrature;
pub mod solver;
pub mod validate;

pub use error::{BemError, Result};
pub use geom::{Matrix3, Tensor333, Vec3};
pub use moduli::ElasticModuli;
pub use mesh::{MeshReport, TriangleMesh};
pub use linalg::{DenseOperator, LuFactors};
