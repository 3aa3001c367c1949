use thiserror::Error;

/// Errors raised by mesh handling, kernel evaluation and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BemError {
    #[error("elastic moduli out of range: {0}")]
    ModuliOutOfRange(String),
    #[error("mesh is not closed: {0}")]
    MeshOpen(String),
    #[error("mesh faces are not consistently oriented: {0}")]
    MeshNotOrientable(String),
    #[error("mesh normals point inward (signed volume {0:e})")]
    MeshInverted(f64),
    #[error("mesh face {face} is degenerate (area {area:e})")]
    MeshDegenerateFace { face: usize, area: f64 },
    #[error("invalid mesh: {0}")]
    MeshInvalid(String),
    #[error("field does not match mesh: expected {expected} faces, got {got}")]
    MeshMismatch { expected: usize, got: usize },
    #[error("cavity touches or crosses the free surface (max x3 = {0:e})")]
    CavityTouchesSurface(f64),
    #[error("kernel evaluated at its singular point")]
    SingularPoint,
    #[error("point outside the closed lower half-space: {0}")]
    InvalidHalfSpacePoint(String),
    #[error("evaluation point lies on the cavity boundary (distance {0:e})")]
    PointOnBoundary(f64),
    #[error("evaluation point {0} lies inside the cavity")]
    PointInsideCavity(usize),
    #[error("linear system is singular: pivot {pivot:e} at row {row} (matrix norm {norm:e})")]
    SingularSystem { row: usize, pivot: f64, norm: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for BemError {
    fn from(e: std::io::Error) -> Self {
        BemError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, BemError>;
