//! Gradient-robust, well-balanced Bernardi-Raugel / upwind finite-volume
//! solver for the steady compressible Stokes equations in 2D.

pub mod analysis;
pub mod assembly;
pub mod checks;
pub mod autodiff;
pub mod error;
pub mod experiment;
pub mod fespace;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod reconstruction;
pub mod scalar;
pub mod solver;
pub mod sparse;

/// Floating-point type of the discrete solver.
pub type Real = f64;
/// Point or vector in the plane.
pub type Point = [Real; 2];

pub use error::{AnalysisError, FeError, MeshError, SolverError};
pub use mesh::Mesh;
pub use scalar::Scalar;
