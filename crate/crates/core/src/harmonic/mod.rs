//! Discrete and continuous Dirichlet solvers.
//!
//! Meshes use the cotangent Laplacian with conjugate gradients. The unit
//! disk additionally has the Poisson integral and the Douglas double sum.

mod boundary;
mod disk;
mod rkc;
mod solver;


pub use boundary::{BoundaryMap, BoundaryMapError};
pub use disk::{
    circle_fn, douglas_integral, douglas_integral_fn, douglas_sequence, log_modulus_map, poisson_extension, poisson_extension_fn,
    DouglasReport, DIVERGENCE_RATIO, DOUGLAS_MIN_SAMPLES, LOG_MODULUS_SHIFT, LOG_MODULUS_TERMS, POISSON_EDGE_TOL, POISSON_SAMPLES,
};
pub use rkc::{rkc_extend_and_check, rkc_on_mesh, sample_boundary, RkcReport, ESCAPE_TOL};
pub use solver::{harmonic_replacement, solve_dirichlet, CotanLaplacian, HarmonicSolver, SolveReport, SolverOptions};

use crate::mesh::MeshError;
use crate::Point2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarmonicError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    BoundaryMap(#[from] BoundaryMapError),
    #[error("expected {expected} boundary values, got {got}")]
    BoundaryCount { expected: usize, got: usize },
    #[error("boundary value {0} is not finite")]
    NonFinite(usize),
    #[error("singular system at vertex {0}")]
    Singular(usize),
    #[error("solver stopped at relative residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },
    #[error("map belongs to a different mesh")]
    ForeignMesh,
    #[error("vertex {0} cannot be a free vertex of the submesh")]
    BadSubmesh(usize),
    #[error("evaluation point {0} is not inside the unit disk")]
    OutsideDisk(Point2),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
}
