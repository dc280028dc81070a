use std::path::PathBuf;

use hopfharm_core::alternating::AlternatingError;
use hopfharm_core::gallery::GalleryError;
use hopfharm_core::geometry::GeometryError;
use hopfharm_core::harmonic::{BoundaryMapError, HarmonicError};
use hopfharm_core::hopf::HopfError;
use hopfharm_core::mesh::MeshError;
use hopfharm_core::quaddiff::QuadError;

/// Failures of a command. Each variant family has its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid flag or config value: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    BoundaryMap(#[from] BoundaryMapError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Hopf(#[from] HopfError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Alternating(#[from] AlternatingError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
}

impl CliError {
    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Self::Parse { path: path.into(), message: message.to_string() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit code. 2 is left to the argument parser.
    pub fn code(&self) -> i32 {
        match self {
            Self::Io { .. } => 3,
            Self::Parse { .. } => 4,
            Self::Config(_) => 5,
            Self::Geometry(_) | Self::Gallery(_) | Self::BoundaryMap(_) => 6,
            Self::Mesh(_) => 7,
            Self::Harmonic(_) => 8,
            Self::Hopf(_) => 9,
            Self::Quad(QuadError::Critical(_)) => 11,
            Self::Quad(_) => 10,
            Self::Alternating(_) => 12,
        }
    }
}
