//! Periodic pseudo-spectral discretization: transforms, derivatives,
//! dealiasing, the Leray projector and the Fourier mollifier.

mod fft;
mod field;
mod grid;
mod ops;
mod random;
mod snapshot;

use thiserror::Error;

pub use fft::Fft3;
pub use field::{
    Field, Full3x3, Layout, MatrixField, QTensorField, Scalar, ScalarField, Spectrum, SymTraceless,
    Vector3, VectorField3,
};
pub use grid::{mode_number, next_smooth, ProductGrid, SpectralGrid};
pub use ops::Norms;
pub use random::{random_band_limited, RandomSpec};
pub use snapshot::Snapshot;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("axis {axis} has {n} points; every axis needs an even count of at least 8")]
    InvalidGridSize { axis: usize, n: usize },
    #[error("box length must be positive and finite, got {0}")]
    InvalidBoxLength(f64),
    #[error("expected {expected} values per component, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("expected {expected} components, found {found}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("field lives on a {found:?} grid, expected {expected:?}")]
    GridMismatch {
        expected: [usize; 3],
        found: [usize; 3],
    },
    #[error("mollifier index must be at least 1")]
    InvalidMollifier,
    #[error("spectrum decay must be positive and finite, got {0}")]
    InvalidDecay(f64),
    #[error("only vector fields can be made solenoidal")]
    SolenoidalNonVector,
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
