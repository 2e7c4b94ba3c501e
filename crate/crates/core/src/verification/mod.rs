//! Numerical certificates for the analytical structure of the model: the
//! energy law, the cancellation identities behind it, the variational
//! derivative, the higher-order diagnostic, continuous dependence on the data
//! and the algebra of the Fourier mollifier.
//!
//! Everything here works in `f64`.

mod balance;
mod diagnostics;
mod identities;
mod mollifier;
mod sweep;
mod twin;
mod variational;

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::spectral::SpectralError;

pub use balance::{energy_balance_residual, observed_order, BalanceResidual};
pub use diagnostics::{higher_order_diagnostic, higher_order_diagnostic_physical, Diagnostic};
pub use identities::{
    cancellation_suite, cancellation_suite_with, delta_dissipation_check,
    delta_dissipation_constant, Quadrature,
};
pub use mollifier::mollifier_suite;
pub use sweep::{viscosity_sweep, SweepRow, SweepTable};
pub use twin::{twin_run, TwinRunResult, TwinSample};
pub use variational::{variational_consistency, VARIATIONAL_DIRECTIONS};

/// Value of one integral identity together with the size of its parts.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub name: String,
    /// Quadrature of the left-hand side (or the margin, for inequalities).
    pub value: f64,
    /// Sum of the magnitudes of the constituent terms.
    pub scale: f64,
    /// `|value| / scale`, and 0 when both vanish.
    pub relative_residual: f64,
}

impl IdentityReport {
    pub fn new(name: impl Into<String>, value: f64, scale: f64) -> Self {
        let relative_residual = if value == 0.0 {
            0.0
        } else if scale > 0.0 {
            value.abs() / scale
        } else {
            f64::INFINITY
        };
        Self {
            name: name.into(),
            value,
            scale,
            relative_residual,
        }
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.relative_residual <= tolerance
    }
}

#[derive(Debug, Error)]
pub enum VerificationError {
    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("samples are not spaced by dt = {dt:e} (found {found:e} at index {index})")]
    NonUniform { dt: f64, found: f64, index: usize },
    #[error("velocity is not divergence free (relative gradient part {0:e})")]
    NonSolenoidal(f64),
    #[error("finite-difference step {0:e} is outside [1e-7, 1e-3]")]
    InvalidStep(f64),
    #[error("viscosity list must be ascending with at least 3 positive entries")]
    InvalidViscosities,
    #[error("distinct initial states have a zero initial difference norm")]
    DegenerateDifference,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
