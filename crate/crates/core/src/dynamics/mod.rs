//! Time integration of the coupled flow/order-parameter system with the
//! tumbling parameter set to zero.
//!
//! The state is kept in spectral form, inside the dealias mask, with a
//! divergence-free velocity.

mod rhs;
mod run;
mod stepper;

use thiserror::Error;

use crate::landau_de_gennes::MaterialParams;
use crate::scalar::Real;
use crate::spectral::{
    QTensorField, SpectralError, SpectralGrid, Spectrum, SymTraceless, Vector3, VectorField3,
};

pub use rhs::{full_rhs, mollified_rhs, qtensor_rhs, velocity_rhs, RhsOptions, Tendency};
pub use run::{run, CollectSink, NullSink, RunSink, RunSummary};
pub use stepper::{step, ImexOperator, Stepper};

/// How the elastic force enters the momentum equation.
///
/// `Chemical` uses `∇·σ^d = −H:∇Q − ∇f`; the dropped gradient is removed by
/// the Leray projection anyway. In this form the pairings that cancel in the
/// energy law cancel to round-off on the grid. `Divergence` evaluates `∇·σ^d`
/// from the stress itself. Both write `−u·∇u` as `u×ω`, which differs by the
/// gradient of `|u|²/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StressForm {
    #[default]
    Chemical,
    Divergence,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    #[default]
    Rk4,
    /// First-order splitting with `μΔu` and `ΓM_Q` implicit.
    Imex,
}

/// `(u, Q, t)` in spectral form.
#[derive(Clone, Debug)]
pub struct SimState<T> {
    pub u: Spectrum<T, Vector3>,
    pub q: Spectrum<T, SymTraceless>,
    pub t: T,
}

impl<T: Real> SimState<T> {
    pub fn zeros(dims: [usize; 3]) -> Self {
        let mut u = Spectrum::zeros(dims);
        u.set_solenoidal(true);
        Self {
            u,
            q: Spectrum::zeros(dims),
            t: T::zero(),
        }
    }

    /// Builds a state from spectra, truncating to the dealias mask and
    /// projecting `u` onto divergence-free fields.
    pub fn new(
        grid: &SpectralGrid<T>,
        u: Spectrum<T, Vector3>,
        q: Spectrum<T, SymTraceless>,
        t: T,
    ) -> Result<Self, SpectralError> {
        for found in [u.dims(), q.dims()] {
            if found != grid.dims() {
                return Err(SpectralError::GridMismatch {
                    expected: grid.dims(),
                    found,
                });
            }
        }
        let mut u = grid.dealias(&u);
        grid.leray_project_in_place(&mut u);
        Ok(Self {
            u,
            q: grid.dealias(&q),
            t,
        })
    }

    pub fn from_physical(
        grid: &SpectralGrid<T>,
        u: &VectorField3<T>,
        q: &QTensorField<T>,
        t: T,
    ) -> Result<Self, SpectralError> {
        Self::new(grid, grid.to_spectral(u)?, grid.to_spectral(q)?, t)
    }

    pub fn to_physical(
        &self,
        grid: &SpectralGrid<T>,
    ) -> Result<(VectorField3<T>, QTensorField<T>), SpectralError> {
        Ok((grid.to_physical(&self.u)?, grid.to_physical(&self.q)?))
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.q.is_finite()
    }
}

/// Time stepping settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub dt: T,
    pub scheme: Scheme,
    /// Run the mollified system with `J_n`.
    pub mollifier_n: Option<usize>,
    pub t_end: T,
    /// Field snapshots every this many steps; 0 disables them.
    pub snapshot_every: usize,
    /// Energy reports every this many steps (at least 1).
    pub report_every: usize,
    pub stress: StressForm,
    /// A step whose `‖u‖² + ‖Q‖²` exceeds this is treated as a blow-up.
    pub blowup_threshold: T,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(dt: T, t_end: T) -> Self {
        Self {
            dt,
            scheme: Scheme::Rk4,
            mollifier_n: None,
            t_end,
            snapshot_every: 0,
            report_every: 1,
            stress: StressForm::Chemical,
            blowup_threshold: T::lit(1e12),
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_mollifier(mut self, n: usize) -> Self {
        self.mollifier_n = Some(n);
        self
    }

    /// Every violated requirement.
    pub fn violations(&self, p: &MaterialParams<T>) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            out.push(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= T::zero() && self.t_end.is_finite()) {
            out.push(format!("t_end = {} must be non-negative", self.t_end));
        } else if self.t_end > T::zero() && self.dt > self.t_end {
            out.push(format!("dt = {} exceeds t_end = {}", self.dt, self.t_end));
        }
        if self.scheme == Scheme::Imex && !(p.l1 > T::zero()) {
            out.push("the imex scheme requires L1 > 0".to_string());
        }
        if self.mollifier_n == Some(0) {
            out.push("mollifier_n must be at least 1".to_string());
        }
        if self.report_every == 0 {
            out.push("report_every must be at least 1".to_string());
        }
        if !(self.blowup_threshold > T::zero()) {
            out.push("blowup_threshold must be positive".to_string());
        }
        out
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn steps(&self) -> usize {
        if self.t_end <= T::zero() {
            return 0;
        }
        let r = (self.t_end / self.dt).to_f64_lossy();
        (r - 1e-9).ceil().max(1.0) as usize
    }
}

/// Norms recorded when a run halts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowUp {
    pub time: f64,
    pub u_l2: f64,
    pub q_l2: f64,
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid solver configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("blow-up at t = {:.6e} (|u| = {:.3e}, |Q| = {:.3e})", .0.time, .0.u_l2, .0.q_l2)]
    BlowUp(BlowUp),
    #[error("the implicit system is singular at mode {0}")]
    SingularImplicit(usize),
}
