//! Pseudo-spectral solver for the Beris-Edwards Q-tensor system on the
//! periodic box, with a harness that checks the discrete scheme against the
//! structure of the continuous equations.
//!
//! Everything numerical is generic over [`scalar::Real`]; the aliases below
//! fix the scalar to `f64`, which is what the verification layer uses.

// Index loops mirror the tensor notation; `!(x > 0)` deliberately rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod landau_de_gennes;
pub mod scalar;
pub mod spectral;
pub mod tensor;
pub mod verification;

pub type Grid = spectral::SpectralGrid<f64>;
pub type State = dynamics::SimState<f64>;
pub type Params = landau_de_gennes::MaterialParams<f64>;
pub type Solver = dynamics::SolverConfig<f64>;
pub type Report = landau_de_gennes::EnergyReport<f64>;
pub type QField = spectral::Spectrum<f64, spectral::SymTraceless>;
pub type UField = spectral::Spectrum<f64, spectral::Vector3>;
pub type Q = tensor::QTensor<f64>;
pub type Matrix = tensor::Matrix3<f64>;
