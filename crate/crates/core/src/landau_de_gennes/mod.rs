//! Landau-de Gennes energetics: energy densities, the Lyapunov functional,
//! the molecular field, Lagrange multipliers and stresses.

mod coercivity;
mod energy;
mod fields;
pub mod linear;
mod params;
mod pointwise;

pub use coercivity::{
    coercivity_constant_k, coercivity_holds, coercivity_threshold, first_violation,
    CoercivityError, CoercivitySearch,
};
pub use energy::{
    bulk_energy, elastic_energies, energy_report_from_parts, free_energy, l4_cross_margin,
    null_lagrangian, total_energy, total_energy_with, EnergyReport,
};
pub use fields::{
    antisymmetric_stress, bulk_field_projected, distortion_stress, elastic_density,
    elastic_density_parts_field, lagrange_multipliers, map_points, molecular_field,
    molecular_field_k, molecular_field_spectral, q_gradient, MolecularField, MolecularSpectra,
};
#[allow(unused_imports)]
pub(crate) use fields::{qtensor_at, unpack_q_grad};
pub use params::{MaterialParams, ParamError, ParamErrors};
pub use pointwise::{
    bulk_density, bulk_nonlinear, bulk_tensor, distortion_stress_at, elastic_density_parts,
};
