use rayon::prelude::*;

use crate::dynamics::{run, RunSink, SimState, SolverConfig};
use crate::landau_de_gennes::MaterialParams;
use crate::spectral::SpectralGrid;

use super::diagnostics::higher_order_diagnostic;
use super::VerificationError;

/// One viscosity of a [`viscosity_sweep`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    /// `sup Ã` over every step reached.
    pub sup_a_tilde: f64,
    /// Time of the halt, if the run blew up.
    pub blowup_time: Option<f64>,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Whether `sup Ã` is non-increasing in `μ`.
    pub monotone: bool,
}

/// Relative slack allowed between rows whose suprema agree up to round-off.
const TIE: f64 = 1e-12;

struct SupSink<'a> {
    grid: &'a SpectralGrid<f64>,
    p: MaterialParams<f64>,
    sup: f64,
}

impl RunSink<f64> for SupSink<'_> {
    fn snapshot(&mut self, state: &SimState<f64>) -> std::io::Result<()> {
        let d = higher_order_diagnostic(self.grid, &state.u, &state.q, &self.p);
        self.sup = self.sup.max(d.a_tilde);
        Ok(())
    }
}

/// Runs the same initial data at each viscosity in `mu_list` (ascending, at
/// least three entries) and tabulates `sup_t Ã(t)`.
///
/// `Ã` is evaluated after every step regardless of `config.snapshot_every`.
/// A blow-up ends its row early and is recorded there; it is not an error.
pub fn viscosity_sweep(
    grid: &SpectralGrid<f64>,
    initial: &SimState<f64>,
    p: &MaterialParams<f64>,
    mu_list: &[f64],
    config: &SolverConfig<f64>,
) -> Result<SweepTable, VerificationError> {
    let ascending = mu_list.windows(2).all(|w| w[0] < w[1]);
    if mu_list.len() < 3 || !ascending || mu_list.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(VerificationError::InvalidViscosities);
    }
    let mut cfg = *config;
    cfg.snapshot_every = 1;
    let rows = mu_list
        .par_iter()
        .map(|&mu| {
            let params = MaterialParams { mu, ..*p };
            let mut sink = SupSink {
                grid,
                p: params,
                sup: f64::NEG_INFINITY,
            };
            let summary = run(grid, initial, &params, &cfg, &mut sink)?;
            Ok(SweepRow {
                mu,
                sup_a_tilde: sink.sup,
                blowup_time: summary.halted.map(|b| b.time),
                steps: summary.steps,
            })
        })
        .collect::<Result<Vec<_>, VerificationError>>()?;
    let monotone = rows
        .windows(2)
        .all(|w| w[1].sup_a_tilde <= w[0].sup_a_tilde * (1.0 + TIE));
    Ok(SweepTable { rows, monotone })
}
