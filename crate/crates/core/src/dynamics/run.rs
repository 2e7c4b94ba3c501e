use crate::landau_de_gennes::{energy_report_from_parts, EnergyReport, MaterialParams};
use crate::scalar::Real;
use crate::spectral::SpectralGrid;

use super::stepper::Stepper;
use super::{BlowUp, DynamicsError, SimState, SolverConfig};

/// Receives diagnostics while a run progresses.
pub trait RunSink<T> {
    fn report(&mut self, _report: &EnergyReport<T>) -> std::io::Result<()> {
        Ok(())
    }

    fn snapshot(&mut self, _state: &SimState<T>) -> std::io::Result<()> {
        Ok(())
    }
}

#[derive(Debug, Default)]
pub struct NullSink;

impl<T> RunSink<T> for NullSink {}

/// Keeps every report and snapshot in memory.
#[derive(Debug)]
pub struct CollectSink<T> {
    pub reports: Vec<EnergyReport<T>>,
    pub snapshots: Vec<SimState<T>>,
}

impl<T> Default for CollectSink<T> {
    fn default() -> Self {
        Self {
            reports: Vec::new(),
            snapshots: Vec::new(),
        }
    }
}

impl<T: Clone> RunSink<T> for CollectSink<T> {
    fn report(&mut self, report: &EnergyReport<T>) -> std::io::Result<()> {
        self.reports.push(report.clone());
        Ok(())
    }

    fn snapshot(&mut self, state: &SimState<T>) -> std::io::Result<()> {
        self.snapshots.push(state.clone());
        Ok(())
    }
}

/// Outcome of [`run`]. On a blow-up `halted` is set, `final_state` is the last
/// finite state and `reports` covers the trajectory up to it.
#[derive(Clone, Debug)]
pub struct RunSummary<T> {
    pub final_state: SimState<T>,
    pub reports: Vec<EnergyReport<T>>,
    pub steps: usize,
    pub halted: Option<BlowUp>,
}

impl<T> RunSummary<T> {
    /// Turns a halted run into an error.
    pub fn check(&self) -> Result<(), DynamicsError> {
        match self.halted {
            Some(b) => Err(DynamicsError::BlowUp(b)),
            None => Ok(()),
        }
    }
}

/// Integrates from `initial` to `config.t_end`.
///
/// With a mollifier the initial state is first mapped to `(𝒫J_n u, J_n Q)`,
/// which the mollified system leaves invariant; `J_n` also removes the means.
pub fn run<T: Real>(
    grid: &SpectralGrid<T>,
    initial: &SimState<T>,
    p: &MaterialParams<T>,
    config: &SolverConfig<T>,
    sink: &mut dyn RunSink<T>,
) -> Result<RunSummary<T>, DynamicsError> {
    let mut stepper = Stepper::new(grid, *p, *config)?;
    let mut state = SimState::new(grid, initial.u.clone(), initial.q.clone(), initial.t)?;
    if let Some(n) = config.mollifier_n {
        state.u = grid.leray_project(&grid.mollify(&state.u, n)?);
        state.q = grid.mollify(&state.q, n)?;
    }
    let steps = config.steps();
    let t0 = state.t;
    let mut reports = Vec::new();
    let io = |e: std::io::Error| DynamicsError::Spectral(e.into());
    for m in 0..=steps {
        let tendency = stepper.tendency(&state)?;
        let last = m == steps;
        if m % config.report_every == 0 || last {
            let mut r = energy_report_from_parts(
                grid,
                &state.u,
                &state.q,
                &tendency.h,
                tendency.bulk_energy,
                p,
            )?;
            r.time = state.t;
            sink.report(&r).map_err(io)?;
            reports.push(r);
        }
        if config.snapshot_every > 0 && (m % config.snapshot_every == 0 || last) {
            sink.snapshot(&state).map_err(io)?;
        }
        if last {
            break;
        }
        let target = if m + 1 == steps {
            t0 + config.t_end
        } else {
            t0 + config.dt * T::count(m + 1)
        };
        let dt = target - state.t;
        match stepper.advance(&state, dt, Some(tendency)) {
            Ok(mut next) => {
                next.t = target;
                state = next;
            }
            Err(DynamicsError::BlowUp(b)) => {
                return Ok(RunSummary {
                    final_state: state,
                    reports,
                    steps: m,
                    halted: Some(b),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RunSummary {
        final_state: state,
        reports,
        steps,
        halted: None,
    })
}
