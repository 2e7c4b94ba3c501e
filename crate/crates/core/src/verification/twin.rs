use crate::dynamics::{SimState, SolverConfig, Stepper};
use crate::landau_de_gennes::MaterialParams;
use crate::spectral::SpectralGrid;

use super::VerificationError;

/// Difference norms at one sampled time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TwinSample {
    pub t: f64,
    /// `G = ‖δu‖² + ‖δQ‖² + ‖∇δQ‖²`
    pub g: f64,
    /// `μ‖∇δu‖²`
    pub diss_viscous: f64,
    /// `ΓL1²‖ΔδQ‖²`
    pub diss_rotational: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwinRunResult {
    pub samples: Vec<TwinSample>,
    /// `max_t [log G(t) − log G(0)] / t` at the configured step.
    pub c_fit: f64,
    /// The same fit with the step halved.
    pub c_fit_refined: f64,
    /// The fit bounds every sample and moves by at most 5% under refinement.
    pub bound_satisfied: bool,
    /// `sup_t (‖u1‖ + ‖Q1‖_H¹)`
    pub kappa1: f64,
    /// `sup_t (‖u2‖_H¹ + ‖Q2‖_H²)`
    pub kappa2: f64,
}

impl TwinRunResult {
    pub fn g0(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.g)
    }

    pub fn sup_g(&self) -> f64 {
        self.samples.iter().map(|s| s.g).fold(0.0, f64::max)
    }

    /// `|C_fit − C_fit,refined| / |C_fit,refined|`, and 0 when both vanish.
    pub fn c_fit_change(&self) -> f64 {
        let d = (self.c_fit - self.c_fit_refined).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.c_fit_refined.abs()
        }
    }
}

/// Allowed relative drift of the fitted exponent when the step is halved.
const STABILITY: f64 = 0.05;

/// Relative size of `G(0)` below which distinct inputs count as identical.
const DEGENERATE: f64 = 1e-28;

/// Slack on the self-consistency check `G(t) ≤ G(0)e^{C t}`.
const SLACK: f64 = 1e-6;

/// The state a run actually starts from: dealiased, solenoidal and, for the
/// mollified system, filtered.
fn prepare(
    grid: &SpectralGrid<f64>,
    config: &SolverConfig<f64>,
    initial: &SimState<f64>,
) -> Result<SimState<f64>, VerificationError> {
    let mut state = SimState::new(grid, initial.u.clone(), initial.q.clone(), initial.t)?;
    if let Some(n) = config.mollifier_n {
        state.u = grid.leray_project(&grid.mollify(&state.u, n)?);
        state.q = grid.mollify(&state.q, n)?;
    }
    Ok(state)
}

fn difference_norm(grid: &SpectralGrid<f64>, s1: &SimState<f64>, s2: &SimState<f64>) -> f64 {
    let dq = s1.q.sub(&s2.q);
    grid.norm_sq(&s1.u.sub(&s2.u)) + grid.norm_sq(&dq) + grid.grad_norm_sq(&dq)
}

struct Walker<'g> {
    stepper: Stepper<'g, f64>,
    state: SimState<f64>,
    t0: f64,
}

impl<'g> Walker<'g> {
    fn new(
        grid: &'g SpectralGrid<f64>,
        p: &MaterialParams<f64>,
        config: &SolverConfig<f64>,
        initial: &SimState<f64>,
    ) -> Result<Self, VerificationError> {
        let stepper = Stepper::new(grid, *p, *config)?;
        let state = prepare(grid, config, initial)?;
        Ok(Self {
            stepper,
            t0: state.t,
            state,
        })
    }

    /// Takes step `m` (0-based) of the run, landing exactly on `t_end` at the end.
    fn step(&mut self, m: usize, steps: usize) -> Result<(), VerificationError> {
        let config = self.stepper.config();
        let target = if m + 1 == steps {
            self.t0 + config.t_end
        } else {
            self.t0 + config.dt * (m + 1) as f64
        };
        let mut next = self
            .stepper
            .advance(&self.state, target - self.state.t, None)?;
        next.t = target;
        self.state = next;
        Ok(())
    }
}

struct Trace {
    samples: Vec<TwinSample>,
    kappa1: f64,
    kappa2: f64,
}

fn trace(
    grid: &SpectralGrid<f64>,
    init1: &SimState<f64>,
    init2: &SimState<f64>,
    p: &MaterialParams<f64>,
    config: &SolverConfig<f64>,
) -> Result<Trace, VerificationError> {
    let mut a = Walker::new(grid, p, config, init1)?;
    let mut b = Walker::new(grid, p, config, init2)?;
    let steps = config.steps();
    let mut out = Trace {
        samples: Vec::new(),
        kappa1: 0.0,
        kappa2: 0.0,
    };
    for m in 0..=steps {
        let last = m == steps;
        if m % config.report_every == 0 || last {
            let (s1, s2) = (&a.state, &b.state);
            let dq = s1.q.sub(&s2.q);
            out.samples.push(TwinSample {
                t: s1.t,
                g: difference_norm(grid, s1, s2),
                diss_viscous: p.mu * grid.grad_norm_sq(&s1.u.sub(&s2.u)),
                diss_rotational: p.gamma * p.l1 * p.l1 * grid.lap_norm_sq(&dq),
            });
            let u1 = grid.norm_sq(&s1.u).sqrt();
            let q1 = (grid.norm_sq(&s1.q) + grid.grad_norm_sq(&s1.q)).sqrt();
            let u2 = (grid.norm_sq(&s2.u) + grid.grad_norm_sq(&s2.u)).sqrt();
            let q2 =
                (grid.norm_sq(&s2.q) + grid.grad_norm_sq(&s2.q) + grid.lap_norm_sq(&s2.q)).sqrt();
            out.kappa1 = out.kappa1.max(u1 + q1);
            out.kappa2 = out.kappa2.max(u2 + q2);
        }
        if last {
            break;
        }
        let (ra, rb) = rayon::join(|| a.step(m, steps), || b.step(m, steps));
        ra?;
        rb?;
    }
    Ok(out)
}

fn fit(samples: &[TwinSample]) -> f64 {
    let Some(first) = samples.first() else {
        return 0.0;
    };
    if first.g == 0.0 {
        return 0.0;
    }
    let lg0 = first.g.ln();
    let c = samples[1..]
        .iter()
        .filter(|s| s.t > first.t && s.g > 0.0)
        .map(|s| (s.g.ln() - lg0) / (s.t - first.t))
        .fold(f64::NEG_INFINITY, f64::max);
    if c.is_finite() {
        c
    } else {
        0.0
    }
}

/// Evolves two initial states side by side with the same configuration and
/// records how their difference grows, then repeats with half the step to
/// check that the fitted exponent has converged.
///
/// The difference is formed from the two full solutions; no separate
/// difference equation is integrated. A blow-up in either run is an error.
pub fn twin_run(
    grid: &SpectralGrid<f64>,
    init1: &SimState<f64>,
    init2: &SimState<f64>,
    p: &MaterialParams<f64>,
    config: &SolverConfig<f64>,
) -> Result<TwinRunResult, VerificationError> {
    let distinct = init1.u.components() != init2.u.components()
        || init1.q.components() != init2.q.components();
    if distinct {
        let a = prepare(grid, config, init1)?;
        let b = prepare(grid, config, init2)?;
        let zero = SimState::zeros(grid.dims());
        let size = difference_norm(grid, init1, &zero) + difference_norm(grid, init2, &zero);
        // Differences at round-off level are as invisible as exact zeros.
        if difference_norm(grid, &a, &b) <= DEGENERATE * size {
            return Err(VerificationError::DegenerateDifference);
        }
    }
    let mut fine = *config;
    fine.dt = 0.5 * config.dt;
    fine.report_every = 2 * config.report_every;
    let (coarse, refined) = rayon::join(
        || trace(grid, init1, init2, p, config),
        || trace(grid, init1, init2, p, &fine),
    );
    let coarse = coarse?;
    let refined = refined?;
    let g0 = coarse.samples.first().map_or(0.0, |s| s.g);
    let c_fit = fit(&coarse.samples);
    let c_fit_refined = fit(&refined.samples);
    let t0 = coarse.samples.first().map_or(0.0, |s| s.t);
    let bounded = coarse
        .samples
        .iter()
        .all(|s| s.g <= g0 * (c_fit * (s.t - t0)).exp() * (1.0 + SLACK));
    let mut result = TwinRunResult {
        samples: coarse.samples,
        c_fit,
        c_fit_refined,
        bound_satisfied: false,
        kappa1: coarse.kappa1,
        kappa2: coarse.kappa2,
    };
    result.bound_satisfied = bounded && result.c_fit_change() <= STABILITY;
    Ok(result)
}
