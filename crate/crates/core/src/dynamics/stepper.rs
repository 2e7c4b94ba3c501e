use num_complex::Complex;

use crate::landau_de_gennes::linear::{elastic_matrix, solve_dense};
use crate::landau_de_gennes::MaterialParams;
use crate::scalar::Real;
use crate::spectral::{SpectralGrid, Spectrum, SymTraceless, Vector3};

use super::rhs::{tendency_parts, RhsOptions, Stiff, Tendency};
use super::{BlowUp, DynamicsError, Scheme, SimState, SolverConfig};

/// Mode index, velocity factor and the inverted 5×5 Q block.
type ModeInverse<T> = (usize, T, [[Complex<T>; 5]; 5]);

/// Per-mode inverses of `1 + dt μ|k|²` and `I − dt Γ M(k)`.
#[derive(Clone, Debug)]
pub struct ImexOperator<T> {
    dt: T,
    modes: Vec<ModeInverse<T>>,
}

impl<T: Real> ImexOperator<T> {
    pub fn new(
        grid: &SpectralGrid<T>,
        p: &MaterialParams<T>,
        dt: T,
    ) -> Result<Self, DynamicsError> {
        let m_only = MaterialParams {
            l4: T::zero(),
            ..*p
        };
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let mut modes = Vec::new();
        for idx in 0..grid.len() {
            if !grid.retained(idx) {
                continue;
            }
            let m = elastic_matrix(grid.k(idx), &m_only);
            let a: [[Complex<T>; 5]; 5] = std::array::from_fn(|r| {
                std::array::from_fn(|c| if r == c { one } else { zero } - m[r][c] * (dt * p.gamma))
            });
            let mut inv = [[zero; 5]; 5];
            for col in 0..5 {
                let mut e = [zero; 5];
                e[col] = one;
                let x = solve_dense(a, e).ok_or(DynamicsError::SingularImplicit(idx))?;
                for row in 0..5 {
                    inv[row][col] = x[row];
                }
            }
            let visc = T::one() / (T::one() + dt * p.mu * grid.k2(idx));
            modes.push((idx, visc, inv));
        }
        Ok(Self { dt, modes })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    fn apply(&self, u: &mut Spectrum<T, Vector3>, q: &mut Spectrum<T, SymTraceless>) {
        let flag = u.is_solenoidal();
        let mut uc = std::mem::replace(u, Spectrum::zeros(u.dims())).into_components();
        let mut qc = std::mem::replace(q, Spectrum::zeros(q.dims())).into_components();
        for (idx, visc, inv) in &self.modes {
            for comp in uc.iter_mut() {
                comp[*idx] *= *visc;
            }
            let x: [Complex<T>; 5] = std::array::from_fn(|c| qc[c][*idx]);
            for (r, row) in inv.iter().enumerate() {
                qc[r][*idx] = (0..5).map(|c| row[c] * x[c]).sum();
            }
        }
        let dims = q.dims();
        *u = Spectrum::from_components(dims, uc).expect("shape is consistent");
        u.set_solenoidal(flag);
        *q = Spectrum::from_components(dims, qc).expect("shape is consistent");
    }
}

/// Advances states with a fixed configuration, caching the implicit operator.
#[derive(Debug)]
pub struct Stepper<'g, T: Real> {
    grid: &'g SpectralGrid<T>,
    params: MaterialParams<T>,
    config: SolverConfig<T>,
    imex: Vec<ImexOperator<T>>,
}

impl<'g, T: Real> Stepper<'g, T> {
    pub fn new(
        grid: &'g SpectralGrid<T>,
        params: MaterialParams<T>,
        config: SolverConfig<T>,
    ) -> Result<Self, DynamicsError> {
        let v = config.violations(&params);
        if !v.is_empty() {
            return Err(DynamicsError::InvalidConfig(v));
        }
        Ok(Self {
            grid,
            params,
            config,
            imex: Vec::new(),
        })
    }

    pub fn grid(&self) -> &'g SpectralGrid<T> {
        self.grid
    }

    pub fn params(&self) -> &MaterialParams<T> {
        &self.params
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.config
    }

    fn options(&self) -> RhsOptions {
        RhsOptions {
            stress: self.config.stress,
            mollifier: self.config.mollifier_n,
        }
    }

    /// Full tendency at `state`.
    pub fn tendency(&self, state: &SimState<T>) -> Result<Tendency<T>, DynamicsError> {
        Ok(tendency_parts(
            self.grid,
            state,
            &self.params,
            self.options(),
            Stiff::Include,
        )?)
    }

    /// One step of length `dt`. `start` may carry the tendency at `state`,
    /// which the first RK4 stage reuses.
    pub fn advance(
        &mut self,
        state: &SimState<T>,
        dt: T,
        start: Option<Tendency<T>>,
    ) -> Result<SimState<T>, DynamicsError> {
        let next = match self.config.scheme {
            Scheme::Rk4 => self.rk4(state, dt, start)?,
            Scheme::Imex => self.imex(state, dt, start)?,
        };
        self.finish(next)
    }

    fn finish(&self, mut s: SimState<T>) -> Result<SimState<T>, DynamicsError> {
        self.grid.dealias_in_place(&mut s.u);
        self.grid.leray_project_in_place(&mut s.u);
        self.grid.dealias_in_place(&mut s.q);
        let u2 = self.grid.norm_sq(&s.u);
        let q2 = self.grid.norm_sq(&s.q);
        if !s.is_finite() || !(u2 + q2 <= self.config.blowup_threshold) {
            return Err(DynamicsError::BlowUp(BlowUp {
                time: s.t.to_f64_lossy(),
                u_l2: u2.to_f64_lossy().sqrt(),
                q_l2: q2.to_f64_lossy().sqrt(),
            }));
        }
        Ok(s)
    }

    fn stage(&self, base: &SimState<T>, k: &Tendency<T>, h: T) -> SimState<T> {
        let mut u = base.u.clone();
        u.axpy(h, &k.du);
        u.set_solenoidal(true);
        let mut q = base.q.clone();
        q.axpy(h, &k.dq);
        SimState {
            u,
            q,
            t: base.t + h,
        }
    }

    fn rk4(
        &self,
        s: &SimState<T>,
        dt: T,
        start: Option<Tendency<T>>,
    ) -> Result<SimState<T>, DynamicsError> {
        let half = dt * T::lit(0.5);
        let k1 = match start {
            Some(k) => k,
            None => self.tendency(s)?,
        };
        let k2 = self.tendency(&self.stage(s, &k1, half))?;
        let k3 = self.tendency(&self.stage(s, &k2, half))?;
        let k4 = self.tendency(&self.stage(s, &k3, dt))?;
        let w = dt / T::lit(6.0);
        let two = T::lit(2.0);
        let mut u = s.u.clone();
        let mut q = s.q.clone();
        for (k, c) in [(&k1, T::one()), (&k2, two), (&k3, two), (&k4, T::one())] {
            u.axpy(w * c, &k.du);
            q.axpy(w * c, &k.dq);
        }
        u.set_solenoidal(true);
        Ok(SimState { u, q, t: s.t + dt })
    }

    fn imex(
        &mut self,
        s: &SimState<T>,
        dt: T,
        start: Option<Tendency<T>>,
    ) -> Result<SimState<T>, DynamicsError> {
        let explicit = match start {
            // The stiff terms are linear, so subtract them from a full tendency.
            Some(mut k) => {
                k.du.axpy(-self.params.mu, &self.grid.laplacian(&s.u));
                let m_only = MaterialParams {
                    l4: T::zero(),
                    ..self.params
                };
                let (m, _) = crate::landau_de_gennes::linear::elastic_spectra(
                    self.grid,
                    &self.mollified_q(s),
                    &m_only,
                );
                k.dq.axpy(-self.params.gamma, &m);
                k
            }
            None => tendency_parts(self.grid, s, &self.params, self.options(), Stiff::Omit)?,
        };
        let pos = match self.imex.iter().position(|op| op.dt() == dt) {
            Some(i) => i,
            None => {
                self.imex
                    .push(ImexOperator::new(self.grid, &self.params, dt)?);
                self.imex.len() - 1
            }
        };
        let mut next = self.stage(s, &explicit, dt);
        self.imex[pos].apply(&mut next.u, &mut next.q);
        Ok(next)
    }

    fn mollified_q(&self, s: &SimState<T>) -> Spectrum<T, SymTraceless> {
        match self.config.mollifier_n {
            Some(n) => self
                .grid
                .mollify(&s.q, n)
                .expect("mollifier index validated"),
            None => s.q.clone(),
        }
    }
}

/// One step of `config.dt`.
pub fn step<T: Real>(
    grid: &SpectralGrid<T>,
    state: &SimState<T>,
    p: &MaterialParams<T>,
    config: &SolverConfig<T>,
) -> Result<SimState<T>, DynamicsError> {
    let mut s = Stepper::new(grid, *p, *config)?;
    s.advance(state, config.dt, None)
}
