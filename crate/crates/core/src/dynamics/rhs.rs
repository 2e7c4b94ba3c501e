//! Right-hand side of the flow/order-parameter system.
//!
//! Every quadratic product is formed on a grid with `M > 3K` points per axis
//! and truncated back to the dealias mask, so for band-limited states the
//! `L²` pairings used by the energy law are evaluated exactly.

use num_complex::Complex;

use crate::landau_de_gennes::{map_points, molecular_field_spectral, MaterialParams};
use crate::scalar::Real;
use crate::spectral::{SpectralError, SpectralGrid, Spectrum, SymTraceless, Vector3};
use crate::tensor::{commutator, vorticity_tensor, Matrix3, QTensor};

use super::{SimState, StressForm};

/// Options shared by the full and the mollified right-hand sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct RhsOptions {
    pub stress: StressForm,
    /// Wrap every nonlinear term in `J_n`.
    pub mollifier: Option<usize>,
}

/// Time derivatives of `(u, Q)` together with the molecular field they were
/// built from.
#[derive(Clone, Debug)]
pub struct Tendency<T> {
    pub du: Spectrum<T, Vector3>,
    pub dq: Spectrum<T, SymTraceless>,
    /// Masked molecular field (`J_n`-filtered in the mollified system).
    pub h: Spectrum<T, SymTraceless>,
    /// `∫ f_bulk` of the (mollified) state.
    pub bulk_energy: T,
}

/// Which linear terms to include.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Stiff {
    Include,
    /// Leave out `μΔu` and `ΓM_Q`; these are handled implicitly.
    Omit,
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
fn times_i<T: Real>(c: Complex<T>, k: T) -> Complex<T> {
    Complex::new(-c.im * k, c.re * k)
}

fn check<T: Real>(grid: &SpectralGrid<T>, state: &SimState<T>) -> Result<(), SpectralError> {
    for found in [state.u.dims(), state.q.dims()] {
        if found != grid.dims() {
            return Err(SpectralError::GridMismatch {
                expected: grid.dims(),
                found,
            });
        }
    }
    Ok(())
}

fn mollified<T: Real, L: crate::spectral::Layout>(
    grid: &SpectralGrid<T>,
    s: &Spectrum<T, L>,
    n: Option<usize>,
) -> Spectrum<T, L> {
    match n {
        Some(n) => grid.mollify(s, n).expect("mollifier index validated"),
        None => s.clone(),
    }
}

pub(crate) fn tendency_parts<T: Real>(
    grid: &SpectralGrid<T>,
    state: &SimState<T>,
    p: &MaterialParams<T>,
    opts: RhsOptions,
    stiff: Stiff,
) -> Result<Tendency<T>, SpectralError> {
    check(grid, state)?;
    if opts.mollifier == Some(0) {
        return Err(SpectralError::InvalidMollifier);
    }
    let jn = opts.mollifier;
    let (u, q) = match jn {
        Some(n) => (
            grid.leray_project(&grid.mollify(&state.u, n)?),
            grid.mollify(&state.q, n)?,
        ),
        None => (state.u.clone(), state.q.clone()),
    };
    let u = grid.dealias(&u);
    let q = grid.dealias(&q);

    let ms = molecular_field_spectral(grid, &q, p);
    // −aQ is left alone by J_n on its range; only the projected nonlinearity is filtered.
    let b = mollified(grid, &ms.b, jn);
    let mut h = ms.m.add(&ms.e);
    h.axpy(T::one(), &b);

    // Lift u, ω = ∇×u, Q, ∇Q, H.
    let mut spectra: Vec<Vec<Complex<T>>> = Vec::with_capacity(31);
    for c in 0..3 {
        spectra.push(u.component(c).to_vec());
    }
    spectra.extend(grid.curl(&u).into_components());
    for c in 0..5 {
        spectra.push(q.component(c).to_vec());
    }
    for g in 0..3 {
        spectra.extend(grid.derivative(&q, g).into_components());
    }
    for c in 0..5 {
        spectra.push(h.component(c).to_vec());
    }
    let refs: Vec<&[Complex<T>]> = spectra.iter().map(|v| v.as_slice()).collect();
    let pg = grid.product_grid(2);
    let phys = pg.lift(&refs);
    drop(spectra);
    let inputs: Vec<&[T]> = phys.iter().map(|v| v.as_slice()).collect();

    let stress_comps = match opts.stress {
        StressForm::Chemical => 3,
        StressForm::Divergence => 9,
    };
    let nout = 3 + stress_comps + 5;
    let stress = opts.stress;
    let out = map_points(&inputs, nout, |v, o| {
        let uu = [v[0], v[1], v[2]];
        let w = [v[3], v[4], v[5]];
        let qm = QTensor::from_array([v[6], v[7], v[8], v[9], v[10]]).to_matrix();
        let dq: [Matrix3<T>; 3] = std::array::from_fn(|g| {
            let s = 11 + 5 * g;
            QTensor::from_array([v[s], v[s + 1], v[s + 2], v[s + 3], v[s + 4]]).to_matrix()
        });
        let hm = QTensor::from_array([v[26], v[27], v[28], v[29], v[30]]).to_matrix();
        let omega = vorticity_tensor(w);
        let sigma_a = commutator(&qm, &hm);
        // u × ω equals −u·∇u up to a gradient.
        let cross = [
            uu[1] * w[2] - uu[2] * w[1],
            uu[2] * w[0] - uu[0] * w[2],
            uu[0] * w[1] - uu[1] * w[0],
        ];
        match stress {
            StressForm::Chemical => {
                for i in 0..3 {
                    o[i] = cross[i] - hm.contract(&dq[i]);
                }
                o[3] = sigma_a[(0, 1)];
                o[4] = sigma_a[(0, 2)];
                o[5] = sigma_a[(1, 2)];
            }
            StressForm::Divergence => {
                o[..3].copy_from_slice(&cross);
                let sd = crate::landau_de_gennes::distortion_stress_at(&qm, &dq, p);
                for i in 0..3 {
                    for j in 0..3 {
                        o[3 + 3 * i + j] = sigma_a[(i, j)] + sd[(i, j)];
                    }
                }
            }
        }
        let adv = dq[0].scale(uu[0]) + dq[1].scale(uu[1]) + dq[2].scale(uu[2]);
        let rhs = (commutator(&omega, &qm) - adv).sym_traceless().to_array();
        let base = 3 + stress_comps;
        o[base..base + 5].copy_from_slice(&rhs);
    });
    drop(phys);
    let out_refs: Vec<&[T]> = out.iter().map(|v| v.as_slice()).collect();
    let mut spec = pg.project(&out_refs);
    drop(out);

    // Momentum: force + ∂_j σ_ij.
    let n = grid.len();
    let qflux: Vec<Vec<Complex<T>>> = spec.split_off(3 + stress_comps);
    let stress_hat: Vec<Vec<Complex<T>>> = spec.split_off(3);
    let mut force = spec;
    for idx in 0..n {
        let k = grid.k(idx);
        let s = |i: usize, j: usize| -> Complex<T> {
            match stress {
                StressForm::Divergence => stress_hat[3 * i + j][idx],
                StressForm::Chemical => match (i, j) {
                    (0, 1) => stress_hat[0][idx],
                    (1, 0) => -stress_hat[0][idx],
                    (0, 2) => stress_hat[1][idx],
                    (2, 0) => -stress_hat[1][idx],
                    (1, 2) => stress_hat[2][idx],
                    (2, 1) => -stress_hat[2][idx],
                    _ => zero(),
                },
            }
        };
        for i in 0..3 {
            let mut acc = zero::<T>();
            for j in 0..3 {
                acc += times_i(s(i, j), k[j]);
            }
            force[i][idx] += acc;
        }
    }
    let mut du = mollified(
        grid,
        &Spectrum::<T, Vector3>::from_components(grid.dims(), force)?,
        jn,
    );
    grid.leray_project_in_place(&mut du);
    let mut dq = mollified(
        grid,
        &Spectrum::<T, SymTraceless>::from_components(grid.dims(), qflux)?,
        jn,
    );
    dq.axpy(p.gamma, &ms.e);
    dq.axpy(p.gamma, &b);
    if stiff == Stiff::Include {
        du.axpy(p.mu, &grid.laplacian(&u));
        dq.axpy(p.gamma, &ms.m);
    }
    grid.dealias_in_place(&mut du);
    grid.leray_project_in_place(&mut du);
    grid.dealias_in_place(&mut dq);
    Ok(Tendency {
        du,
        dq,
        h,
        bulk_energy: ms.bulk_energy,
    })
}

/// `(du/dt, dQ/dt, H)` of the full system.
pub fn full_rhs<T: Real>(
    grid: &SpectralGrid<T>,
    state: &SimState<T>,
    p: &MaterialParams<T>,
    stress: StressForm,
) -> Result<Tendency<T>, SpectralError> {
    tendency_parts(
        grid,
        state,
        p,
        RhsOptions {
            stress,
            mollifier: None,
        },
        Stiff::Include,
    )
}

/// `𝒫[−u·∇u + μΔu + ∇·(σ^a + σ^d)]`.
pub fn velocity_rhs<T: Real>(
    grid: &SpectralGrid<T>,
    state: &SimState<T>,
    p: &MaterialParams<T>,
) -> Result<Spectrum<T, Vector3>, SpectralError> {
    Ok(full_rhs(grid, state, p, StressForm::default())?.du)
}

/// `−u·∇Q + ΓH_Q + ΩQ − QΩ`.
pub fn qtensor_rhs<T: Real>(
    grid: &SpectralGrid<T>,
    state: &SimState<T>,
    p: &MaterialParams<T>,
) -> Result<Spectrum<T, SymTraceless>, SpectralError> {
    Ok(full_rhs(grid, state, p, StressForm::default())?.dq)
}

/// Right-hand side of the mollified system: the state is first mapped to
/// `(𝒫J_n u, J_n Q)` and every product is wrapped in `J_n`, while the linear
/// parts of the molecular field act unfiltered.
pub fn mollified_rhs<T: Real>(
    grid: &SpectralGrid<T>,
    state: &SimState<T>,
    p: &MaterialParams<T>,
    n: usize,
    stress: StressForm,
) -> Result<Tendency<T>, SpectralError> {
    tendency_parts(
        grid,
        state,
        p,
        RhsOptions {
            stress,
            mollifier: Some(n),
        },
        Stiff::Include,
    )
}
