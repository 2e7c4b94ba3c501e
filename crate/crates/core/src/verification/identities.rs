use num_complex::Complex;

use crate::dynamics::SimState;
use crate::landau_de_gennes::linear::{contract_k, elastic_spectra, expand, gather};
use crate::landau_de_gennes::{bulk_tensor, distortion_stress_at, map_points, MaterialParams};
use crate::spectral::{SpectralGrid, Spectrum, SymTraceless, Vector3};
use crate::tensor::{Matrix3, QTensor, LEVI_CIVITA};

use super::{IdentityReport, VerificationError};

/// Where the integrands of [`cancellation_suite_with`] are sampled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Quadrature {
    /// A padded grid on which every integrand is integrated exactly.
    #[default]
    Exact,
    /// The simulation grid itself. Products of more than three factors
    /// alias there, so this is the negative control.
    Native,
}

/// Relative gradient part above which a velocity counts as compressible.
const SOLENOIDAL_TOL: f64 = 1e-10;

/// Second-derivative pairs `(i, j)`, `i ≤ j`, in lifted order.
const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn pair_slot(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    PAIRS.iter().position(|&p| p == (a, b)).expect("valid pair")
}

type Integrator = Box<dyn Fn(&[f64]) -> f64>;

/// The integral identities behind the energy law, evaluated exactly for a
/// band-limited state.
///
/// Returned in the order `J2`, `J3+J4+J7`, `J5+J6`, `J8`, `J9`.
pub fn cancellation_suite(
    grid: &SpectralGrid<f64>,
    state: &SimState<f64>,
    p: &MaterialParams<f64>,
) -> Result<Vec<IdentityReport>, VerificationError> {
    cancellation_suite_with(grid, state, p, Quadrature::Exact)
}

pub fn cancellation_suite_with(
    grid: &SpectralGrid<f64>,
    state: &SimState<f64>,
    p: &MaterialParams<f64>,
    quadrature: Quadrature,
) -> Result<Vec<IdentityReport>, VerificationError> {
    for found in [state.u.dims(), state.q.dims()] {
        if found != grid.dims() {
            return Err(crate::spectral::SpectralError::GridMismatch {
                expected: grid.dims(),
                found,
            }
            .into());
        }
    }
    let ratio = grid.divergence_ratio(&state.u);
    if ratio > SOLENOIDAL_TOL {
        return Err(VerificationError::NonSolenoidal(ratio));
    }
    let u = &state.u;
    let q = &state.q;

    // u, ∇u (u_i,j at 3 + 3i + j), Q, ∂Q, ∂∂Q
    let mut spectra: Vec<Vec<Complex<f64>>> = Vec::with_capacity(62);
    spectra.extend(u.components().iter().cloned());
    for i in 0..3 {
        for j in 0..3 {
            spectra.push(grid.derivative(u, j).component(i).to_vec());
        }
    }
    spectra.extend(q.components().iter().cloned());
    let dq: [Spectrum<f64, SymTraceless>; 3] = std::array::from_fn(|k| grid.derivative(q, k));
    for d in &dq {
        spectra.extend(d.components().iter().cloned());
    }
    for &(i, j) in &PAIRS {
        spectra.extend(grid.derivative(&dq[i], j).into_components());
    }
    let refs: Vec<&[Complex<f64>]> = spectra.iter().map(|v| v.as_slice()).collect();

    let degree = if p.c != 0.0 {
        5
    } else if p.b != 0.0 {
        4
    } else {
        3
    };
    let (lifted, integrate): (Vec<Vec<f64>>, Integrator) = match quadrature {
        Quadrature::Exact => {
            let pg = grid.quadrature_grid(degree);
            let lifted = pg.lift(&refs);
            (lifted, Box::new(move |f: &[f64]| pg.integrate(f)))
        }
        Quadrature::Native => {
            let fft = grid.fft();
            let masked: Vec<Vec<Complex<f64>>> = spectra
                .iter()
                .map(|s| {
                    s.iter()
                        .enumerate()
                        .map(|(idx, &v)| {
                            if grid.retained(idx) {
                                v
                            } else {
                                Complex::new(0.0, 0.0)
                            }
                        })
                        .collect()
                })
                .collect();
            let mrefs: Vec<&[Complex<f64>]> = masked.iter().map(|v| v.as_slice()).collect();
            let lifted = fft.inverse_many(&mrefs);
            let cell = grid.cell_volume();
            (
                lifted,
                Box::new(move |f: &[f64]| f.iter().sum::<f64>() * cell),
            )
        }
    };
    drop(spectra);
    let inputs: Vec<&[f64]> = lifted.iter().map(|v| v.as_slice()).collect();
    let p = *p;

    // Value and |value| columns for each constituent.
    const J2A: usize = 0;
    const J2B: usize = 1;
    const J2C: usize = 2;
    const J3: usize = 3;
    const J4: usize = 4;
    const J7: usize = 5;
    const J5: usize = 6;
    const J6: usize = 7;
    const J8: usize = 8;
    const J9A: usize = 9;
    const J9B: usize = 10;
    const TERMS: usize = 11;
    let out = map_points(&inputs, 2 * TERMS, |v, o| {
        let uu = [v[0], v[1], v[2]];
        let gu = Matrix3::from_fn(|i, j| v[3 + 3 * i + j]);
        let qat = |s: usize| QTensor::from_array([v[s], v[s + 1], v[s + 2], v[s + 3], v[s + 4]]);
        let qt = qat(12);
        let qm = qt.to_matrix();
        let dq: [Matrix3<f64>; 3] = std::array::from_fn(|k| qat(17 + 5 * k).to_matrix());
        let ddq: [Matrix3<f64>; 6] = std::array::from_fn(|s| qat(32 + 5 * s).to_matrix());
        let dd = |i: usize, j: usize| &ddq[pair_slot(i, j)];

        // M = L1ΔQ + ((L2+L3)/2)(Q_ik,kj + Q_jk,ki − ⅔δ_ij Q_kp,kp)
        let lap = *dd(0, 0) + *dd(1, 1) + *dd(2, 2);
        let gdiv = Matrix3::from_fn(|i, j| (0..3).map(|k| dd(k, j)[(i, k)]).sum::<f64>());
        let mm = (lap.scale(p.l1) + (gdiv + gdiv.transpose()).scale(0.5 * p.l23()))
            .sym_traceless()
            .to_matrix();
        // E = (L4/2)(C + Cᵀ), C_ij = e_lik Q_lj,k
        let mut c = Matrix3::zero();
        for &(l, i, k, s) in &LEVI_CIVITA {
            for j in 0..3 {
                c[(i, j)] += s as f64 * dq[k][(l, j)];
            }
        }
        let e = (c + c.transpose()).scale(0.5 * p.l4);
        let b = bulk_tensor(&qt, &p).to_matrix();
        let h = mm + e + b;

        // u·∇Q
        let adv = dq[0].scale(uu[0]) + dq[1].scale(uu[1]) + dq[2].scale(uu[2]);
        let q2 = qm * qm;
        let tr2 = qm.contract(&qm);
        let b_quad = (q2 - Matrix3::identity().scale(tr2 / 3.0)).scale(p.b);
        let mut t = [0.0; TERMS];
        t[J2A] = adv.contract(&qm.scale(-p.a));
        t[J2B] = adv.contract(&b_quad);
        t[J2C] = adv.contract(&qm.scale(-p.c * tr2));
        t[J3] = adv.contract(&mm);
        t[J4] = adv.contract(&e);
        t[J7] = -distortion_stress_at(&qm, &dq, &p).contract(&gu);
        // Ω_ij = (u_i,j − u_j,i)/2
        let omega = (gu - gu.transpose()).scale(0.5);
        t[J5] = (qm * omega - omega * qm).contract(&h);
        t[J6] = -(qm * h - h * qm).contract(&gu);
        let mut j8 = 0.0;
        for g in 0..3 {
            for d in 0..3 {
                j8 += uu[g] * dd(g, d).contract(&Matrix3::from_fn(|a, bb| dq[bb][(a, d)]));
            }
        }
        t[J8] = -p.l3 * j8;
        // tr(ΩQQ) − tr(QΩQ), each a sum of elementary products
        let mut j9a = 0.0;
        let mut j9b = 0.0;
        let mut s9a = 0.0;
        let mut s9b = 0.0;
        for a in 0..3 {
            for g in 0..3 {
                for bb in 0..3 {
                    let x = omega[(a, g)] * qm[(g, bb)] * qm[(bb, a)];
                    let y = qm[(a, g)] * omega[(g, bb)] * qm[(bb, a)];
                    j9a += x;
                    j9b -= y;
                    s9a += x.abs();
                    s9b += y.abs();
                }
            }
        }
        t[J9A] = j9a;
        t[J9B] = j9b;
        for (k, &x) in t.iter().enumerate() {
            o[k] = x;
            o[TERMS + k] = x.abs();
        }
        o[TERMS + J9A] = s9a;
        o[TERMS + J9B] = s9b;
    });
    drop(lifted);
    let value: Vec<f64> = (0..TERMS).map(|k| integrate(&out[k])).collect();
    let size: Vec<f64> = (0..TERMS).map(|k| integrate(&out[TERMS + k])).collect();
    let group = |name: &str, ks: &[usize]| {
        IdentityReport::new(
            name,
            ks.iter().map(|&k| value[k]).sum(),
            ks.iter().map(|&k| size[k]).sum(),
        )
    };
    Ok(vec![
        group("J2", &[J2A, J2B, J2C]),
        group("J3+J4+J7", &[J3, J4, J7]),
        group("J5+J6", &[J5, J6]),
        group("J8", &[J8]),
        group("J9", &[J9A, J9B]),
    ])
}

/// `C = 2(L4² + (L2+L3)²)/L1 + L1|L2+L3|`.
pub fn delta_dissipation_constant(p: &MaterialParams<f64>) -> f64 {
    let l23 = p.l23();
    2.0 * (p.l4 * p.l4 + l23 * l23) / p.l1 + p.l1 * l23.abs()
}

/// Margin of `‖M_δQ + E_δQ‖² ≥ (L1²/2)‖ΔδQ‖² − C‖∇δQ‖²` for `δQ = Q1 − Q2`,
/// with `C` from [`delta_dissipation_constant`]. The report's `value` is the
/// margin (non-negative when the bound holds) and `scale` the sum of the
/// three terms.
pub fn delta_dissipation_check(
    grid: &SpectralGrid<f64>,
    q1: &Spectrum<f64, SymTraceless>,
    q2: &Spectrum<f64, SymTraceless>,
    p: &MaterialParams<f64>,
) -> Result<IdentityReport, VerificationError> {
    for found in [q1.dims(), q2.dims()] {
        if found != grid.dims() {
            return Err(crate::spectral::SpectralError::GridMismatch {
                expected: grid.dims(),
                found,
            }
            .into());
        }
    }
    let dq = grid.dealias(&q1.sub(q2));
    let (m, e) = elastic_spectra(grid, &dq, p);
    let lhs = grid.norm_sq(&m.add(&e));
    let lap = 0.5 * p.l1 * p.l1 * grid.lap_norm_sq(&dq);
    let grad = delta_dissipation_constant(p) * grid.grad_norm_sq(&dq);
    let margin = lhs - lap + grad;
    Ok(IdentityReport::new(
        "delta_dissipation",
        margin,
        lhs + lap + grad,
    ))
}

/// `div Q` in spectral form.
pub(crate) fn divergence_q(
    grid: &SpectralGrid<f64>,
    q: &Spectrum<f64, SymTraceless>,
) -> Spectrum<f64, Vector3> {
    let n = grid.len();
    let mut comps = vec![vec![Complex::new(0.0, 0.0); n]; 3];
    for idx in 0..n {
        let qm = expand(gather(q, idx));
        let w = contract_k(grid.k(idx), &qm);
        for i in 0..3 {
            comps[i][idx] = Complex::new(-w[i].im, w[i].re);
        }
    }
    Spectrum::from_components(grid.dims(), comps).expect("shape is consistent")
}
