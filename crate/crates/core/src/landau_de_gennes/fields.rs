//! Field-level molecular field, Lagrange multipliers and stresses.

use num_complex::Complex;
use rayon::prelude::*;

use crate::scalar::Real;
use crate::spectral::{
    Full3x3, MatrixField, QTensorField, Scalar, ScalarField, SpectralError, SpectralGrid, Spectrum,
    SymTraceless,
};
use crate::tensor::{Matrix3, QTensor, LEVI_CIVITA};

use super::linear::{contract_k, curl_contraction, elastic_spectra, expand, gather};
use super::pointwise::{
    bulk_density, bulk_nonlinear, bulk_tensor, distortion_stress_at, elastic_density_parts,
};
use super::MaterialParams;

/// Applies `f` at every point of `inputs` (one array per input component) and
/// returns `outputs` arrays.
pub fn map_points<T: Real>(
    inputs: &[&[T]],
    outputs: usize,
    f: impl Fn(&[T], &mut [T]) + Sync,
) -> Vec<Vec<T>> {
    let n = inputs.first().map_or(0, |c| c.len());
    if outputs == 0 {
        return Vec::new();
    }
    const BLOCK: usize = 512;
    let mut result = vec![vec![T::zero(); n]; outputs];
    let mut blocks: Vec<Vec<&mut [T]>> = (0..n.div_ceil(BLOCK))
        .map(|_| Vec::with_capacity(outputs))
        .collect();
    for r in result.iter_mut() {
        for (b, chunk) in r.chunks_mut(BLOCK).enumerate() {
            blocks[b].push(chunk);
        }
    }
    blocks
        .into_par_iter()
        .enumerate()
        .for_each(|(b, mut outs)| {
            let start = b * BLOCK;
            let len = outs[0].len();
            let mut buf = vec![T::zero(); inputs.len()];
            let mut out = vec![T::zero(); outputs];
            for off in 0..len {
                for (slot, input) in buf.iter_mut().zip(inputs) {
                    *slot = input[start + off];
                }
                f(&buf, &mut out);
                for (dst, v) in outs.iter_mut().zip(&out) {
                    dst[off] = *v;
                }
            }
        });
    result
}

#[inline]
pub(crate) fn qtensor_at<T: Real>(v: &[T]) -> QTensor<T> {
    QTensor::new(v[0], v[1], v[2], v[3], v[4])
}

/// Spectra of `∂_k Q` for `k = 0, 1, 2`.
pub fn q_gradient<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
) -> [Spectrum<T, SymTraceless>; 3] {
    std::array::from_fn(|k| grid.derivative(q, k))
}

#[inline]
pub(crate) fn unpack_q_grad<T: Real>(v: &[T]) -> (Matrix3<T>, [Matrix3<T>; 3]) {
    let q = qtensor_at(&v[0..5]).to_matrix();
    let dq = std::array::from_fn(|k| qtensor_at(&v[5 + 5 * k..10 + 5 * k]).to_matrix());
    (q, dq)
}

/// Galerkin projection of the bulk field onto the dealias mask, computed
/// without aliasing on a padded grid. The linear `−aQ` part is exact.
pub fn bulk_field_projected<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> Spectrum<T, SymTraceless> {
    bulk_field_and_energy(grid, q, p).0
}

/// The projected bulk field and `∫ f_bulk`, from one evaluation on the padded
/// grid (which also integrates the quartic density exactly).
pub(crate) fn bulk_field_and_energy<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> (Spectrum<T, SymTraceless>, T) {
    let mut out = q.scaled(-p.a);
    out.set_solenoidal(false);
    if p.bulk_is_linear() {
        return (out, T::lit(0.5) * p.a * grid.norm_sq(q));
    }
    let pg = grid.product_grid(3);
    let phys = pg.lift(&q.component_refs());
    let refs: Vec<&[T]> = phys.iter().map(|v| v.as_slice()).collect();
    let mut nl = map_points(&refs, 6, |v, o| {
        let qt = qtensor_at(v);
        o[..5].copy_from_slice(&bulk_nonlinear(&qt, p).to_array());
        o[5] = bulk_density(&qt, p);
    });
    let energy = pg.integrate(&nl.pop().expect("density column"));
    let nl_refs: Vec<&[T]> = nl.iter().map(|v| v.as_slice()).collect();
    let spec = pg.project(&nl_refs);
    for (c, s) in spec.iter().enumerate() {
        for (o, v) in out.component_mut(c).iter_mut().zip(s) {
            *o += *v;
        }
    }
    (out, energy)
}

/// Spectral pieces of the molecular field `H_K = M + E + P_K B`.
#[derive(Clone, Debug)]
pub struct MolecularSpectra<T> {
    pub h: Spectrum<T, SymTraceless>,
    pub m: Spectrum<T, SymTraceless>,
    pub e: Spectrum<T, SymTraceless>,
    pub b: Spectrum<T, SymTraceless>,
    /// `∫ f_bulk`, a by-product of evaluating `b`.
    pub bulk_energy: T,
}

/// Molecular field restricted to the dealias mask. For band-limited `Q` this
/// is the exact `L²` projection of `H_Q`, which makes it the gradient of the
/// discrete energy.
pub fn molecular_field_spectral<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> MolecularSpectra<T> {
    let (m, e) = elastic_spectra(grid, q, p);
    let (b, bulk_energy) = bulk_field_and_energy(grid, q, p);
    let mut h = m.add(&e);
    h.axpy(T::one(), &b);
    MolecularSpectra {
        h,
        m,
        e,
        b,
        bulk_energy,
    }
}

/// `H_K` only.
pub fn molecular_field_k<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> Spectrum<T, SymTraceless> {
    molecular_field_spectral(grid, q, p).h
}

/// Pointwise molecular field and its pieces on the native grid.
#[derive(Clone, Debug)]
pub struct MolecularField<T> {
    pub h: QTensorField<T>,
    pub m: QTensorField<T>,
    pub e: QTensorField<T>,
    pub b: QTensorField<T>,
}

/// `H_Q = M_Q + E_Q + B_Q` at the grid points. The derivative terms are
/// spectral and `B_Q` is evaluated pointwise, so no truncation is involved.
pub fn molecular_field<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> Result<MolecularField<T>, SpectralError> {
    let (ms, es) = elastic_spectra(grid, q, p);
    let m = grid.to_physical(&ms)?;
    let e = grid.to_physical(&es)?;
    let qp = grid.to_physical(q)?;
    let b = QTensorField::from_fn(grid.dims(), |idx| bulk_tensor(&qp.at(idx), p));
    let h = m.add(&e).add(&b);
    Ok(MolecularField { h, m, e, b })
}

/// `λ₀` and the antisymmetric multiplier `λ_ij − λ_ji` at the grid points.
pub fn lagrange_multipliers<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> Result<(ScalarField<T>, MatrixField<T>), SpectralError> {
    let n = grid.len();
    let zero = Complex::new(T::zero(), T::zero());
    let third = T::one() / T::lit(3.0);
    let half23 = T::lit(0.5) * p.l23();
    let half4 = T::lit(0.5) * p.l4;
    let mut lin = vec![zero; n];
    let mut anti = vec![vec![zero; n]; 9];
    for idx in 0..n {
        let k = grid.k(idx);
        let qm = expand(gather(q, idx));
        let w = contract_k(k, &qm);
        // Q_kp,kp = −k·w
        let div_div = -(w[0] * k[0] + w[1] * k[1] + w[2] * k[2]);
        // e_lpk Q_lp,k
        let mut chiral = zero;
        for &(l, pp, kk, s) in &LEVI_CIVITA {
            let v = qm[l][pp] * (T::lit(s as f64) * k[kk]);
            chiral += Complex::new(-v.im, v.re);
        }
        lin[idx] = (div_div * p.l23() + chiral * p.l4) * third;
        let c = curl_contraction(k, &qm);
        for i in 0..3 {
            for j in 0..3 {
                // Q_ik,kj = −k_j w_i
                let gd = -(w[i] * k[j]) + w[j] * k[i];
                anti[3 * i + j][idx] = gd * half23 + (c[i][j] - c[j][i]) * half4;
            }
        }
    }
    let lin_phys = grid.to_physical(&Spectrum::<T, Scalar>::from_components(
        grid.dims(),
        vec![lin],
    )?)?;
    let qp = grid.to_physical(q)?;
    let mut lambda0 = lin_phys;
    for (idx, v) in lambda0.component_mut(0).iter_mut().enumerate() {
        let (tr2, _) = qp.at(idx).trace_invariants();
        *v += p.b * third * tr2;
    }
    let anti = grid.to_physical(&Spectrum::<T, Full3x3>::from_components(grid.dims(), anti)?)?;
    Ok((lambda0, anti))
}

/// `σ^d` at the grid points (exact pointwise products of band-limited fields).
pub fn distortion_stress<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> Result<MatrixField<T>, SpectralError> {
    let mut refs = q.component_refs();
    let dq = q_gradient(grid, q);
    for d in &dq {
        refs.extend(d.component_refs());
    }
    let phys = grid.fft().inverse_many(&refs);
    let inputs: Vec<&[T]> = phys.iter().map(|v| v.as_slice()).collect();
    let out = map_points(&inputs, 9, |v, o| {
        let (qm, dqm) = unpack_q_grad(v);
        let s = distortion_stress_at(&qm, &dqm, p);
        for i in 0..3 {
            for j in 0..3 {
                o[3 * i + j] = s[(i, j)];
            }
        }
    });
    MatrixField::from_components(grid.dims(), out)
}

/// `σ^a = QH − HQ` pointwise.
pub fn antisymmetric_stress<T: Real>(
    q: &QTensorField<T>,
    h: &QTensorField<T>,
) -> Result<MatrixField<T>, SpectralError> {
    if q.dims() != h.dims() {
        return Err(SpectralError::GridMismatch {
            expected: q.dims(),
            found: h.dims(),
        });
    }
    Ok(MatrixField::from_fn(q.dims(), |idx| {
        let qm = q.at(idx).to_matrix();
        let hm = h.at(idx).to_matrix();
        crate::tensor::commutator(&qm, &hm)
    }))
}

/// Elastic energy density `f_elasticity` at the grid points.
pub fn elastic_density<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> Result<ScalarField<T>, SpectralError> {
    let parts = elastic_density_parts_field(grid, q, p)?;
    let mut out = vec![T::zero(); grid.len()];
    for part in &parts {
        for (o, v) in out.iter_mut().zip(part) {
            *o += *v;
        }
    }
    ScalarField::from_components(grid.dims(), vec![out])
}

/// The `L1`, `L2`, `L3` and `L4` pieces of the elastic density at the grid points.
pub fn elastic_density_parts_field<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> Result<Vec<Vec<T>>, SpectralError> {
    if q.dims() != grid.dims() {
        return Err(SpectralError::GridMismatch {
            expected: grid.dims(),
            found: q.dims(),
        });
    }
    let mut refs = q.component_refs();
    let dq = q_gradient(grid, q);
    for d in &dq {
        refs.extend(d.component_refs());
    }
    let phys = grid.fft().inverse_many(&refs);
    let inputs: Vec<&[T]> = phys.iter().map(|v| v.as_slice()).collect();
    Ok(map_points(&inputs, 4, |v, o| {
        let (qm, dqm) = unpack_q_grad(v);
        o.copy_from_slice(&elastic_density_parts(&qm, &dqm, p));
    }))
}
