//! Per-mode spectral kernels for the linear (elastic) part of the molecular
//! field and related derivative contractions of a Q-tensor field.

use num_complex::Complex;

use crate::scalar::Real;
use crate::spectral::{Spectrum, SymTraceless};
use crate::tensor::LEVI_CIVITA;

use super::MaterialParams;

pub type C<T> = Complex<T>;

/// Symmetric traceless 3×3 matrix from five stored components.
#[inline]
pub fn expand<T: Real>(q: [C<T>; 5]) -> [[C<T>; 3]; 3] {
    let q33 = -q[0] - q[3];
    [[q[0], q[1], q[2]], [q[1], q[3], q[4]], [q[2], q[4], q33]]
}

/// Five stored components of a matrix that is symmetric and traceless.
#[inline]
pub fn compress<T: Real>(m: &[[C<T>; 3]; 3]) -> [C<T>; 5] {
    [m[0][0], m[0][1], m[0][2], m[1][1], m[1][2]]
}

#[inline]
pub fn gather<T: Real>(q: &Spectrum<T, SymTraceless>, idx: usize) -> [C<T>; 5] {
    std::array::from_fn(|c| q.component(c)[idx])
}

/// `w_i = k_p Q̂_ip`, so that `(div Q)^ = i w`.
#[inline]
pub fn contract_k<T: Real>(k: [T; 3], q: &[[C<T>; 3]; 3]) -> [C<T>; 3] {
    std::array::from_fn(|i| q[i][0] * k[0] + q[i][1] * k[1] + q[i][2] * k[2])
}

/// `Ĉ_ij` for `C_ij = e_lik Q_lj,k`.
#[inline]
pub fn curl_contraction<T: Real>(k: [T; 3], q: &[[C<T>; 3]; 3]) -> [[C<T>; 3]; 3] {
    let zero = C::new(T::zero(), T::zero());
    let mut out = [[zero; 3]; 3];
    for &(l, i, kk, s) in &LEVI_CIVITA {
        let f = T::lit(s as f64) * k[kk];
        for j in 0..3 {
            let v = q[l][j] * f;
            // multiply by i
            out[i][j] += C::new(-v.im, v.re);
        }
    }
    out
}

/// `(M̂, Ê)` at one mode.
///
/// `M = L1ΔQ + ((L2+L3)/2)(Q_ik,kj + Q_jk,ki − ⅔δ_ij Q_kp,kp)` and
/// `E = (L4/2)(C + Cᵀ)`; the trace term of `E` vanishes for symmetric `Q`.
#[inline]
pub fn elastic_mode<T: Real>(
    k: [T; 3],
    q5: [C<T>; 5],
    p: &MaterialParams<T>,
) -> ([C<T>; 5], [C<T>; 5]) {
    let q = expand(q5);
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let w = contract_k(k, &q);
    let kw = w[0] * k[0] + w[1] * k[1] + w[2] * k[2];
    let half23 = T::lit(0.5) * p.l23();
    let two_thirds = T::lit(2.0 / 3.0);
    let m_at = |i: usize, j: usize| {
        let mut grad_div = w[i] * k[j] + w[j] * k[i];
        if i == j {
            grad_div -= kw * two_thirds;
        }
        -(q[i][j] * (p.l1 * k2)) - grad_div * half23
    };
    let c = curl_contraction(k, &q);
    let half4 = T::lit(0.5) * p.l4;
    let e_at = |i: usize, j: usize| (c[i][j] + c[j][i]) * half4;
    let slots = crate::tensor::QTENSOR_SLOTS;
    (
        std::array::from_fn(|s| m_at(slots[s].0, slots[s].1)),
        std::array::from_fn(|s| e_at(slots[s].0, slots[s].1)),
    )
}

/// Spectra of `M_Q` and `E_Q`.
pub fn elastic_spectra<T: Real>(
    grid: &crate::spectral::SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> (Spectrum<T, SymTraceless>, Spectrum<T, SymTraceless>) {
    let n = grid.len();
    let zero = C::new(T::zero(), T::zero());
    let mut m = vec![vec![zero; n]; 5];
    let mut e = vec![vec![zero; n]; 5];
    for idx in 0..n {
        let (mm, ee) = elastic_mode(grid.k(idx), gather(q, idx), p);
        for c in 0..5 {
            m[c][idx] = mm[c];
            e[c][idx] = ee[c];
        }
    }
    (
        Spectrum::from_components(grid.dims(), m).expect("shape is consistent"),
        Spectrum::from_components(grid.dims(), e).expect("shape is consistent"),
    )
}

/// Dense 5×5 matrix of the elastic operator `M + E` at one mode, acting on
/// the stored components.
pub fn elastic_matrix<T: Real>(k: [T; 3], p: &MaterialParams<T>) -> [[C<T>; 5]; 5] {
    let zero = C::new(T::zero(), T::zero());
    let mut out = [[zero; 5]; 5];
    for col in 0..5 {
        let mut unit = [zero; 5];
        unit[col] = C::new(T::one(), T::zero());
        let (m, e) = elastic_mode(k, unit, p);
        for row in 0..5 {
            out[row][col] = m[row] + e[row];
        }
    }
    out
}

/// Solves `A x = b` for a small dense complex system by Gaussian elimination
/// with partial pivoting. Returns `None` for a singular matrix.
pub fn solve_dense<T: Real, const N: usize>(
    mut a: [[C<T>; N]; N],
    mut b: [C<T>; N],
) -> Option<[C<T>; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&r, &s| {
            a[r][col]
                .norm_sqr()
                .partial_cmp(&a[s][col].norm_sqr())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].norm_sqr() == T::zero() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = C::new(T::one(), T::zero()) / a[col][col];
        for row in col + 1..N {
            let f = a[row][col] * inv;
            if f.norm_sqr() == T::zero() {
                continue;
            }
            for c in col..N {
                let v = a[col][c];
                a[row][c] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = b;
    for row in (0..N).rev() {
        let mut s = x[row];
        for c in row + 1..N {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solver_recovers_solution() {
        let a = [
            [C::new(4.0, 1.0), C::new(1.0, 0.0), C::new(0.0, -2.0)],
            [C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(3.0, 0.0)],
            [C::new(1.0, 1.0), C::new(2.0, 0.5), C::new(0.0, 0.0)],
        ];
        let x = [C::new(1.0, -1.0), C::new(0.5, 2.0), C::new(-3.0, 0.25)];
        let b: [C<f64>; 3] = std::array::from_fn(|i| (0..3).map(|j| a[i][j] * x[j]).sum());
        let got = solve_dense(a, b).unwrap();
        for i in 0..3 {
            assert!((got[i] - x[i]).norm() < 1e-14);
        }
        let zero = C::new(0.0, 0.0);
        assert!(solve_dense([[zero; 2]; 2], [zero; 2]).is_none());
    }

    #[test]
    fn elastic_operator_is_self_adjoint_under_metric() {
        // ⟨G, (M+E)Q⟩ = ⟨(M+E)G, Q⟩ with the Frobenius metric on expanded matrices.
        let p = MaterialParams {
            l1: 1.3,
            l2: 0.4,
            l3: 0.9,
            l4: -0.7,
            ..MaterialParams::default()
        };
        let k = [0.7, -1.2, 2.0];
        let q = [
            C::new(0.1, 0.3),
            C::new(-0.2, 0.1),
            C::new(0.4, 0.0),
            C::new(0.05, -0.3),
            C::new(0.2, 0.2),
        ];
        let g = [
            C::new(-0.3, 0.1),
            C::new(0.6, -0.2),
            C::new(0.1, 0.1),
            C::new(0.2, 0.0),
            C::new(-0.1, 0.5),
        ];
        let apply = |v| {
            let (m, e) = elastic_mode(k, v, &p);
            let s: [C<f64>; 5] = std::array::from_fn(|i| m[i] + e[i]);
            expand(s)
        };
        let dot = |a: [[C<f64>; 3]; 3], b: [[C<f64>; 3]; 3]| -> C<f64> {
            let mut s = C::new(0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    s += a[i][j].conj() * b[i][j];
                }
            }
            s
        };
        let lhs = dot(expand(g), apply(q));
        let rhs = dot(apply(g), expand(q));
        assert!((lhs - rhs).norm() < 1e-14);
    }
}
