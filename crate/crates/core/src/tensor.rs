//! Pointwise algebra of 3×3 tensors and of the symmetric traceless subspace.
//!
//! A [`QTensor`] stores the five independent entries
//! `(q11, q12, q13, q22, q23)`; the remaining entries are reconstructed as
//! `q21 = q12`, `q31 = q13`, `q32 = q23` and `q33 = -(q11 + q22)`, so symmetry
//! and tracelessness hold by construction rather than up to a tolerance.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::Real;

/// Nonzero entries of the Levi-Civita symbol, `(i, j, k, sign)`.
pub const LEVI_CIVITA: [(usize, usize, usize, i8); 6] = [
    (0, 1, 2, 1),
    (1, 2, 0, 1),
    (2, 0, 1, 1),
    (0, 2, 1, -1),
    (2, 1, 0, -1),
    (1, 0, 2, -1),
];

/// Position of each stored component in the full matrix.
pub const QTENSOR_SLOTS: [(usize, usize); 5] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2)];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
}

/// General 3×3 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Matrix3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> Matrix3<T> {
    pub fn new(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn zero() -> Self {
        Self {
            m: [[T::zero(); 3]; 3],
        }
    }

    pub fn identity() -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            out.m[i][i] = T::one();
        }
        out
    }

    pub fn diag(d0: T, d1: T, d2: T) -> Self {
        let mut out = Self::zero();
        out.m[0][0] = d0;
        out.m[1][1] = d1;
        out.m[2][2] = d2;
        out
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = f(i, j);
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.m[j][i])
    }

    /// Trace, summed as `(m00 + m11) + m22`.
    pub fn trace(&self) -> T {
        (self.m[0][0] + self.m[1][1]) + self.m[2][2]
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(|i, j| self.m[i][j] * s)
    }

    /// Contraction `A:B = A_ij B_ij`.
    pub fn contract(&self, other: &Self) -> T {
        let mut acc = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc += self.m[i][j] * other.m[i][j];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> T {
        self.contract(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.m
            .iter()
            .flatten()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    /// Projection onto the symmetric traceless subspace without the
    /// finiteness check.
    #[inline]
    pub fn sym_traceless(&self) -> QTensor<T> {
        let half = T::lit(0.5);
        let third = self.trace() / T::lit(3.0);
        QTensor {
            q11: self.m[0][0] - third,
            q12: (self.m[0][1] + self.m[1][0]) * half,
            q13: (self.m[0][2] + self.m[2][0]) * half,
            q22: self.m[1][1] - third,
            q23: (self.m[1][2] + self.m[2][1]) * half,
        }
    }

    /// Antisymmetric part `(M - Mᵀ)/2`.
    pub fn antisymmetric_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(|i, j| (self.m[i][j] - self.m[j][i]) * half)
    }

    /// Symmetric part `(M + Mᵀ)/2`.
    pub fn symmetric_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(|i, j| (self.m[i][j] + self.m[j][i]) * half)
    }
}

impl<T> Index<(usize, usize)> for Matrix3<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.m[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix3<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.m[i][j]
    }
}

impl<T: Real> Add for Matrix3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] + rhs.m[i][j])
    }
}

impl<T: Real> Sub for Matrix3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] - rhs.m[i][j])
    }
}

impl<T: Real> Neg for Matrix3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.m[i][j])
    }
}

impl<T: Real> Mul for Matrix3<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| {
            self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j] + self.m[i][2] * rhs.m[2][j]
        })
    }
}

/// Symmetric traceless 3×3 tensor in five-component storage.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct QTensor<T> {
    pub q11: T,
    pub q12: T,
    pub q13: T,
    pub q22: T,
    pub q23: T,
}

impl<T: Real> QTensor<T> {
    pub fn new(q11: T, q12: T, q13: T, q22: T, q23: T) -> Self {
        Self {
            q11,
            q12,
            q13,
            q22,
            q23,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_array(c: [T; 5]) -> Self {
        Self::new(c[0], c[1], c[2], c[3], c[4])
    }

    pub fn to_array(&self) -> [T; 5] {
        [self.q11, self.q12, self.q13, self.q22, self.q23]
    }

    /// Uniaxial tensor `s (n⊗n − I/3)`; `n` is normalized first.
    pub fn uniaxial(s: T, n: [T; 3]) -> Self {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let n = [n[0] / len, n[1] / len, n[2] / len];
        let third = T::one() / T::lit(3.0);
        Self::new(
            s * (n[0] * n[0] - third),
            s * n[0] * n[1],
            s * n[0] * n[2],
            s * (n[1] * n[1] - third),
            s * n[1] * n[2],
        )
    }

    #[inline]
    pub fn q33(&self) -> T {
        -self.q11 - self.q22
    }

    #[inline]
    pub fn to_matrix(&self) -> Matrix3<T> {
        Matrix3::new([
            [self.q11, self.q12, self.q13],
            [self.q12, self.q22, self.q23],
            [self.q13, self.q23, self.q33()],
        ])
    }

    /// `Q1:Q2 = tr(Q1 Q2)` evaluated from the stored components.
    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        let two = T::lit(2.0);
        two * (self.q11 * other.q11 + self.q22 * other.q22)
            + self.q11 * other.q22
            + self.q22 * other.q11
            + two * (self.q12 * other.q12 + self.q13 * other.q13 + self.q23 * other.q23)
    }

    pub fn frobenius_norm(&self) -> T {
        self.dot(self).max(T::zero()).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(
            self.q11 * s,
            self.q12 * s,
            self.q13 * s,
            self.q22 * s,
            self.q23 * s,
        )
    }

    /// `(tr Q², tr Q³)`.
    pub fn trace_invariants(&self) -> (T, T) {
        let q = self.to_matrix();
        let q2 = q * q;
        (q2.trace(), (q2 * q).trace())
    }
}

impl<T: Real> Add for QTensor<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.q11 + o.q11,
            self.q12 + o.q12,
            self.q13 + o.q13,
            self.q22 + o.q22,
            self.q23 + o.q23,
        )
    }
}

impl<T: Real> Sub for QTensor<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.q11 - o.q11,
            self.q12 - o.q12,
            self.q13 - o.q13,
            self.q22 - o.q22,
            self.q23 - o.q23,
        )
    }
}

/// `((M + Mᵀ)/2) − (tr M / 3) I` in five-component storage.
pub fn sym_traceless_project<T: Real>(m: &Matrix3<T>) -> Result<QTensor<T>, TensorError> {
    for row in 0..3 {
        for col in 0..3 {
            if !m.m[row][col].is_finite() {
                return Err(TensorError::NonFinite { row, col });
            }
        }
    }
    Ok(m.sym_traceless())
}

/// `(tr Q², tr Q³)`.
pub fn trace_invariants<T: Real>(q: &QTensor<T>) -> (T, T) {
    q.trace_invariants()
}

/// `AB − BA`.
pub fn commutator<T: Real>(a: &Matrix3<T>, b: &Matrix3<T>) -> Matrix3<T> {
    *a * *b - *b * *a
}

/// Splits a velocity gradient `∂u_i/∂x_j` into strain rate and vorticity
/// tensors.
pub fn strain_and_vorticity<T: Real>(grad_u: &Matrix3<T>) -> (Matrix3<T>, Matrix3<T>) {
    (grad_u.symmetric_part(), grad_u.antisymmetric_part())
}

/// Vorticity tensor `Ω_ij = (u_i,j − u_j,i)/2` from the vorticity vector
/// `ω = ∇×u`; `Ω_ij = −½ ε_ijk ω_k`.
pub fn vorticity_tensor<T: Real>(omega: [T; 3]) -> Matrix3<T> {
    let h = T::lit(0.5);
    Matrix3::new([
        [T::zero(), -h * omega[2], h * omega[1]],
        [h * omega[2], T::zero(), -h * omega[0]],
        [-h * omega[1], h * omega[0], T::zero()],
    ])
}
