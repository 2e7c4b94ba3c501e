//! Multi-component grid fields in physical and spectral representation.

use std::marker::PhantomData;

use num_complex::Complex;

use super::SpectralError;
use crate::scalar::Real;
use crate::tensor::{Matrix3, QTensor};

/// Component layout of a field.
///
/// `METRIC` lists `(i, j, w)` triples such that the pointwise inner product of
/// two values is `Σ w·a_i·b_j`. For symmetric traceless tensors stored in five
/// components this reproduces the full Frobenius product `tr(AB)`.
pub trait Layout: Copy + Clone + Default + std::fmt::Debug + Send + Sync + 'static {
    const COMPONENTS: usize;
    const NAME: &'static str;
    const METRIC: &'static [(usize, usize, f64)];
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Scalar;
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Vector3;
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SymTraceless;
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Full3x3;

impl Layout for Scalar {
    const COMPONENTS: usize = 1;
    const NAME: &'static str = "scalar";
    const METRIC: &'static [(usize, usize, f64)] = &[(0, 0, 1.0)];
}

impl Layout for Vector3 {
    const COMPONENTS: usize = 3;
    const NAME: &'static str = "vector";
    const METRIC: &'static [(usize, usize, f64)] = &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)];
}

impl Layout for SymTraceless {
    const COMPONENTS: usize = 5;
    const NAME: &'static str = "qtensor";
    const METRIC: &'static [(usize, usize, f64)] = &[
        (0, 0, 2.0),
        (0, 3, 1.0),
        (3, 0, 1.0),
        (3, 3, 2.0),
        (1, 1, 2.0),
        (2, 2, 2.0),
        (4, 4, 2.0),
    ];
}

impl Layout for Full3x3 {
    const COMPONENTS: usize = 9;
    const NAME: &'static str = "matrix";
    const METRIC: &'static [(usize, usize, f64)] = &[
        (0, 0, 1.0),
        (1, 1, 1.0),
        (2, 2, 1.0),
        (3, 3, 1.0),
        (4, 4, 1.0),
        (5, 5, 1.0),
        (6, 6, 1.0),
        (7, 7, 1.0),
        (8, 8, 1.0),
    ];
}

/// Real values on a grid, one contiguous x-fastest array per component.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T, L> {
    dims: [usize; 3],
    comps: Vec<Vec<T>>,
    solenoidal: bool,
    layout: PhantomData<L>,
}

/// Fourier-series coefficients of a real field, full (not half) spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T, L> {
    dims: [usize; 3],
    comps: Vec<Vec<Complex<T>>>,
    solenoidal: bool,
    layout: PhantomData<L>,
}

pub type ScalarField<T> = Field<T, Scalar>;
pub type VectorField3<T> = Field<T, Vector3>;
pub type QTensorField<T> = Field<T, SymTraceless>;
pub type MatrixField<T> = Field<T, Full3x3>;

fn check_components<V>(
    dims: [usize; 3],
    comps: &[Vec<V>],
    expected: usize,
) -> Result<(), SpectralError> {
    if comps.len() != expected {
        return Err(SpectralError::ComponentMismatch {
            expected,
            found: comps.len(),
        });
    }
    let n: usize = dims.iter().product();
    for c in comps {
        if c.len() != n {
            return Err(SpectralError::SizeMismatch {
                expected: n,
                found: c.len(),
            });
        }
    }
    Ok(())
}

macro_rules! common_impl {
    ($ty:ident, $elem:ty, $zero:expr) => {
        impl<T: Real, L: Layout> $ty<T, L> {
            pub fn zeros(dims: [usize; 3]) -> Self {
                let n = dims.iter().product();
                Self {
                    dims,
                    comps: vec![vec![$zero; n]; L::COMPONENTS],
                    solenoidal: false,
                    layout: PhantomData,
                }
            }

            pub fn from_components(
                dims: [usize; 3],
                comps: Vec<Vec<$elem>>,
            ) -> Result<Self, SpectralError> {
                check_components(dims, &comps, L::COMPONENTS)?;
                Ok(Self {
                    dims,
                    comps,
                    solenoidal: false,
                    layout: PhantomData,
                })
            }

            pub fn dims(&self) -> [usize; 3] {
                self.dims
            }

            pub fn len(&self) -> usize {
                self.dims.iter().product()
            }

            pub fn is_empty(&self) -> bool {
                self.len() == 0
            }

            pub fn components(&self) -> &[Vec<$elem>] {
                &self.comps
            }

            pub fn component(&self, c: usize) -> &[$elem] {
                &self.comps[c]
            }

            pub fn component_mut(&mut self, c: usize) -> &mut [$elem] {
                self.solenoidal = false;
                &mut self.comps[c]
            }

            pub fn into_components(self) -> Vec<Vec<$elem>> {
                self.comps
            }

            pub fn component_refs(&self) -> Vec<&[$elem]> {
                self.comps.iter().map(|c| c.as_slice()).collect()
            }

            /// Whether the field is known to be divergence free (set by the Leray projection).
            pub fn is_solenoidal(&self) -> bool {
                self.solenoidal
            }

            pub(crate) fn set_solenoidal(&mut self, flag: bool) {
                self.solenoidal = flag;
            }

            pub fn scaled(&self, s: T) -> Self {
                let mut out = self.clone();
                out.scale_in_place(s);
                out
            }

            pub fn scale_in_place(&mut self, s: T) {
                for c in &mut self.comps {
                    c.iter_mut().for_each(|v| *v *= s);
                }
            }

            /// `self += s * other`. Solenoidality survives if both inputs have it.
            pub fn axpy(&mut self, s: T, other: &Self) {
                assert_eq!(self.dims, other.dims, "field dimensions differ");
                for (a, b) in self.comps.iter_mut().zip(&other.comps) {
                    a.iter_mut().zip(b).for_each(|(x, &y)| *x += y * s);
                }
                self.solenoidal &= other.solenoidal;
            }

            pub fn add(&self, other: &Self) -> Self {
                let mut out = self.clone();
                out.axpy(T::one(), other);
                out
            }

            pub fn sub(&self, other: &Self) -> Self {
                let mut out = self.clone();
                out.axpy(-T::one(), other);
                out
            }
        }
    };
}

common_impl!(Field, T, T::zero());
common_impl!(Spectrum, Complex<T>, Complex::new(T::zero(), T::zero()));

impl<T: Real, L: Layout> Field<T, L> {
    pub fn max_abs(&self) -> T {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    /// Pointwise metric product of two values at flat index `idx`.
    pub fn dot_at(&self, other: &Self, idx: usize) -> T {
        L::METRIC
            .iter()
            .map(|&(i, j, w)| T::lit(w) * self.comps[i][idx] * other.comps[j][idx])
            .sum()
    }
}

impl<T: Real, L: Layout> Spectrum<T, L> {
    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    pub fn max_abs(&self) -> T {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// Metric product of coefficients at one mode, `Re Σ w conj(a_i) b_j`.
    pub fn dot_at(&self, other: &Self, idx: usize) -> T {
        L::METRIC
            .iter()
            .map(|&(i, j, w)| T::lit(w) * (self.comps[i][idx].conj() * other.comps[j][idx]).re)
            .sum()
    }
}

impl<T: Real> QTensorField<T> {
    pub fn at(&self, idx: usize) -> QTensor<T> {
        QTensor::from_array(std::array::from_fn(|c| self.comps[c][idx]))
    }

    pub fn set(&mut self, idx: usize, q: QTensor<T>) {
        for (c, v) in q.to_array().into_iter().enumerate() {
            self.comps[c][idx] = v;
        }
    }

    pub fn from_fn(dims: [usize; 3], f: impl Fn(usize) -> QTensor<T>) -> Self {
        let mut out = Self::zeros(dims);
        for idx in 0..out.len() {
            out.set(idx, f(idx));
        }
        out
    }
}

impl<T: Real> VectorField3<T> {
    pub fn at(&self, idx: usize) -> [T; 3] {
        std::array::from_fn(|c| self.comps[c][idx])
    }

    pub fn set(&mut self, idx: usize, v: [T; 3]) {
        self.solenoidal = false;
        for (c, x) in v.into_iter().enumerate() {
            self.comps[c][idx] = x;
        }
    }
}

impl<T: Real> MatrixField<T> {
    pub fn at(&self, idx: usize) -> Matrix3<T> {
        Matrix3::from_fn(|i, j| self.comps[3 * i + j][idx])
    }

    pub fn set(&mut self, idx: usize, m: Matrix3<T>) {
        for i in 0..3 {
            for j in 0..3 {
                self.comps[3 * i + j][idx] = m[(i, j)];
            }
        }
    }

    pub fn from_fn(dims: [usize; 3], f: impl Fn(usize) -> Matrix3<T>) -> Self {
        let mut out = Self::zeros(dims);
        for idx in 0..out.len() {
            out.set(idx, f(idx));
        }
        out
    }
}
