use num_complex::Complex;

use super::field::{Field, Layout, Scalar, Spectrum, Vector3};
use super::grid::SpectralGrid;
use super::SpectralError;
use crate::scalar::Real;

/// Grid norms of a field: `‖f‖`, `‖∇f‖`, `‖Δf‖` (all L²) and `‖f‖_{L⁴}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms<T> {
    pub l2: T,
    pub h1: T,
    pub h2: T,
    pub l4: T,
}

#[inline]
fn times_i<T: Real>(c: Complex<T>, k: T) -> Complex<T> {
    Complex::new(-c.im * k, c.re * k)
}

impl<T: Real> SpectralGrid<T> {
    fn check_dims(&self, found: [usize; 3]) -> Result<(), SpectralError> {
        if found == self.dims() {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch {
                expected: self.dims(),
                found,
            })
        }
    }

    pub fn to_spectral<L: Layout>(&self, f: &Field<T, L>) -> Result<Spectrum<T, L>, SpectralError> {
        self.check_dims(f.dims())?;
        let comps = self.fft().forward_many(&f.component_refs());
        let mut s = Spectrum::from_components(self.dims(), comps)?;
        s.set_solenoidal(f.is_solenoidal());
        Ok(s)
    }

    pub fn to_physical<L: Layout>(&self, s: &Spectrum<T, L>) -> Result<Field<T, L>, SpectralError> {
        self.check_dims(s.dims())?;
        let comps = self.fft().inverse_many(&s.component_refs());
        let mut f = Field::from_components(self.dims(), comps)?;
        f.set_solenoidal(s.is_solenoidal());
        Ok(f)
    }

    /// Applies a real per-mode multiplier to every component.
    pub fn apply_multiplier<L: Layout>(
        &self,
        s: &Spectrum<T, L>,
        m: impl Fn(usize) -> T,
    ) -> Spectrum<T, L> {
        assert_eq!(s.dims(), self.dims(), "spectrum does not match grid");
        let mut out = s.clone();
        for c in 0..L::COMPONENTS {
            let comp = out.component_mut(c);
            for (idx, v) in comp.iter_mut().enumerate() {
                *v *= m(idx);
            }
        }
        out.set_solenoidal(s.is_solenoidal());
        out
    }

    pub fn derivative<L: Layout>(&self, s: &Spectrum<T, L>, axis: usize) -> Spectrum<T, L> {
        assert!(axis < 3, "axis out of range");
        assert_eq!(s.dims(), self.dims(), "spectrum does not match grid");
        let mut out = Spectrum::zeros(self.dims());
        for c in 0..L::COMPONENTS {
            let src = s.component(c);
            for (idx, v) in out.component_mut(c).iter_mut().enumerate() {
                *v = times_i(src[idx], self.k(idx)[axis]);
            }
        }
        out
    }

    pub fn laplacian<L: Layout>(&self, s: &Spectrum<T, L>) -> Spectrum<T, L> {
        self.apply_multiplier(s, |idx| -self.k2(idx))
    }

    pub fn gradient(&self, s: &Spectrum<T, Scalar>) -> Spectrum<T, Vector3> {
        let comps = (0..3)
            .map(|a| self.derivative(s, a).into_components().remove(0))
            .collect();
        Spectrum::from_components(self.dims(), comps).expect("shape is consistent")
    }

    pub fn divergence(&self, v: &Spectrum<T, Vector3>) -> Spectrum<T, Scalar> {
        assert_eq!(v.dims(), self.dims(), "spectrum does not match grid");
        let mut out = Spectrum::<T, Scalar>::zeros(self.dims());
        let comp = out.component_mut(0);
        for (idx, d) in comp.iter_mut().enumerate() {
            let k = self.k(idx);
            let sum = v.component(0)[idx] * k[0]
                + v.component(1)[idx] * k[1]
                + v.component(2)[idx] * k[2];
            *d = times_i(sum, T::one());
        }
        out
    }

    pub fn curl(&self, v: &Spectrum<T, Vector3>) -> Spectrum<T, Vector3> {
        assert_eq!(v.dims(), self.dims(), "spectrum does not match grid");
        let n = self.len();
        let mut comps = vec![vec![Complex::new(T::zero(), T::zero()); n]; 3];
        for idx in 0..n {
            let k = self.k(idx);
            let u = [
                v.component(0)[idx],
                v.component(1)[idx],
                v.component(2)[idx],
            ];
            let c = [
                u[2] * k[1] - u[1] * k[2],
                u[0] * k[2] - u[2] * k[0],
                u[1] * k[0] - u[0] * k[1],
            ];
            for a in 0..3 {
                comps[a][idx] = times_i(c[a], T::one());
            }
        }
        Spectrum::from_components(self.dims(), comps).expect("shape is consistent")
    }

    /// Leray projection onto divergence-free fields; the mean is untouched.
    pub fn leray_project(&self, v: &Spectrum<T, Vector3>) -> Spectrum<T, Vector3> {
        let mut out = v.clone();
        self.leray_project_in_place(&mut out);
        out
    }

    pub fn leray_project_in_place(&self, v: &mut Spectrum<T, Vector3>) {
        assert_eq!(v.dims(), self.dims(), "spectrum does not match grid");
        let mut comps = std::mem::replace(v, Spectrum::zeros(self.dims())).into_components();
        for idx in 0..self.len() {
            let k2 = self.k2(idx);
            if k2 == T::zero() {
                continue;
            }
            let k = self.k(idx);
            let kv = (comps[0][idx] * k[0] + comps[1][idx] * k[1] + comps[2][idx] * k[2]) / k2;
            for a in 0..3 {
                comps[a][idx] -= kv * k[a];
            }
        }
        *v = Spectrum::from_components(self.dims(), comps).expect("shape is consistent");
        v.set_solenoidal(true);
    }

    /// `‖P^⊥ v‖ / ‖v‖`: relative size of the gradient part of `v` (0 for `v = 0`).
    pub fn divergence_ratio(&self, v: &Spectrum<T, Vector3>) -> T {
        let mut grad = T::zero();
        let mut total = T::zero();
        for idx in 0..self.len() {
            let u = [
                v.component(0)[idx],
                v.component(1)[idx],
                v.component(2)[idx],
            ];
            total += u.iter().map(|c| c.norm_sqr()).sum::<T>();
            let k2 = self.k2(idx);
            if k2 > T::zero() {
                let k = self.k(idx);
                let kv = u[0] * k[0] + u[1] * k[1] + u[2] * k[2];
                grad += kv.norm_sqr() / k2;
            }
        }
        if total == T::zero() {
            T::zero()
        } else {
            (grad / total).sqrt()
        }
    }

    /// Whether mode `idx` survives the mollifier `J_n`, i.e. `1/n ≤ |k| ≤ n`.
    pub fn mollifier_keeps(&self, idx: usize, n: usize) -> bool {
        let k = self.kmag(idx);
        let nn = T::count(n);
        k >= T::one() / nn && k <= nn
    }

    pub fn mollify<L: Layout>(
        &self,
        s: &Spectrum<T, L>,
        n: usize,
    ) -> Result<Spectrum<T, L>, SpectralError> {
        if n == 0 {
            return Err(SpectralError::InvalidMollifier);
        }
        Ok(self.apply_multiplier(s, |idx| {
            if self.mollifier_keeps(idx, n) {
                T::one()
            } else {
                T::zero()
            }
        }))
    }

    /// Truncates to the dealias mask.
    pub fn dealias<L: Layout>(&self, s: &Spectrum<T, L>) -> Spectrum<T, L> {
        self.apply_multiplier(s, |idx| {
            if self.retained(idx) {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub fn dealias_in_place<L: Layout>(&self, s: &mut Spectrum<T, L>) {
        let flag = s.is_solenoidal();
        for c in 0..L::COMPONENTS {
            for (idx, v) in s.component_mut(c).iter_mut().enumerate() {
                if !self.retained(idx) {
                    *v = Complex::new(T::zero(), T::zero());
                }
            }
        }
        s.set_solenoidal(flag);
    }

    /// Whether every coefficient outside the dealias mask is exactly zero.
    pub fn is_band_limited<L: Layout>(&self, s: &Spectrum<T, L>) -> bool {
        s.components().iter().all(|c| {
            c.iter()
                .enumerate()
                .all(|(idx, v)| self.retained(idx) || (v.re == T::zero() && v.im == T::zero()))
        })
    }

    /// `∫ a·b dx` from spectral coefficients (Parseval).
    pub fn inner<L: Layout>(&self, a: &Spectrum<T, L>, b: &Spectrum<T, L>) -> T {
        assert_eq!(a.dims(), b.dims(), "spectra differ in size");
        let s: T = (0..self.len()).map(|idx| a.dot_at(b, idx)).sum();
        s * self.volume()
    }

    pub fn norm_sq<L: Layout>(&self, s: &Spectrum<T, L>) -> T {
        self.inner(s, s)
    }

    /// `‖∇f‖²` from spectral coefficients.
    pub fn grad_norm_sq<L: Layout>(&self, s: &Spectrum<T, L>) -> T {
        let sum: T = (0..self.len())
            .map(|idx| self.k2(idx) * s.dot_at(s, idx))
            .sum();
        sum * self.volume()
    }

    /// `‖Δf‖²` from spectral coefficients.
    pub fn lap_norm_sq<L: Layout>(&self, s: &Spectrum<T, L>) -> T {
        let sum: T = (0..self.len())
            .map(|idx| self.k2(idx) * self.k2(idx) * s.dot_at(s, idx))
            .sum();
        sum * self.volume()
    }

    /// `∫ a·b dx` by equal-weight quadrature on the grid points.
    pub fn inner_physical<L: Layout>(&self, a: &Field<T, L>, b: &Field<T, L>) -> T {
        assert_eq!(a.dims(), b.dims(), "fields differ in size");
        let s: T = (0..a.len()).map(|idx| a.dot_at(b, idx)).sum();
        s * self.cell_volume()
    }

    /// Physical-space quadrature norms; derivatives are taken spectrally.
    pub fn discrete_norms<L: Layout>(&self, f: &Field<T, L>) -> Result<Norms<T>, SpectralError> {
        let s = self.to_spectral(f)?;
        let l2 = self.inner_physical(f, f);
        let mut h1 = T::zero();
        for axis in 0..3 {
            let d = self.to_physical(&self.derivative(&s, axis))?;
            h1 += self.inner_physical(&d, &d);
        }
        let lap = self.to_physical(&self.laplacian(&s))?;
        let h2 = self.inner_physical(&lap, &lap);
        let l4: T = (0..f.len())
            .map(|idx| {
                let q = f.dot_at(f, idx);
                q * q
            })
            .sum::<T>()
            * self.cell_volume();
        Ok(Norms {
            l2: l2.sqrt(),
            h1: h1.sqrt(),
            h2: h2.sqrt(),
            l4: l4.sqrt().sqrt(),
        })
    }

    /// Evaluates `f(x)` at every grid point.
    pub fn sample<L: Layout>(&self, f: impl Fn([T; 3], &mut [T])) -> Field<T, L> {
        let mut comps = vec![vec![T::zero(); self.len()]; L::COMPONENTS];
        let mut v = vec![T::zero(); L::COMPONENTS];
        for idx in 0..self.len() {
            f(self.coordinates(idx), &mut v);
            for (c, x) in v.iter().enumerate() {
                comps[c][idx] = *x;
            }
        }
        Field::from_components(self.dims(), comps).expect("shape is consistent")
    }
}

#[cfg(test)]
mod tests {
    use super::super::{random_band_limited, RandomSpec, ScalarField, VectorField3};
    use super::*;
    use std::f64::consts::PI;

    fn grid(l: f64) -> SpectralGrid<f64> {
        SpectralGrid::new([16, 12, 10], l).unwrap()
    }

    fn scalar(g: &SpectralGrid<f64>, f: impl Fn([f64; 3]) -> f64) -> ScalarField<f64> {
        g.sample(|x, v| v[0] = f(x))
    }

    #[test]
    fn constant_has_single_mean_coefficient() {
        let g = grid(3.0);
        let s = g.to_spectral(&scalar(&g, |_| 2.5)).unwrap();
        for (idx, c) in s.component(0).iter().enumerate() {
            let expect = if idx == 0 { 2.5 } else { 0.0 };
            assert!((c - Complex::new(expect, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn single_sine_has_two_modes() {
        let l = 2.0;
        let g = grid(l);
        let s = g
            .to_spectral(&scalar(&g, |x| (2.0 * PI * x[0] / l).sin()))
            .unwrap();
        let plus = g.mode_index([1, 0, 0]);
        let minus = g.mode_index([-1, 0, 0]);
        for (idx, c) in s.component(0).iter().enumerate() {
            let expect = if idx == plus {
                Complex::new(0.0, -0.5)
            } else if idx == minus {
                Complex::new(0.0, 0.5)
            } else {
                Complex::new(0.0, 0.0)
            };
            assert!((c - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn random_round_trip_and_parseval() {
        let g = grid(2.0 * PI);
        let f: ScalarField<f64> = scalar(&g, |x| {
            (x[0] * 3.1).sin() * (x[1] + 0.3).exp() + x[2].cos().powi(3)
        });
        let s = g.to_spectral(&f).unwrap();
        let back = g.to_physical(&s).unwrap();
        let scale = f.max_abs();
        for (a, b) in f.component(0).iter().zip(back.component(0)) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
        let phys = g.inner_physical(&f, &f);
        let spec = g.norm_sq(&s);
        assert!((phys - spec).abs() <= 1e-12 * phys);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let g = grid(1.0);
        let f = ScalarField::<f64>::zeros([8, 8, 8]);
        assert!(matches!(
            g.to_spectral(&f),
            Err(SpectralError::GridMismatch { .. })
        ));
    }

    #[test]
    fn derivative_of_sine() {
        let l = 3.0;
        let g = grid(l);
        let w = 2.0 * PI / l;
        let s = g.to_spectral(&scalar(&g, |x| (w * x[0]).sin())).unwrap();
        let d = g.to_physical(&g.derivative(&s, 0)).unwrap();
        for idx in 0..g.len() {
            let x = g.coordinates(idx);
            assert!((d.component(0)[idx] - w * (w * x[0]).cos()).abs() < 1e-10);
        }
        let c = g.to_spectral(&scalar(&g, |_| 4.0)).unwrap();
        assert!(g.laplacian(&c).max_abs() < 1e-13);
        assert!(g.derivative(&c, 2).max_abs() < 1e-14);
    }

    #[test]
    fn mixed_partials_commute() {
        let g = grid(2.0 * PI);
        let s = random_band_limited::<f64, Scalar>(&g, &RandomSpec::new(1.5, 3)).unwrap();
        let a = g.derivative(&g.derivative(&s, 0), 1);
        let b = g.derivative(&g.derivative(&s, 1), 0);
        let diff = a.sub(&b).max_abs();
        assert!(diff <= 1e-14 * a.max_abs());
    }

    #[test]
    fn leray_examples() {
        let l = 2.0 * PI;
        let g = grid(l);
        let vec_field = |f: &dyn Fn([f64; 3]) -> [f64; 3]| -> VectorField3<f64> {
            g.sample(|x, v| v.copy_from_slice(&f(x)))
        };
        // gradient of sin(x1) and the parallel single mode are annihilated
        let grad = g
            .to_spectral(&vec_field(&|x| [x[0].cos(), 0.0, 0.0]))
            .unwrap();
        assert!(g.leray_project(&grad).max_abs() < 1e-15);
        let par = g
            .to_spectral(&vec_field(&|x| [x[0].sin(), 0.0, 0.0]))
            .unwrap();
        assert!(g.leray_project(&par).max_abs() < 1e-15);
        // a shear flow is already solenoidal
        let shear = g
            .to_spectral(&vec_field(&|x| [x[1].sin(), 0.0, 0.0]))
            .unwrap();
        let p = g.leray_project(&shear);
        assert!(p.sub(&shear).max_abs() < 1e-15);
        assert!(p.is_solenoidal());
        // mean survives
        let mean = g.to_spectral(&vec_field(&|_| [1.0, -2.0, 0.5])).unwrap();
        let pm = g.leray_project(&mean);
        assert_eq!(pm.component(1)[0], mean.component(1)[0]);
        assert!(pm.sub(&mean).max_abs() < 1e-15);
    }

    #[test]
    fn leray_is_idempotent_and_divergence_free() {
        let g = grid(2.0 * PI);
        let v = random_band_limited::<f64, Vector3>(&g, &RandomSpec::new(1.0, 11)).unwrap();
        let p = g.leray_project(&v);
        let pp = g.leray_project(&p);
        assert!(pp.sub(&p).max_abs() <= 1e-15 * p.max_abs());
        assert!(g.divergence_ratio(&p) < 1e-14);
        assert!(g.divergence_ratio(&v) > 0.1);
    }

    #[test]
    fn mollifier_examples() {
        let l = 2.0 * PI;
        let g = SpectralGrid::<f64>::cubic(16, l).unwrap();
        let f = g.to_spectral(&scalar(&g, |x| (5.0 * x[0]).sin())).unwrap();
        assert!(g.mollify(&f, 4).unwrap().max_abs() < 1e-15);
        assert!(g.mollify(&f, 5).unwrap().sub(&f).max_abs() < 1e-15);
        let r = random_band_limited::<f64, Scalar>(&g, &RandomSpec::new(1.0, 5)).unwrap();
        let once = g.mollify(&r, 3).unwrap();
        assert_eq!(g.mollify(&once, 3).unwrap(), once);
        assert!(matches!(
            g.mollify(&r, 0),
            Err(SpectralError::InvalidMollifier)
        ));
    }

    #[test]
    fn norms_of_simple_fields() {
        let l = 3.0;
        let g = grid(l);
        let zero = g
            .discrete_norms(&ScalarField::<f64>::zeros(g.dims()))
            .unwrap();
        assert_eq!(
            zero,
            Norms {
                l2: 0.0,
                h1: 0.0,
                h2: 0.0,
                l4: 0.0
            }
        );
        let w = 2.0 * PI / l;
        let f = scalar(&g, |x| (w * x[0]).sin());
        let n = g.discrete_norms(&f).unwrap();
        let v = l * l * l;
        assert!((n.l2 * n.l2 - v / 2.0).abs() < 1e-10);
        assert!((n.h1 * n.h1 - w * w * v / 2.0).abs() < 1e-10);
        assert!((n.h2 * n.h2 - w.powi(4) * v / 2.0).abs() < 1e-9);
        // ∫ sin⁴ = 3V/8
        assert!((n.l4.powi(4) - 3.0 * v / 8.0).abs() < 1e-10);
    }

    #[test]
    fn gradient_parseval_on_random_field() {
        let g = grid(2.0 * PI);
        let s = random_band_limited::<f64, Scalar>(&g, &RandomSpec::new(1.0, 8)).unwrap();
        let f = g.to_physical(&s).unwrap();
        let n = g.discrete_norms(&f).unwrap();
        let spectral = g.grad_norm_sq(&s);
        assert!((n.h1 * n.h1 - spectral).abs() <= 1e-12 * spectral);
    }

    #[test]
    fn dealiased_product_has_no_energy_above_cutoff() {
        let g = SpectralGrid::<f64>::cubic(16, 2.0 * PI).unwrap();
        let a = random_band_limited::<f64, Scalar>(&g, &RandomSpec::new(0.5, 1)).unwrap();
        let b = random_band_limited::<f64, Scalar>(&g, &RandomSpec::new(0.5, 2)).unwrap();
        let pg = g.product_grid(2);
        let phys = pg.lift(&[a.component(0), b.component(0)]);
        let prod: Vec<f64> = phys[0].iter().zip(&phys[1]).map(|(x, y)| x * y).collect();
        let p = pg.project(&[&prod]).remove(0);
        for (idx, c) in p.iter().enumerate() {
            if !g.retained(idx) {
                assert_eq!(c.norm(), 0.0);
            }
        }
        // the truncated product agrees with a direct convolution on retained modes
        let (ac, bc) = (a.component(0), b.component(0));
        for probe in [[0i64, 0, 0], [3, -2, 1], [-10 / 2, 5, 0]] {
            let target = g.mode_index(probe);
            let mut conv = Complex::new(0.0, 0.0);
            for i in 0..g.len() {
                if !g.retained(i) {
                    continue;
                }
                let m = g.mode(i);
                let rest = [probe[0] - m[0], probe[1] - m[1], probe[2] - m[2]];
                if rest
                    .iter()
                    .zip(g.cutoff())
                    .all(|(r, k)| r.unsigned_abs() as usize <= k)
                {
                    conv += ac[i] * bc[g.mode_index(rest)];
                }
            }
            assert!((conv - p[target]).norm() < 1e-14);
        }
    }
}
