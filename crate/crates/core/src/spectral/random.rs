use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::field::{Layout, Spectrum, Vector3};
use super::grid::SpectralGrid;
use super::SpectralError;
use crate::scalar::Real;

/// Parameters of a random band-limited field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpec {
    /// Coefficient magnitudes fall off like `(1 + |k|)^(−decay)`.
    pub decay: f64,
    pub seed: u64,
    /// Leray-project the result (vector fields only).
    pub solenoidal: bool,
    /// Root-mean-square value of the generated field.
    pub rms: f64,
    /// Optional extra cutoff on `|k|` inside the dealias mask.
    pub max_wavenumber: Option<f64>,
    pub zero_mean: bool,
}

impl RandomSpec {
    pub fn new(decay: f64, seed: u64) -> Self {
        Self {
            decay,
            seed,
            solenoidal: false,
            rms: 1.0,
            max_wavenumber: None,
            zero_mean: false,
        }
    }

    pub fn solenoidal(mut self) -> Self {
        self.solenoidal = true;
        self
    }

    pub fn rms(mut self, rms: f64) -> Self {
        self.rms = rms;
        self
    }

    pub fn max_wavenumber(mut self, k: f64) -> Self {
        self.max_wavenumber = Some(k);
        self
    }

    pub fn zero_mean(mut self) -> Self {
        self.zero_mean = true;
        self
    }
}

/// Draws a real, band-limited random field in spectral form.
///
/// Every component of every retained mode receives a complex Gaussian
/// coefficient, drawn in a fixed order from a ChaCha8 stream so the result
/// depends only on the seed and the grid. The spectrum is then made
/// Hermitian by averaging each mode with its conjugate partner. Five-component
/// tensor fields are symmetric and traceless by construction.
pub fn random_band_limited<T: Real, L: Layout>(
    grid: &SpectralGrid<T>,
    spec: &RandomSpec,
) -> Result<Spectrum<T, L>, SpectralError> {
    if !(spec.decay.is_finite() && spec.decay > 0.0) {
        return Err(SpectralError::InvalidDecay(spec.decay));
    }
    if spec.solenoidal && L::COMPONENTS != Vector3::COMPONENTS {
        return Err(SpectralError::SolenoidalNonVector);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = grid.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut comps = vec![vec![zero; n]; L::COMPONENTS];
    for comp in comps.iter_mut() {
        for (idx, slot) in comp.iter_mut().enumerate() {
            if !grid.retained(idx) {
                continue;
            }
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let k = grid.kmag(idx).to_f64_lossy();
            let keep =
                spec.max_wavenumber.is_none_or(|kmax| k <= kmax) && !(spec.zero_mean && idx == 0);
            if keep {
                let amp = (1.0 + k).powf(-spec.decay);
                *slot = Complex::new(T::lit(re * amp), T::lit(im * amp));
            }
        }
    }
    let half = T::lit(0.5);
    for comp in comps.iter_mut() {
        let sym: Vec<Complex<T>> = (0..n)
            .map(|idx| (comp[idx] + comp[grid.negated_index(idx)].conj()) * half)
            .collect();
        *comp = sym;
    }
    let mut out = Spectrum::<T, L>::from_components(grid.dims(), comps)?;
    if spec.solenoidal {
        let mut v = Spectrum::<T, Vector3>::from_components(grid.dims(), out.into_components())?;
        grid.leray_project_in_place(&mut v);
        out = Spectrum::from_components(grid.dims(), v.into_components())?;
        out.set_solenoidal(true);
    }
    let norm = (grid.norm_sq(&out) / grid.volume()).sqrt();
    if norm > T::zero() {
        let flag = out.is_solenoidal();
        out.scale_in_place(T::lit(spec.rms) / norm);
        out.set_solenoidal(flag);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{Scalar, SymTraceless};
    use super::*;

    #[test]
    fn same_seed_same_field() {
        let g = SpectralGrid::<f64>::cubic(8, 1.0).unwrap();
        let a = random_band_limited::<f64, SymTraceless>(&g, &RandomSpec::new(2.0, 42)).unwrap();
        let b = random_band_limited::<f64, SymTraceless>(&g, &RandomSpec::new(2.0, 42)).unwrap();
        assert_eq!(a, b);
        let c = random_band_limited::<f64, SymTraceless>(&g, &RandomSpec::new(2.0, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_fields_are_real_and_band_limited() {
        let g = SpectralGrid::<f64>::new([8, 10, 12], 2.0).unwrap();
        let s = random_band_limited::<f64, Scalar>(&g, &RandomSpec::new(1.0, 1).rms(3.0)).unwrap();
        assert!(g.is_band_limited(&s));
        let mut z = s.component(0).to_vec();
        g.fft().inverse(&mut z);
        assert!(z.iter().all(|c| c.im.abs() < 1e-13));
        let rms = (g.norm_sq(&s) / g.volume()).sqrt();
        assert!((rms - 3.0).abs() < 1e-13);
    }

    #[test]
    fn solenoidal_vectors() {
        let g = SpectralGrid::<f64>::cubic(16, 2.0 * std::f64::consts::PI).unwrap();
        let v =
            random_band_limited::<f64, Vector3>(&g, &RandomSpec::new(1.0, 9).solenoidal()).unwrap();
        assert!(v.is_solenoidal());
        let div = g.divergence(&v);
        assert!(div.max_abs() <= 1e-12);
        assert!(matches!(
            random_band_limited::<f64, Scalar>(&g, &RandomSpec::new(1.0, 9).solenoidal()),
            Err(SpectralError::SolenoidalNonVector)
        ));
    }

    #[test]
    fn steeper_decay_is_smoother() {
        let g = SpectralGrid::<f64>::cubic(16, 2.0 * std::f64::consts::PI).unwrap();
        let ratio = |decay| {
            let s = random_band_limited::<f64, Scalar>(&g, &RandomSpec::new(decay, 5)).unwrap();
            (g.lap_norm_sq(&s) / g.norm_sq(&s)).sqrt()
        };
        assert!(ratio(4.0) < ratio(2.0));
    }

    #[test]
    fn bad_decay_is_rejected() {
        let g = SpectralGrid::<f64>::cubic(8, 1.0).unwrap();
        assert!(random_band_limited::<f64, Scalar>(&g, &RandomSpec::new(0.0, 1)).is_err());
        assert!(random_band_limited::<f64, Scalar>(&g, &RandomSpec::new(f64::NAN, 1)).is_err());
    }
}
