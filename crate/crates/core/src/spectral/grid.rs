use std::sync::{Arc, Mutex};

use num_complex::Complex;

use super::fft::Fft3;
use super::SpectralError;
use crate::scalar::Real;

/// Periodic box `[0, L)³` sampled on `n1 × n2 × n3` points.
///
/// Mode numbers follow the FFT ordering `0, 1, …, n/2 − 1, −n/2, …, −1`; the
/// physical wavenumber is `2π m / L`. Spectral derivatives use the same
/// wavenumbers with the Nyquist entry set to zero, and the Laplacian is built
/// from those so that `Δ = Σ ∂_i ∂_i` holds exactly. The dealias mask keeps
/// `|m_i| ≤ n_i / 3`, which is the 2/3 rule.
pub struct SpectralGrid<T: Real> {
    dims: [usize; 3],
    box_length: T,
    cutoff: [usize; 3],
    kvec: Vec<[T; 3]>,
    k2: Vec<T>,
    kmag: Vec<T>,
    mask: Vec<bool>,
    fft: Fft3<T>,
    products: Mutex<Vec<(usize, Arc<ProductGrid<T>>)>>,
}

impl<T: Real> std::fmt::Debug for SpectralGrid<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("dims", &self.dims)
            .field("box_length", &self.box_length)
            .field("cutoff", &self.cutoff)
            .finish()
    }
}

/// Signed mode number of FFT index `i` on an axis of `n` points.
pub fn mode_number(i: usize, n: usize) -> i64 {
    if i < n.div_ceil(2) {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Smallest integer `≥ n` whose only prime factors are 2, 3 and 5.
pub fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

impl<T: Real> SpectralGrid<T> {
    pub fn new(dims: [usize; 3], box_length: T) -> Result<Self, SpectralError> {
        for (axis, &n) in dims.iter().enumerate() {
            if n < 8 || n % 2 != 0 {
                return Err(SpectralError::InvalidGridSize { axis, n });
            }
        }
        if !(box_length.is_finite() && box_length > T::zero()) {
            return Err(SpectralError::InvalidBoxLength(box_length.to_f64_lossy()));
        }
        let two_pi_over_l = T::lit(2.0) * T::PI() / box_length;
        let cutoff = dims.map(|n| n / 3);
        let axis_k = |n: usize, zero_nyquist: bool| -> Vec<T> {
            (0..n)
                .map(|i| {
                    if zero_nyquist && i == n / 2 {
                        T::zero()
                    } else {
                        T::lit(mode_number(i, n) as f64) * two_pi_over_l
                    }
                })
                .collect()
        };
        let kd: Vec<Vec<T>> = dims.iter().map(|&n| axis_k(n, true)).collect();
        let kt: Vec<Vec<T>> = dims.iter().map(|&n| axis_k(n, false)).collect();

        let total: usize = dims.iter().product();
        let mut kvec = Vec::with_capacity(total);
        let mut k2 = Vec::with_capacity(total);
        let mut kmag = Vec::with_capacity(total);
        let mut mask = Vec::with_capacity(total);
        let [n1, n2, n3] = dims;
        for i3 in 0..n3 {
            for i2 in 0..n2 {
                for i1 in 0..n1 {
                    let k = [kd[0][i1], kd[1][i2], kd[2][i3]];
                    kvec.push(k);
                    k2.push(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
                    let t = [kt[0][i1], kt[1][i2], kt[2][i3]];
                    kmag.push((t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt());
                    mask.push(
                        mode_number(i1, n1).unsigned_abs() as usize <= cutoff[0]
                            && mode_number(i2, n2).unsigned_abs() as usize <= cutoff[1]
                            && mode_number(i3, n3).unsigned_abs() as usize <= cutoff[2],
                    );
                }
            }
        }
        Ok(Self {
            dims,
            box_length,
            cutoff,
            kvec,
            k2,
            kmag,
            mask,
            fft: Fft3::new(dims),
            products: Mutex::new(Vec::new()),
        })
    }

    pub fn cubic(n: usize, box_length: T) -> Result<Self, SpectralError> {
        Self::new([n; 3], box_length)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.kvec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kvec.is_empty()
    }

    pub fn box_length(&self) -> T {
        self.box_length
    }

    pub fn volume(&self) -> T {
        self.box_length * self.box_length * self.box_length
    }

    pub fn cell_volume(&self) -> T {
        self.volume() / T::count(self.len())
    }

    /// Largest retained |mode number| per axis.
    pub fn cutoff(&self) -> [usize; 3] {
        self.cutoff
    }

    pub fn fft(&self) -> &Fft3<T> {
        &self.fft
    }

    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        i1 + self.dims[0] * (i2 + self.dims[1] * i3)
    }

    pub fn position(&self, idx: usize) -> [usize; 3] {
        let [n1, n2, _] = self.dims;
        [idx % n1, (idx / n1) % n2, idx / (n1 * n2)]
    }

    /// Physical coordinates of grid point `idx`.
    pub fn coordinates(&self, idx: usize) -> [T; 3] {
        let p = self.position(idx);
        std::array::from_fn(|a| T::count(p[a]) * self.box_length / T::count(self.dims[a]))
    }

    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let p = self.position(idx);
        std::array::from_fn(|a| mode_number(p[a], self.dims[a]))
    }

    /// Flat index holding mode `m` (taken modulo the grid).
    pub fn mode_index(&self, m: [i64; 3]) -> usize {
        let w = |a: usize| m[a].rem_euclid(self.dims[a] as i64) as usize;
        self.index(w(0), w(1), w(2))
    }

    /// Derivative wavevector (Nyquist components zeroed).
    #[inline]
    pub fn k(&self, idx: usize) -> [T; 3] {
        self.kvec[idx]
    }

    /// `|k|²` of the derivative wavevector.
    #[inline]
    pub fn k2(&self, idx: usize) -> T {
        self.k2[idx]
    }

    /// Euclidean magnitude of the true wavevector, Nyquist included.
    #[inline]
    pub fn kmag(&self, idx: usize) -> T {
        self.kmag[idx]
    }

    #[inline]
    pub fn retained(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn negated_index(&self, idx: usize) -> usize {
        self.fft.negated_index(idx)
    }

    /// Grid on which products of `factors` band-limited fields can be formed
    /// and truncated back to the dealias mask without aliasing, and on which
    /// integrands of polynomial degree `factors + 1` are integrated exactly.
    ///
    /// Needs `M_i > (factors + 1)·K_i`; the native grid is used when it
    /// already satisfies this.
    pub fn product_grid(&self, factors: usize) -> Arc<ProductGrid<T>> {
        self.grid_exceeding(factors + 1)
    }

    /// Grid on which band-limited integrands of polynomial `degree` are
    /// integrated exactly (`M_i > degree·K_i`).
    pub fn quadrature_grid(&self, degree: usize) -> Arc<ProductGrid<T>> {
        self.grid_exceeding(degree)
    }

    fn grid_exceeding(&self, bound: usize) -> Arc<ProductGrid<T>> {
        let mut cache = self.products.lock().expect("product grid cache poisoned");
        if let Some((_, g)) = cache.iter().find(|(b, _)| *b == bound) {
            return g.clone();
        }
        let dims = std::array::from_fn(|a| {
            let need = bound * self.cutoff[a] + 1;
            if self.dims[a] >= need {
                self.dims[a]
            } else {
                next_smooth(need)
            }
        });
        let g = Arc::new(ProductGrid::new(self, dims));
        cache.push((bound, g.clone()));
        g
    }
}

/// A (possibly finer) grid used to evaluate nonlinear terms of fields that
/// live inside the dealias mask of a [`SpectralGrid`].
pub struct ProductGrid<T: Real> {
    dims: [usize; 3],
    native_len: usize,
    volume: T,
    fft: Fft3<T>,
    embed: Vec<(usize, usize)>,
    embed_neg: Vec<usize>,
}

impl<T: Real> std::fmt::Debug for ProductGrid<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProductGrid")
            .field("dims", &self.dims)
            .finish()
    }
}

impl<T: Real> ProductGrid<T> {
    fn new(native: &SpectralGrid<T>, dims: [usize; 3]) -> Self {
        let fft = Fft3::new(dims);
        let index = |m: [i64; 3]| {
            let w = |a: usize| m[a].rem_euclid(dims[a] as i64) as usize;
            w(0) + dims[0] * (w(1) + dims[1] * w(2))
        };
        let mut embed = Vec::new();
        let mut embed_neg = Vec::new();
        for idx in 0..native.len() {
            if native.retained(idx) {
                let m = native.mode(idx);
                embed.push((idx, index(m)));
                embed_neg.push(index(m.map(|x| -x)));
            }
        }
        Self {
            dims,
            native_len: native.len(),
            volume: native.volume(),
            fft,
            embed,
            embed_neg,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.fft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fft.is_empty()
    }

    /// Evaluates native spectra (only retained modes are read) on this grid.
    pub fn lift(&self, spectra: &[&[Complex<T>]]) -> Vec<Vec<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = Vec::with_capacity(spectra.len());
        for pair in spectra.chunks(2) {
            let mut z = vec![zero; self.len()];
            match pair {
                [a, b] => {
                    for &(n, p) in &self.embed {
                        let (x, y) = (a[n], b[n]);
                        z[p] = Complex::new(x.re - y.im, x.im + y.re);
                    }
                }
                [a] => {
                    for &(n, p) in &self.embed {
                        z[p] = a[n];
                    }
                }
                _ => unreachable!(),
            }
            self.fft.inverse(&mut z);
            out.push(z.iter().map(|c| c.re).collect());
            if pair.len() == 2 {
                out.push(z.iter().map(|c| c.im).collect());
            }
        }
        out
    }

    /// Analyzes real fields on this grid and truncates to the dealias mask of
    /// the native grid.
    pub fn project(&self, fields: &[&[T]]) -> Vec<Vec<Complex<T>>> {
        let zero = Complex::new(T::zero(), T::zero());
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            let mut z: Vec<Complex<T>> = match pair {
                [a, b] => a
                    .iter()
                    .zip(b.iter())
                    .map(|(&x, &y)| Complex::new(x, y))
                    .collect(),
                [a] => a.iter().map(|&x| Complex::new(x, T::zero())).collect(),
                _ => unreachable!(),
            };
            self.fft.forward(&mut z);
            let mut fa = vec![zero; self.native_len];
            if pair.len() == 2 {
                let mut fb = vec![zero; self.native_len];
                for (&(n, p), &q) in self.embed.iter().zip(&self.embed_neg) {
                    let zc = z[q].conj();
                    let s = (z[p] + zc) * half;
                    let d = (z[p] - zc) * half;
                    fa[n] = s;
                    fb[n] = Complex::new(d.im, -d.re);
                }
                out.push(fa);
                out.push(fb);
            } else {
                for &(n, p) in &self.embed {
                    fa[n] = z[p];
                }
                out.push(fa);
            }
        }
        out
    }

    /// `∫ f dx` by the trapezoidal (equal-weight) rule on this grid.
    pub fn integrate(&self, f: &[T]) -> T {
        let s: T = f.iter().copied().sum();
        s * self.volume / T::count(self.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            SpectralGrid::<f64>::new([8, 7, 8], 1.0),
            Err(SpectralError::InvalidGridSize { axis: 1, n: 7 })
        ));
        assert!(SpectralGrid::<f64>::cubic(6, 1.0).is_err());
        assert!(SpectralGrid::<f64>::cubic(8, 0.0).is_err());
        assert!(SpectralGrid::<f64>::cubic(8, f64::NAN).is_err());
    }

    #[test]
    fn mask_follows_two_thirds_rule() {
        let g = SpectralGrid::<f64>::cubic(32, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(g.cutoff(), [10; 3]);
        assert!(g.retained(g.mode_index([10, -10, 0])));
        assert!(!g.retained(g.mode_index([11, 0, 0])));
        assert!(!g.retained(g.mode_index([0, 0, -16])));
        // Nyquist derivative is zero, true magnitude is not.
        let nyq = g.mode_index([-16, 0, 0]);
        assert_eq!(g.k(nyq), [0.0, 0.0, 0.0]);
        assert_eq!(g.kmag(nyq), 16.0);
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(next_smooth(41), 45);
        assert_eq!(next_smooth(51), 54);
        assert_eq!(next_smooth(64), 64);
        assert_eq!(next_smooth(49), 50);
    }

    #[test]
    fn product_grid_sizes() {
        let g = SpectralGrid::<f64>::cubic(32, 1.0).unwrap();
        assert_eq!(g.product_grid(2).dims(), [32; 3]);
        assert_eq!(g.product_grid(3).dims(), [45; 3]);
        assert_eq!(g.quadrature_grid(5).dims(), [54; 3]);
        let g = SpectralGrid::<f64>::cubic(48, 1.0).unwrap();
        // 3·16 = 48 is not enough for an exact quadratic product.
        assert_eq!(g.product_grid(2).dims(), [50; 3]);
    }

    #[test]
    fn cubic_product_is_alias_free() {
        let g = SpectralGrid::<f64>::cubic(16, 1.0).unwrap();
        let pg = g.product_grid(3);
        assert_eq!(pg.dims(), [24; 3]);
        // f = cos(5·2πx): f³ = (3cos(5θ) + cos(15θ))/4, only the first survives truncation.
        let mut spec = vec![Complex::new(0.0, 0.0); g.len()];
        spec[g.mode_index([5, 0, 0])] = Complex::new(0.5, 0.0);
        spec[g.mode_index([-5, 0, 0])] = Complex::new(0.5, 0.0);
        let f = pg.lift(&[&spec]).remove(0);
        let cube: Vec<f64> = f.iter().map(|v| v * v * v).collect();
        let out = pg.project(&[&cube, &f]);
        for idx in 0..g.len() {
            let expect = if idx == g.mode_index([5, 0, 0]) || idx == g.mode_index([-5, 0, 0]) {
                0.375
            } else {
                0.0
            };
            assert!((out[0][idx].re - expect).abs() < 1e-14, "{:?}", g.mode(idx));
            assert!(out[0][idx].im.abs() < 1e-14);
            assert!((out[1][idx] - spec[idx]).norm() < 1e-14);
        }
    }
}
