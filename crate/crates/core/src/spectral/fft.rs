//! Three-dimensional complex FFT built from one-dimensional `rustfft` plans.
//!
//! Layout is x-fastest: the flat index of `(i1, i2, i3)` is
//! `i1 + n1 * (i2 + n2 * i3)`. The forward transform carries the `1/N`
//! factor so that coefficients are Fourier-series amplitudes, independent of
//! the grid size. A plan is immutable after construction and may be shared
//! between threads.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

const BLOCK: usize = 16;

/// Cache-blocked out-of-place transpose of a `rows × cols` row-major matrix.
fn transpose<T: Copy + Send + Sync>(src: &[T], dst: &mut [T], rows: usize, cols: usize) {
    // dst is cols × rows; split its rows into parallel bands.
    let band = BLOCK;
    dst.par_chunks_mut(band * rows)
        .enumerate()
        .for_each(|(b, chunk)| {
            let c0 = b * band;
            let c1 = (c0 + band).min(cols);
            for r0 in (0..rows).step_by(BLOCK) {
                let r1 = (r0 + BLOCK).min(rows);
                for c in c0..c1 {
                    let out = &mut chunk[(c - c0) * rows..(c - c0 + 1) * rows];
                    for r in r0..r1 {
                        out[r] = src[r * cols + c];
                    }
                }
            }
        });
}

pub struct Fft3<T: Real> {
    dims: [usize; 3],
    forward: [Arc<dyn Fft<T>>; 3],
    inverse: [Arc<dyn Fft<T>>; 3],
}

impl<T: Real> std::fmt::Debug for Fft3<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("dims", &self.dims).finish()
    }
}

impl<T: Real> Fft3<T> {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.map(|n| planner.plan_fft_forward(n));
        let inverse = dims.map(|n| planner.plan_fft_inverse(n));
        Self {
            dims,
            forward,
            inverse,
        }
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

    fn run(&self, data: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>; 3]) {
        let [n1, n2, n3] = self.dims;
        assert_eq!(data.len(), n1 * n2 * n3, "buffer does not match plan");
        let slab = n1 * n2;
        let zero = Complex::new(T::zero(), T::zero());

        // x: contiguous lines.
        data.par_chunks_mut(slab).for_each_init(
            || vec![zero; plans[0].get_inplace_scratch_len()],
            |scratch, chunk| plans[0].process_with_scratch(chunk, scratch),
        );

        // y: transpose each slab so y runs fastest.
        data.par_chunks_mut(slab).for_each_init(
            || {
                (
                    vec![zero; slab],
                    vec![zero; plans[1].get_inplace_scratch_len()],
                )
            },
            |(buf, scratch), chunk| {
                transpose_serial(chunk, buf, n2, n1);
                plans[1].process_with_scratch(buf, scratch);
                transpose_serial(buf, chunk, n1, n2);
            },
        );

        // z: global transpose so z runs fastest.
        let mut buf = vec![zero; data.len()];
        transpose(data, &mut buf, n3, slab);
        buf.par_chunks_mut(n3 * 64).for_each_init(
            || vec![zero; plans[2].get_inplace_scratch_len()],
            |scratch, chunk| plans[2].process_with_scratch(chunk, scratch),
        );
        transpose(&buf, data, slab, n3);
    }

    /// Forward transform with `1/N` normalization, in place.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.forward);
        let scale = T::one() / T::count(self.len());
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// Unnormalized inverse transform (synthesis of a Fourier series), in place.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.inverse);
    }

    /// Flat index of the mode `-m` for the mode stored at `idx`.
    pub fn negated_index(&self, idx: usize) -> usize {
        let [n1, n2, n3] = self.dims;
        let i1 = idx % n1;
        let i2 = (idx / n1) % n2;
        let i3 = idx / (n1 * n2);
        let neg = |i: usize, n: usize| (n - i) % n;
        neg(i1, n1) + n1 * (neg(i2, n2) + n2 * neg(i3, n3))
    }

    /// Synthesizes two real fields from their (Hermitian) spectra with one
    /// complex transform.
    pub fn inverse_real_pair(
        &self,
        a: &[Complex<T>],
        b: Option<&[Complex<T>]>,
    ) -> (Vec<T>, Option<Vec<T>>) {
        let mut z: Vec<Complex<T>> = match b {
            Some(b) => a
                .iter()
                .zip(b)
                .map(|(x, y)| Complex::new(x.re - y.im, x.im + y.re))
                .collect(),
            None => a.to_vec(),
        };
        self.inverse(&mut z);
        let re = z.iter().map(|c| c.re).collect();
        let im = b.map(|_| z.iter().map(|c| c.im).collect());
        (re, im)
    }

    /// Analyzes two real fields with one complex transform.
    pub fn forward_real_pair(
        &self,
        a: &[T],
        b: Option<&[T]>,
    ) -> (Vec<Complex<T>>, Option<Vec<Complex<T>>>) {
        let mut z: Vec<Complex<T>> = match b {
            Some(b) => a.iter().zip(b).map(|(&x, &y)| Complex::new(x, y)).collect(),
            None => a.iter().map(|&x| Complex::new(x, T::zero())).collect(),
        };
        self.forward(&mut z);
        match b {
            None => (z, None),
            Some(_) => {
                let half = T::lit(0.5);
                let n = z.len();
                let mut fa = Vec::with_capacity(n);
                let mut fb = Vec::with_capacity(n);
                for (idx, zk) in z.iter().enumerate() {
                    let zc = z[self.negated_index(idx)].conj();
                    let s = (*zk + zc) * half;
                    let d = (*zk - zc) * half;
                    fa.push(s);
                    // d / i
                    fb.push(Complex::new(d.im, -d.re));
                }
                (fa, Some(fb))
            }
        }
    }

    /// Synthesizes many real fields, pairing them two per transform.
    pub fn inverse_many(&self, spectra: &[&[Complex<T>]]) -> Vec<Vec<T>> {
        let mut out = Vec::with_capacity(spectra.len());
        for pair in spectra.chunks(2) {
            let (a, b) = self.inverse_real_pair(pair[0], pair.get(1).copied());
            out.push(a);
            if let Some(b) = b {
                out.push(b);
            }
        }
        out
    }

    /// Analyzes many real fields, pairing them two per transform.
    pub fn forward_many(&self, fields: &[&[T]]) -> Vec<Vec<Complex<T>>> {
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            let (a, b) = self.forward_real_pair(pair[0], pair.get(1).copied());
            out.push(a);
            if let Some(b) = b {
                out.push(b);
            }
        }
        out
    }
}

fn transpose_serial<T: Copy>(src: &[T], dst: &mut [T], rows: usize, cols: usize) {
    for r0 in (0..rows).step_by(BLOCK) {
        let r1 = (r0 + BLOCK).min(rows);
        for c0 in (0..cols).step_by(BLOCK) {
            let c1 = (c0 + BLOCK).min(cols);
            for r in r0..r1 {
                for c in c0..c1 {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}
