use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::field::ScalarField;
use crate::scalar::Scalar;

use super::SpectralField;

const TILE: usize = 16;
/// Columns per strip in [`Fft2d::convolve_transposed`].
const STRIP: usize = 16;

/// Planned 2D transform for one grid size.
///
/// Forward is unnormalized; inverse applies `1/(h*w)`.
pub struct Fft2d<T: Scalar> {
    height: usize,
    width: usize,
    row_fwd: Arc<dyn Fft<T>>,
    row_inv: Arc<dyn Fft<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
    /// Spare full-size buffers. Large allocations would otherwise be fresh
    /// pages on every call, which dominates the cost on big grids.
    pool: Mutex<Vec<Vec<Complex<T>>>>,
}

impl<T: Scalar> std::fmt::Debug for Fft2d<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2d")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish()
    }
}

impl<T: Scalar> Fft2d<T> {
    pub fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            height,
            width,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
            pool: Mutex::new(Vec::new()),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// In-place unnormalized forward transform of a row-major buffer.
    pub fn forward_in_place(&self, data: &mut [Complex<T>]) {
        self.process(data, &self.row_fwd, &self.col_fwd);
    }

    /// In-place inverse transform including the `1/(h*w)` factor.
    pub fn inverse_in_place(&self, data: &mut [Complex<T>]) {
        self.process(data, &self.row_inv, &self.col_inv);
        let scale = T::one() / T::of((self.height * self.width) as f64);
        for v in data.iter_mut() {
            *v = *v * scale;
        }
    }

    pub fn forward_real(&self, f: &ScalarField<T>) -> SpectralField<T> {
        debug_assert_eq!(f.shape(), self.shape());
        let mut data: Vec<Complex<T>> = f.values().iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.forward_in_place(&mut data);
        SpectralField::from_raw(self.height, self.width, data)
    }

    pub fn inverse(&self, s: &SpectralField<T>) -> SpectralField<T> {
        let mut data = s.values().to_vec();
        self.inverse_in_place(&mut data);
        SpectralField::from_raw(self.height, self.width, data)
    }

    /// Real part of the inverse transform.
    pub fn inverse_real(&self, s: &SpectralField<T>) -> ScalarField<T> {
        let mut data = s.values().to_vec();
        self.inverse_in_place(&mut data);
        real_part(self.height, self.width, &data)
    }

    /// Circular convolution of a real buffer with a spectrum stored in
    /// transposed (`w x h`) layout.
    ///
    /// After the row pass, columns are handled in narrow strips: each strip
    /// is gathered, transformed, multiplied and inverted while it is still in
    /// cache, then scattered back for the inverse row pass.
    pub(crate) fn convolve_transposed(&self, f: &[T], spectrum_t: &[Complex<T>]) -> Vec<T> {
        let (h, w) = (self.height, self.width);
        assert_eq!(f.len(), h * w, "buffer does not match planned size");
        assert_eq!(spectrum_t.len(), h * w, "spectrum does not match planned size");
        let zero = Complex::new(T::zero(), T::zero());
        let mut scratch = vec![zero; self.scratch_len()];
        let mut data = self.take_buffer();
        for (d, &v) in data.iter_mut().zip(f) {
            *d = Complex::new(v, T::zero());
        }
        self.row_fwd.process_with_scratch(&mut data, &mut scratch);
        let mut strip = vec![zero; STRIP * h];
        for c0 in (0..w).step_by(STRIP) {
            let b = STRIP.min(w - c0);
            let strip = &mut strip[..b * h];
            for r in 0..h {
                for (j, v) in data[r * w + c0..r * w + c0 + b].iter().enumerate() {
                    strip[j * h + r] = *v;
                }
            }
            self.col_fwd.process_with_scratch(strip, &mut scratch);
            for (d, k) in strip.iter_mut().zip(&spectrum_t[c0 * h..(c0 + b) * h]) {
                *d = *d * k;
            }
            self.col_inv.process_with_scratch(strip, &mut scratch);
            for r in 0..h {
                for (j, v) in data[r * w + c0..r * w + c0 + b].iter_mut().enumerate() {
                    *v = strip[j * h + r];
                }
            }
        }
        self.row_inv.process_with_scratch(&mut data, &mut scratch);
        let scale = T::one() / T::of((h * w) as f64);
        let out = data.iter().map(|c| c.re * scale).collect();
        self.return_buffer(data);
        out
    }

    fn scratch_len(&self) -> usize {
        [&self.row_fwd, &self.row_inv, &self.col_fwd, &self.col_inv]
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0)
    }

    fn take_buffer(&self) -> Vec<Complex<T>> {
        let spare = self.pool.lock().unwrap_or_else(|p| p.into_inner()).pop();
        spare.unwrap_or_else(|| vec![Complex::new(T::zero(), T::zero()); self.height * self.width])
    }

    fn return_buffer(&self, buf: Vec<Complex<T>>) {
        let mut pool = self.pool.lock().unwrap_or_else(|p| p.into_inner());
        if pool.len() < 4 {
            pool.push(buf);
        }
    }

    fn process(&self, data: &mut [Complex<T>], rows: &Arc<dyn Fft<T>>, cols: &Arc<dyn Fft<T>>) {
        let (h, w) = (self.height, self.width);
        assert_eq!(data.len(), h * w, "buffer does not match planned size");
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); self.scratch_len()];
        rows.process_with_scratch(data, &mut scratch);
        let mut transposed = vec![Complex::new(T::zero(), T::zero()); h * w];
        transpose(data, &mut transposed, h, w);
        cols.process_with_scratch(&mut transposed, &mut scratch);
        transpose(&transposed, data, w, h);
    }
}

pub(crate) fn real_part<T: Scalar>(h: usize, w: usize, data: &[Complex<T>]) -> ScalarField<T> {
    ScalarField::new(h, w, data.iter().map(|c| c.re).collect()).expect("buffer matches shape")
}

/// Blocked transpose of an `h x w` row-major matrix into `w x h`.
pub(crate) fn transpose<V: Copy>(src: &[V], dst: &mut [V], h: usize, w: usize) {
    for rb in (0..h).step_by(TILE) {
        for cb in (0..w).step_by(TILE) {
            for r in rb..(rb + TILE).min(h) {
                for c in cb..(cb + TILE).min(w) {
                    dst[c * h + r] = src[r * w + c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Direct O(n^2) DFT.
    fn dft(f: &ScalarField<f64>) -> Vec<Complex<f64>> {
        let (h, w) = f.shape();
        let mut out = vec![Complex::new(0.0, 0.0); h * w];
        for u in 0..h {
            for v in 0..w {
                let mut acc = Complex::new(0.0, 0.0);
                for r in 0..h {
                    for c in 0..w {
                        let phase = -2.0 * std::f64::consts::PI
                            * ((u * r) as f64 / h as f64 + (v * c) as f64 / w as f64);
                        acc += Complex::from_polar(f.get(r, c), phase);
                    }
                }
                out[u * w + v] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_direct_dft() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for (h, w) in [(4, 4), (5, 7), (8, 3)] {
            let f = ScalarField::from_fn(h, w, |_, _| rng.gen_range(-1.0..1.0));
            let fft = Fft2d::new(h, w);
            let s = fft.forward_real(&f);
            for (a, b) in s.values().iter().zip(dft(&f)) {
                assert!((a - b).norm() <= 1e-12);
            }
            let back = fft.inverse_real(&s);
            assert!(back.max_abs_diff(&f).unwrap() <= 1e-14);
        }
    }

    #[test]
    fn transpose_round_trip() {
        let src: Vec<usize> = (0..70 * 45).collect();
        let mut t = vec![0; src.len()];
        let mut back = vec![0; src.len()];
        transpose(&src, &mut t, 70, 45);
        assert_eq!(t[3 * 70 + 2], src[2 * 45 + 3]);
        transpose(&t, &mut back, 45, 70);
        assert_eq!(back, src);
    }
}
