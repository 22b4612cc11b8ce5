//! Image reconstruction from Laplacian or gradient fields.
//!
//! Solvers operate on an already padded grid and return the padded
//! solution; cropping is left to the caller. The spectral convolution is
//! circular, so the solve is exact on the torus formed by the padded grid:
//! the recovered gradient is the orthogonal projection of the input field
//! onto the conservative fields of that torus.

use rayon::prelude::*;
use rustfft::num_complex::Complex;

use crate::diffops::{divergence_periodic, laplacian};
use crate::error::{GfcError, Result};
use crate::field::{crop_pad, pad_ring_mean, pad_zero, ScalarField, VectorField};
use crate::scalar::Scalar;
use crate::spectral::{convolve_spectral, invert_kernel, KernelStamp};

/// How the free integration constant is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anchor {
    /// Mean of the outer `pad` ring is zero.
    #[default]
    PadRingMean,
    /// Top-left pixel is zero.
    TopLeftPixel,
    /// Whole-grid mean is zero.
    ZeroMean,
}

/// Which Green's function route reconstructs a gradient field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolvePath {
    /// Divergence first, then one convolution with the monopole kernel.
    #[default]
    Monopole,
    /// One convolution per gradient component with the dipole kernels.
    Dipole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub pad: usize,
    pub anchor: Anchor,
    pub path: SolvePath,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            pad: 4,
            anchor: Anchor::PadRingMean,
            path: SolvePath::Monopole,
        }
    }
}

impl SolveOptions {
    pub fn with_pad(mut self, pad: usize) -> Self {
        self.pad = pad;
        self
    }

    pub fn with_anchor(mut self, anchor: Anchor) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn with_path(mut self, path: SolvePath) -> Self {
        self.path = path;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.anchor == Anchor::PadRingMean && self.pad == 0 {
            return Err(GfcError::param("pad", "pad-ring anchoring needs pad >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// Constant added to the raw spectral solution.
    pub constant_applied: f64,
    pub padded_size: (usize, usize),
    /// Frequency bins dropped from the inverse kernel.
    pub zeroed_bins: usize,
}

/// Solves `laplacian(I) = l` on the padded torus.
pub fn solve_laplacian<T: Scalar>(
    l: &ScalarField<T>,
    opts: &SolveOptions,
) -> Result<(ScalarField<T>, SolveReport)> {
    opts.validate()?;
    let (h, w) = l.shape();
    let green = T::spectrum_cache().green(h, w)?;
    let raw = convolve_spectral(l, &green)?;
    Ok(anchored(raw, opts, green.zeroed_bins()))
}

/// Reconstructs the least-error potential of a (possibly non-conservative)
/// gradient field on the padded torus.
pub fn solve_gradient<T: Scalar>(
    e: &VectorField<T>,
    opts: &SolveOptions,
) -> Result<(ScalarField<T>, SolveReport)> {
    opts.validate()?;
    match opts.path {
        SolvePath::Monopole => solve_laplacian(&divergence_periodic(e), opts),
        SolvePath::Dipole => {
            let (h, w) = e.shape();
            let cache = T::spectrum_cache();
            let dipoles = cache.dipoles(h, w)?;
            let fft = cache.fft(h, w);
            let to_complex =
                |f: &ScalarField<T>| -> Vec<Complex<T>> { f.values().iter().map(|&v| Complex::new(v, T::zero())).collect() };
            let mut acc = to_complex(e.ex());
            let mut other = to_complex(e.ey());
            fft.forward_in_place(&mut acc);
            fft.forward_in_place(&mut other);
            for (((a, b), vx), vy) in acc
                .iter_mut()
                .zip(&other)
                .zip(dipoles.vx.values())
                .zip(dipoles.vy.values())
            {
                *a = *a * vx + b * vy;
            }
            fft.inverse_in_place(&mut acc);
            let raw = ScalarField::new(h, w, acc.iter().map(|c| c.re).collect())?;
            Ok(anchored(raw, opts, 1))
        }
    }
}

fn anchored<T: Scalar>(raw: ScalarField<T>, opts: &SolveOptions, zeroed_bins: usize) -> (ScalarField<T>, SolveReport) {
    let c = match opts.anchor {
        Anchor::PadRingMean => -pad_ring_mean(&raw, opts.pad),
        Anchor::TopLeftPixel => -raw.get(0, 0),
        Anchor::ZeroMean => -raw.mean(),
    };
    let report = SolveReport {
        constant_applied: c.as_f64(),
        padded_size: raw.shape(),
        zeroed_bins,
    };
    let mut out = raw;
    for v in out.values_mut() {
        *v = *v + c;
    }
    (out, report)
}

/// Independent solves over a batch, run in parallel.
pub fn solve_batch<T: Scalar>(
    laplacians: &[ScalarField<T>],
    opts: &SolveOptions,
) -> Result<Vec<(ScalarField<T>, SolveReport)>> {
    laplacians.par_iter().map(|l| solve_laplacian(l, opts)).collect()
}

/// RMSE between `i` and its reconstruction from the Laplacian of its padded copy.
pub fn roundtrip_check<T: Scalar>(i: &ScalarField<T>, opts: &SolveOptions) -> Result<f64> {
    let padded = pad_zero(i, opts.pad);
    let (solved, _) = solve_laplacian(&laplacian(&padded), opts)?;
    Ok(crop_pad(&solved, opts.pad)?.rmse(i)?.as_f64())
}

/// Default relative threshold (against the largest bin magnitude) below
/// which the Sobel operator is treated as singular.
pub const SOBEL_RELATIVE_EPSILON: f64 = 1e-6;

/// Reconstructs `i` from its Sobel gradient by inverting the composite Sobel
/// operator `Sx^T Sx + Sy^T Sy` with [`invert_kernel`].
///
/// Sobel smoothing annihilates the highest frequencies, so this inversion
/// is lossy; the result is a blurred version of `i`. Returns the cropped
/// reconstruction.
pub fn sobel_reconstruct<T: Scalar>(
    i: &ScalarField<T>,
    opts: &SolveOptions,
    relative_epsilon: f64,
) -> Result<(ScalarField<T>, SolveReport)> {
    opts.validate()?;
    let padded = pad_zero(i, opts.pad);
    let (h, w) = padded.shape();
    let (sx, sy) = (KernelStamp::sobel_x(), KernelStamp::sobel_y());
    let (sx_adj, sy_adj) = (sx.adjoint(), sy.adjoint());
    let gx = sx.apply_periodic(&padded);
    let gy = sy.apply_periodic(&padded);
    let source = sx_adj
        .apply_periodic(&gx)
        .zip_map(&sy_adj.apply_periodic(&gy), |a, b| a + b)?;
    let operator = sx.compose(&sx_adj).plus(&sy.compose(&sy_adj))?;
    // largest response of Sx^T Sx + Sy^T Sy is bounded by the squared l1 norms
    let bound = 2.0 * 16.0f64.powi(2);
    let green = invert_kernel::<T>(&operator, h, w, relative_epsilon * bound)?;
    let raw = convolve_spectral(&source, &green)?;
    let (solved, report) = anchored(raw, opts, green.zeroed_bins());
    Ok((crop_pad(&solved, opts.pad)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::{gradient, gradient_periodic};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, h: usize, w: usize, amp: f64) -> ScalarField<f64> {
        ScalarField::from_fn(h, w, |_, _| rng.gen_range(-amp..amp))
    }

    #[test]
    fn zero_laplacian_gives_zero() {
        let (out, report) = solve_laplacian(&ScalarField::<f64>::zeros(12, 12), &SolveOptions::default()).unwrap();
        assert_eq!(out.energy(), 0.0);
        assert_eq!(report.constant_applied, 0.0);
        assert_eq!(report.zeroed_bins, 1);
        assert_eq!(report.padded_size, (12, 12));
        let (out, _) = solve_gradient(&VectorField::<f64>::zeros(9, 9), &SolveOptions::default()).unwrap();
        assert_eq!(out.energy(), 0.0);
    }

    #[test]
    fn options_validation() {
        let opts = SolveOptions::default().with_pad(0);
        assert!(solve_laplacian(&ScalarField::<f64>::zeros(8, 8), &opts).is_err());
        let opts = opts.with_anchor(Anchor::TopLeftPixel);
        assert!(solve_laplacian(&ScalarField::<f64>::zeros(8, 8), &opts).is_ok());
        assert!(solve_laplacian(&ScalarField::<f64>::zeros(2, 8), &SolveOptions::default()).is_err());
    }

    #[test]
    fn constant_and_ramp_round_trip() {
        let opts = SolveOptions::default();
        assert!(roundtrip_check(&ScalarField::filled(20, 17, 123.0f64), &opts).unwrap() <= 1e-9);
        let ramp = ScalarField::from_fn(24, 31, |r, c| (r + c) as f64);
        assert!(roundtrip_check(&ramp, &opts).unwrap() <= 1e-6);
        let ramp32 = ramp.cast::<f32>();
        assert!(roundtrip_check(&ramp32, &opts).unwrap() <= 1e-2);
    }

    #[test]
    fn anchors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = pad_zero(&random(&mut rng, 10, 10, 50.0), 3);
        let l = laplacian(&img);
        let (ring, _) = solve_laplacian(&l, &SolveOptions::default().with_pad(3)).unwrap();
        assert!(ring.max_abs_diff(&img).unwrap() <= 1e-9);
        let (tl, _) = solve_laplacian(&l, &SolveOptions::default().with_anchor(Anchor::TopLeftPixel)).unwrap();
        assert!(tl.get(0, 0).abs() <= 1e-12);
        let (zm, _) = solve_laplacian(&l, &SolveOptions::default().with_anchor(Anchor::ZeroMean)).unwrap();
        assert!(zm.mean().abs() <= 1e-12);
    }

    #[test]
    fn gradient_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let img = random(&mut rng, 30, 40, 128.0).add_scalar(128.0);
        let opts = SolveOptions::default();
        let e = gradient(&pad_zero(&img, opts.pad));
        let (out, _) = solve_gradient(&e, &opts).unwrap();
        assert!(crop_pad(&out, opts.pad).unwrap().rmse(&img).unwrap() <= 0.05);
    }

    #[test]
    fn dipole_path_matches_monopole() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (h, w) in [(8, 8), (13, 21), (32, 17)] {
            let e = VectorField::new(random(&mut rng, h, w, 5.0), random(&mut rng, h, w, 5.0)).unwrap();
            let mono = solve_gradient(&e, &SolveOptions::default()).unwrap().0;
            let dip = solve_gradient(&e, &SolveOptions::default().with_path(SolvePath::Dipole)).unwrap().0;
            assert!(mono.max_abs_diff(&dip).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let opts = SolveOptions::default().with_anchor(Anchor::ZeroMean);
        let l1 = random(&mut rng, 16, 20, 3.0);
        let l2 = random(&mut rng, 16, 20, 3.0);
        let combo = l1.zip_map(&l2, |a, b| 2.5 * a - 0.75 * b).unwrap();
        let s1 = solve_laplacian(&l1, &opts).unwrap().0;
        let s2 = solve_laplacian(&l2, &opts).unwrap().0;
        let sc = solve_laplacian(&combo, &opts).unwrap().0;
        let expected = s1.zip_map(&s2, |a, b| 2.5 * a - 0.75 * b).unwrap();
        assert!(sc.max_abs_diff(&expected).unwrap() <= 1e-9);
    }

    #[test]
    fn circular_shift_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let opts = SolveOptions::default().with_anchor(Anchor::ZeroMean);
        let l = random(&mut rng, 12, 15, 1.0);
        let shifted = ScalarField::from_fn(12, 15, |r, c| l.get_wrapped(r as isize - 3, c as isize - 5));
        let a = solve_laplacian(&l, &opts).unwrap().0;
        let b = solve_laplacian(&shifted, &opts).unwrap().0;
        let a_shifted = ScalarField::from_fn(12, 15, |r, c| a.get_wrapped(r as isize - 3, c as isize - 5));
        assert!(b.max_abs_diff(&a_shifted).unwrap() <= 1e-10);
    }

    #[test]
    fn idempotent_on_solved_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let opts = SolveOptions::default();
        let e = VectorField::new(random(&mut rng, 20, 20, 4.0), random(&mut rng, 20, 20, 4.0)).unwrap();
        let first = solve_gradient(&e, &opts).unwrap().0;
        let second = solve_gradient(&gradient_periodic(&first), &opts).unwrap().0;
        assert!(first.max_abs_diff(&second).unwrap() <= 1e-9);
    }

    #[test]
    fn batch_matches_serial() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ls: Vec<_> = (0..5).map(|_| random(&mut rng, 16, 16, 1.0)).collect();
        let opts = SolveOptions::default();
        let batch = solve_batch(&ls, &opts).unwrap();
        for (l, (b, _)) in ls.iter().zip(&batch) {
            assert_eq!(&solve_laplacian(l, &opts).unwrap().0, b);
        }
    }

    #[test]
    fn sobel_reconstruction_is_lossy() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let img = random(&mut rng, 24, 24, 100.0).add_scalar(128.0);
        let opts = SolveOptions::default();
        let (sobel, report) = sobel_reconstruct(&img, &opts, SOBEL_RELATIVE_EPSILON).unwrap();
        assert!(report.zeroed_bins > 1);
        let sobel_rmse = sobel.rmse(&img).unwrap();
        let exact = roundtrip_check(&img, &opts).unwrap();
        assert!(sobel_rmse > exact, "{sobel_rmse} vs {exact}");
        assert!(sobel_rmse > 1.0);
    }
}
