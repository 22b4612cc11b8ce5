//! Discrete differential operators on regular grids.
//!
//! Two boundary conventions are provided. The plain functions use zero
//! extension outside the grid; the `_periodic` variants wrap around (the
//! torus the spectral solver works on). On any field whose last row and
//! column are zero (every `pad_zero` output with `pad >= 1`) both conventions
//! produce the same gradient, and on fields whose outer ring is zero they
//! agree for divergence and Laplacian as well.
//!
//! Forward-difference gradient and backward-difference divergence are
//! paired so that `divergence(gradient(f))` is the 5-point Laplacian
//! `[[0,1,0],[1,-4,1],[0,1,0]]`: exactly for every field in the periodic
//! convention, and for every field with a zero first row and column under
//! zero extension.

use crate::error::{GfcError, Result};
use crate::field::{ScalarField, VectorField};
use crate::scalar::Scalar;

/// The 5-point Laplace stamp, center `-4`.
pub const LAPLACE_KERNEL: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]];

/// Forward differences with zero exterior.
pub fn gradient<T: Scalar>(i: &ScalarField<T>) -> VectorField<T> {
    let (h, w) = i.shape();
    let ex = ScalarField::from_fn(h, w, |r, c| {
        i.get_or_zero(r as isize, c as isize + 1) - i.get(r, c)
    });
    let ey = ScalarField::from_fn(h, w, |r, c| {
        i.get_or_zero(r as isize + 1, c as isize) - i.get(r, c)
    });
    VectorField::new(ex, ey).expect("components share a shape")
}

/// Forward differences with periodic wrap-around.
pub fn gradient_periodic<T: Scalar>(i: &ScalarField<T>) -> VectorField<T> {
    let (h, w) = i.shape();
    let ex = ScalarField::from_fn(h, w, |r, c| i.get(r, (c + 1) % w) - i.get(r, c));
    let ey = ScalarField::from_fn(h, w, |r, c| i.get((r + 1) % h, c) - i.get(r, c));
    VectorField::new(ex, ey).expect("components share a shape")
}

/// Backward differences with zero exterior; the negative adjoint of [`gradient`].
pub fn divergence<T: Scalar>(e: &VectorField<T>) -> ScalarField<T> {
    let (ex, ey) = (e.ex(), e.ey());
    let (h, w) = e.shape();
    ScalarField::from_fn(h, w, |r, c| {
        let (ri, ci) = (r as isize, c as isize);
        ex.get(r, c) - ex.get_or_zero(ri, ci - 1) + ey.get(r, c) - ey.get_or_zero(ri - 1, ci)
    })
}

/// Backward differences with periodic wrap-around; the negative adjoint of
/// [`gradient_periodic`].
pub fn divergence_periodic<T: Scalar>(e: &VectorField<T>) -> ScalarField<T> {
    let (ex, ey) = (e.ex(), e.ey());
    let (h, w) = e.shape();
    ScalarField::from_fn(h, w, |r, c| {
        ex.get(r, c) - ex.get(r, (c + w - 1) % w) + ey.get(r, c) - ey.get((r + h - 1) % h, c)
    })
}

/// Checked divergence for callers holding two loose components.
pub fn divergence_of<T: Scalar>(ex: &ScalarField<T>, ey: &ScalarField<T>) -> Result<ScalarField<T>> {
    Ok(divergence(&VectorField::new(ex.clone(), ey.clone())?))
}

/// 5-point Laplacian under zero extension.
pub fn laplacian<T: Scalar>(i: &ScalarField<T>) -> ScalarField<T> {
    let (h, w) = i.shape();
    let four = T::of(4.0);
    ScalarField::from_fn(h, w, |r, c| {
        let (ri, ci) = (r as isize, c as isize);
        i.get_or_zero(ri - 1, ci)
            + i.get_or_zero(ri, ci - 1)
            + i.get_or_zero(ri, ci + 1)
            + i.get_or_zero(ri + 1, ci)
            - four * i.get(r, c)
    })
}

/// 5-point Laplacian with periodic wrap-around.
pub fn laplacian_periodic<T: Scalar>(i: &ScalarField<T>) -> ScalarField<T> {
    let (h, w) = i.shape();
    let four = T::of(4.0);
    ScalarField::from_fn(h, w, |r, c| {
        i.get((r + h - 1) % h, c) + i.get(r, (c + w - 1) % w) + i.get(r, (c + 1) % w)
            + i.get((r + 1) % h, c)
            - four * i.get(r, c)
    })
}

/// Per-pixel magnitude and orientation `atan2(ey, ex)`. Zero-magnitude
/// pixels get orientation 0.
pub fn magnitude_orientation<T: Scalar>(e: &VectorField<T>) -> (ScalarField<T>, ScalarField<T>) {
    let (h, w) = e.shape();
    let mut mag = ScalarField::zeros(h, w);
    let mut theta = ScalarField::zeros(h, w);
    for ((m, t), (&x, &y)) in mag
        .values_mut()
        .iter_mut()
        .zip(theta.values_mut().iter_mut())
        .zip(e.ex().values().iter().zip(e.ey().values()))
    {
        let norm = x.hypot(y);
        *m = norm;
        *t = if norm > T::zero() { y.atan2(x) } else { T::zero() };
    }
    (mag, theta)
}

/// Inverse of [`magnitude_orientation`].
pub fn recompose<T: Scalar>(mag: &ScalarField<T>, theta: &ScalarField<T>) -> Result<VectorField<T>> {
    let ex = mag.zip_map(theta, |m, t| m * t.cos())?;
    let ey = mag.zip_map(theta, |m, t| m * t.sin())?;
    VectorField::new(ex, ey)
}

/// Normalized 1D Gaussian taps for radius `ceil(3 sigma)`.
pub fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Separable Gaussian blur with zero extension at the borders.
pub fn gaussian_blur<T: Scalar>(f: &ScalarField<T>, sigma: f64) -> Result<ScalarField<T>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(GfcError::param("sigma", format!("must be positive, got {sigma}")));
    }
    let taps: Vec<T> = gaussian_taps(sigma).into_iter().map(T::of).collect();
    let radius = (taps.len() / 2) as isize;
    let (h, w) = f.shape();
    let horizontal = ScalarField::from_fn(h, w, |r, c| {
        taps.iter()
            .enumerate()
            .map(|(k, &t)| t * f.get_or_zero(r as isize, c as isize + k as isize - radius))
            .sum()
    });
    Ok(ScalarField::from_fn(h, w, |r, c| {
        taps.iter()
            .enumerate()
            .map(|(k, &t)| t * horizontal.get_or_zero(r as isize + k as isize - radius, c as isize))
            .sum()
    }))
}
