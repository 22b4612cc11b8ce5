//! Fourier-domain machinery: 2D transforms, kernel stamps, the numerical
//! Green's function of the 5-point Laplacian and its dipole derivatives.
//!
//! Transform convention: forward unnormalized, inverse scaled by `1/(h*w)`.
//! All convolutions here are circular.
//!
//! A [`KernelStamp`] acts on a field by convolution about its anchor,
//! `out[p] = sum_d k[d] * f[p - d + anchor]`. Embedding a stamp puts it in
//! the top-left corner of a grid; dividing the transform of a Dirac placed at
//! the anchor by the transform of the embedded stamp yields the inverse
//! operator with the embedding shift cancelled.

mod cache;
mod fft;

use rustfft::num_complex::Complex;

pub use cache::SpectrumCache;
pub use fft::Fft2d;

use crate::error::{GfcError, Result};
use crate::field::ScalarField;
use crate::scalar::Scalar;

/// Complex-valued grid in the Fourier domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    height: usize,
    width: usize,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> SpectralField<T> {
    pub(crate) fn transposed(&self) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.values.len()];
        fft::transpose(&self.values, &mut out, self.height, self.width);
        out
    }

    pub(crate) fn from_raw(height: usize, width: usize, values: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(values.len(), height * width);
        Self {
            height,
            width,
            values,
        }
    }

    pub fn new(height: usize, width: usize, values: Vec<Complex<T>>) -> Result<Self> {
        if height == 0 || width == 0 || values.len() != height * width {
            return Err(GfcError::InvalidDimensions {
                height,
                width,
                reason: "spectral value count does not match height x width",
            });
        }
        Ok(Self::from_raw(height, width, values))
    }

    pub fn filled(height: usize, width: usize, value: Complex<T>) -> Self {
        Self::from_raw(height, width, vec![value; height * width])
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.values[row * self.width + col]
    }

    /// Bin-wise product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.expect_shape(other.shape())?;
        Ok(Self::from_raw(
            self.height,
            self.width,
            self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.expect_shape(other.shape())?;
        Ok(Self::from_raw(
            self.height,
            self.width,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        ))
    }

    fn expect_shape(&self, expected: (usize, usize)) -> Result<()> {
        if self.shape() != expected {
            return Err(GfcError::ShapeMismatch {
                expected,
                actual: self.shape(),
            });
        }
        Ok(())
    }
}

/// Small real kernel with an anchor pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelStamp {
    name: String,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    anchor: (usize, usize),
}

impl KernelStamp {
    pub fn new(name: impl Into<String>, rows: &[&[f64]], anchor: (usize, usize)) -> Result<Self> {
        let h = rows.len();
        let w = rows.first().map_or(0, |r| r.len());
        if h == 0 || w == 0 || rows.iter().any(|r| r.len() != w) {
            return Err(GfcError::InvalidDimensions {
                height: h,
                width: w,
                reason: "stamp must be a non-empty rectangle",
            });
        }
        if anchor.0 >= h || anchor.1 >= w {
            return Err(GfcError::param("anchor", "anchor lies outside the stamp"));
        }
        Ok(Self {
            name: name.into(),
            rows: h,
            cols: w,
            values: rows.concat(),
            anchor,
        })
    }

    fn centered3(name: &str, rows: [[f64; 3]; 3]) -> Self {
        Self {
            name: name.to_owned(),
            rows: 3,
            cols: 3,
            values: rows.concat(),
            anchor: (1, 1),
        }
    }

    /// Unit impulse at the center of a 3x3 stamp.
    pub fn dirac() -> Self {
        Self::centered3("dirac", [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    }

    /// `[[0,1,0],[1,-4,1],[0,1,0]]`.
    pub fn laplace() -> Self {
        Self::centered3("laplace5", crate::diffops::LAPLACE_KERNEL)
    }

    /// `f[r, c+1] - f[r, c]`.
    pub fn forward_x() -> Self {
        Self::centered3("forward-x", [[0.0, 0.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, 0.0]])
    }

    /// `f[r+1, c] - f[r, c]`.
    pub fn forward_y() -> Self {
        Self::centered3("forward-y", [[0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]])
    }

    /// `f[r, c] - f[r, c-1]`.
    pub fn backward_x() -> Self {
        Self::centered3("backward-x", [[0.0, 0.0, 0.0], [0.0, 1.0, -1.0], [0.0, 0.0, 0.0]])
    }

    /// `f[r, c] - f[r-1, c]`.
    pub fn backward_y() -> Self {
        Self::centered3("backward-y", [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]])
    }

    /// Sobel derivative along columns.
    pub fn sobel_x() -> Self {
        Self::centered3("sobel-x", [[1.0, 0.0, -1.0], [2.0, 0.0, -2.0], [1.0, 0.0, -1.0]])
    }

    /// Sobel derivative along rows.
    pub fn sobel_y() -> Self {
        Self::centered3("sobel-y", [[1.0, 2.0, 1.0], [0.0, 0.0, 0.0], [-1.0, -2.0, -1.0]])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn anchor(&self) -> (usize, usize) {
        self.anchor
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Stamp of the adjoint operator (point reflection).
    pub fn adjoint(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            name: format!("adjoint({})", self.name),
            rows: self.rows,
            cols: self.cols,
            values,
            anchor: (self.rows - 1 - self.anchor.0, self.cols - 1 - self.anchor.1),
        }
    }

    /// Stamp equivalent to applying `self` and then `other`.
    pub fn compose(&self, other: &Self) -> Self {
        let (rows, cols) = (self.rows + other.rows - 1, self.cols + other.cols - 1);
        let mut values = vec![0.0; rows * cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        values[(i + k) * cols + j + l] += a * other.get(k, l);
                    }
                }
            }
        }
        Self {
            name: format!("{}*{}", self.name, other.name),
            rows,
            cols,
            values,
            anchor: (self.anchor.0 + other.anchor.0, self.anchor.1 + other.anchor.1),
        }
    }

    /// Sum of two stamps with identical shape and anchor.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() || self.anchor != other.anchor {
            return Err(GfcError::param("stamp", "sum requires matching shape and anchor"));
        }
        Ok(Self {
            name: format!("{}+{}", self.name, other.name),
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            anchor: self.anchor,
        })
    }

    /// Unit impulse with this stamp's shape and anchor.
    pub fn dirac_like(&self) -> Self {
        let mut values = vec![0.0; self.values.len()];
        values[self.anchor.0 * self.cols + self.anchor.1] = 1.0;
        Self {
            name: "dirac".to_owned(),
            rows: self.rows,
            cols: self.cols,
            values,
            anchor: self.anchor,
        }
    }

    /// Direct circular application to a field.
    pub fn apply_periodic<T: Scalar>(&self, f: &ScalarField<T>) -> ScalarField<T> {
        let taps: Vec<(isize, isize, T)> = (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j) != 0.0)
            .map(|(i, j)| {
                (
                    self.anchor.0 as isize - i as isize,
                    self.anchor.1 as isize - j as isize,
                    T::of(self.get(i, j)),
                )
            })
            .collect();
        ScalarField::from_fn(f.height(), f.width(), |r, c| {
            taps.iter()
                .map(|&(dr, dc, k)| k * f.get_wrapped(r as isize + dr, c as isize + dc))
                .sum()
        })
    }
}

/// Places `stamp` in the top-left corner of an `h x w` zero grid.
pub fn embed_stamp<T: Scalar>(stamp: &KernelStamp, h: usize, w: usize) -> Result<ScalarField<T>> {
    if stamp.rows > h || stamp.cols > w || h == 0 || w == 0 {
        return Err(GfcError::StampTooLarge {
            stamp: stamp.shape(),
            grid: (h, w),
        });
    }
    let mut out = ScalarField::zeros(h, w);
    for i in 0..stamp.rows {
        for j in 0..stamp.cols {
            out.set(i, j, T::of(stamp.get(i, j)));
        }
    }
    Ok(out)
}

/// Frequency response of a stamp about its anchor:
/// `F(embed(stamp)) / F(embed(dirac at anchor))`.
pub fn stamp_transfer<T: Scalar>(stamp: &KernelStamp, h: usize, w: usize) -> Result<SpectralField<T>> {
    let fft = T::spectrum_cache().fft(h, w);
    let fk = fft.forward_real(&embed_stamp(stamp, h, w)?);
    let fd = fft.forward_real(&embed_stamp(&stamp.dirac_like(), h, w)?);
    Ok(SpectralField::from_raw(
        h,
        w,
        fk.values.iter().zip(&fd.values).map(|(k, d)| k / d).collect(),
    ))
}

/// Fourier-domain inverse of a differential stamp for one padded size.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenSpectrum<T> {
    spectrum: SpectralField<T>,
    /// `spectrum` in column-major order, the layout the convolution uses.
    transposed: Vec<Complex<T>>,
    padded_height: usize,
    padded_width: usize,
    kernel_id: String,
    zeroed_bins: usize,
}

impl<T: Scalar> GreenSpectrum<T> {
    #[inline]
    pub fn spectrum(&self) -> &SpectralField<T> {
        &self.spectrum
    }

    #[inline]
    pub fn padded_shape(&self) -> (usize, usize) {
        (self.padded_height, self.padded_width)
    }

    pub fn kernel_id(&self) -> &str {
        &self.kernel_id
    }

    /// Bins set to zero because the stamp's transform vanished there.
    /// More than one means the inversion is lossy.
    pub fn zeroed_bins(&self) -> usize {
        self.zeroed_bins
    }

    /// Real-domain kernel and the largest imaginary magnitude dropped
    /// taking its real part.
    pub fn real_domain(&self) -> (ScalarField<T>, T) {
        let fft = T::spectrum_cache().fft(self.padded_height, self.padded_width);
        let full = fft.inverse(&self.spectrum);
        let imag = full.values.iter().fold(T::zero(), |m, c| m.max(c.im.abs()));
        (fft::real_part(self.padded_height, self.padded_width, &full.values), imag)
    }
}

/// Spectra of the dipole kernels, one per gradient component.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleSpectra<T> {
    pub vx: SpectralField<T>,
    pub vy: SpectralField<T>,
}

pub(crate) fn check_min_size(h: usize, w: usize) -> Result<()> {
    if h < 3 || w < 3 {
        return Err(GfcError::InvalidDimensions {
            height: h,
            width: w,
            reason: "spectral grids need at least 3x3 pixels",
        });
    }
    Ok(())
}

/// Bin-wise `F(dirac) / F(stamp)`; bins with `|F(stamp)| <= epsilon` are set to 0.
///
/// The zero-frequency bin of the stamp transform is taken as the exact sum of
/// its entries, so a stamp summing to zero (any differential operator) always
/// loses exactly that bin even with `epsilon = 0`.
pub fn invert_kernel<T: Scalar>(
    stamp: &KernelStamp,
    h: usize,
    w: usize,
    epsilon: f64,
) -> Result<GreenSpectrum<T>> {
    if !(epsilon >= 0.0) {
        return Err(GfcError::param("epsilon", "must be non-negative"));
    }
    let fft = T::spectrum_cache().fft(h, w);
    let mut fk = fft.forward_real(&embed_stamp(stamp, h, w)?);
    fk.values[0] = Complex::new(T::of(stamp.sum()), T::zero());
    let fd = fft.forward_real(&embed_stamp(&stamp.dirac_like(), h, w)?);
    let eps = T::of(epsilon);
    let mut zeroed_bins = 0;
    let values = fk
        .values
        .iter()
        .zip(&fd.values)
        .map(|(k, d)| {
            if k.norm() <= eps {
                zeroed_bins += 1;
                Complex::new(T::zero(), T::zero())
            } else {
                d / k
            }
        })
        .collect();
    let spectrum = SpectralField::from_raw(h, w, values);
    Ok(GreenSpectrum {
        transposed: spectrum.transposed(),
        spectrum,
        padded_height: h,
        padded_width: w,
        kernel_id: stamp.name.clone(),
        zeroed_bins,
    })
}

/// Green spectrum of the 5-point Laplacian; the zero-frequency bin is 0.
///
/// # Panics
/// If any non-DC bin of the Laplacian transform is zero, which cannot happen
/// for grids of at least 3x3.
pub fn build_green_spectrum<T: Scalar>(h: usize, w: usize) -> Result<GreenSpectrum<T>> {
    check_min_size(h, w)?;
    let green = invert_kernel(&KernelStamp::laplace(), h, w, 0.0)?;
    assert_eq!(
        green.zeroed_bins, 1,
        "5-point Laplacian transform vanished away from DC on a {h}x{w} grid"
    );
    Ok(green)
}

/// Dipole spectra `T(D_i) * V`, with `D_i` the backward-difference stamps
/// adjoint to the forward-difference gradient.
pub fn build_dipole_spectra<T: Scalar>(h: usize, w: usize) -> Result<DipoleSpectra<T>> {
    check_min_size(h, w)?;
    let green = T::spectrum_cache().green(h, w)?;
    let dx = stamp_transfer(&KernelStamp::backward_x(), h, w)?;
    let dy = stamp_transfer(&KernelStamp::backward_y(), h, w)?;
    Ok(DipoleSpectra {
        vx: dx.hadamard(&green.spectrum)?,
        vy: dy.hadamard(&green.spectrum)?,
    })
}

/// Circular convolution of a real field with a Fourier-domain kernel,
/// returning the real part.
pub fn convolve_spectral<T: Scalar>(f: &ScalarField<T>, g: &GreenSpectrum<T>) -> Result<ScalarField<T>> {
    convolve_transposed(f, g.spectrum.shape(), &g.transposed)
}

/// `Re(F^-1(F(f) . s))`.
pub fn apply_spectrum<T: Scalar>(f: &ScalarField<T>, s: &SpectralField<T>) -> Result<ScalarField<T>> {
    convolve_transposed(f, s.shape(), &s.transposed())
}

fn convolve_transposed<T: Scalar>(
    f: &ScalarField<T>,
    shape: (usize, usize),
    spectrum_t: &[Complex<T>],
) -> Result<ScalarField<T>> {
    if f.shape() != shape {
        return Err(GfcError::ShapeMismatch {
            expected: shape,
            actual: f.shape(),
        });
    }
    let fft = T::spectrum_cache().fft(f.height(), f.width());
    ScalarField::new(f.height(), f.width(), fft.convolve_transposed(f.values(), spectrum_t))
}
