//! Grid containers, zero padding and basic statistics.

use std::ops::{Index, IndexMut};

use crate::error::{GfcError, Result};
use crate::scalar::Scalar;

/// Real-valued 2D grid stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    height: usize,
    width: usize,
    values: Vec<T>,
}

impl<T: Scalar> ScalarField<T> {
    pub fn new(height: usize, width: usize, values: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(GfcError::InvalidDimensions {
                height,
                width,
                reason: "height and width must be at least 1",
            });
        }
        if values.len() != height * width {
            return Err(GfcError::InvalidDimensions {
                height,
                width,
                reason: "value count does not match height x width",
            });
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, T::zero())
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn filled(height: usize, width: usize, value: T) -> Self {
        assert!(height > 0 && width > 0, "field dimensions must be positive");
        Self {
            height,
            width,
            values: vec![value; height * width],
        }
    }

    /// Builds a field by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(height > 0 && width > 0, "field dimensions must be positive");
        let mut values = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Self {
            height,
            width,
            values,
        }
    }

    /// Builds a field from nested rows; all rows must share a length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(GfcError::InvalidDimensions {
                height,
                width,
                reason: "ragged rows",
            });
        }
        Self::new(height, width, rows.concat())
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.width + col]
    }

    /// Value at `(row, col)`, or zero outside the grid.
    #[inline]
    pub fn get_or_zero(&self, row: isize, col: isize) -> T {
        if row < 0 || col < 0 || row as usize >= self.height || col as usize >= self.width {
            T::zero()
        } else {
            self.values[row as usize * self.width + col as usize]
        }
    }

    /// Value at `(row, col)` with periodic wrap-around.
    #[inline]
    pub fn get_wrapped(&self, row: isize, col: isize) -> T {
        let r = row.rem_euclid(self.height as isize) as usize;
        let c = col.rem_euclid(self.width as isize) as usize;
        self.values[r * self.width + c]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.values[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.values[row * self.width..(row + 1) * self.width]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Element-wise combination of two same-shape fields.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.expect_shape(other.shape())?;
        Ok(Self {
            height: self.height,
            width: self.width,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add_scalar(&self, c: T) -> Self {
        self.map(|v| v + c)
    }

    pub fn sum(&self) -> T {
        T::of(self.values.iter().map(|v| v.as_f64()).sum::<f64>())
    }

    pub fn mean(&self) -> T {
        T::of(self.values.iter().map(|v| v.as_f64()).sum::<f64>() / self.len() as f64)
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, &v| if v.abs() > m { v.abs() } else { m })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.expect_shape(other.shape())?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs())))
    }

    /// Root mean square of the pixel-wise difference.
    pub fn rmse(&self, other: &Self) -> Result<T> {
        self.expect_shape(other.shape())?;
        let sq: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| {
                let d = (a - b).as_f64();
                d * d
            })
            .sum();
        Ok(T::of((sq / self.len() as f64).sqrt()))
    }

    /// Sum of squared values.
    pub fn energy(&self) -> T {
        T::of(self.values.iter().map(|v| v.as_f64().powi(2)).sum::<f64>())
    }

    pub fn clamp(&self, lo: T, hi: T) -> Self {
        self.map(|v| v.max(lo).min(hi))
    }

    /// Converts to another precision.
    pub fn cast<U: Scalar>(&self) -> ScalarField<U> {
        ScalarField {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }

    pub(crate) fn expect_shape(&self, expected: (usize, usize)) -> Result<()> {
        if self.shape() != expected {
            return Err(GfcError::ShapeMismatch {
                expected,
                actual: self.shape(),
            });
        }
        Ok(())
    }
}

impl<T> Index<(usize, usize)> for ScalarField<T> {
    type Output = T;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.values[r * self.width + c]
    }
}

impl<T> IndexMut<(usize, usize)> for ScalarField<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.values[r * self.width + c]
    }
}

/// Gradient-like pair of same-shape fields: `ex` along columns, `ey` along rows.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    ex: ScalarField<T>,
    ey: ScalarField<T>,
}

impl<T: Scalar> VectorField<T> {
    pub fn new(ex: ScalarField<T>, ey: ScalarField<T>) -> Result<Self> {
        ey.expect_shape(ex.shape())?;
        Ok(Self { ex, ey })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            ex: ScalarField::zeros(height, width),
            ey: ScalarField::zeros(height, width),
        }
    }

    #[inline]
    pub fn ex(&self) -> &ScalarField<T> {
        &self.ex
    }

    #[inline]
    pub fn ey(&self) -> &ScalarField<T> {
        &self.ey
    }

    pub fn into_parts(self) -> (ScalarField<T>, ScalarField<T>) {
        (self.ex, self.ey)
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.ex.shape()
    }

    /// Per-component map of both fields.
    pub fn map_components(&self, f: impl Fn(&ScalarField<T>) -> ScalarField<T>) -> Self {
        Self {
            ex: f(&self.ex),
            ey: f(&self.ey),
        }
    }

    /// Sum of squared components over all pixels.
    pub fn energy(&self) -> T {
        self.ex.energy() + self.ey.energy()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        Ok(self
            .ex
            .max_abs_diff(&other.ex)?
            .max(self.ey.max_abs_diff(&other.ey)?))
    }

    pub fn cast<U: Scalar>(&self) -> VectorField<U> {
        VectorField {
            ex: self.ex.cast(),
            ey: self.ey.cast(),
        }
    }
}

/// One or three channels sharing dimensions, with a nominal value range.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelImage<T> {
    channels: Vec<ScalarField<T>>,
    nominal_min: T,
    nominal_max: T,
}

impl<T: Scalar> MultiChannelImage<T> {
    /// Image with the default 0..255 nominal range.
    pub fn new(channels: Vec<ScalarField<T>>) -> Result<Self> {
        Self::with_range(channels, T::zero(), T::of(255.0))
    }

    pub fn with_range(channels: Vec<ScalarField<T>>, nominal_min: T, nominal_max: T) -> Result<Self> {
        if channels.len() != 1 && channels.len() != 3 {
            return Err(GfcError::param(
                "channels",
                format!("expected 1 or 3 channels, got {}", channels.len()),
            ));
        }
        let shape = channels[0].shape();
        for ch in &channels[1..] {
            ch.expect_shape(shape)?;
        }
        if nominal_max.partial_cmp(&nominal_min) != Some(std::cmp::Ordering::Greater) {
            return Err(GfcError::param("nominal range", "max must exceed min"));
        }
        Ok(Self {
            channels,
            nominal_min,
            nominal_max,
        })
    }

    #[inline]
    pub fn channels(&self) -> &[ScalarField<T>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<ScalarField<T>> {
        self.channels
    }

    #[inline]
    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.channels[0].shape()
    }

    #[inline]
    pub fn nominal_min(&self) -> T {
        self.nominal_min
    }

    #[inline]
    pub fn nominal_max(&self) -> T {
        self.nominal_max
    }

    /// Same range metadata, new channel data.
    pub fn with_channels(&self, channels: Vec<ScalarField<T>>) -> Result<Self> {
        Self::with_range(channels, self.nominal_min, self.nominal_max)
    }

    /// Per-pixel mean over channels.
    pub fn channel_mean(&self) -> ScalarField<T> {
        let (h, w) = self.shape();
        let n = T::of(self.channels.len() as f64);
        ScalarField::from_fn(h, w, |r, c| {
            self.channels.iter().map(|ch| ch.get(r, c)).sum::<T>() / n
        })
    }

    pub fn cast<U: Scalar>(&self) -> MultiChannelImage<U> {
        MultiChannelImage {
            channels: self.channels.iter().map(ScalarField::cast).collect(),
            nominal_min: U::of(self.nominal_min.as_f64()),
            nominal_max: U::of(self.nominal_max.as_f64()),
        }
    }
}

/// Mean and population standard deviation of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    pub mean: f64,
    pub std: f64,
}

/// Surrounds `f` with a ring of `pad` zeros on every side.
pub fn pad_zero<T: Scalar>(f: &ScalarField<T>, pad: usize) -> ScalarField<T> {
    if pad == 0 {
        return f.clone();
    }
    let (h, w) = f.shape();
    let pw = w + 2 * pad;
    let mut out = ScalarField::zeros(h + 2 * pad, pw);
    for r in 0..h {
        let start = (r + pad) * pw + pad;
        out.values[start..start + w].copy_from_slice(f.row(r));
    }
    out
}

/// Removes a ring of `pad` pixels; inverse of [`pad_zero`].
pub fn crop_pad<T: Scalar>(f: &ScalarField<T>, pad: usize) -> Result<ScalarField<T>> {
    let (h, w) = f.shape();
    if h <= 2 * pad || w <= 2 * pad {
        return Err(GfcError::DimensionTooSmall {
            height: h,
            width: w,
            pad,
        });
    }
    let (ih, iw) = (h - 2 * pad, w - 2 * pad);
    let mut values = Vec::with_capacity(ih * iw);
    for r in pad..pad + ih {
        values.extend_from_slice(&f.row(r)[pad..pad + iw]);
    }
    ScalarField::new(ih, iw, values)
}

/// Mean and population (divide-by-N) standard deviation, accumulated in `f64`.
pub fn stats<T: Scalar>(f: &ScalarField<T>) -> FieldStats {
    let n = f.len() as f64;
    let mean = f.values().iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let var = f
        .values()
        .iter()
        .map(|v| (v.as_f64() - mean).powi(2))
        .sum::<f64>()
        / n;
    FieldStats {
        mean,
        std: var.sqrt(),
    }
}

/// Mean over the pad ring of a padded field (the pixels outside the centered interior).
pub fn pad_ring_mean<T: Scalar>(f: &ScalarField<T>, pad: usize) -> T {
    let (h, w) = f.shape();
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in 0..h {
        let in_band = r < pad || r + pad >= h;
        for c in 0..w {
            if in_band || c < pad || c + pad >= w {
                sum += f.get(r, c).as_f64();
                count += 1;
            }
        }
    }
    if count == 0 {
        T::zero()
    } else {
        T::of(sum / count as f64)
    }
}
