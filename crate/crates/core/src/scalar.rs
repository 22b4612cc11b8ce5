//! Floating point scalar abstraction shared by every grid type.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::OnceLock;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

use crate::spectral::SpectrumCache;

/// Real scalar type the solver can run on: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Debug + Display + Sum + 'static
{
    /// Process-wide cache of Green spectra and FFT plans for this precision.
    fn spectrum_cache() -> &'static SpectrumCache<Self>;

    /// Lossy conversion from `f64`; always succeeds for finite inputs.
    #[inline]
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).unwrap_or_else(Self::nan)
    }

    /// Widening conversion to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn spectrum_cache() -> &'static SpectrumCache<Self> {
                static CACHE: OnceLock<SpectrumCache<$t>> = OnceLock::new();
                CACHE.get_or_init(SpectrumCache::new)
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);
