//! Green function convolution (GFC) solver for gradient-domain image editing.
//!
//! Images are reconstructed from gradient or Laplacian fields by a single
//! circular convolution with a numerically built Green's function of the
//! 5-point Laplacian, evaluated with 2D FFTs on a zero-padded grid.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the precision for callers that do not care.

pub mod bench;
pub mod diffops;
pub mod editing;
pub mod error;
pub mod field;
pub mod oracle;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod synthetic;

pub use bench::{BenchRecord, Method};
pub use editing::{Edit, MergeParams};
pub use error::{GfcError, Result};
pub use field::{crop_pad, pad_zero, stats, FieldStats};
pub use scalar::Scalar;
pub use solver::{Anchor, SolveOptions, SolvePath, SolveReport};
pub use spectral::KernelStamp;

pub type ScalarField = field::ScalarField<f64>;
pub type ScalarField32 = field::ScalarField<f32>;
pub type VectorField = field::VectorField<f64>;
pub type VectorField32 = field::VectorField<f32>;
pub type MultiChannelImage = field::MultiChannelImage<f64>;
pub type MultiChannelImage32 = field::MultiChannelImage<f32>;
pub type GreenSpectrum = spectral::GreenSpectrum<f64>;
pub type GreenSpectrum32 = spectral::GreenSpectrum<f32>;
pub type EdgeMap = editing::EdgeMap<f64>;
pub type EdgeMap32 = editing::EdgeMap<f32>;
pub type BlendJob = editing::BlendJob<f64>;
pub type BlendJob32 = editing::BlendJob<f32>;
