//! Gradient-domain editing built on the solver: thresholding, edge-guided
//! merging, Poisson blending and the shared edit-then-solve pipeline.
//!
//! All arithmetic is unclamped; values are clamped to the image's nominal
//! range only when a pipeline returns.

use rayon::prelude::*;

use crate::diffops::{gaussian_blur, gradient};
use crate::error::{GfcError, Result};
use crate::field::{crop_pad, pad_zero, stats, MultiChannelImage, ScalarField, VectorField};
use crate::scalar::Scalar;
use crate::solver::{solve_gradient, SolveOptions};

/// Parameters of [`gdm_merge`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeParams {
    alpha: f64,
    thin_edges: bool,
    blur_sigma: f64,
}

impl Default for MergeParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            thin_edges: false,
            blur_sigma: 1.0,
        }
    }
}

impl MergeParams {
    pub fn new(alpha: f64, thin_edges: bool, blur_sigma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(GfcError::param("alpha", format!("{alpha} is outside [0, 1]")));
        }
        if !(blur_sigma > 0.0 && blur_sigma.is_finite()) {
            return Err(GfcError::param("blur_sigma", format!("{blur_sigma} is not positive")));
        }
        Ok(Self {
            alpha,
            thin_edges,
            blur_sigma,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Painting mode: the gradient is blurred before merging with thin edges.
    pub fn thin_edges(&self) -> bool {
        self.thin_edges
    }

    pub fn blur_sigma(&self) -> f64 {
        self.blur_sigma
    }
}

/// Per-pixel edge confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap<T> {
    c: ScalarField<T>,
}

impl<T: Scalar> EdgeMap<T> {
    /// Wraps a field that is already within `[0, 1]`.
    pub fn new(c: ScalarField<T>) -> Result<Self> {
        if let Some(v) = c.values().iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(GfcError::param("edge map", format!("value {v} is outside [0, 1]")));
        }
        Ok(Self { c })
    }

    /// Rescales an arbitrary detector response to `[0, 1]` by its min and max.
    /// A flat response carries no contrast and is clamped into range instead.
    pub fn from_field(raw: &ScalarField<T>) -> Result<Self> {
        if raw.values().iter().any(|v| !v.is_finite()) {
            return Err(GfcError::param("edge map", "contains non-finite values"));
        }
        let (lo, hi) = raw
            .values()
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let c = if hi > lo {
            raw.map(|v| (v - lo) / (hi - lo))
        } else {
            raw.clamp(T::zero(), T::one())
        };
        Self::new(c)
    }

    pub fn field(&self) -> &ScalarField<T> {
        &self.c
    }

    pub fn shape(&self) -> (usize, usize) {
        self.c.shape()
    }

    /// Extends the map by `pad` pixels, copying the nearest border value.
    pub fn pad_replicate(&self, pad: usize) -> Self {
        let (h, w) = self.c.shape();
        let c = ScalarField::from_fn(h + 2 * pad, w + 2 * pad, |r, col| {
            let r = r.saturating_sub(pad).min(h - 1);
            let col = col.saturating_sub(pad).min(w - 1);
            self.c.get(r, col)
        });
        Self { c }
    }
}

/// Rescales `ic` so its mean and population std match `reference`.
pub fn color_correct<T: Scalar>(ic: &ScalarField<T>, reference: &ScalarField<T>) -> Result<ScalarField<T>> {
    ic.expect_shape(reference.shape())?;
    let s = stats(ic);
    if s.std <= 1e-12 {
        return Err(GfcError::DegenerateSolution { std: s.std });
    }
    let r = stats(reference);
    let gain = r.std / s.std;
    Ok(ScalarField::from_fn(ic.height(), ic.width(), |row, col| {
        T::of((ic.get(row, col).as_f64() - s.mean) * gain + r.mean)
    }))
}

/// Zeroes every gradient sample whose magnitude is below `fraction * max_level`.
pub fn threshold_gradient<T: Scalar>(e: &VectorField<T>, fraction: f64, max_level: f64) -> Result<VectorField<T>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(GfcError::param("fraction", format!("{fraction} is outside [0, 1]")));
    }
    if !(max_level > 0.0 && max_level.is_finite()) {
        return Err(GfcError::param("max_level", format!("{max_level} is not positive")));
    }
    let cut = T::of(fraction * max_level);
    let (h, w) = e.shape();
    let mut ex = e.ex().clone();
    let mut ey = e.ey().clone();
    for r in 0..h {
        for c in 0..w {
            if ex.get(r, c).hypot(ey.get(r, c)) < cut {
                ex.set(r, c, T::zero());
                ey.set(r, c, T::zero());
            }
        }
    }
    VectorField::new(ex, ey)
}

/// Weighted geometric mean of the normalized gradient magnitude and the edge
/// confidence, keeping the gradient orientation.
///
/// With `m = max |E|` the output magnitude is `m * (|E|/m)^(1-alpha) * C^alpha`.
pub fn gdm_merge<T: Scalar>(e: &VectorField<T>, edges: &EdgeMap<T>, p: &MergeParams) -> Result<VectorField<T>> {
    e.ex().expect_shape(edges.shape())?;
    if p.alpha == 0.0 {
        return Ok(e.clone());
    }
    let blurred;
    let e = if p.thin_edges {
        blurred = VectorField::new(gaussian_blur(e.ex(), p.blur_sigma)?, gaussian_blur(e.ey(), p.blur_sigma)?)?;
        &blurred
    } else {
        e
    };
    let mag = e.ex().zip_map(e.ey(), |x, y| x.hypot(y))?;
    let m = mag.max_abs();
    if m == T::zero() {
        return Ok(e.clone());
    }
    let keep = T::of(1.0 - p.alpha);
    let alpha = T::of(p.alpha);
    let scale = mag.zip_map(edges.field(), |g, c| {
        if g == T::zero() {
            T::zero()
        } else {
            m * (g / m).powf(keep) * c.powf(alpha) / g
        }
    })?;
    VectorField::new(
        e.ex().zip_map(&scale, |v, s| v * s)?,
        e.ey().zip_map(&scale, |v, s| v * s)?,
    )
}

/// Sum of squared forward differences taken strictly inside the field.
pub fn gradient_energy<T: Scalar>(f: &ScalarField<T>) -> f64 {
    let (h, w) = f.shape();
    let mut total = 0.0;
    for r in 0..h {
        for c in 0..w {
            let v = f.get(r, c).as_f64();
            if c + 1 < w {
                total += (f.get(r, c + 1).as_f64() - v).powi(2);
            }
            if r + 1 < h {
                total += (f.get(r + 1, c).as_f64() - v).powi(2);
            }
        }
    }
    total
}

/// Source pasted into a destination through a binary mask.
#[derive(Debug, Clone)]
pub struct BlendJob<T> {
    source: MultiChannelImage<T>,
    destination: MultiChannelImage<T>,
    mask: ScalarField<T>,
    offset: (isize, isize),
}

impl<T: Scalar> BlendJob<T> {
    /// `offset` is the destination position of the source's top-left pixel.
    pub fn new(
        source: MultiChannelImage<T>,
        destination: MultiChannelImage<T>,
        mask: ScalarField<T>,
        offset: (isize, isize),
    ) -> Result<Self> {
        mask.expect_shape(destination.shape())?;
        if source.channel_count() != destination.channel_count() {
            return Err(GfcError::param(
                "source",
                format!(
                    "{} channels but destination has {}",
                    source.channel_count(),
                    destination.channel_count()
                ),
            ));
        }
        if mask.values().iter().any(|&v| v != T::zero() && v != T::one()) {
            return Err(GfcError::param("mask", "values must be 0 or 1"));
        }
        let job = Self {
            source,
            destination,
            mask,
            offset,
        };
        let (h, w) = job.mask.shape();
        for r in 0..h {
            for c in 0..w {
                if job.mask.get(r, c) == T::one() && job.source_index(r as isize, c as isize).is_none() {
                    return Err(GfcError::Coverage { row: r, col: c });
                }
            }
        }
        Ok(job)
    }

    pub fn source(&self) -> &MultiChannelImage<T> {
        &self.source
    }

    pub fn destination(&self) -> &MultiChannelImage<T> {
        &self.destination
    }

    pub fn mask(&self) -> &ScalarField<T> {
        &self.mask
    }

    pub fn offset(&self) -> (isize, isize) {
        self.offset
    }

    /// Source pixel under destination pixel `(r, c)`, if any.
    fn source_index(&self, r: isize, c: isize) -> Option<(usize, usize)> {
        let (sh, sw) = self.source.shape();
        let (sr, sc) = (r - self.offset.0, c - self.offset.1);
        (sr >= 0 && sc >= 0 && (sr as usize) < sh && (sc as usize) < sw).then_some((sr as usize, sc as usize))
    }

    fn in_mask(&self, r: isize, c: isize) -> bool {
        let (h, w) = self.mask.shape();
        r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w && self.mask.get(r as usize, c as usize) == T::one()
    }

    /// Guidance field of one channel on the padded destination frame.
    fn guidance(&self, channel: usize, pad: usize) -> Result<VectorField<T>> {
        let dest = pad_zero(&self.destination.channels()[channel], pad);
        let src = &self.source.channels()[channel];
        let (mut ex, mut ey) = gradient(&dest).into_parts();
        let (h, w) = dest.shape();
        let p = pad as isize;
        for r in 0..h {
            for c in 0..w {
                let (dr, dc) = (r as isize - p, c as isize - p);
                if !self.in_mask(dr, dc) {
                    continue;
                }
                let here = self.source_index(dr, dc).map(|(a, b)| src.get(a, b));
                let Some(v) = here else { continue };
                if let Some((a, b)) = self.source_index(dr, dc + 1) {
                    ex.set(r, c, src.get(a, b) - v);
                }
                if let Some((a, b)) = self.source_index(dr + 1, dc) {
                    ey.set(r, c, src.get(a, b) - v);
                }
            }
        }
        VectorField::new(ex, ey)
    }
}

/// Seamless cloning: source gradients inside the mask, destination
/// gradients outside, with the constant fitted to the destination outside
/// the mask. Returns the clamped result.
pub fn poisson_blend<T: Scalar>(job: &BlendJob<T>, opts: &SolveOptions) -> Result<MultiChannelImage<T>> {
    opts.validate()?;
    let dest = &job.destination;
    let (lo, hi) = (dest.nominal_min(), dest.nominal_max());
    let channels = (0..dest.channel_count())
        .into_par_iter()
        .map(|k| -> Result<ScalarField<T>> {
            let (solved, _) = solve_gradient(&job.guidance(k, opts.pad)?, opts)?;
            let x = crop_pad(&solved, opts.pad)?;
            let d = &dest.channels()[k];
            let (mut sum, mut count) = (0.0, 0usize);
            for (i, (&xv, &dv)) in x.values().iter().zip(d.values()).enumerate() {
                if job.mask.values()[i] == T::zero() {
                    sum += dv.as_f64() - xv.as_f64();
                    count += 1;
                }
            }
            let shift = if count == 0 { T::zero() } else { T::of(sum / count as f64) };
            Ok(x.add_scalar(shift).clamp(lo, hi))
        })
        .collect::<Result<Vec<_>>>()?;
    dest.with_channels(channels)
}

/// Gradient edit applied by [`gdie_pipeline`].
#[derive(Debug, Clone)]
pub enum Edit<T> {
    /// [`threshold_gradient`] at this fraction of the nominal range.
    Threshold(f64),
    /// [`gdm_merge`] against an edge map at image resolution.
    Gdm(EdgeMap<T>, MergeParams),
}

/// Result of [`gdie_pipeline`] before and after clamping.
#[derive(Debug, Clone)]
pub struct PipelineOutput<T> {
    pub unclamped: MultiChannelImage<T>,
    pub clamped: MultiChannelImage<T>,
}

/// Pad, differentiate, edit, solve, crop and color-correct each channel.
pub fn gdie_pipeline<T: Scalar>(
    image: &MultiChannelImage<T>,
    edit: &Edit<T>,
    opts: &SolveOptions,
) -> Result<PipelineOutput<T>> {
    opts.validate()?;
    let padded_edges = match edit {
        Edit::Threshold(_) => None,
        Edit::Gdm(edges, _) => {
            edges.field().expect_shape(image.shape())?;
            Some(edges.pad_replicate(opts.pad))
        }
    };
    let max_level = (image.nominal_max() - image.nominal_min()).as_f64();
    let channels = image
        .channels()
        .par_iter()
        .map(|ch| -> Result<ScalarField<T>> {
            let e = gradient(&pad_zero(ch, opts.pad));
            let edited = match edit {
                Edit::Threshold(fraction) => threshold_gradient(&e, *fraction, max_level)?,
                Edit::Gdm(_, p) => gdm_merge(&e, padded_edges.as_ref().expect("built above"), p)?,
            };
            let (solved, _) = solve_gradient(&edited, opts)?;
            let ic = crop_pad(&solved, opts.pad)?;
            let reference = stats(ch);
            if reference.std == 0.0 {
                return Ok(ScalarField::filled(ch.height(), ch.width(), T::of(reference.mean)));
            }
            color_correct(&ic, ch)
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = (image.nominal_min(), image.nominal_max());
    let clamped = channels.iter().map(|c| c.clamp(lo, hi)).collect();
    Ok(PipelineOutput {
        unclamped: image.with_channels(channels)?,
        clamped: image.with_channels(clamped)?,
    })
}
