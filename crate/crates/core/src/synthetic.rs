//! Seeded photo-like test images: smooth illumination, overlapping shapes
//! and fine texture, quantized to 8 bits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffops::{gaussian_blur, gradient_periodic};
use crate::editing::EdgeMap;
use crate::error::Result;
use crate::field::{MultiChannelImage, ScalarField};

enum Shape {
    Disc { r: f64, c: f64, radius: f64 },
    Rect { r0: f64, c0: f64, r1: f64, c1: f64 },
}

impl Shape {
    fn contains(&self, r: f64, c: f64) -> bool {
        match *self {
            Shape::Disc { r: cr, c: cc, radius } => (r - cr).hypot(c - cc) <= radius,
            Shape::Rect { r0, c0, r1, c1 } => r >= r0 && r <= r1 && c >= c0 && c <= c1,
        }
    }
}

/// Grayscale image in `[0, 255]`, integer valued.
pub fn gray_image(height: usize, width: usize, seed: u64) -> ScalarField<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h, w) = (height as f64, width as f64);
    let base = rng.gen_range(60.0..160.0);
    let tilt = (rng.gen_range(-60.0..60.0), rng.gen_range(-60.0..60.0));
    let shapes: Vec<(Shape, f64)> = (0..rng.gen_range(3..8))
        .map(|_| {
            let shape = if rng.gen_bool(0.5) {
                Shape::Disc {
                    r: rng.gen_range(0.0..h),
                    c: rng.gen_range(0.0..w),
                    radius: rng.gen_range(0.08..0.3) * h.min(w),
                }
            } else {
                let (r0, c0) = (rng.gen_range(0.0..h), rng.gen_range(0.0..w));
                Shape::Rect {
                    r0,
                    c0,
                    r1: r0 + rng.gen_range(0.1..0.5) * h,
                    c1: c0 + rng.gen_range(0.1..0.5) * w,
                }
            };
            (shape, rng.gen_range(-70.0..70.0))
        })
        .collect();
    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(2.0..12.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(2.0..8.0),
            )
        })
        .collect();
    let noise = rng.gen_range(2.0..8.0);
    ScalarField::from_fn(height, width, |r, c| {
        let (y, x) = (r as f64, c as f64);
        let mut v = base + tilt.0 * (y / h - 0.5) + tilt.1 * (x / w - 0.5);
        for (shape, delta) in &shapes {
            if shape.contains(y, x) {
                v += delta;
            }
        }
        for &(period, phase, angle, amp) in &waves {
            let t = (x * angle.cos() + y * angle.sin()) / period;
            v += amp * (std::f64::consts::TAU * t + phase).sin();
        }
        v += rng.gen_range(-noise..noise);
        v.round().clamp(0.0, 255.0)
    })
}

/// Three correlated channels built from one scene.
pub fn rgb_image(height: usize, width: usize, seed: u64) -> MultiChannelImage<f64> {
    let scene = gray_image(height, width, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let channels = (0..3)
        .map(|_| {
            let gain = rng.gen_range(0.7..1.2);
            let offset = rng.gen_range(-20.0..20.0);
            let tint = gray_image(height, width, rng.gen());
            scene
                .zip_map(&tint, |s, t| (gain * s + 0.15 * (t - 128.0) + offset).round().clamp(0.0, 255.0))
                .expect("same shape")
        })
        .collect();
    MultiChannelImage::new(channels).expect("three equal channels")
}

/// Blurred gradient magnitude of `image`, rescaled to an edge map.
pub fn edge_map(image: &ScalarField<f64>, sigma: f64) -> Result<EdgeMap<f64>> {
    let smooth = gaussian_blur(image, sigma)?;
    let g = gradient_periodic(&smooth);
    EdgeMap::from_field(&g.ex().zip_map(g.ey(), f64::hypot)?)
}
