//! Benchmark harness: reconstruction error under gradient thresholding and
//! solve-time scaling.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diffops::{divergence_periodic, gradient, gradient_periodic};
use crate::editing::threshold_gradient;
use crate::error::{GfcError, Result};
use crate::field::{pad_zero, ScalarField};
use crate::oracle::{field_rmse, jacobi_solve};
use crate::scalar::Scalar;
use crate::solver::{solve_batch, solve_gradient, solve_laplacian, SolveOptions};

/// One measurement, serialized as a CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub method: String,
    pub image_id: String,
    pub threshold_fraction: f64,
    pub rmse: f64,
    #[serde(rename = "wall_time_s")]
    pub wall_time: f64,
    pub pixels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Gfc,
    /// Damped Jacobi with a fixed iteration budget.
    Jacobi(usize),
}

impl Method {
    pub fn id(&self) -> String {
        match self {
            Method::Gfc => "gfc".to_string(),
            Method::Jacobi(n) => format!("jacobi{n}"),
        }
    }
}

/// Named 8-bit grayscale input.
#[derive(Debug, Clone)]
pub struct BenchImage {
    pub id: String,
    pub pixels: ScalarField<f64>,
}

fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64().max(1e-9)
}

/// Thresholds each image's gradient on the padded frame, reconstructs it
/// with every method and records `field_rmse(grad(I_c), E_p)`.
pub fn perturbation_benchmark(
    images: &[BenchImage],
    fractions: &[f64],
    methods: &[Method],
    opts: &SolveOptions,
) -> Result<Vec<BenchRecord>> {
    if images.is_empty() {
        return Err(GfcError::param("images", "at least one image is required"));
    }
    let mut records = Vec::with_capacity(images.len() * fractions.len() * methods.len());
    for image in images {
        let padded = pad_zero(&image.pixels, opts.pad);
        let e = gradient(&padded);
        for &fraction in fractions {
            let ep = threshold_gradient(&e, fraction, 255.0)?;
            for method in methods {
                let start = Instant::now();
                let ic = match method {
                    Method::Gfc => solve_gradient(&ep, opts)?.0,
                    Method::Jacobi(n) => jacobi_solve(&divergence_periodic(&ep), *n),
                };
                let wall_time = elapsed(start);
                records.push(BenchRecord {
                    method: method.id(),
                    image_id: image.id.clone(),
                    threshold_fraction: fraction,
                    rmse: field_rmse(&gradient_periodic(&ic), &ep)?,
                    wall_time,
                    pixels: image.pixels.len(),
                });
            }
        }
    }
    Ok(records)
}

/// Grid shape used for a pixel count: the most square power-of-two split.
pub fn timing_shape(pixels: usize) -> Result<(usize, usize)> {
    if !pixels.is_power_of_two() || pixels < 16 {
        return Err(GfcError::param("sizes", format!("{pixels} is not a power of two >= 16")));
    }
    let h = 1usize << (pixels.trailing_zeros() / 2);
    Ok((h, pixels / h))
}

fn random_field(h: usize, w: usize, seed: u64) -> ScalarField<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = ScalarField::from_fn(h, w, |_, _| rng.gen_range(-1.0..1.0));
    let m = f.mean();
    f.add_scalar(-m)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Median `solve_laplacian` time per size over `runs` repetitions, with the
/// Green spectrum built before timing starts.
///
/// Runs are interleaved across sizes so that load fluctuations on the host
/// affect every size alike rather than skewing the ratios between them.
pub fn timing_scaling(sizes: &[usize], runs: usize) -> Result<Vec<BenchRecord>> {
    if runs < 5 {
        return Err(GfcError::param("runs", "at least 5 runs are needed for a median"));
    }
    if sizes.windows(2).any(|p| p[0] >= p[1]) {
        return Err(GfcError::param("sizes", "must be strictly ascending"));
    }
    let opts = SolveOptions::default();
    let mut inputs = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let (h, w) = timing_shape(n)?;
        f64::spectrum_cache().green(h, w)?;
        let l = random_field(h, w, n as u64);
        // one untimed solve plans the transforms and fills the buffer pool
        solve_laplacian(&l, &opts)?;
        inputs.push(l);
    }
    let mut times = vec![Vec::with_capacity(runs); sizes.len()];
    for _ in 0..runs {
        for (l, t) in inputs.iter().zip(&mut times) {
            let start = Instant::now();
            std::hint::black_box(solve_laplacian(l, &opts)?);
            t.push(elapsed(start));
        }
    }
    Ok(sizes
        .iter()
        .zip(inputs.iter().zip(times))
        .map(|(&n, (l, t))| BenchRecord {
            method: Method::Gfc.id(),
            image_id: format!("{}x{}", l.height(), l.width()),
            threshold_fraction: 0.0,
            rmse: 0.0,
            wall_time: median(t),
            pixels: n,
        })
        .collect())
}

/// Serial versus parallel wall time for a batch of independent solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchTiming {
    pub jobs: usize,
    pub threads: usize,
    pub serial: f64,
    pub parallel: f64,
}

impl BatchTiming {
    pub fn ratio(&self) -> f64 {
        self.parallel / self.serial
    }
}

/// Times `jobs` solves on an `h x w` grid one after another and then through
/// [`solve_batch`] on the current rayon pool.
pub fn batch_timing(jobs: usize, h: usize, w: usize) -> Result<BatchTiming> {
    let opts = SolveOptions::default();
    f64::spectrum_cache().green(h, w)?;
    let inputs: Vec<_> = (0..jobs).map(|k| random_field(h, w, k as u64)).collect();
    solve_laplacian(&inputs[0], &opts)?;
    let start = Instant::now();
    for l in &inputs {
        std::hint::black_box(solve_laplacian(l, &opts)?);
    }
    let serial = elapsed(start);
    let start = Instant::now();
    std::hint::black_box(solve_batch(&inputs, &opts)?);
    let parallel = elapsed(start);
    Ok(BatchTiming {
        jobs,
        threads: rayon::current_num_threads(),
        serial,
        parallel,
    })
}

/// Writes records with a header row.
pub fn write_csv<W: Write>(records: &[BenchRecord], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for r in records {
        out.serialize(r).map_err(|e| GfcError::Csv(e.to_string()))?;
    }
    out.flush().map_err(|e| GfcError::Csv(e.to_string()))
}
