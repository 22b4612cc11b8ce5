use std::fs;
use std::io::Write;
use std::path::Path;

use gfc_core::bench::{perturbation_benchmark, timing_scaling, write_csv, BenchImage, BenchRecord};
use gfc_core::editing::{gdie_pipeline, gradient_energy, poisson_blend, BlendJob, EdgeMap, Edit};
use gfc_core::field::{MultiChannelImage, ScalarField};
use gfc_core::solver::roundtrip_check;
use gfc_core::{MergeParams, Method, Scalar, SolveOptions};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::io::{collect_inputs, load_edge_map, load_image, load_mask, save_image};
use crate::{BenchMode, Precision, SolveArgs};

const ROUNDTRIP_TOLERANCE: f64 = 0.05;
const SCALING_LIMIT: f64 = 5.5;
const BENCH_FRACTIONS: [f64; 3] = [0.1, 0.3, 0.5];

fn options(solve: SolveArgs) -> SolveOptions {
    SolveOptions::default().with_pad(solve.pad)
}

fn cast_edit<T: Scalar>(edit: &Edit<f64>) -> Result<Edit<T>> {
    Ok(match edit {
        Edit::Threshold(f) => Edit::Threshold(*f),
        Edit::Gdm(edges, p) => Edit::Gdm(EdgeMap::new(edges.field().cast())?, *p),
    })
}

fn pipeline_in<T: Scalar>(img: &MultiChannelImage<f64>, edit: &Edit<f64>, opts: &SolveOptions) -> Result<MultiChannelImage<f64>> {
    let out = gdie_pipeline(&img.cast::<T>(), &cast_edit::<T>(edit)?, opts)?;
    Ok(out.clamped.cast())
}

fn run_pipeline(img: &MultiChannelImage<f64>, edit: &Edit<f64>, solve: SolveArgs) -> Result<MultiChannelImage<f64>> {
    let opts = options(solve);
    match solve.precision {
        Precision::F32 => pipeline_in::<f32>(img, edit, &opts),
        Precision::F64 => pipeline_in::<f64>(img, edit, &opts),
    }
}

fn energy(img: &MultiChannelImage<f64>) -> f64 {
    img.channels().iter().map(gradient_energy).sum()
}

fn energy_ratio(out: &MultiChannelImage<f64>, input: &MultiChannelImage<f64>) -> f64 {
    let base = energy(input);
    if base == 0.0 {
        1.0
    } else {
        energy(out) / base
    }
}

fn channel_rmse(img: &MultiChannelImage<f64>, solve: SolveArgs) -> Result<Vec<f64>> {
    let opts = options(solve);
    img.channels()
        .iter()
        .map(|ch| {
            Ok(match solve.precision {
                Precision::F32 => roundtrip_check(&ch.cast::<f32>(), &opts)?,
                Precision::F64 => roundtrip_check(ch, &opts)?,
            })
        })
        .collect()
}

pub fn roundtrip(input: &Path, solve: SolveArgs) -> Result<()> {
    let files = collect_inputs(input)?;
    let results: Vec<Vec<f64>> = files
        .par_iter()
        .map(|f| channel_rmse(&load_image(f)?, solve))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for (file, rmses) in files.iter().zip(&results) {
        for (k, rmse) in rmses.iter().enumerate() {
            if input.is_dir() {
                println!("{}: channel {k} rmse={rmse:.6}", file.display());
            } else {
                println!("channel {k} rmse={rmse:.6}");
            }
            worst = worst.max(*rmse);
        }
    }
    if worst > ROUNDTRIP_TOLERANCE {
        return Err(CliError::CheckFailed(format!(
            "round-trip rmse {worst:.6} exceeds {ROUNDTRIP_TOLERANCE}"
        )));
    }
    Ok(())
}

pub fn threshold(input: &Path, fraction: f64, out: &Path, solve: SolveArgs) -> Result<()> {
    let files = collect_inputs(input)?;
    let targets: Vec<_> = if input.is_dir() {
        fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        files.iter().map(|f| out.join(f.file_name().expect("listed files have names"))).collect()
    } else {
        vec![out.to_path_buf()]
    };
    let ratios: Vec<f64> = files
        .par_iter()
        .zip(&targets)
        .map(|(src, dst)| {
            let img = load_image(src)?;
            let edited = run_pipeline(&img, &Edit::Threshold(fraction), solve)?;
            save_image(dst, &edited)?;
            Ok(energy_ratio(&edited, &img))
        })
        .collect::<Result<_>>()?;
    for (dst, ratio) in targets.iter().zip(ratios) {
        println!("{}: gradient energy ratio out/in = {ratio:.4}", dst.display());
    }
    Ok(())
}

pub fn gdm(input: &Path, edges: &Path, alpha: f64, thin: bool, sigma: f64, out: &Path, solve: SolveArgs) -> Result<()> {
    let img = load_image(input)?;
    let edge_map = load_edge_map(edges, img.shape())?;
    let params = MergeParams::new(alpha, thin, sigma)?;
    let edited = run_pipeline(&img, &Edit::Gdm(edge_map, params), solve)?;
    save_image(out, &edited)?;
    println!("gradient energy ratio out/in = {:.4}", energy_ratio(&edited, &img));
    Ok(())
}

fn blend_in<T: Scalar>(
    source: &MultiChannelImage<f64>,
    destination: &MultiChannelImage<f64>,
    mask: &ScalarField<f64>,
    offset: (isize, isize),
    opts: &SolveOptions,
) -> Result<MultiChannelImage<f64>> {
    let job = BlendJob::new(source.cast::<T>(), destination.cast::<T>(), mask.cast::<T>(), offset)?;
    Ok(poisson_blend(&job, opts)?.cast())
}

pub fn blend(source: &Path, destination: &Path, mask: &Path, offset: (isize, isize), out: &Path, solve: SolveArgs) -> Result<()> {
    let (src, dst, m) = (load_image(source)?, load_image(destination)?, load_mask(mask)?);
    let opts = options(solve);
    let blended = match solve.precision {
        Precision::F32 => blend_in::<f32>(&src, &dst, &m, offset, &opts)?,
        Precision::F64 => blend_in::<f64>(&src, &dst, &m, offset, &opts)?,
    };
    save_image(out, &blended)?;
    let inside = m.values().iter().filter(|&&v| v == 1.0).count();
    println!("blended {inside} mask pixels into {}", out.display());
    Ok(())
}

fn emit_csv(records: &[BenchRecord], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
            write_csv(records, file)?;
            println!("wrote {} rows to {}", records.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(records, &mut lock)?;
            lock.flush().map_err(|e| CliError::io("stdout", e))?;
        }
    }
    Ok(())
}

pub fn bench(dir: &Path, mode: BenchMode, out: Option<&Path>, pad: usize) -> Result<()> {
    let files = collect_inputs(dir)?;
    let images: Vec<BenchImage> = files
        .par_iter()
        .map(|f| {
            let id = f.file_stem().map_or_else(|| f.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok(BenchImage {
                id,
                pixels: load_image(f)?.channel_mean(),
            })
        })
        .collect::<Result<_>>()?;
    match mode {
        BenchMode::Rmse => {
            let opts = SolveOptions::default().with_pad(pad);
            let records = perturbation_benchmark(&images, &BENCH_FRACTIONS, &[Method::Gfc, Method::Jacobi(500)], &opts)?;
            // summary goes to stderr so stdout stays valid CSV
            for &f in &BENCH_FRACTIONS {
                let mean = |m: &str| {
                    let v: Vec<f64> = records
                        .iter()
                        .filter(|r| r.threshold_fraction == f && r.method == m)
                        .map(|r| r.rmse)
                        .collect();
                    v.iter().sum::<f64>() / v.len() as f64
                };
                let ordered = records
                    .chunks(2)
                    .filter(|pair| pair[0].threshold_fraction == f)
                    .all(|pair| pair[0].rmse <= pair[1].rmse);
                eprintln!(
                    "fraction {f:.1}: mean rmse gfc {:.4} jacobi500 {:.4}, gfc <= jacobi on every image: {ordered}",
                    mean("gfc"),
                    mean("jacobi500")
                );
            }
            emit_csv(&records, out)
        }
        BenchMode::Timing => {
            let records = timing_scaling(&[1 << 18, 1 << 20, 1 << 22], 11)?;
            eprintln!("{:>10} {:>12} {:>8}", "pixels", "median_s", "ratio");
            let mut pass = true;
            for (i, r) in records.iter().enumerate() {
                let ratio = (i > 0).then(|| r.wall_time / records[i - 1].wall_time);
                pass &= ratio.is_none_or(|x| x <= SCALING_LIMIT);
                let shown = ratio.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"));
                eprintln!("{:>10} {:>12.5} {:>8}", r.pixels, r.wall_time, shown);
            }
            eprintln!("t(4n)/t(n) <= {SCALING_LIMIT}: {}", if pass { "PASS" } else { "FAIL" });
            emit_csv(&records, out)
        }
    }
}
