//! Acceptance suite. Runs every criterion in sequence (timings stay
//! uncontended) and prints one PASS/FAIL line each.

use std::process::ExitCode;
use std::time::Instant;

use gfc_core::bench::{batch_timing, perturbation_benchmark, timing_scaling, BenchImage};
use gfc_core::diffops::{gaussian_blur, gradient_periodic};
use gfc_core::editing::{gdie_pipeline, Edit};
use gfc_core::oracle::{dense_poisson_solve, field_rmse, orthogonality_residual};
use gfc_core::solver::{roundtrip_check, sobel_reconstruct, solve_gradient, solve_laplacian, SOBEL_RELATIVE_EPSILON};
use gfc_core::synthetic::{edge_map, gray_image, rgb_image};
use gfc_core::{stats, Anchor, MergeParams, Method, MultiChannelImage, Scalar, ScalarField, SolveOptions, SolvePath, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
    /// False when the host does not meet the criterion's stated precondition;
    /// the result is still reported but does not fail the run.
    enforced: bool,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome {
        pass,
        detail,
        enforced: true,
    }
}

const SIZES: [(usize, usize); 5] = [(64, 64), (80, 96), (128, 128), (96, 72), (150, 110)];

/// Twenty photo-like test images, alternating grayscale and RGB.
fn test_images() -> Vec<MultiChannelImage> {
    (0..20)
        .map(|k| {
            let (h, w) = SIZES[k % SIZES.len()];
            if k % 2 == 0 {
                MultiChannelImage::new(vec![gray_image(h, w, 100 + k as u64)]).unwrap()
            } else {
                rgb_image(h, w, 100 + k as u64)
            }
        })
        .collect()
}

fn random_field(rng: &mut ChaCha8Rng, h: usize, w: usize, amp: f64) -> ScalarField {
    ScalarField::from_fn(h, w, |_, _| rng.gen_range(-amp..amp))
}

fn random_vector(rng: &mut ChaCha8Rng, h: usize, w: usize, amp: f64) -> VectorField {
    VectorField::new(random_field(rng, h, w, amp), random_field(rng, h, w, amp)).unwrap()
}

fn round_trip() -> Outcome {
    let opts = SolveOptions::default();
    let mut images = test_images();
    images.push(rgb_image(1024, 768, 7));
    let mut worst: f64 = 0.0;
    let mut channel_mp = 0.0;
    let start = Instant::now();
    for img in &images {
        for ch in img.channels() {
            worst = worst.max(roundtrip_check(ch, &opts).unwrap());
            channel_mp += ch.len() as f64 / 1e6;
        }
    }
    let per_mp = start.elapsed().as_secs_f64() / channel_mp;
    outcome(
        worst <= 0.05 && per_mp < 1.0,
        format!("{} images, worst channel rmse {worst:.3e}, {per_mp:.3} s/MP/channel", images.len()),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = SolveOptions::default().with_anchor(Anchor::ZeroMean);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [8, 16] {
        for _ in 0..100 {
            let l = random_field(&mut rng, n, n, 1.0);
            let m = l.mean();
            let l = l.add_scalar(-m);
            let (x, _) = solve_laplacian(&l, &opts).unwrap();
            worst = worst.max(x.max_abs_diff(&dense_poisson_solve(&l).unwrap()).unwrap());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && secs < 10.0,
        format!("200 inputs, max abs diff {worst:.3e}, {secs:.2} s"),
    )
}

fn orthogonality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = SolveOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let ep = random_vector(&mut rng, 32, 32, 20.0);
        let (ic, _) = solve_gradient(&ep, &opts).unwrap();
        for _ in 0..50 {
            let u = gaussian_blur(&random_field(&mut rng, 32, 32, 1.0), 2.0).unwrap();
            worst = worst.max(orthogonality_residual(&ep, &ic, &u).unwrap().abs());
        }
    }
    outcome(worst <= 1e-6, format!("50 x 50 pairs on 32x32 torus, max |residual| {worst:.3e}"))
}

fn minimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let opts = SolveOptions::default();
    let mut violations = 0;
    let mut smallest_gap = f64::INFINITY;
    for _ in 0..10 {
        let ep = random_vector(&mut rng, 32, 32, 20.0);
        let (ic, _) = solve_gradient(&ep, &opts).unwrap();
        let best = field_rmse(&gradient_periodic(&ic), &ep).unwrap();
        for _ in 0..100 {
            let n = random_field(&mut rng, 32, 32, 1.0);
            for eta in [1e-3, 1e-1, 1.0] {
                let moved = ic.zip_map(&n, |a, b| a + eta * b).unwrap();
                let r = field_rmse(&gradient_periodic(&moved), &ep).unwrap();
                smallest_gap = smallest_gap.min(r - best);
                if r <= best {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("3000 perturbations, {violations} violations, smallest rmse increase {smallest_gap:.3e}"),
    )
}

fn fig3_ordering() -> Outcome {
    let images: Vec<_> = test_images()
        .into_iter()
        .enumerate()
        .map(|(k, img)| BenchImage {
            id: format!("img{k:02}"),
            pixels: img.channel_mean(),
        })
        .collect();
    let fractions = [0.1, 0.3, 0.5];
    let records = perturbation_benchmark(&images, &fractions, &[Method::Gfc, Method::Jacobi(500)], &SolveOptions::default()).unwrap();
    let mut pass = true;
    let mut summary = Vec::new();
    for &f in &fractions {
        let at = |m: &str| -> Vec<f64> {
            records
                .iter()
                .filter(|r| r.threshold_fraction == f && r.method == m)
                .map(|r| r.rmse)
                .collect()
        };
        let (gfc, jac) = (at("gfc"), at("jacobi500"));
        let per_image = gfc.iter().zip(&jac).all(|(g, j)| g <= j);
        let (mg, mj) = (gfc.iter().sum::<f64>() / 20.0, jac.iter().sum::<f64>() / 20.0);
        pass &= per_image && mg < mj;
        summary.push(format!("{:.0}%: gfc {mg:.3} vs jacobi500 {mj:.3}", f * 100.0));
    }
    outcome(pass, format!("20 images, mean rmse {}", summary.join(", ")))
}

fn scaling() -> Outcome {
    let records = timing_scaling(&[1 << 18, 1 << 20, 1 << 22], 11).unwrap();
    let ratios: Vec<f64> = records.windows(2).map(|p| p[1].wall_time / p[0].wall_time).collect();
    let times: Vec<String> = records.iter().map(|r| format!("{}={:.3}s", r.image_id, r.wall_time)).collect();
    outcome(
        ratios.iter().all(|&r| r <= 5.5),
        format!("median times {}, ratios {:.2?}", times.join(" "), ratios),
    )
}

fn parallel_batch() -> Outcome {
    let t = batch_timing(8, 512, 512).unwrap();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut o = outcome(
        t.ratio() < 0.5,
        format!(
            "8 solves at 512x512: serial {:.3}s, parallel {:.3}s (ratio {:.2}) on {} threads",
            t.serial,
            t.parallel,
            t.ratio(),
            t.threads
        ),
    );
    if cores < 2 {
        o.enforced = false;
        o.detail.push_str("; host has 1 core, multi-core precondition unmet");
    }
    o
}

fn color_contract() -> Outcome {
    let opts = SolveOptions::default();
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..20 {
        let (h, w) = (rng.gen_range(64..120), rng.gen_range(64..120));
        let img = if k % 2 == 0 {
            MultiChannelImage::new(vec![gray_image(h, w, 700 + k)]).unwrap()
        } else {
            rgb_image(h, w, 700 + k)
        };
        let edges = edge_map(&img.channel_mean(), 1.5).unwrap();
        let out = gdie_pipeline(&img, &Edit::Gdm(edges, MergeParams::new(0.5, false, 1.0).unwrap()), &opts).unwrap();
        for (a, b) in out.unclamped.channels().iter().zip(img.channels()) {
            let (sa, sb) = (stats(a), stats(b));
            worst = worst.max(((sa.mean - sb.mean) / sb.mean).abs());
            worst = worst.max(((sa.std - sb.std) / sb.std).abs());
        }
    }
    outcome(worst <= 1e-4, format!("20 images, worst relative stats error {worst:.3e}"))
}

fn green_identity() -> Outcome {
    // sparse circular convolution with the 5-point stencil embedded at the origin
    let taps = [(0, 1, 1.0), (1, 0, 1.0), (1, 1, -4.0), (1, 2, 1.0), (2, 1, 1.0)];
    let mut worst: f64 = 0.0;
    for (h, w) in [(8, 8), (64, 64), (257, 129)] {
        let green = <f64 as Scalar>::spectrum_cache().green(h, w).unwrap();
        let (g, _) = green.real_domain();
        let offset = 1.0 / (h * w) as f64;
        for r in 0..h {
            for c in 0..w {
                let conv: f64 = taps
                    .iter()
                    .map(|&(dr, dc, k)| k * g[((r + h - dr) % h, (c + w - dc) % w)])
                    .sum();
                let delta = if (r, c) == (1, 1) { 1.0 } else { 0.0 };
                worst = worst.max((conv - (delta - offset)).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("8x8, 64x64, 257x129: max deviation {worst:.3e}"))
}

fn path_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mono = SolveOptions::default();
    let dip = mono.with_path(SolvePath::Dipole);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (h, w) = (rng.gen_range(8..48), rng.gen_range(8..48));
        let e = random_vector(&mut rng, h, w, 10.0);
        let (a, _) = solve_gradient(&e, &mono).unwrap();
        let (b, _) = solve_gradient(&e, &dip).unwrap();
        worst = worst.max(a.max_abs_diff(&b).unwrap());
    }
    outcome(worst <= 1e-9, format!("50 fields, max abs diff {worst:.3e}"))
}

fn sobel_caveat() -> Outcome {
    let opts = SolveOptions::default();
    let mut failures = 0;
    let mut closest = f64::INFINITY;
    for img in test_images() {
        let gray = img.channel_mean();
        let exact = roundtrip_check(&gray, &opts).unwrap();
        let (blurred, _) = sobel_reconstruct(&gray, &opts, SOBEL_RELATIVE_EPSILON).unwrap();
        let lossy = blurred.rmse(&gray).unwrap();
        closest = closest.min(lossy / exact.max(f64::MIN_POSITIVE));
        if lossy <= exact {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("20 images, {failures} failures, smallest sobel/exact rmse ratio {closest:.3e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 round trip", round_trip),
        ("2 dense oracle equivalence", oracle_equivalence),
        ("3 orthogonality", orthogonality),
        ("4 minimality", minimality),
        ("5 gfc vs jacobi-500 ordering", fig3_ordering),
        ("6a n log n scaling", scaling),
        ("6b parallel batch", parallel_batch),
        ("7 color statistics contract", color_contract),
        ("8 green identity", green_identity),
        ("9 monopole/dipole equivalence", path_equivalence),
        ("10 sobel reconstruction is lossy", sobel_caveat),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let status = match (o.pass, o.enforced) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (not enforced)",
        };
        println!(
            "criterion {name}: {status} [{:.1}s] {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass && o.enforced {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all enforced criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
