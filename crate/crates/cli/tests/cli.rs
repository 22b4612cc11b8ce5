use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gfc_core::synthetic::{gray_image, rgb_image};
use image::{GrayImage, Luma, Rgb, RgbImage};
use tempfile::TempDir;

fn gfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_gray(path: &Path, h: usize, w: usize, f: impl Fn(usize, usize) -> u8) {
    GrayImage::from_fn(w as u32, h as u32, |c, r| Luma([f(r as usize, c as usize)]))
        .save(path)
        .unwrap();
}

fn photo(dir: &TempDir, name: &str, seed: u64) -> PathBuf {
    let path = dir.path().join(name);
    let img = gray_image(64, 72, seed);
    write_gray(&path, 64, 72, |r, c| img.get(r, c) as u8);
    path
}

fn photo_rgb(dir: &TempDir, name: &str, seed: u64) -> PathBuf {
    let path = dir.path().join(name);
    let img = rgb_image(48, 40, seed);
    let ch = img.channels();
    RgbImage::from_fn(40, 48, |c, r| {
        let (r, c) = (r as usize, c as usize);
        Rgb([ch[0].get(r, c) as u8, ch[1].get(r, c) as u8, ch[2].get(r, c) as u8])
    })
    .save(&path)
    .unwrap();
    path
}

fn pixels(path: &Path) -> Vec<u8> {
    image::open(path).unwrap().into_bytes()
}

fn max_diff(a: &[u8], b: &[u8]) -> u8 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).max().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn roundtrip_reports_each_channel() {
    let dir = TempDir::new().unwrap();
    let gray = photo(&dir, "g.png", 1);
    let out = gfc(&["roundtrip", p(&gray)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("channel 0 rmse="));
    let rgb = photo_rgb(&dir, "c.ppm", 2);
    let out = gfc(&["roundtrip", p(&rgb), "--precision", "f32"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn roundtrip_of_flat_image_is_exact() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("flat.pgm");
    write_gray(&path, 20, 30, |_, _| 117);
    let out = gfc(&["roundtrip", p(&path)]);
    assert!(out.status.success());
    let rmse: f64 = stdout(&out).trim().rsplit('=').next().unwrap().parse().unwrap();
    assert!(rmse <= 1e-6);
}

#[test]
fn roundtrip_over_directory() {
    let dir = TempDir::new().unwrap();
    photo(&dir, "a.png", 3);
    photo(&dir, "b.png", 4);
    let out = gfc(&["roundtrip", p(dir.path())]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().next().unwrap().contains("a.png"));
}

#[test]
fn missing_file_exits_2_and_names_path() {
    let out = gfc(&["roundtrip", "/definitely/missing.png"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/definitely/missing.png"));
}

#[test]
fn unreadable_file_exits_2() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("junk.png");
    std::fs::write(&path, b"not an image").unwrap();
    assert_eq!(gfc(&["roundtrip", p(&path)]).status.code(), Some(2));
}

#[test]
fn threshold_zero_is_near_identity() {
    let dir = TempDir::new().unwrap();
    let input = photo(&dir, "in.png", 5);
    let output = dir.path().join("out.png");
    let out = gfc(&["threshold", p(&input), "--fraction", "0", "--out", p(&output)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(max_diff(&pixels(&input), &pixels(&output)) <= 1);
}

#[test]
fn threshold_reduces_gradient_energy() {
    let dir = TempDir::new().unwrap();
    let input = photo(&dir, "in.png", 6);
    let output = dir.path().join("out.pgm");
    let out = gfc(&["threshold", p(&input), "--fraction", "0.1", "--out", p(&output)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(output.exists());
    let ratio: f64 = stdout(&out).trim().rsplit("= ").next().unwrap().parse().unwrap();
    assert!(ratio < 1.0, "{ratio}");
}

#[test]
fn threshold_rejects_out_of_range_fraction() {
    let dir = TempDir::new().unwrap();
    let input = photo(&dir, "in.png", 7);
    let out = gfc(&["threshold", p(&input), "--fraction", "1.2", "--out", p(&dir.path().join("o.png"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn threshold_is_deterministic_and_writes_raw() {
    let dir = TempDir::new().unwrap();
    let input = photo_rgb(&dir, "in.png", 8);
    let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
    for o in [&a, &b] {
        assert!(gfc(&["threshold", p(&input), "--out", p(o)]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let raw = dir.path().join("r.gfcf");
    assert!(gfc(&["threshold", p(&input), "--out", p(&raw)]).status.success());
    let bytes = std::fs::read(&raw).unwrap();
    assert_eq!(&bytes[..4], b"GFCF");
    assert_eq!(bytes.len(), 16 + 4 * 48 * 40 * 3);
}

#[test]
fn threshold_over_directory_writes_each_file() {
    let dir = TempDir::new().unwrap();
    let inputs = TempDir::new().unwrap();
    photo(&inputs, "x.png", 9);
    photo(&inputs, "y.png", 10);
    let target = dir.path().join("out");
    let out = gfc(&["threshold", p(inputs.path()), "--out", p(&target)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(target.join("x.png").exists() && target.join("y.png").exists());
}

#[test]
fn gdm_alpha_zero_is_near_identity_and_sizes_must_match() {
    let dir = TempDir::new().unwrap();
    let input = photo(&dir, "in.png", 11);
    let edges = photo(&dir, "edges.png", 12);
    let output = dir.path().join("out.png");
    let out = gfc(&["gdm", p(&input), p(&edges), "--alpha", "0", "--out", p(&output)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(max_diff(&pixels(&input), &pixels(&output)) <= 1);

    let out = gfc(&["gdm", p(&input), p(&edges), "--alpha", "0.5", "--thin", "--sigma", "1.5", "--out", p(&output)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("gradient energy ratio"));

    let small = dir.path().join("small.png");
    write_gray(&small, 10, 10, |r, c| (r * c) as u8);
    let out = gfc(&["gdm", p(&input), p(&small), "--out", p(&output)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn blend_with_empty_mask_returns_destination() {
    let dir = TempDir::new().unwrap();
    let dest = photo(&dir, "dest.png", 13);
    let src = photo(&dir, "src.png", 14);
    let mask = dir.path().join("mask.png");
    write_gray(&mask, 64, 72, |_, _| 0);
    let output = dir.path().join("out.png");
    let out = gfc(&["blend", p(&src), p(&dest), "--mask", p(&mask), "--out", p(&output)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(max_diff(&pixels(&dest), &pixels(&output)) <= 1);
}

#[test]
fn blend_of_constants_has_no_seam() {
    let dir = TempDir::new().unwrap();
    let (src, dest, mask) = (dir.path().join("s.png"), dir.path().join("d.png"), dir.path().join("m.png"));
    write_gray(&src, 16, 16, |_, _| 100);
    write_gray(&dest, 40, 40, |_, _| 50);
    write_gray(&mask, 40, 40, |r, c| if (14..26).contains(&r) && (14..26).contains(&c) { 255 } else { 0 });
    let output = dir.path().join("out.png");
    let out = gfc(&["blend", p(&src), p(&dest), "--mask", p(&mask), "--offset", "12,12", "--out", p(&output)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let img = image::open(&output).unwrap().to_luma8();
    let mut step = 0u8;
    for r in 0..40 {
        for c in 0..39 {
            step = step.max(img.get_pixel(c, r)[0].abs_diff(img.get_pixel(c + 1, r)[0]));
            step = step.max(img.get_pixel(r, c)[0].abs_diff(img.get_pixel(r, c + 1)[0]));
        }
    }
    assert!(step <= 1, "seam step {step}");
}

#[test]
fn blend_coverage_violation_exits_2() {
    let dir = TempDir::new().unwrap();
    let (src, dest, mask) = (dir.path().join("s.png"), dir.path().join("d.png"), dir.path().join("m.png"));
    write_gray(&src, 4, 4, |_, _| 100);
    write_gray(&dest, 20, 20, |_, _| 50);
    write_gray(&mask, 20, 20, |r, _| if r == 10 { 255 } else { 0 });
    let out = gfc(&["blend", p(&src), p(&dest), "--mask", p(&mask), "--offset", "-1,3", "--out", p(&dir.path().join("o.png"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cover"));
}

#[test]
fn bench_rmse_writes_all_rows() {
    let dir = TempDir::new().unwrap();
    let images = TempDir::new().unwrap();
    for k in 0..5 {
        photo(&images, &format!("i{k}.png"), 20 + k);
    }
    let csv_path = dir.path().join("bench.csv");
    let out = gfc(&["bench", p(images.path()), "--out", p(&csv_path)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method,image_id,threshold_fraction,rmse,wall_time_s,pixels"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5 * 3 * 2);
    for pair in rows.chunks(2) {
        assert_eq!((pair[0][0], pair[1][0]), ("gfc", "jacobi500"));
        let (g, j): (f64, f64) = (pair[0][3].parse().unwrap(), pair[1][3].parse().unwrap());
        assert!(g <= j);
    }
}

#[test]
fn bench_timing_prints_ratio_table() {
    let images = TempDir::new().unwrap();
    photo(&images, "a.png", 30);
    let out = gfc(&["bench", p(images.path()), "--mode", "timing"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 4);
    assert!(stderr(&out).contains("t(4n)/t(n) <= 5.5"));
}

#[test]
fn bench_on_empty_directory_exits_2() {
    let images = TempDir::new().unwrap();
    assert_eq!(gfc(&["bench", p(images.path())]).status.code(), Some(2));
}

#[test]
fn thread_cap_is_validated() {
    let dir = TempDir::new().unwrap();
    let input = photo(&dir, "in.png", 31);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_gfc"))
            .args(["roundtrip", p(&input)])
            .env("GFC_THREADS", threads)
            .output()
            .unwrap()
    };
    assert!(run("2").status.success());
    assert_eq!(run("0").status.code(), Some(2));
    assert_eq!(run("many").status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(gfc(&[]).status.code(), Some(2));
    assert_eq!(gfc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(gfc(&["roundtrip", "x.png", "--precision", "f16"]).status.code(), Some(2));
}
