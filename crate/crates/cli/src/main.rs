//! `gfc`: reconstruct and edit images in the gradient domain.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, Result};

#[derive(Parser, Debug)]
#[command(name = "gfc", version, about = "Green function convolution image reconstruction and editing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchMode {
    Rmse,
    Timing,
}

#[derive(Args, Clone, Copy, Debug)]
pub struct SolveArgs {
    /// Zero padding added on every side before solving
    #[arg(long, default_value_t = 4)]
    pub pad: usize,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    pub precision: Precision,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rebuild each channel from its Laplacian and report the RMSE
    Roundtrip {
        /// Image file or directory of images
        input: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Suppress weak gradients and solve back to an image
    Threshold {
        /// Image file or directory of images
        input: PathBuf,
        /// Fraction of the 8-bit range below which gradients are dropped
        #[arg(long, default_value_t = 0.1)]
        fraction: f64,
        /// Output file, or output directory when the input is a directory
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Merge the gradient with an edge-confidence map
    Gdm {
        input: PathBuf,
        /// Edge map at the image resolution, any range
        edges: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Blur the gradient first, for thin (suppressed) edge maps
        #[arg(long)]
        thin: bool,
        /// Blur radius used with --thin
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Paste a source into a destination without seams
    Blend {
        source: PathBuf,
        destination: PathBuf,
        /// Mask at destination size; bright pixels take the source gradient
        #[arg(long)]
        mask: PathBuf,
        /// Destination row,col of the source's top-left pixel
        #[arg(long, default_value = "0,0", value_parser = parse_offset, allow_hyphen_values = true)]
        offset: (isize, isize),
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Reconstruction error against Jacobi, or solve-time scaling
    Bench {
        /// Directory of images
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = BenchMode::Rmse)]
        mode: BenchMode,
        /// CSV destination; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        pad: usize,
    },
}

fn parse_offset(s: &str) -> std::result::Result<(isize, isize), String> {
    let (r, c) = s.split_once(',').ok_or_else(|| format!("expected row,col but got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<isize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((parse(r)?, parse(c)?))
}

fn unit_range(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be within [0, 1], got {v}")))
    }
}

fn check_pad(pad: usize) -> Result<()> {
    if pad == 0 {
        return Err(CliError::Usage("--pad must be at least 1".into()));
    }
    Ok(())
}

impl Command {
    fn validate(&self) -> Result<()> {
        match self {
            Command::Roundtrip { solve, .. } | Command::Blend { solve, .. } => check_pad(solve.pad),
            Command::Threshold { fraction, solve, .. } => {
                check_pad(solve.pad)?;
                unit_range("fraction", *fraction)
            }
            Command::Gdm { alpha, sigma, solve, .. } => {
                check_pad(solve.pad)?;
                unit_range("alpha", *alpha)?;
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(CliError::Usage(format!("--sigma must be positive, got {sigma}")));
                }
                Ok(())
            }
            Command::Bench { pad, .. } => check_pad(*pad),
        }
    }

    fn run(self) -> Result<()> {
        match self {
            Command::Roundtrip { input, solve } => commands::roundtrip(&input, solve),
            Command::Threshold {
                input,
                fraction,
                out,
                solve,
            } => commands::threshold(&input, fraction, &out, solve),
            Command::Gdm {
                input,
                edges,
                alpha,
                thin,
                sigma,
                out,
                solve,
            } => commands::gdm(&input, &edges, alpha, thin, sigma, &out, solve),
            Command::Blend {
                source,
                destination,
                mask,
                offset,
                out,
                solve,
            } => commands::blend(&source, &destination, &mask, offset, &out, solve),
            Command::Bench { dir, mode, out, pad } => commands::bench(&dir, mode, out.as_deref(), pad),
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("GFC_THREADS") else {
        return Ok(());
    };
    let threads = value
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("GFC_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("GFC_THREADS: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads()
        .and_then(|()| cli.command.validate().map(|()| cli.command))
        .and_then(Command::run);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gfc: {e}");
            e.exit_code()
        }
    }
}
