//! `ulisse build` — build and serialize the index over a dataset file.

use std::path::PathBuf;

use clap::ValueEnum;
use ulisse_core::index::{build_index, save_index, IndexOptions, DEFAULT_LEAF_CAPACITY};
use ulisse_core::series::load_collection;
use ulisse_core::summary::BreakpointMode;
use ulisse_core::{Error, LengthRange, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BreakpointArg {
    Gaussian,
    Empirical,
}

#[derive(clap::Args)]
#[command(about = "Build an index over a dataset")]
pub struct Args {
    /// Input dataset file.
    #[arg(long)]
    pub data: PathBuf,

    /// Minimum supported query length.
    #[arg(long, default_value_t = 160)]
    pub lmin: usize,

    /// Maximum supported query length.
    #[arg(long, default_value_t = 256)]
    pub lmax: usize,

    /// Absolute gamma: extra consecutive offsets merged into each envelope.
    #[arg(long, conflicts_with = "gamma_pct")]
    pub gamma: Option<usize>,

    /// Gamma as a percentage of (lmax - lmin); the default.
    #[arg(long, default_value_t = 100.0)]
    pub gamma_pct: f64,

    /// PAA segment length.
    #[arg(long, default_value_t = 16)]
    pub seg_len: usize,

    /// Index Z-normalized subsequences instead of raw values.
    #[arg(long)]
    pub normalized: bool,

    /// Leaf capacity before a split.
    #[arg(long, default_value_t = DEFAULT_LEAF_CAPACITY)]
    pub leaf_cap: usize,

    /// Breakpoint mode; defaults to gaussian for normalized mode and
    /// empirical quantiles for raw mode.
    #[arg(long)]
    pub breakpoints: Option<BreakpointArg>,

    /// Seed for breakpoint sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output index file.
    #[arg(long)]
    pub out: PathBuf,
}

/// Resolves --gamma / --gamma-pct to an absolute offset count.
pub fn resolve_gamma(gamma: Option<usize>, gamma_pct: f64, range: LengthRange) -> Result<usize> {
    match gamma {
        Some(g) => Ok(g),
        None => {
            if !(0.0..=100.0).contains(&gamma_pct) {
                return Err(Error::Argument(format!(
                    "--gamma-pct must be in [0, 100], got {gamma_pct}"
                )));
            }
            let span = (range.l_max - range.l_min) as f64;
            Ok((gamma_pct / 100.0 * span).round() as usize)
        }
    }
}

pub fn run(a: &Args) -> Result<()> {
    let range = LengthRange::new(a.lmin, a.lmax)?;
    let gamma = resolve_gamma(a.gamma, a.gamma_pct, range)?;
    let c = load_collection(&a.data)?;
    let mut opts = IndexOptions::new(a.seg_len, range, gamma, a.normalized);
    opts.leaf_capacity = a.leaf_cap;
    opts.seed = a.seed;
    opts.breakpoint_mode = a.breakpoints.map(|b| match b {
        BreakpointArg::Gaussian => BreakpointMode::Gaussian,
        BreakpointArg::Empirical => BreakpointMode::Empirical,
    });
    let n_series = c.len();
    let idx = build_index(c, &opts)?;
    save_index(&idx, &a.out)?;
    println!(
        "built index: {} envelopes over {} series (gamma {}, lengths [{}, {}]) -> {}",
        idx.envelope_count(),
        n_series,
        gamma,
        a.lmin,
        a.lmax,
        a.out.display()
    );
    Ok(())
}
