//! `ulisse bench` — sweep query lengths and gamma settings, reporting
//! mean CPU time, pruning power, and abandoning power per cell as CSV.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use ulisse_core::index::{build_index, IndexOptions};
use ulisse_core::query::{knn_exact, Request};
use ulisse_core::series::{generate_random_walk, load_collection};
use ulisse_core::{Error, LengthRange, Result, SeriesCollection};

use crate::common::{
    extract_with_noise, fmt_f64, make_pool, make_spec, MeasureKind, BENCH_HEADER, BENCH_SCHEMA,
};
use crate::cmd_build::resolve_gamma;

#[derive(clap::Args)]
#[command(about = "Sweep query lengths and gamma values, reporting per-cell CSV stats")]
pub struct Args {
    /// Dataset to index; a seeded random walk is generated when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// Series count for the generated dataset.
    #[arg(long, default_value_t = 60)]
    pub n: usize,

    /// Series length for the generated dataset.
    #[arg(long, default_value_t = 256)]
    pub len: usize,

    /// Queries per sweep cell.
    #[arg(long, default_value_t = 10)]
    pub queries: usize,

    /// Noise added to extracted queries.
    #[arg(long, default_value_t = 0.5)]
    pub noise_std: f64,

    #[arg(long, default_value_t = 160)]
    pub lmin: usize,

    #[arg(long, default_value_t = 256)]
    pub lmax: usize,

    #[arg(long, default_value_t = 16)]
    pub seg_len: usize,

    /// Index Z-normalized subsequences.
    #[arg(long)]
    pub normalized: bool,

    /// Neighbors per query.
    #[arg(long, default_value_t = 10)]
    pub k: usize,

    /// Distance measure.
    #[arg(long, value_enum, default_value_t = MeasureKind::Ed)]
    pub measure: MeasureKind,

    /// Sakoe-Chiba band radius as a percentage of the query length.
    #[arg(long, default_value_t = 5.0)]
    pub warp_pct: f64,

    /// Query lengths to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![160, 192, 224, 256])]
    pub lengths: Vec<usize>,

    /// Gamma percentages of (lmax - lmin) to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 20.0, 40.0, 60.0, 80.0, 100.0])]
    pub gamma_pcts: Vec<f64>,

    /// Seed for data generation and query extraction.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Worker threads for query execution (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,

    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &Args) -> Result<()> {
    let range = LengthRange::new(a.lmin, a.lmax)?;
    for &len in &a.lengths {
        if !range.contains(len) {
            return Err(Error::Argument(format!(
                "swept query length {len} outside [{}, {}]",
                a.lmin, a.lmax
            )));
        }
    }
    let data: SeriesCollection = match &a.data {
        Some(p) => load_collection(p)?,
        None => generate_random_walk(a.n, a.len, a.seed)?,
    };

    // One query set per length, shared across all gamma cells.
    let mut query_sets = Vec::with_capacity(a.lengths.len());
    for (i, &len) in a.lengths.iter().enumerate() {
        query_sets.push(extract_with_noise(
            &data,
            a.queries,
            len,
            a.noise_std,
            a.seed.wrapping_add(1000 + i as u64),
        )?);
    }

    let pool = make_pool(a.jobs)?;
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "{BENCH_SCHEMA}")?;
    writeln!(out, "{BENCH_HEADER}")?;

    for &pct in &a.gamma_pcts {
        let gamma = resolve_gamma(None, pct, range)?;
        let mut opts = IndexOptions::new(a.seg_len, range, gamma, a.normalized);
        opts.seed = a.seed;
        let idx = build_index(data.clone(), &opts)?;
        for (qi, &len) in a.lengths.iter().enumerate() {
            let cells: Vec<(f64, f64, f64)> = pool.install(|| {
                query_sets[qi]
                    .series
                    .par_iter()
                    .map(|q| {
                        let spec = make_spec(
                            q.values.clone(),
                            Request::Knn(a.k),
                            a.measure,
                            a.warp_pct,
                            a.normalized,
                        )?;
                        let start = Instant::now();
                        let got = knn_exact(&idx, &spec)?;
                        let secs = start.elapsed().as_secs_f64();
                        Ok((
                            secs,
                            got.stats.pruning_power(),
                            got.stats.abandoning_power(),
                        ))
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            let n = cells.len().max(1) as f64;
            let (t, p, ab) = cells.iter().fold((0.0, 0.0, 0.0), |acc, c| {
                (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2)
            });
            writeln!(
                out,
                "{},{},{},{},{},{}",
                len,
                fmt_f64(pct),
                gamma,
                fmt_f64(t / n),
                fmt_f64(p / n),
                fmt_f64(ab / n)
            )?;
        }
    }
    out.flush()?;
    Ok(())
}
