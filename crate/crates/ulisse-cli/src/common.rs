//! Shared CLI plumbing: CSV schemas, query-spec construction, seeded
//! subsequence extraction, and rayon pool setup.

use clap::ValueEnum;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use ulisse_core::distance::WarpingWindow;
use ulisse_core::query::{Measure, QuerySpec, Request};
use ulisse_core::{DataSeries, Error, Result, SeriesCollection};

/// Results table: one row per returned match.
pub const RESULTS_SCHEMA: &str = "# schema ulisse.results.v1";
pub const RESULTS_HEADER: &str = "query_id,rank,series_id,offset,length,distance";

/// Per-query runtime statistics.
pub const STATS_SCHEMA: &str = "# schema ulisse.query-stats.v1";
pub const STATS_HEADER: &str =
    "query_id,pruning_power,abandoning_power,leaves_visited,points_fetched,wall_time_s";

/// Benchmark sweep: one row per (query length, gamma) cell.
pub const BENCH_SCHEMA: &str = "# schema ulisse.bench.v1";
pub const BENCH_HEADER: &str =
    "query_len,gamma_pct,gamma,mean_time_s,mean_pruning_power,mean_abandoning_power";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    Ed,
    Dtw,
}

/// Builds the distance measure for a query of `len` points;
/// `warp_pct` is the Sakoe-Chiba band radius as a percentage of `len`.
pub fn make_measure(kind: MeasureKind, warp_pct: f64, len: usize) -> Result<Measure> {
    match kind {
        MeasureKind::Ed => Ok(Measure::Euclidean),
        MeasureKind::Dtw => Ok(Measure::Dtw(WarpingWindow::from_fraction(
            warp_pct / 100.0,
            len,
        )?)),
    }
}

pub fn make_spec(
    values: Vec<f64>,
    request: Request,
    kind: MeasureKind,
    warp_pct: f64,
    normalized: bool,
) -> Result<QuerySpec> {
    let measure = make_measure(kind, warp_pct, values.len())?;
    Ok(QuerySpec {
        values,
        request,
        measure,
        normalized,
    })
}

/// Extracts `n` subsequences of length `len` from seeded random positions
/// of `source`, each perturbed by i.i.d. Gaussian noise of the given
/// standard deviation. Returned ids are 0..n.
pub fn extract_with_noise(
    source: &SeriesCollection,
    n: usize,
    len: usize,
    noise_std: f64,
    seed: u64,
) -> Result<SeriesCollection> {
    if !noise_std.is_finite() || noise_std < 0.0 {
        return Err(Error::Argument(format!(
            "noise standard deviation must be finite and >= 0, got {noise_std}"
        )));
    }
    let eligible: Vec<&DataSeries> =
        source.series.iter().filter(|d| d.len() >= len).collect();
    if eligible.is_empty() {
        return Err(Error::Argument(format!(
            "no source series is at least {len} points long"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_std)
        .map_err(|e| Error::Argument(format!("bad noise distribution: {e}")))?;
    let mut out = Vec::with_capacity(n);
    for id in 0..n {
        let d = eligible[rng.random_range(0..eligible.len())];
        let offset = rng.random_range(1..=(d.len() - len + 1));
        let mut values = d.subsequence(offset, len).to_vec();
        if noise_std > 0.0 {
            for v in &mut values {
                // Quantize like the generator so datasets survive f32
                // round-tripping unchanged.
                *v = (*v + normal.sample(&mut rng)) as f32 as f64;
            }
        }
        out.push(DataSeries::new(id as u32, values));
    }
    Ok(SeriesCollection::new(out))
}

/// Builds a rayon pool with `jobs` threads (0 = rayon default).
pub fn make_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Argument(format!("cannot build thread pool: {e}")))
}

/// Shortest round-trip float formatting shared by all CSV emitters.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
