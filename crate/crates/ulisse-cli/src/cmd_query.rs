//! `ulisse query` — run k-NN or range queries from a query file against a
//! serialized index and emit result and statistics CSVs.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use ulisse_core::index::load_index;
use ulisse_core::query::{knn_approx, knn_exact, range_search, Match, QueryStats, Request};
use ulisse_core::series::load_collection;
use ulisse_core::{Error, Result};

use crate::common::{
    fmt_f64, make_spec, MeasureKind, RESULTS_HEADER, RESULTS_SCHEMA, STATS_HEADER, STATS_SCHEMA,
};

#[derive(clap::Args)]
#[command(about = "Run k-NN or range queries against an index")]
pub struct Args {
    /// Index file.
    #[arg(long)]
    pub index: PathBuf,

    /// Dataset the index was built from.
    #[arg(long)]
    pub data: PathBuf,

    /// Query file in dataset format; each series is one query.
    #[arg(long)]
    pub queries: PathBuf,

    /// Number of nearest neighbors.
    #[arg(long, conflicts_with = "epsilon")]
    pub k: Option<usize>,

    /// Range-query radius.
    #[arg(long)]
    pub epsilon: Option<f64>,

    /// Distance measure.
    #[arg(long, value_enum, default_value_t = MeasureKind::Ed)]
    pub measure: MeasureKind,

    /// Sakoe-Chiba band radius as a percentage of the query length.
    #[arg(long, default_value_t = 5.0)]
    pub warp_pct: f64,

    /// Stop after the approximate search phase (k-NN only).
    #[arg(long)]
    pub approx_only: bool,

    /// Write per-query statistics CSV here.
    #[arg(long)]
    pub stats_out: Option<PathBuf>,

    /// Write the result table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_results(
    w: &mut dyn Write,
    query_id: u32,
    matches: &[Match],
) -> std::io::Result<()> {
    for (rank, m) in matches.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            query_id,
            rank + 1,
            m.r.series_id,
            m.r.offset,
            m.r.length,
            fmt_f64(m.distance)
        )?;
    }
    Ok(())
}

fn write_stats_row(
    w: &mut dyn Write,
    query_id: u32,
    stats: &QueryStats,
    wall_s: f64,
) -> std::io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{}",
        query_id,
        fmt_f64(stats.pruning_power()),
        fmt_f64(stats.abandoning_power()),
        stats.leaves_visited,
        stats.points_fetched,
        fmt_f64(wall_s)
    )
}

pub fn run(a: &Args) -> Result<()> {
    let request = match (a.k, a.epsilon) {
        (Some(k), None) => Request::Knn(k),
        (None, Some(e)) => Request::Range(e),
        (None, None) => {
            return Err(Error::Argument("one of --k or --epsilon is required".into()))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --k with --epsilon"),
    };
    if a.approx_only && matches!(request, Request::Range(_)) {
        return Err(Error::Argument(
            "--approx-only applies to k-NN queries, not --epsilon".into(),
        ));
    }
    let idx = load_index(&a.index, &a.data)?;
    let queries = load_collection(&a.queries)?;

    let mut results: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(results, "{RESULTS_SCHEMA}")?;
    writeln!(results, "{RESULTS_HEADER}")?;
    let mut stats_out: Option<Box<dyn Write>> = match &a.stats_out {
        Some(p) => {
            let mut w = std::io::BufWriter::new(std::fs::File::create(p)?);
            writeln!(w, "{STATS_SCHEMA}")?;
            writeln!(w, "{STATS_HEADER}")?;
            Some(Box::new(w))
        }
        None => None,
    };

    for q in &queries.series {
        let spec = make_spec(
            q.values.clone(),
            request,
            a.measure,
            a.warp_pct,
            idx.config.normalized,
        )?;
        let start = Instant::now();
        let (matches, stats) = if a.approx_only {
            let out = knn_approx(&idx, &spec)?;
            (out.matches, out.stats)
        } else {
            match request {
                Request::Knn(_) => {
                    let out = knn_exact(&idx, &spec)?;
                    (out.matches, out.stats)
                }
                Request::Range(_) => {
                    let out = range_search(&idx, &spec)?;
                    (out.matches, out.stats)
                }
            }
        };
        let wall_s = start.elapsed().as_secs_f64();
        write_results(&mut results, q.id, &matches)?;
        if let Some(w) = stats_out.as_mut() {
            write_stats_row(w, q.id, &stats, wall_s)?;
        }
    }
    results.flush()?;
    if let Some(mut w) = stats_out {
        w.flush()?;
    }
    Ok(())
}
