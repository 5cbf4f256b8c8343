//! `ulisse verify` — run the brute-force oracle beside the index on the
//! same queries and diff the results, then sweep envelope containment and
//! lower-bound soundness. Prints one PASS/FAIL line per check.
//!
//! Test hook: setting `ULISSE_INJECT_BOUND_VIOLATION` to a positive float
//! inflates every checked lower bound by that amount, which must turn the
//! soundness sweep into a FAIL.

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use ulisse_core::bounds::{lb_pal, mindist_ulisse, QuerySummary};
use ulisse_core::distance::{build_dtw_envelope, dtw, euclidean, lb_keogh, WarpingWindow};
use ulisse_core::index::{load_index, UlisseIndex};
use ulisse_core::oracle::{scan_knn, scan_range};
use ulisse_core::query::{knn_approx, knn_exact, range_search, Match, QuerySpec, Request};
use ulisse_core::series::{load_collection, znormalize_values, SeriesCollection};
use ulisse_core::summary::paa;
use ulisse_core::{Error, Result};

use crate::common::{extract_with_noise, make_spec, MeasureKind};

pub const INJECT_ENV: &str = "ULISSE_INJECT_BOUND_VIOLATION";

#[derive(clap::Args)]
#[command(about = "Diff index results against the brute-force oracle and sweep bound soundness")]
pub struct Args {
    /// Index file.
    #[arg(long)]
    pub index: PathBuf,

    /// Dataset the index was built from.
    #[arg(long)]
    pub data: PathBuf,

    /// Query file; defaults to noisy subsequences extracted from the data.
    #[arg(long)]
    pub queries: Option<PathBuf>,

    /// Number of queries to extract when --queries is absent.
    #[arg(long, default_value_t = 18)]
    pub n_queries: usize,

    /// Noise added to extracted queries.
    #[arg(long, default_value_t = 0.5)]
    pub noise_std: f64,

    /// Seed for query extraction and pair sampling.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Neighbors per k-NN diff.
    #[arg(long, default_value_t = 5)]
    pub k: usize,

    /// Distance measure.
    #[arg(long, value_enum, default_value_t = MeasureKind::Ed)]
    pub measure: MeasureKind,

    /// Sakoe-Chiba band radius as a percentage of the query length.
    #[arg(long, default_value_t = 5.0)]
    pub warp_pct: f64,

    /// Randomized (query, envelope) pairs for the bound sweeps.
    #[arg(long, default_value_t = 400)]
    pub pairs: usize,

    /// Worker threads for oracle scans (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

fn injected_slack() -> f64 {
    std::env::var(INJECT_ENV)
        .ok()
        .and_then(|v| v.parse::<f64>().ok())
        .unwrap_or(0.0)
}

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, outcome: std::result::Result<(), String>) {
        match outcome {
            Ok(()) => println!("PASS {name}"),
            Err(reason) => {
                println!("FAIL {name}: {reason}");
                self.failures += 1;
            }
        }
    }
}

fn same_matches(a: &[Match], b: &[Match]) -> std::result::Result<(), String> {
    if a.len() != b.len() {
        return Err(format!("{} vs {} matches", a.len(), b.len()));
    }
    for (x, y) in a.iter().zip(b) {
        if x.r != y.r {
            return Err(format!("ref mismatch: {:?} vs {:?}", x.r, y.r));
        }
        let tol = 1e-9 * x.distance.abs().max(1.0);
        if (x.distance - y.distance).abs() > tol {
            return Err(format!(
                "distance mismatch at {:?}: {} vs {}",
                x.r, x.distance, y.distance
            ));
        }
    }
    Ok(())
}

fn verify_queries(a: &Args, idx: &UlisseIndex) -> Result<SeriesCollection> {
    if let Some(path) = &a.queries {
        return load_collection(path);
    }
    let range = idx.config.range;
    let lengths = [
        range.l_min,
        (range.l_min + range.l_max) / 2,
        range.l_max,
    ];
    let mut series = Vec::new();
    for (i, &len) in lengths.iter().enumerate() {
        let share = a.n_queries / lengths.len()
            + usize::from(i < a.n_queries % lengths.len());
        if share == 0 {
            continue;
        }
        let chunk = extract_with_noise(
            &idx.collection,
            share,
            len,
            a.noise_std,
            a.seed.wrapping_add(i as u64),
        )?;
        series.extend(chunk.series);
    }
    for (i, s) in series.iter_mut().enumerate() {
        s.id = i as u32;
    }
    Ok(SeriesCollection::new(series))
}

/// One query's engine-vs-oracle diff results.
struct QueryDiff {
    knn: std::result::Result<(), String>,
    approx: std::result::Result<(), String>,
    range: std::result::Result<(), String>,
}

fn diff_one(idx: &UlisseIndex, spec: &QuerySpec) -> Result<QueryDiff> {
    let exact = knn_exact(idx, spec)?;
    let oracle = scan_knn(&idx.collection, spec)?;
    let knn = same_matches(&exact.matches, &oracle);

    let approx_out = knn_approx(idx, spec)?;
    let mut approx = Ok(());
    for (i, m) in approx_out.matches.iter().enumerate() {
        if i < exact.matches.len() && m.distance < exact.matches[i].distance - 1e-12 {
            approx = Err(format!(
                "approximate distance {} below exact {} at rank {}",
                m.distance,
                exact.matches[i].distance,
                i + 1
            ));
            break;
        }
    }

    let range = if let Some(nn) = exact.matches.first() {
        let eps = 2.0 * nn.distance;
        let mut rspec = spec.clone();
        rspec.request = Request::Range(eps);
        let got = range_search(idx, &rspec)?;
        let want = scan_range(&idx.collection, &rspec)?;
        same_matches(&got.matches, &want)
    } else {
        Err("no exact matches to derive epsilon from".into())
    };
    Ok(QueryDiff { knn, approx, range })
}

fn first_err(
    diffs: &[QueryDiff],
    pick: impl Fn(&QueryDiff) -> &std::result::Result<(), String>,
) -> std::result::Result<(), String> {
    for (i, d) in diffs.iter().enumerate() {
        if let Err(e) = pick(d) {
            return Err(format!("query {i}: {e}"));
        }
    }
    Ok(())
}

/// Soundness sweep: for sampled (query, envelope) pairs, the envelope
/// lower bounds must never exceed the true distance to any represented
/// same-length subsequence, and PAA containment must hold.
fn sweep_bounds(
    a: &Args,
    idx: &UlisseIndex,
    queries: &SeriesCollection,
    slack: f64,
) -> Result<(std::result::Result<(), String>, std::result::Result<(), String>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x5eed);
    let bp = &idx.config.breakpoints;
    let s = idx.config.paa.segment_len;
    let w = idx.config.paa.word_len;
    let mut bound_err = Ok(());
    let mut contain_err = Ok(());
    let mut done = 0usize;
    'outer: while done < a.pairs {
        let q = &queries.series[rng.random_range(0..queries.len())];
        let e = &idx.envelope_list[rng.random_range(0..idx.envelope_count())];
        let series_len = idx.series_len(e.series_id);
        let qlen = q.len();
        if !e.covers_length(qlen, series_len) {
            continue;
        }
        done += 1;
        let qvals = if idx.config.normalized {
            znormalize_values(&q.values).0
        } else {
            q.values.clone()
        };
        let use_dtw = a.measure == MeasureKind::Dtw;
        let r = WarpingWindow::from_fraction(a.warp_pct / 100.0, qlen)?;
        let qs = if use_dtw {
            QuerySummary::with_dtw(&qvals, s, r)?
        } else {
            QuerySummary::new(&qvals, s)?
        };
        let ed_lb = mindist_ulisse(&qs, e, series_len, bp)? + slack;
        let dtw_lb = if use_dtw {
            Some(lb_pal(&qs, e, series_len, bp)? + slack)
        } else {
            None
        };
        let qenv = use_dtw.then(|| build_dtw_envelope(&qvals, r));
        let d_series = &idx.collection.series[e.series_id as usize];
        for offset in e.candidate_offsets(qlen, series_len) {
            let raw = d_series.subsequence(offset, qlen);
            let owned;
            let cand: &[f64] = if idx.config.normalized {
                owned = znormalize_values(raw).0;
                &owned
            } else {
                raw
            };
            let ed = euclidean(&qvals, cand, None)?.unwrap();
            if ed_lb > ed {
                bound_err = Err(format!(
                    "mindist {} exceeds ED {} (series {}, offset {offset}, len {qlen})",
                    ed_lb, ed, e.series_id
                ));
                break 'outer;
            }
            if let (Some(lb), Some(env)) = (dtw_lb, &qenv) {
                let truth = dtw(&qvals, cand, r, None)?.unwrap();
                if lb > truth {
                    bound_err = Err(format!(
                        "lb_pal {} exceeds DTW {} (series {}, offset {offset}, len {qlen})",
                        lb, truth, e.series_id
                    ));
                    break 'outer;
                }
                let keogh = lb_keogh(env, cand, None)?.unwrap() + slack;
                if keogh > truth {
                    bound_err = Err(format!(
                        "lb_keogh {keogh} exceeds DTW {truth} (series {}, offset {offset})",
                        e.series_id
                    ));
                    break 'outer;
                }
            }
            // Containment: the candidate's PAA prefix must lie inside the
            // envelope on every segment the candidate covers.
            if contain_err.is_ok() {
                let coeffs = paa(cand, s)?;
                let covered = (qlen / s).min(w);
                for (j, &c) in coeffs.0.iter().take(covered).enumerate() {
                    if c < e.lower_paa[j] || c > e.upper_paa[j] {
                        contain_err = Err(format!(
                            "PAA segment {j} = {c} outside [{}, {}] \
                             (series {}, offset {offset}, len {qlen})",
                            e.lower_paa[j], e.upper_paa[j], e.series_id
                        ));
                    }
                }
            }
        }
    }
    if done == 0 {
        bound_err = Err("no admissible (query, envelope) pair sampled".into());
    }
    Ok((bound_err, contain_err))
}

pub fn run(a: &Args) -> Result<()> {
    let mut report = Report { failures: 0 };
    let idx = match load_index(&a.index, &a.data) {
        Ok(idx) => {
            report.check("index-load", Ok(()));
            idx
        }
        Err(e) => {
            report.check("index-load", Err(e.to_string()));
            println!("verify: FAIL");
            return Err(Error::Data("verification failed".into()));
        }
    };
    let queries = verify_queries(a, &idx)?;
    let specs: Vec<QuerySpec> = queries
        .series
        .iter()
        .map(|q| {
            make_spec(
                q.values.clone(),
                Request::Knn(a.k),
                a.measure,
                a.warp_pct,
                idx.config.normalized,
            )
        })
        .collect::<Result<_>>()?;

    let pool = crate::common::make_pool(a.jobs)?;
    let diffs: Vec<QueryDiff> = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| diff_one(&idx, spec))
            .collect::<Result<Vec<_>>>()
    })?;
    report.check("knn-oracle-equivalence", first_err(&diffs, |d| &d.knn));
    report.check("approx-never-below-exact", first_err(&diffs, |d| &d.approx));
    report.check("range-oracle-equivalence", first_err(&diffs, |d| &d.range));

    let slack = injected_slack();
    let (bound_err, contain_err) = sweep_bounds(a, &idx, &queries, slack)?;
    report.check("bound-soundness", bound_err);
    report.check("envelope-containment", contain_err);

    if report.failures == 0 {
        println!("verify: PASS");
        Ok(())
    } else {
        println!("verify: FAIL");
        Err(Error::Data(format!(
            "verification failed ({} checks)",
            report.failures
        )))
    }
}
