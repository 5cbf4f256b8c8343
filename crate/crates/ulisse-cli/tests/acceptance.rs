//! Acceptance suite: one test per criterion, each printing a single
//! `ACCEPTANCE <n> <name>: PASS|FAIL` line (visible with --nocapture).
//!
//! The heavy criteria share one seeded fixture: a 1000 x 256 random-walk
//! collection, 100 noisy extracted queries per length {160, 192, 224, 256},
//! and raw + normalized indexes at the default gamma.

use std::panic::AssertUnwindSafe;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use tempfile::TempDir;
use ulisse_core::bounds::{lb_pal, mindist_ulisse, QuerySummary};
use ulisse_core::distance::{
    build_dtw_envelope, dtw, euclidean, lb_keogh, WarpingWindow,
};
use ulisse_core::bounds::lb_keogh_paa_isax;
use ulisse_core::index::{build_index, save_index, IndexOptions, UlisseIndex};
use ulisse_core::oracle::{scan_knn, scan_knn_plain, scan_range};
use ulisse_core::query::{
    knn_approx, knn_exact, range_search, Match, Measure, QuerySpec, Request,
};
use ulisse_core::series::{generate_random_walk, znormalize_values};
use ulisse_core::summary::{
    build_envelope_norm, build_envelope_raw, paa, to_isax, BreakpointMode, Breakpoints,
    PaaConfig,
};
use ulisse_core::{LengthRange, SeriesCollection};

const N_SERIES: usize = 1000;
const SERIES_LEN: usize = 256;
const L_MIN: usize = 160;
const L_MAX: usize = 256;
const SEG: usize = 16;
const QUERY_LENS: [usize; 4] = [160, 192, 224, 256];
const QUERIES_PER_LEN: usize = 100;
const DATA_SEED: u64 = 1;

struct Fixture {
    data: SeriesCollection,
    /// One query set per entry of QUERY_LENS.
    queries: Vec<Vec<Vec<f64>>>,
    idx_raw: UlisseIndex,
    idx_norm: UlisseIndex,
}

fn extract_queries(
    data: &SeriesCollection,
    n: usize,
    len: usize,
    noise_std: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_std).unwrap();
    (0..n)
        .map(|_| {
            let d = &data.series[rng.random_range(0..data.len())];
            let offset = rng.random_range(1..=(d.len() - len + 1));
            d.subsequence(offset, len)
                .iter()
                .map(|v| (*v + normal.sample(&mut rng)) as f32 as f64)
                .collect()
        })
        .collect()
}

fn build(data: &SeriesCollection, gamma: usize, normalized: bool) -> UlisseIndex {
    let range = LengthRange::new(L_MIN, L_MAX).unwrap();
    let opts = IndexOptions::new(SEG, range, gamma, normalized);
    build_index(data.clone(), &opts).unwrap()
}

fn fixture() -> &'static Fixture {
    static FX: OnceLock<Fixture> = OnceLock::new();
    FX.get_or_init(|| {
        let data = generate_random_walk(N_SERIES, SERIES_LEN, DATA_SEED).unwrap();
        let queries = QUERY_LENS
            .iter()
            .enumerate()
            .map(|(i, &len)| {
                extract_queries(&data, QUERIES_PER_LEN, len, 0.5, 100 + i as u64)
            })
            .collect();
        let idx_raw = build(&data, L_MAX - L_MIN, false);
        let idx_norm = build(&data, L_MAX - L_MIN, true);
        Fixture {
            data,
            queries,
            idx_raw,
            idx_norm,
        }
    })
}

/// Runs a criterion body and prints its PASS/FAIL line.
fn criterion(n: u32, name: &str, body: impl FnOnce()) {
    let outcome = std::panic::catch_unwind(AssertUnwindSafe(body));
    match outcome {
        Ok(()) => println!("ACCEPTANCE {n} {name}: PASS"),
        Err(e) => {
            println!("ACCEPTANCE {n} {name}: FAIL");
            std::panic::resume_unwind(e);
        }
    }
}

fn spec(values: Vec<f64>, request: Request, measure: Measure, normalized: bool) -> QuerySpec {
    QuerySpec {
        values,
        request,
        measure,
        normalized,
    }
}

fn assert_same(got: &[Match], want: &[Match], what: &str) {
    assert_eq!(got.len(), want.len(), "{what}: match count");
    for (g, w) in got.iter().zip(want) {
        assert_eq!(g.r, w.r, "{what}: subsequence ref");
        let tol = 1e-4 * w.distance.abs().max(1e-12);
        assert!(
            (g.distance - w.distance).abs() <= tol,
            "{what}: distance {} vs {}",
            g.distance,
            w.distance
        );
    }
}

/// Every (measure, normalization) cell of the oracle-equivalence suite.
fn combo_cells(len: usize) -> Vec<(Measure, bool)> {
    let mut cells = vec![(Measure::Euclidean, false), (Measure::Euclidean, true)];
    for frac in [0.05, 0.10] {
        let r = WarpingWindow::from_fraction(frac, len).unwrap();
        cells.push((Measure::Dtw(r), false));
        cells.push((Measure::Dtw(r), true));
    }
    cells
}

#[test]
fn criterion_01_oracle_equivalence_knn() {
    criterion(1, "oracle equivalence (exact k-NN)", || {
        let fx = fixture();
        let jobs: Vec<(usize, usize)> = (0..QUERY_LENS.len())
            .flat_map(|li| (0..QUERIES_PER_LEN).map(move |qi| (li, qi)))
            .collect();
        jobs.par_iter().for_each(|&(li, qi)| {
            let q = &fx.queries[li][qi];
            for (measure, normalized) in combo_cells(q.len()) {
                let idx = if normalized { &fx.idx_norm } else { &fx.idx_raw };
                let s10 = spec(q.clone(), Request::Knn(10), measure, normalized);
                let oracle = scan_knn(&fx.data, &s10).unwrap();
                for k in [1usize, 5, 10] {
                    let sk = spec(q.clone(), Request::Knn(k), measure, normalized);
                    let got = knn_exact(idx, &sk).unwrap();
                    assert_same(
                        &got.matches,
                        &oracle[..k.min(oracle.len())],
                        &format!("len {} q {} k {k} norm {normalized}", q.len(), qi),
                    );
                }
            }
        });
    });
}

#[test]
fn criterion_02_oracle_equivalence_range() {
    criterion(2, "oracle equivalence (epsilon-range)", || {
        let fx = fixture();
        let jobs: Vec<(usize, usize)> = (0..QUERY_LENS.len())
            .flat_map(|li| (0..QUERIES_PER_LEN).map(move |qi| (li, qi)))
            .collect();
        jobs.par_iter().for_each(|&(li, qi)| {
            let q = &fx.queries[li][qi];
            for (measure, normalized) in combo_cells(q.len()) {
                // One DTW band per normalization is enough for range; skip
                // the 10% band to stay within budget.
                if let Measure::Dtw(r) = measure {
                    if r.r > q.len().div_ceil(20) {
                        continue;
                    }
                }
                let idx = if normalized { &fx.idx_norm } else { &fx.idx_raw };
                let nn = knn_exact(idx, &spec(q.clone(), Request::Knn(1), measure, normalized))
                    .unwrap();
                let eps = 2.0 * nn.matches[0].distance;
                let rs = spec(q.clone(), Request::Range(eps), measure, normalized);
                let got = range_search(idx, &rs).unwrap();
                let want = scan_range(&fx.data, &rs).unwrap();
                assert_same(
                    &got.matches,
                    &want,
                    &format!("range len {} q {qi} norm {normalized}", q.len()),
                );
            }
        });
    });
}

#[test]
fn criterion_03_bound_soundness() {
    criterion(3, "bound soundness", || {
        let fx = fixture();
        let gammas = [0usize, (L_MAX - L_MIN) / 4, L_MAX - L_MIN];
        let mut pairs_total = 0u64;
        for normalized in [false, true] {
            for &gamma in &gammas {
                let idx = if gamma == L_MAX - L_MIN {
                    None // reuse the fixture index
                } else {
                    Some(build(&fx.data, gamma, normalized))
                };
                let idx = idx.as_ref().unwrap_or(if normalized {
                    &fx.idx_norm
                } else {
                    &fx.idx_raw
                });
                let bp = &idx.config.breakpoints;
                let mut rng = ChaCha8Rng::seed_from_u64(3000 + gamma as u64);
                let mut done_ed = 0usize;
                let mut done_dtw = 0usize;
                while done_ed < 1700 {
                    let li = rng.random_range(0..QUERY_LENS.len());
                    let q = &fx.queries[li][rng.random_range(0..QUERIES_PER_LEN)];
                    let e = &idx.envelope_list[rng.random_range(0..idx.envelope_count())];
                    let series_len = idx.series_len(e.series_id);
                    if !e.covers_length(q.len(), series_len) {
                        continue;
                    }
                    done_ed += 1;
                    pairs_total += 1;
                    let qv = if normalized {
                        znormalize_values(q).0
                    } else {
                        q.clone()
                    };
                    let with_dtw = done_dtw < 300;
                    let r = WarpingWindow::from_fraction(0.05, q.len()).unwrap();
                    let qs = if with_dtw {
                        done_dtw += 1;
                        QuerySummary::with_dtw(&qv, SEG, r).unwrap()
                    } else {
                        QuerySummary::new(&qv, SEG).unwrap()
                    };
                    let ed_lb = mindist_ulisse(&qs, e, series_len, bp).unwrap();
                    let dtw_lb = with_dtw.then(|| lb_pal(&qs, e, series_len, bp).unwrap());
                    let d = &idx.collection.series[e.series_id as usize];
                    // Exhaustive: every represented subsequence of |Q|.
                    for offset in e.candidate_offsets(q.len(), series_len) {
                        let raw = d.subsequence(offset, q.len());
                        let owned;
                        let cand: &[f64] = if normalized {
                            owned = znormalize_values(raw).0;
                            &owned
                        } else {
                            raw
                        };
                        let ed = euclidean(&qv, cand, None).unwrap().unwrap();
                        assert!(
                            ed_lb <= ed,
                            "mindist {ed_lb} > ED {ed} (gamma {gamma}, norm {normalized})"
                        );
                        if let Some(lb) = dtw_lb {
                            let truth = dtw(&qv, cand, r, None).unwrap().unwrap();
                            assert!(
                                lb <= truth,
                                "lb_pal {lb} > DTW {truth} (gamma {gamma}, norm {normalized})"
                            );
                        }
                    }
                }
            }
        }
        assert!(pairs_total >= 10_000, "only {pairs_total} pairs swept");

        // LB_Keogh <= DTW and LB_Keogh_PAA_iSAX <= LB_Keogh on 10^4 pairs.
        let bp = Breakpoints::gaussian(8).unwrap();
        (0..10_000usize).into_par_iter().for_each(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(40_000 + i as u64);
            let li = rng.random_range(0..QUERY_LENS.len());
            let len = QUERY_LENS[li];
            let q = &fx.queries[li][rng.random_range(0..QUERIES_PER_LEN)];
            let d = &fx.data.series[rng.random_range(0..fx.data.len())];
            let offset = rng.random_range(1..=(d.len() - len + 1));
            let qn = znormalize_values(q).0;
            let cand = znormalize_values(d.subsequence(offset, len)).0;
            let r = WarpingWindow::from_fraction(0.05, len).unwrap();
            let env = build_dtw_envelope(&qn, r);
            let lb = lb_keogh(&env, &cand, None).unwrap().unwrap();
            let truth = dtw(&qn, &cand, r, None).unwrap().unwrap();
            assert!(lb <= truth, "lb_keogh {lb} > DTW {truth}");
            let word = to_isax(&paa(&cand, SEG).unwrap(), &bp, 8).unwrap();
            let qs = QuerySummary::with_dtw(&qn, SEG, r).unwrap();
            let coarse = lb_keogh_paa_isax(&qs, &word, &bp).unwrap();
            assert!(
                coarse <= lb + 1e-9,
                "lb_keogh_paa_isax {coarse} > lb_keogh {lb}"
            );
        });
    });
}

#[test]
fn criterion_04_envelope_containment() {
    criterion(4, "envelope containment", || {
        let fx = fixture();
        let cfg = PaaConfig::new(SEG, L_MAX, 8).unwrap();
        let range = LengthRange::new(L_MIN, L_MAX).unwrap();
        let bp = Breakpoints::gaussian(8).unwrap();

        // Lemma 1 prefix equality on 10^3 series: raw PAA coefficients of a
        // shorter subsequence equal the master-series PAA prefix exactly.
        for d in &fx.data.series {
            let master = d.subsequence(1, L_MAX);
            let master_paa = paa(master, SEG).unwrap();
            for l in [L_MIN, 176, 208, 240] {
                let sub_paa = paa(d.subsequence(1, l), SEG).unwrap();
                let covered = l / SEG;
                for j in 0..covered {
                    assert_eq!(
                        sub_paa.0[j], master_paa.0[j],
                        "prefix PAA mismatch series {} len {l} seg {j}",
                        d.id
                    );
                }
            }
        }

        // Raw and normalized containment with zero violations, plus the
        // exhaustive multi-normalization min/max enumeration within 1e-6.
        let gamma = 4usize;
        fx.data.series.par_iter().take(100).for_each(|d| {
            let raw_env = build_envelope_raw(d, &cfg, range, gamma, 1, &bp)
                .unwrap()
                .unwrap();
            let norm_env = build_envelope_norm(d, &cfg, range, gamma, 1, &bp)
                .unwrap()
                .unwrap();
            let mut exh_lo = vec![f64::INFINITY; cfg.word_len];
            let mut exh_hi = vec![f64::NEG_INFINITY; cfg.word_len];
            for a in 1..=(gamma + 1) {
                let max_len = (d.len() - a + 1).min(L_MAX);
                for l in L_MIN..=max_len {
                    let raw = d.subsequence(a, l);
                    let covered = (l / SEG).min(cfg.word_len);
                    let rp = paa(raw, SEG).unwrap();
                    let np = paa(&znormalize_values(raw).0, SEG).unwrap();
                    for j in 0..covered {
                        assert!(
                            raw_env.lower_paa[j] <= rp.0[j]
                                && rp.0[j] <= raw_env.upper_paa[j],
                            "raw containment violated at series {} seg {j}",
                            d.id
                        );
                        assert!(
                            norm_env.lower_paa[j] <= np.0[j]
                                && np.0[j] <= norm_env.upper_paa[j],
                            "normalized containment violated at series {} seg {j}",
                            d.id
                        );
                        exh_lo[j] = exh_lo[j].min(np.0[j]);
                        exh_hi[j] = exh_hi[j].max(np.0[j]);
                    }
                }
            }
            for j in 0..cfg.word_len {
                if exh_lo[j].is_finite() {
                    assert!(
                        (norm_env.lower_paa[j] - exh_lo[j]).abs() <= 1e-6,
                        "multi-normalization lower off by {} at seg {j}",
                        (norm_env.lower_paa[j] - exh_lo[j]).abs()
                    );
                    assert!(
                        (norm_env.upper_paa[j] - exh_hi[j]).abs() <= 1e-6,
                        "multi-normalization upper off by {} at seg {j}",
                        (norm_env.upper_paa[j] - exh_hi[j]).abs()
                    );
                }
            }
        });
    });
}

#[test]
fn criterion_05_degeneracy_identities() {
    criterion(5, "degeneracy identities", || {
        let fx = fixture();
        // DTW with a zero band equals ED on 10^3 random pairs.
        let mut rng = ChaCha8Rng::seed_from_u64(500);
        for _ in 0..1000 {
            let len = QUERY_LENS[rng.random_range(0..QUERY_LENS.len())];
            let a = &fx.data.series[rng.random_range(0..fx.data.len())];
            let b = &fx.data.series[rng.random_range(0..fx.data.len())];
            let oa = rng.random_range(1..=(a.len() - len + 1));
            let ob = rng.random_range(1..=(b.len() - len + 1));
            let x = a.subsequence(oa, len);
            let y = b.subsequence(ob, len);
            let ed = euclidean(x, y, None).unwrap().unwrap();
            let d0 = dtw(x, y, WarpingWindow::absolute(0), None).unwrap().unwrap();
            assert!(
                (ed - d0).abs() <= 1e-6 * ed.max(1.0),
                "DTW(r=0) {d0} != ED {ed}"
            );
        }
        // Early-abandoning oracle equals the plain oracle on all values.
        for li in 0..QUERY_LENS.len() {
            for qi in 0..5 {
                let q = fx.queries[li][qi].clone();
                let r = WarpingWindow::from_fraction(0.05, q.len()).unwrap();
                for measure in [Measure::Euclidean, Measure::Dtw(r)] {
                    let s = spec(q.clone(), Request::Knn(5), measure, false);
                    let fast = scan_knn(&fx.data, &s).unwrap();
                    let slow = scan_knn_plain(&fx.data, &s).unwrap();
                    assert_eq!(fast.len(), slow.len());
                    for (f, p) in fast.iter().zip(&slow) {
                        assert_eq!(f.r, p.r);
                        assert_eq!(f.distance, p.distance, "abandoning changed a value");
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_06_structural_accounting() {
    criterion(6, "structural accounting", || {
        let fx = fixture();
        // Envelope count per series across a parameter sweep.
        let small = generate_random_walk(12, 96, 600).unwrap();
        for (l_min, l_max) in [(48usize, 96usize), (64, 96), (48, 80)] {
            for gamma in [0usize, 1, 2, 5, 10, 48] {
                let range = LengthRange::new(l_min, l_max).unwrap();
                let opts = IndexOptions::new(8, range, gamma, false);
                let idx = build_index(small.clone(), &opts).unwrap();
                let per_series = (96 - l_min + 1).div_ceil(gamma + 1);
                assert_eq!(
                    idx.envelope_count(),
                    12 * per_series,
                    "count formula at lmin {l_min} lmax {l_max} gamma {gamma}"
                );
            }
        }
        // gamma = lmax - lmin with |D| = lmax: exactly one envelope/series.
        assert_eq!(fx.idx_raw.envelope_count(), N_SERIES);

        // Serialized size within 2x of the 2w * b * N byte model (b = 8).
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("size.ulsi");
        save_index(&fx.idx_raw, &path).unwrap();
        let actual = std::fs::metadata(&path).unwrap().len() as f64;
        let w = fx.idx_raw.config.paa.word_len as f64;
        let model = 2.0 * w * 8.0 * fx.idx_raw.envelope_count() as f64;
        assert!(
            actual >= 0.5 * model && actual <= 2.0 * model,
            "index size {actual} outside [{}, {}]",
            0.5 * model,
            2.0 * model
        );
    });
}

#[test]
fn criterion_07_pruning_trend() {
    criterion(7, "pruning/abandoning trend", || {
        // Long series keep the per-gamma envelope mixture homogeneous; on
        // short series the ceiling in the count formula makes neighboring
        // gamma cells trade envelope width for count and the trend jumps.
        let data = generate_random_walk(100, 2048, 700).unwrap();
        let query_sets: Vec<Vec<Vec<f64>>> = QUERY_LENS
            .iter()
            .enumerate()
            .map(|(i, &len)| extract_queries(&data, 10, len, 0.5, 700 + i as u64))
            .collect();
        let pcts = [0usize, 20, 40, 60, 80, 100];
        println!("gamma_pct,gamma,mean_pruning_power");
        let mut means = Vec::new();
        for &pct in &pcts {
            let gamma = pct * (L_MAX - L_MIN) / 100;
            let idx = build(&data, gamma, false);
            let powers: Vec<f64> = query_sets
                .par_iter()
                .flat_map(|set| set.par_iter())
                .map(|q| {
                    let s = spec(q.clone(), Request::Knn(10), Measure::Euclidean, false);
                    knn_exact(&idx, &s).unwrap().stats.pruning_power()
                })
                .collect();
            let mean = powers.iter().sum::<f64>() / powers.len() as f64;
            println!("{pct},{gamma},{mean}");
            means.push(mean);
        }
        let mut inversions = 0;
        for w in means.windows(2) {
            assert!(w[1] > 0.0, "pruning power not strictly positive");
            if w[1] > w[0] {
                inversions += 1;
                assert!(
                    w[1] - w[0] <= 0.02,
                    "inversion of {} exceeds 2 percentage points",
                    w[1] - w[0]
                );
            }
        }
        assert!(means[0] > 0.0, "pruning power not strictly positive");
        assert!(inversions <= 1, "{inversions} trend inversions");
    });
}

#[test]
fn criterion_08_approximate_quality() {
    criterion(8, "approximate-search quality", || {
        let fx = fixture();
        let mut leaves = 0u64;
        let mut count = 0u64;
        for li in 0..QUERY_LENS.len() {
            for qi in 0..25 {
                let q = fx.queries[li][qi].clone();
                let s = spec(q.clone(), Request::Knn(10), Measure::Euclidean, false);
                let approx = knn_approx(&fx.idx_raw, &s).unwrap();
                let exact = knn_exact(&fx.idx_raw, &s).unwrap();
                for (rank, m) in approx.matches.iter().enumerate() {
                    assert!(
                        m.distance >= exact.matches[rank].distance - 1e-12,
                        "approx below exact at rank {rank}"
                    );
                    // Every approximate match is a true subsequence whose
                    // distance verifies against a direct recomputation.
                    let d = &fx.data.series[m.r.series_id as usize];
                    let cand = d.subsequence(m.r.offset as usize, m.r.length as usize);
                    let truth = euclidean(&q, cand, None).unwrap().unwrap();
                    assert_eq!(m.distance, truth, "approx match distance unverified");
                }
                leaves += approx.stats.leaves_visited;
                count += 1;
            }
        }
        let mean_leaves = leaves as f64 / count as f64;
        assert!(
            mean_leaves <= 5.0,
            "mean leaves visited {mean_leaves} exceeds 5"
        );
    });
}

#[test]
fn criterion_09_config_invariance() {
    criterion(9, "config invariance", || {
        let fx = fixture();
        let range = LengthRange::new(L_MIN, L_MAX).unwrap();
        let mut baseline: Option<Vec<Vec<Match>>> = None;
        for gamma in [0usize, (L_MAX - L_MIN) / 2, L_MAX - L_MIN] {
            for leaf_cap in [16usize, 2000] {
                for mode in [BreakpointMode::Gaussian, BreakpointMode::Empirical] {
                    let mut opts = IndexOptions::new(SEG, range, gamma, false);
                    opts.leaf_capacity = leaf_cap;
                    opts.breakpoint_mode = Some(mode);
                    let idx = build_index(fx.data.clone(), &opts).unwrap();
                    let results: Vec<Vec<Match>> = fx
                        .queries
                        .par_iter()
                        .flat_map(|set| set.par_iter().take(10))
                        .map(|q| {
                            let s = spec(
                                q.clone(),
                                Request::Knn(10),
                                Measure::Euclidean,
                                false,
                            );
                            knn_exact(&idx, &s).unwrap().matches
                        })
                        .collect();
                    match &baseline {
                        None => baseline = Some(results),
                        Some(b) => {
                            for (i, (got, want)) in results.iter().zip(b).enumerate() {
                                assert_eq!(
                                    got, want,
                                    "query {i} differs at gamma {gamma}, \
                                     leaf {leaf_cap}, mode {mode:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_10_cli_determinism() {
    criterion(10, "CLI determinism", || {
        let run_pipeline = |dir: &Path| -> Vec<u8> {
            let data = dir.join("d.ulsd");
            let idx = dir.join("i.ulsi");
            let q = dir.join("q.ulsd");
            let res = dir.join("r.csv");
            let steps: Vec<Vec<String>> = vec![
                vec![
                    "generate", "--n", "100", "--len", "256", "--seed", "21",
                    "--out", data.to_str().unwrap(),
                ],
                vec![
                    "build", "--data", data.to_str().unwrap(), "--out",
                    idx.to_str().unwrap(),
                ],
                vec![
                    "generate", "--n", "8", "--len", "192", "--seed", "22",
                    "--from-data", data.to_str().unwrap(), "--noise-std",
                    "0.4", "--out", q.to_str().unwrap(),
                ],
                vec![
                    "query", "--index", idx.to_str().unwrap(), "--data",
                    data.to_str().unwrap(), "--queries", q.to_str().unwrap(),
                    "--k", "10", "--out", res.to_str().unwrap(),
                ],
            ]
            .into_iter()
            .map(|v| v.into_iter().map(String::from).collect())
            .collect();
            for step in &steps {
                let out = Command::new(env!("CARGO_BIN_EXE_ulisse"))
                    .args(step)
                    .output()
                    .unwrap();
                assert!(
                    out.status.success(),
                    "step {step:?}: {}",
                    String::from_utf8_lossy(&out.stderr)
                );
            }
            std::fs::read(&res).unwrap()
        };
        let d1 = TempDir::new().unwrap();
        let d2 = TempDir::new().unwrap();
        assert_eq!(
            run_pipeline(d1.path()),
            run_pipeline(d2.path()),
            "result CSVs differ between identical seeded runs"
        );
    });
}
