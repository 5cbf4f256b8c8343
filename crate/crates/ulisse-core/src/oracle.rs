//! Brute-force sequential-scan reference engine: exhaustive subsequence
//! enumeration with optional early abandoning and an LB_Keogh cascade.
//!
//! Shares true-distance code with the `distance` module but none of the
//! envelope bounds — those must be validated against an engine that never
//! uses them.

use crate::distance::{
    build_dtw_envelope, dtw, euclidean, lb_keogh, DtwEnvelope,
};
use crate::error::{Error, Result};
use crate::query::{Match, Measure, QuerySpec, Request};
use crate::series::{znormalize_values, SeriesCollection, SubsequenceRef};
use crate::summary::UEnvelope;

struct ScanContext {
    values: Vec<f64>,
    measure: Measure,
    normalized: bool,
    dtw_env: Option<DtwEnvelope>,
    abandon: bool,
}

impl ScanContext {
    fn new(spec: &QuerySpec, abandon: bool) -> Result<Self> {
        let values = if spec.normalized {
            znormalize_values(&spec.values).0
        } else {
            spec.values.clone()
        };
        let dtw_env = match spec.measure {
            Measure::Dtw(r) => {
                if r.r >= values.len() {
                    return Err(Error::Argument(format!(
                        "warping window {} not below query length {}",
                        r.r,
                        values.len()
                    )));
                }
                Some(build_dtw_envelope(&values, r))
            }
            Measure::Euclidean => None,
        };
        Ok(ScanContext {
            values,
            measure: spec.measure,
            normalized: spec.normalized,
            dtw_env,
            abandon,
        })
    }

    /// True distance with the same candidate materialization as the index
    /// engine, so result floats match bit for bit.
    fn distance(&self, raw: &[f64], threshold: f64) -> Result<Option<f64>> {
        let owned;
        let cand: &[f64] = if self.normalized {
            owned = znormalize_values(raw).0;
            &owned
        } else {
            raw
        };
        let abandon_at = (self.abandon && threshold.is_finite()).then_some(threshold);
        match self.measure {
            Measure::Euclidean => euclidean(&self.values, cand, abandon_at),
            Measure::Dtw(r) => {
                if let (Some(env), Some(t)) = (&self.dtw_env, abandon_at) {
                    match lb_keogh(env, cand, Some(t))? {
                        None => return Ok(None),
                        Some(lb) if lb > t => return Ok(None),
                        _ => {}
                    }
                }
                dtw(&self.values, cand, r, abandon_at)
            }
        }
    }
}

fn canonical(mut matches: Vec<Match>) -> Vec<Match> {
    matches.sort_by(Match::canonical_cmp);
    matches
}

/// Exhaustive exact k-NN over every subsequence of the query's length,
/// with early abandoning and (for DTW) an LB_Keogh cascade.
pub fn scan_knn(c: &SeriesCollection, spec: &QuerySpec) -> Result<Vec<Match>> {
    scan_knn_inner(c, spec, true)
}

/// [`scan_knn`] with all skipping disabled; every candidate's distance is
/// computed in full. Used to validate that abandoning never changes results.
pub fn scan_knn_plain(c: &SeriesCollection, spec: &QuerySpec) -> Result<Vec<Match>> {
    scan_knn_inner(c, spec, false)
}

fn scan_knn_inner(c: &SeriesCollection, spec: &QuerySpec, abandon: bool) -> Result<Vec<Match>> {
    let k = match spec.request {
        Request::Knn(k) if k >= 1 => k,
        Request::Knn(_) => return Err(Error::Argument("k must be >= 1".into())),
        Request::Range(_) => {
            return Err(Error::Argument("k-NN scan requires a k-NN request".into()))
        }
    };
    let ctx = ScanContext::new(spec, abandon)?;
    let qlen = ctx.values.len();
    let mut best: Vec<Match> = Vec::with_capacity(k + 1);
    for d in &c.series {
        if d.len() < qlen {
            continue;
        }
        for offset in 1..=(d.len() - qlen + 1) {
            let threshold = if best.len() < k {
                f64::INFINITY
            } else {
                best.last().unwrap().distance
            };
            let raw = d.subsequence(offset, qlen);
            if let Some(dist) = ctx.distance(raw, threshold)? {
                let m = Match {
                    r: SubsequenceRef {
                        series_id: d.id,
                        offset: offset as u32,
                        length: qlen as u32,
                    },
                    distance: dist,
                };
                let pos = best.partition_point(|x| {
                    x.canonical_cmp(&m) == std::cmp::Ordering::Less
                });
                if pos < k {
                    best.insert(pos, m);
                    if best.len() > k {
                        best.pop();
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Exhaustive range scan: every subsequence within `epsilon`, in canonical
/// order.
pub fn scan_range(c: &SeriesCollection, spec: &QuerySpec) -> Result<Vec<Match>> {
    let eps = match spec.request {
        Request::Range(e) if e >= 0.0 => e,
        Request::Range(_) => return Err(Error::Argument("epsilon must be >= 0".into())),
        Request::Knn(_) => {
            return Err(Error::Argument("range scan requires an epsilon request".into()))
        }
    };
    let ctx = ScanContext::new(spec, true)?;
    let qlen = ctx.values.len();
    let mut out = Vec::new();
    for d in &c.series {
        if d.len() < qlen {
            continue;
        }
        for offset in 1..=(d.len() - qlen + 1) {
            let raw = d.subsequence(offset, qlen);
            if let Some(dist) = ctx.distance(raw, eps)? {
                if dist <= eps {
                    out.push(Match {
                        r: SubsequenceRef {
                            series_id: d.id,
                            offset: offset as u32,
                            length: qlen as u32,
                        },
                        distance: dist,
                    });
                }
            }
        }
    }
    Ok(canonical(out))
}

/// Every (offset, length) pair an envelope represents:
/// `{(i, l) : a <= i <= a + gamma, l_min <= l <= l_max, i + l - 1 <= |D|}`.
pub fn enumerate_represented(e: &UEnvelope, series_len: usize) -> Vec<SubsequenceRef> {
    let mut out = Vec::new();
    let a = e.start_offset as usize;
    for i in a..=(a + e.gamma as usize) {
        for l in e.range.l_min..=e.range.l_max {
            if i + l - 1 <= series_len {
                out.push(SubsequenceRef {
                    series_id: e.series_id,
                    offset: i as u32,
                    length: l as u32,
                });
            }
        }
    }
    out
}
