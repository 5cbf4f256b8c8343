//! Lower-bound distance functions between query summaries and
//! iSAX/envelope summaries, for Euclidean and DTW distances.

use crate::distance::{build_dtw_envelope, WarpingWindow};
use crate::error::{Error, Result};
use crate::summary::{paa, Breakpoints, ISaxWord, PaaVector, UEnvelope};

/// The query side of every bound: PAA of the longest segment-multiple
/// prefix, and for DTW the PAA pair of the prefix of the query's warping
/// envelope. Trailing query points are ignored by bounds but always used by
/// true distances.
#[derive(Debug, Clone)]
pub struct QuerySummary {
    pub paa: PaaVector,
    /// `(PAA(L^DTW), PAA(U^DTW))`, present for DTW queries.
    pub dtw_paa: Option<(PaaVector, PaaVector)>,
    pub query_len: usize,
    pub segment_len: usize,
}

impl QuerySummary {
    pub fn new(q: &[f64], segment_len: usize) -> Result<Self> {
        Ok(QuerySummary {
            paa: paa(q, segment_len)?,
            dtw_paa: None,
            query_len: q.len(),
            segment_len,
        })
    }

    /// Builds the warping envelope over the full query, then summarizes its
    /// segment-multiple prefix.
    pub fn with_dtw(q: &[f64], segment_len: usize, r: WarpingWindow) -> Result<Self> {
        let env = build_dtw_envelope(q, r);
        Ok(QuerySummary {
            paa: paa(q, segment_len)?,
            dtw_paa: Some((
                paa(&env.lower, segment_len)?,
                paa(&env.upper, segment_len)?,
            )),
            query_len: q.len(),
            segment_len,
        })
    }

    /// Segments every bound compares: `floor(|Q| / s)`.
    pub fn segments(&self) -> usize {
        self.paa.len()
    }
}

/// What the data side of an envelope bound is computed against: the exact
/// real `[L, U]` stored with flat-list envelopes (tighter), or the
/// discretized word pair carried by tree nodes.
#[derive(Debug, Clone, Copy)]
pub enum EnvelopeBounds<'a> {
    Exact { lower: &'a [f64], upper: &'a [f64] },
    Words { lower: &'a ISaxWord, upper: &'a ISaxWord },
}

impl<'a> EnvelopeBounds<'a> {
    pub fn exact(e: &'a UEnvelope) -> Self {
        EnvelopeBounds::Exact {
            lower: &e.lower_paa,
            upper: &e.upper_paa,
        }
    }

    pub fn segments(&self) -> usize {
        match self {
            EnvelopeBounds::Exact { lower, .. } => lower.len(),
            EnvelopeBounds::Words { lower, .. } => lower.len(),
        }
    }

    /// Lowest value segment `k` of any represented subsequence can take:
    /// exact `L_k`, or the lower breakpoint of the lower word's region.
    fn seg_lower(&self, k: usize, bp: &Breakpoints) -> f64 {
        match self {
            EnvelopeBounds::Exact { lower, .. } => lower[k],
            EnvelopeBounds::Words { lower, .. } => {
                bp.region_lower(lower.symbols[k], lower.card_bits[k])
            }
        }
    }

    /// Highest reachable value of segment `k`.
    fn seg_upper(&self, k: usize, bp: &Breakpoints) -> f64 {
        match self {
            EnvelopeBounds::Exact { upper, .. } => upper[k],
            EnvelopeBounds::Words { upper, .. } => {
                bp.region_upper(upper.symbols[k], upper.card_bits[k])
            }
        }
    }
}

/// Squared gap from a PAA coefficient to the nearer breakpoint of an iSAX
/// symbol's region; zero when the coefficient lies inside the region.
pub fn dist_lb(coeff: f64, symbol: u8, card_bits: u8, bp: &Breakpoints) -> f64 {
    let upper = bp.region_upper(symbol, card_bits);
    let lower = bp.region_lower(symbol, card_bits);
    if upper < coeff {
        (upper - coeff) * (upper - coeff)
    } else if lower > coeff {
        (lower - coeff) * (lower - coeff)
    } else {
        0.0
    }
}

/// Lower bound on `ED(D, D')` between a series summarized by `q` and any
/// series whose iSAX word is `w`, both of length `series_len`.
pub fn mindist_paa_isax(
    q: &PaaVector,
    w: &ISaxWord,
    series_len: usize,
    bp: &Breakpoints,
) -> Result<f64> {
    if q.len() != w.len() || q.is_empty() {
        return Err(Error::Argument(format!(
            "segment count mismatch: {} vs {}",
            q.len(),
            w.len()
        )));
    }
    let sum: f64 = q
        .0
        .iter()
        .zip(w.symbols.iter().zip(&w.card_bits))
        .map(|(&c, (&sym, &bits))| dist_lb(c, sym, bits, bp))
        .sum();
    Ok((series_len as f64 / q.len() as f64).sqrt() * sum.sqrt())
}

fn check_segments(q: &QuerySummary, b: &EnvelopeBounds) -> Result<usize> {
    let w = q.segments();
    if b.segments() < w {
        return Err(Error::Argument(format!(
            "envelope has {} segments, query needs {w}",
            b.segments()
        )));
    }
    Ok(w)
}

/// Lower bound on `ED(Q, ·)` over every represented same-length
/// subsequence. Compares only the first `floor(|Q| / s)` segments.
pub fn mindist_ulisse_bounds(
    q: &QuerySummary,
    b: &EnvelopeBounds,
    bp: &Breakpoints,
) -> Result<f64> {
    let w = check_segments(q, b)?;
    let mut sum = 0.0;
    for k in 0..w {
        let c = q.paa.0[k];
        let hi = b.seg_upper(k, bp);
        let lo = b.seg_lower(k, bp);
        if c > hi {
            sum += (c - hi) * (c - hi);
        } else if c < lo {
            sum += (lo - c) * (lo - c);
        }
    }
    Ok((q.segment_len as f64).sqrt() * sum.sqrt())
}

/// [`mindist_ulisse_bounds`] against an envelope's exact `[L, U]`, with a
/// length-admissibility check against the source series length.
pub fn mindist_ulisse(
    q: &QuerySummary,
    e: &UEnvelope,
    series_len: usize,
    bp: &Breakpoints,
) -> Result<f64> {
    if !e.covers_length(q.query_len, series_len) {
        return Err(Error::Domain(format!(
            "envelope at offset {} covers no subsequence of length {}",
            e.start_offset, q.query_len
        )));
    }
    mindist_ulisse_bounds(q, &EnvelopeBounds::exact(e), bp)
}

/// Lower bound on `DTW(Q, D')` from the query's warping-envelope PAA pair
/// and the iSAX word of `D'`.
pub fn lb_keogh_paa_isax(q: &QuerySummary, w: &ISaxWord, bp: &Breakpoints) -> Result<f64> {
    let (low_paa, up_paa) = q
        .dtw_paa
        .as_ref()
        .ok_or_else(|| Error::Argument("query summary has no warping envelope".into()))?;
    if low_paa.len() != w.len() || low_paa.is_empty() {
        return Err(Error::Argument(format!(
            "segment count mismatch: {} vs {}",
            low_paa.len(),
            w.len()
        )));
    }
    let mut sum = 0.0;
    for k in 0..w.len() {
        let beta_l = bp.region_lower(w.symbols[k], w.card_bits[k]);
        let beta_u = bp.region_upper(w.symbols[k], w.card_bits[k]);
        if beta_l > up_paa.0[k] {
            let d = beta_l - up_paa.0[k];
            sum += d * d;
        } else if low_paa.0[k] > beta_u {
            let d = low_paa.0[k] - beta_u;
            sum += d * d;
        }
    }
    Ok((q.segment_len as f64).sqrt() * sum.sqrt())
}

/// Lower bound on `DTW(Q, ·)` over every represented same-length
/// subsequence: the envelope's lowest reachable value against
/// `PAA(U^DTW)` and its highest against `PAA(L^DTW)`; each branch is
/// active exactly when its gap is positive.
pub fn lb_pal_bounds(q: &QuerySummary, b: &EnvelopeBounds, bp: &Breakpoints) -> Result<f64> {
    let w = check_segments(q, b)?;
    let (low_paa, up_paa) = q
        .dtw_paa
        .as_ref()
        .ok_or_else(|| Error::Argument("query summary has no warping envelope".into()))?;
    let mut sum = 0.0;
    for k in 0..w {
        let env_lo = b.seg_lower(k, bp);
        let env_hi = b.seg_upper(k, bp);
        if env_lo > up_paa.0[k] {
            let d = env_lo - up_paa.0[k];
            sum += d * d;
        } else if low_paa.0[k] > env_hi {
            let d = low_paa.0[k] - env_hi;
            sum += d * d;
        }
    }
    Ok((q.segment_len as f64).sqrt() * sum.sqrt())
}

/// [`lb_pal_bounds`] against an envelope's exact `[L, U]`, with the same
/// admissibility check as [`mindist_ulisse`].
pub fn lb_pal(q: &QuerySummary, e: &UEnvelope, series_len: usize, bp: &Breakpoints) -> Result<f64> {
    if !e.covers_length(q.query_len, series_len) {
        return Err(Error::Domain(format!(
            "envelope at offset {} covers no subsequence of length {}",
            e.start_offset, q.query_len
        )));
    }
    lb_pal_bounds(q, &EnvelopeBounds::exact(e), bp)
}
