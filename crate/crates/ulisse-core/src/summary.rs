//! PAA, iSAX discretization with configurable breakpoints, and envelope
//! construction for raw and Z-normalized subsequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::series::{DataSeries, LengthRange, SeriesCollection, SIGMA_FLOOR};

/// PAA segmentation parameters: segment length `s`, word length
/// `w = floor(l_max / s)` and the maximum per-segment cardinality in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaaConfig {
    pub segment_len: usize,
    pub word_len: usize,
    pub max_card_bits: u8,
}

impl PaaConfig {
    pub fn new(segment_len: usize, l_max: usize, max_card_bits: u8) -> Result<Self> {
        if segment_len < 1 {
            return Err(Error::Argument("segment length must be >= 1".into()));
        }
        let word_len = l_max / segment_len;
        if word_len < 1 {
            return Err(Error::Argument(format!(
                "segment length {segment_len} longer than l_max {l_max}"
            )));
        }
        if !(1..=8).contains(&max_card_bits) {
            return Err(Error::Argument("cardinality must be 1..=8 bits".into()));
        }
        Ok(PaaConfig {
            segment_len,
            word_len,
            max_card_bits,
        })
    }
}

/// Per-segment means of the longest segment-multiple prefix of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct PaaVector(pub Vec<f64>);

impl PaaVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Computes the PAA of the longest prefix of `values` that is a multiple of
/// `segment_len`; trailing points are ignored.
pub fn paa(values: &[f64], segment_len: usize) -> Result<PaaVector> {
    if segment_len < 1 || values.len() < segment_len {
        return Err(Error::Argument(format!(
            "series of {} points cannot be summarized with segment length {segment_len}",
            values.len()
        )));
    }
    let coeffs = values
        .chunks_exact(segment_len)
        .map(|seg| seg.iter().sum::<f64>() / segment_len as f64)
        .collect();
    Ok(PaaVector(coeffs))
}

/// Where the discretization thresholds come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakpointMode {
    /// Equi-probable N(0,1) regions; calibrated for Z-normalized data.
    Gaussian,
    /// Empirical quantiles of sampled PAA coefficients; used for raw data.
    Empirical,
}

/// Nested breakpoint levels: level `b` holds the `2^b - 1` ascending
/// thresholds of cardinality `2^b`. Level `b` thresholds are a subset of
/// level `b + 1`, which is what makes iSAX words bit-prefix refinable.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoints {
    pub mode: BreakpointMode,
    levels: Vec<Vec<f64>>,
}

/// Derives all lower levels from the max-cardinality thresholds by taking
/// every other threshold, so nesting holds by construction.
fn nested_levels(max_level: Vec<f64>, bits: u8) -> Vec<Vec<f64>> {
    let mut levels = Vec::with_capacity(bits as usize);
    for b in 1..=bits {
        let stride = 1usize << (bits - b);
        let level: Vec<f64> = (1..(1usize << b))
            .map(|j| max_level[j * stride - 1])
            .collect();
        levels.push(level);
    }
    levels
}

impl Breakpoints {
    /// Thresholds at the inverse standard-normal CDF of `j / 2^b`.
    pub fn gaussian(max_card_bits: u8) -> Result<Self> {
        if !(1..=8).contains(&max_card_bits) {
            return Err(Error::Argument("cardinality must be 1..=8 bits".into()));
        }
        let normal = Normal::new(0.0, 1.0).unwrap();
        let card = 1usize << max_card_bits;
        let max_level: Vec<f64> = (1..card)
            .map(|j| normal.inverse_cdf(j as f64 / card as f64))
            .collect();
        Ok(Breakpoints {
            mode: BreakpointMode::Gaussian,
            levels: nested_levels(max_level, max_card_bits),
        })
    }

    /// Thresholds at empirical quantiles of `sample` PAA coefficients drawn
    /// from random segment windows of the collection. Deterministic for a
    /// fixed seed. Duplicate quantiles are nudged apart to keep the levels
    /// strictly ascending.
    pub fn empirical(
        c: &SeriesCollection,
        cfg: &PaaConfig,
        sample: usize,
        seed: u64,
    ) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::Argument("empty collection".into()));
        }
        let s = cfg.segment_len;
        let eligible: Vec<&DataSeries> = c.series.iter().filter(|d| d.len() >= s).collect();
        if eligible.is_empty() {
            return Err(Error::Argument(
                "no series long enough for one PAA segment".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = Vec::with_capacity(sample.max(1));
        for _ in 0..sample.max(1) {
            let d = eligible[rng.random_range(0..eligible.len())];
            let start = rng.random_range(0..=d.len() - s);
            let mean = d.values[start..start + s].iter().sum::<f64>() / s as f64;
            coeffs.push(mean);
        }
        coeffs.sort_by(|a, b| a.total_cmp(b));
        if coeffs[0] == coeffs[coeffs.len() - 1] {
            return Err(Error::DegenerateData(
                "all sampled PAA coefficients are identical".into(),
            ));
        }
        let card = 1usize << cfg.max_card_bits;
        let n = coeffs.len();
        let mut max_level: Vec<f64> = (1..card)
            .map(|j| {
                let q = j as f64 / card as f64;
                let idx = (q * (n - 1) as f64).round() as usize;
                coeffs[idx]
            })
            .collect();
        for i in 1..max_level.len() {
            if max_level[i] <= max_level[i - 1] {
                max_level[i] = max_level[i - 1].next_up();
            }
        }
        Ok(Breakpoints {
            mode: BreakpointMode::Empirical,
            levels: nested_levels(max_level, cfg.max_card_bits),
        })
    }

    /// Rebuilds from persisted max-level thresholds.
    pub fn from_max_level(mode: BreakpointMode, max_level: Vec<f64>, bits: u8) -> Result<Self> {
        if max_level.len() != (1usize << bits) - 1 {
            return Err(Error::Format("breakpoint level size mismatch".into()));
        }
        Ok(Breakpoints {
            mode,
            levels: nested_levels(max_level, bits),
        })
    }

    pub fn max_bits(&self) -> u8 {
        self.levels.len() as u8
    }

    pub fn thresholds(&self, bits: u8) -> &[f64] {
        &self.levels[bits as usize - 1]
    }

    /// Region index of `coeff` at the given cardinality. Values exactly on a
    /// threshold go to the upper region.
    pub fn symbol(&self, coeff: f64, bits: u8) -> u8 {
        let t = self.thresholds(bits);
        t.partition_point(|&b| b <= coeff) as u8
    }

    /// Lower breakpoint of a region; `-inf` for the bottom region.
    pub fn region_lower(&self, symbol: u8, bits: u8) -> f64 {
        if symbol == 0 {
            f64::NEG_INFINITY
        } else {
            self.thresholds(bits)[symbol as usize - 1]
        }
    }

    /// Upper breakpoint of a region; `+inf` for the top region.
    pub fn region_upper(&self, symbol: u8, bits: u8) -> f64 {
        let t = self.thresholds(bits);
        if symbol as usize >= t.len() {
            f64::INFINITY
        } else {
            t[symbol as usize]
        }
    }
}

/// Per-segment discrete symbols with per-segment bit cardinalities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ISaxWord {
    pub symbols: Vec<u8>,
    pub card_bits: Vec<u8>,
}

impl ISaxWord {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Drops trailing bits so every segment has the requested cardinality.
    pub fn promote(&self, new_bits: &[u8]) -> ISaxWord {
        assert_eq!(new_bits.len(), self.symbols.len());
        let symbols = self
            .symbols
            .iter()
            .zip(self.card_bits.iter().zip(new_bits))
            .map(|(&sym, (&cur, &new))| {
                assert!(new <= cur, "promotion may only drop bits");
                sym >> (cur - new)
            })
            .collect();
        ISaxWord {
            symbols,
            card_bits: new_bits.to_vec(),
        }
    }

    /// Symbol of one segment at a coarser cardinality.
    pub fn symbol_at(&self, segment: usize, bits: u8) -> u8 {
        self.symbols[segment] >> (self.card_bits[segment] - bits)
    }
}

/// Discretizes a PAA vector at a uniform cardinality.
pub fn to_isax(p: &PaaVector, bp: &Breakpoints, card_bits: u8) -> Result<ISaxWord> {
    if card_bits < 1 || card_bits > bp.max_bits() {
        return Err(Error::Argument(format!(
            "cardinality {card_bits} outside breakpoint levels 1..={}",
            bp.max_bits()
        )));
    }
    Ok(ISaxWord {
        symbols: p.0.iter().map(|&c| bp.symbol(c, card_bits)).collect(),
        card_bits: vec![card_bits; p.0.len()],
    })
}

/// The `[iSAX(L), iSAX(U)]` summary of all subsequences of lengths
/// `[l_min, l_max]` starting in a window of `gamma + 1` offsets, plus the
/// exact real-valued extremes and the disk locator of the raw data.
///
/// Segments no represented subsequence reaches stay at `L = +inf`,
/// `U = -inf`; they are never compared because queries long enough to touch
/// them are inadmissible for this envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct UEnvelope {
    pub lower: ISaxWord,
    pub upper: ISaxWord,
    pub lower_paa: Vec<f64>,
    pub upper_paa: Vec<f64>,
    pub series_id: u32,
    /// 1-based first represented offset `a`.
    pub start_offset: u32,
    pub gamma: u32,
    pub range: LengthRange,
    pub normalized: bool,
}

impl UEnvelope {
    /// True when the envelope represents at least one subsequence of
    /// `query_len` points within a series of `series_len` points.
    pub fn covers_length(&self, query_len: usize, series_len: usize) -> bool {
        self.range.contains(query_len)
            && self.start_offset as usize + query_len - 1 <= series_len
    }

    /// 1-based candidate start offsets for subsequences of `query_len`.
    pub fn candidate_offsets(
        &self,
        query_len: usize,
        series_len: usize,
    ) -> std::ops::RangeInclusive<usize> {
        let a = self.start_offset as usize;
        let hi = (a + self.gamma as usize).min(series_len.saturating_sub(query_len) + 1);
        a..=hi
    }
}

/// Rounds toward negative infinity onto the f32 grid, so a serialized lower
/// bound never rises above the exact value.
fn f32_down(x: f64) -> f64 {
    let r = x as f32;
    if (r as f64) > x {
        r.next_down() as f64
    } else {
        r as f64
    }
}

/// Rounds toward positive infinity onto the f32 grid.
fn f32_up(x: f64) -> f64 {
    let r = x as f32;
    if (r as f64) < x {
        r.next_up() as f64
    } else {
        r as f64
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_envelope(
    lower: Vec<f64>,
    upper: Vec<f64>,
    d: &DataSeries,
    gamma: usize,
    a: usize,
    range: LengthRange,
    normalized: bool,
    bp: &Breakpoints,
) -> Result<UEnvelope> {
    let lower: Vec<f64> = lower.into_iter().map(f32_down).collect();
    let upper: Vec<f64> = upper.into_iter().map(f32_up).collect();
    let bits = bp.max_bits();
    let lower_word = to_isax(&PaaVector(lower.clone()), bp, bits)?;
    let upper_word = to_isax(&PaaVector(upper.clone()), bp, bits)?;
    Ok(UEnvelope {
        lower: lower_word,
        upper: upper_word,
        lower_paa: lower,
        upper_paa: upper,
        series_id: d.id,
        start_offset: a as u32,
        gamma: gamma as u32,
        range,
        normalized: false || normalized,
    })
}

/// Builds the envelope of the non-Z-normalized subsequences of `d` of
/// lengths `[l_min, l_max]` starting at offsets `a ..= a + gamma`.
///
/// Only master-series PAA coefficients are aggregated: every shorter
/// subsequence at the same offset shares its prefix coefficients with the
/// equi-offset master series. Returns `None` when fewer than `l_min` points
/// remain after offset `a`.
pub fn build_envelope_raw(
    d: &DataSeries,
    cfg: &PaaConfig,
    range: LengthRange,
    gamma: usize,
    a: usize,
    bp: &Breakpoints,
) -> Result<Option<UEnvelope>> {
    build_envelope_raw_counted(d, cfg, range, gamma, a, bp).map(|r| r.map(|(e, _)| e))
}

/// Same as [`build_envelope_raw`], additionally reporting how many raw
/// points the construction touched.
pub fn build_envelope_raw_counted(
    d: &DataSeries,
    cfg: &PaaConfig,
    range: LengthRange,
    gamma: usize,
    a: usize,
    bp: &Breakpoints,
) -> Result<Option<(UEnvelope, u64)>> {
    if a < 1 {
        return Err(Error::Argument("offset a must be >= 1".into()));
    }
    if d.len() < a - 1 + range.l_min {
        return Ok(None);
    }
    let s = cfg.segment_len;
    let w = cfg.word_len;

    // Prefix sums over the window of at most l_max + gamma points from a.
    let window_end = d.len().min(a - 1 + range.l_max + gamma);
    let window = &d.values[a - 1..window_end];
    let mut points_read = window.len() as u64;
    let mut prefix = Vec::with_capacity(window.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in window {
        acc += v;
        prefix.push(acc);
    }

    let mut lower = vec![f64::INFINITY; w];
    let mut upper = vec![f64::NEG_INFINITY; w];
    let last_master_start = d.len() - (range.l_min - 1);
    for i in a..=(a + gamma).min(last_master_start) {
        let master_len = (d.len() - i + 1).min(range.l_max);
        let rel = i - a; // window-local start of this master series
        let segments = (master_len / s).min(w);
        for k in 0..segments {
            let coeff = (prefix[rel + (k + 1) * s] - prefix[rel + k * s]) / s as f64;
            points_read += 2;
            if coeff < lower[k] {
                lower[k] = coeff;
            }
            if coeff > upper[k] {
                upper[k] = coeff;
            }
        }
    }
    let env = finish_envelope(lower, upper, d, gamma, a, range, false, bp)?;
    Ok(Some((env, points_read)))
}

/// Builds the envelope of the Z-normalized subsequences of `d` of lengths
/// `[l_min, l_max]` starting at offsets `a ..= a + gamma`.
///
/// Every subsequence contributes its k-th PAA coefficient under its own
/// mean and standard deviation whenever segment k fits inside it; constant
/// subsequences contribute zero coefficients.
pub fn build_envelope_norm(
    d: &DataSeries,
    cfg: &PaaConfig,
    range: LengthRange,
    gamma: usize,
    a: usize,
    bp: &Breakpoints,
) -> Result<Option<UEnvelope>> {
    if a < 1 {
        return Err(Error::Argument("offset a must be >= 1".into()));
    }
    if d.len() < a - 1 + range.l_min {
        return Ok(None);
    }
    let s = cfg.segment_len;
    let w = cfg.word_len;

    let window_end = d.len().min(a - 1 + range.l_max + gamma);
    let window = &d.values[a - 1..window_end];
    let mut prefix = Vec::with_capacity(window.len() + 1);
    let mut prefix_sq = Vec::with_capacity(window.len() + 1);
    prefix.push(0.0);
    prefix_sq.push(0.0);
    let (mut acc, mut acc_sq) = (0.0, 0.0);
    for &v in window {
        acc += v;
        acc_sq += v * v;
        prefix.push(acc);
        prefix_sq.push(acc_sq);
    }

    let mut lower = vec![f64::INFINITY; w];
    let mut upper = vec![f64::NEG_INFINITY; w];
    let last_start = d.len() - (range.l_min - 1);
    for i in a..=(a + gamma).min(last_start) {
        let rel = i - a;
        let max_len = (d.len() - i + 1).min(range.l_max);
        for sub_len in range.l_min..=max_len {
            let n = sub_len as f64;
            let sum = prefix[rel + sub_len] - prefix[rel];
            let sq = prefix_sq[rel + sub_len] - prefix_sq[rel];
            let mean = sum / n;
            let sigma = (sq / n - mean * mean).max(0.0).sqrt();
            let segments = (sub_len / s).min(w);
            for k in 0..segments {
                let seg_mean = (prefix[rel + (k + 1) * s] - prefix[rel + k * s]) / s as f64;
                let coeff = if sigma < SIGMA_FLOOR {
                    0.0
                } else {
                    (seg_mean - mean) / sigma
                };
                if coeff < lower[k] {
                    lower[k] = coeff;
                }
                if coeff > upper[k] {
                    upper[k] = coeff;
                }
            }
        }
    }
    finish_envelope(lower, upper, d, gamma, a, range, true, bp).map(Some)
}
