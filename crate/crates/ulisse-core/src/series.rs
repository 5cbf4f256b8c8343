//! Core series types, binary dataset ingestion/persistence and the synthetic
//! random-walk generator.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Magic bytes of the dataset file format.
pub const DATASET_MAGIC: &[u8; 4] = b"ULSD";
/// Current dataset file format version.
pub const DATASET_VERSION: u8 = 1;

/// A population standard deviation below this treats the series as constant:
/// Z-normalization maps it to all zeros.
pub const SIGMA_FLOOR: f64 = 1e-9;

/// An ordered sequence of real-valued points.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSeries {
    pub id: u32,
    pub values: Vec<f64>,
}

impl DataSeries {
    pub fn new(id: u32, values: Vec<f64>) -> Self {
        DataSeries { id, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Contiguous `length` points starting at 1-based `offset`.
    pub fn subsequence(&self, offset: usize, length: usize) -> &[f64] {
        &self.values[offset - 1..offset - 1 + length]
    }
}

/// Reference to a contiguous subsequence: series id, 1-based offset, length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsequenceRef {
    pub series_id: u32,
    pub offset: u32,
    pub length: u32,
}

impl SubsequenceRef {
    /// Checks the bound `offset + length - 1 <= |D|` against `series`.
    pub fn is_valid_for(&self, series: &DataSeries) -> bool {
        self.offset >= 1
            && self.length >= 1
            && (self.offset as usize + self.length as usize - 1) <= series.len()
    }
}

/// Admissible query length range `[l_min, l_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthRange {
    pub l_min: usize,
    pub l_max: usize,
}

impl LengthRange {
    pub fn new(l_min: usize, l_max: usize) -> Result<Self> {
        if l_min < 1 || l_min > l_max {
            return Err(Error::Argument(format!(
                "invalid length range [{l_min}, {l_max}]"
            )));
        }
        Ok(LengthRange { l_min, l_max })
    }

    pub fn contains(&self, len: usize) -> bool {
        self.l_min <= len && len <= self.l_max
    }
}

/// A set of data series loaded from (or destined for) a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCollection {
    pub series: Vec<DataSeries>,
    pub source_path: Option<PathBuf>,
    /// Common length shared by every series, when the collection is rectangular.
    pub fixed_length: Option<usize>,
}

impl SeriesCollection {
    pub fn new(series: Vec<DataSeries>) -> Self {
        let fixed_length = match series.first() {
            Some(first) if series.iter().all(|d| d.len() == first.len()) => Some(first.len()),
            _ => None,
        };
        SeriesCollection {
            series,
            source_path: None,
            fixed_length,
        }
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn total_points(&self) -> usize {
        self.series.iter().map(|d| d.len()).sum()
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Loads a collection from the binary dataset format.
///
/// Layout: magic `ULSD`, u8 version, u32 LE series count, u32 LE series
/// length (0 selects variable-length mode, followed by `count + 1` u64 LE
/// cumulative point offsets), then all points as f32 LE, row-major.
pub fn load_collection(path: impl AsRef<Path>) -> Result<SeriesCollection> {
    let path = path.as_ref();
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DATASET_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version)?;
    if version[0] != DATASET_VERSION {
        return Err(Error::Format(format!("unsupported version {}", version[0])));
    }
    let count = read_u32(&mut r)? as usize;
    let fixed_len = read_u32(&mut r)? as usize;

    let lengths: Vec<usize> = if fixed_len == 0 {
        let mut offsets = Vec::with_capacity(count + 1);
        for _ in 0..=count {
            offsets.push(read_u64(&mut r)? as usize);
        }
        if offsets[0] != 0 || offsets.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Format("offset table not monotone from 0".into()));
        }
        offsets.windows(2).map(|w| w[1] - w[0]).collect()
    } else {
        vec![fixed_len; count]
    };
    if lengths.contains(&0) && count > 0 {
        return Err(Error::Format("zero-length series".into()));
    }

    let mut series = Vec::with_capacity(count);
    let mut buf = Vec::new();
    for (id, &len) in lengths.iter().enumerate() {
        buf.resize(len * 4, 0u8);
        r.read_exact(&mut buf)?;
        let mut values = Vec::with_capacity(len);
        for (p, chunk) in buf.chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "non-finite value in series {id} at offset {}",
                    p + 1
                )));
            }
            values.push(v as f64);
        }
        series.push(DataSeries::new(id as u32, values));
    }

    let mut c = SeriesCollection::new(series);
    if fixed_len != 0 {
        c.fixed_length = Some(fixed_len);
    } else {
        c.fixed_length = None;
    }
    c.source_path = Some(path.to_path_buf());
    Ok(c)
}

/// Writes `c` in the binary dataset format; inverse of [`load_collection`].
pub fn save_collection(c: &SeriesCollection, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    w.write_all(DATASET_MAGIC)?;
    w.write_all(&[DATASET_VERSION])?;
    w.write_all(&(c.series.len() as u32).to_le_bytes())?;
    match c.fixed_length {
        Some(len) if len > 0 => {
            w.write_all(&(len as u32).to_le_bytes())?;
        }
        _ => {
            w.write_all(&0u32.to_le_bytes())?;
            let mut off = 0u64;
            w.write_all(&off.to_le_bytes())?;
            for d in &c.series {
                off += d.len() as u64;
                w.write_all(&off.to_le_bytes())?;
            }
        }
    }
    for d in &c.series {
        for &v in &d.values {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Generates `n_series` random walks of `length` points each.
///
/// The first point of each series is a standard-normal draw; every later
/// point adds a fresh N(0,1) draw to the previous value. Points are quantized
/// to f32 so that a generated collection round-trips bit-exactly through the
/// dataset file format. Deterministic for a fixed seed.
pub fn generate_random_walk(n_series: usize, length: usize, seed: u64) -> Result<SeriesCollection> {
    if n_series < 1 || length < 1 {
        return Err(Error::Argument(
            "n_series and length must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut series = Vec::with_capacity(n_series);
    for id in 0..n_series {
        let mut values = Vec::with_capacity(length);
        let mut last = 0.0f64;
        for t in 0..length {
            let step: f64 = normal.sample(&mut rng);
            let v = if t == 0 { step } else { last + step };
            let q = v as f32 as f64;
            values.push(q);
            last = q;
        }
        series.push(DataSeries::new(id as u32, values));
    }
    Ok(SeriesCollection::new(series))
}

/// Z-normalizes `values` to mean 0 and population standard deviation 1.
///
/// Returns the normalized points and whether the input was treated as
/// constant (sigma below [`SIGMA_FLOOR`], output all zeros).
pub fn znormalize_values(values: &[f64]) -> (Vec<f64>, bool) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sigma = var.sqrt();
    if sigma < SIGMA_FLOOR {
        return (vec![0.0; values.len()], true);
    }
    (values.iter().map(|v| (v - mean) / sigma).collect(), false)
}

/// Z-normalized copy of `d`; constant series map to all zeros.
pub fn znormalize(d: &DataSeries) -> DataSeries {
    let (values, _) = znormalize_values(&d.values);
    DataSeries::new(d.id, values)
}

/// Prefix sums of a series and of its squares, for O(1) subsequence
/// statistics during on-the-fly Z-normalization.
#[derive(Debug, Clone)]
pub struct PrefixStats {
    sum: Vec<f64>,
    sq_sum: Vec<f64>,
}

impl PrefixStats {
    pub fn new(values: &[f64]) -> Self {
        let mut sum = Vec::with_capacity(values.len() + 1);
        let mut sq_sum = Vec::with_capacity(values.len() + 1);
        sum.push(0.0);
        sq_sum.push(0.0);
        let (mut s, mut q) = (0.0, 0.0);
        for &v in values {
            s += v;
            q += v * v;
            sum.push(s);
            sq_sum.push(q);
        }
        PrefixStats { sum, sq_sum }
    }

    /// Sum of points in the 0-based half-open window `[start, start + len)`.
    pub fn window_sum(&self, start: usize, len: usize) -> f64 {
        self.sum[start + len] - self.sum[start]
    }

    /// Mean and population standard deviation of the same window.
    pub fn mean_std(&self, start: usize, len: usize) -> (f64, f64) {
        let n = len as f64;
        let mean = self.window_sum(start, len) / n;
        let var = (self.sq_sum[start + len] - self.sq_sum[start]) / n - mean * mean;
        (mean, var.max(0.0).sqrt())
    }
}
