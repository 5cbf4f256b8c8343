//! Python bindings for the variable-length data-series search engine.
//!
//! Exposes the main types and operations: dataset generation and I/O,
//! index construction and persistence, exact/approximate k-NN, range
//! search, and a brute-force scan for verification.

use std::path::{Path, PathBuf};

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use ulisse_core::distance::WarpingWindow;
use ulisse_core::index::{build_index, load_index, save_index, IndexOptions, UlisseIndex};
use ulisse_core::oracle::{scan_knn, scan_range};
use ulisse_core::query::{
    knn_approx, knn_exact, range_search, Match, Measure, QuerySpec, QueryStats, Request,
};
use ulisse_core::series::{generate_random_walk, load_collection, save_collection};
use ulisse_core::{DataSeries, Error, LengthRange, SeriesCollection};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_measure(measure: &str, warp_pct: f64, query_len: usize) -> PyResult<Measure> {
    match measure {
        "ed" => Ok(Measure::Euclidean),
        "dtw" => WarpingWindow::from_fraction(warp_pct / 100.0, query_len)
            .map(Measure::Dtw)
            .map_err(to_py_err),
        other => Err(PyValueError::new_err(format!(
            "measure must be 'ed' or 'dtw', got '{other}'"
        ))),
    }
}

/// (series_id, offset, length, distance) rows in canonical order.
type MatchRows = Vec<(u32, u32, u32, f64)>;
/// Per-query counters as a Python dict.
type Stats = Py<pyo3::types::PyDict>;

fn match_tuple(m: &Match) -> (u32, u32, u32, f64) {
    (m.r.series_id, m.r.offset, m.r.length, m.distance)
}

fn stats_dict(py: Python<'_>, s: &QueryStats) -> PyResult<Stats> {
    use pyo3::types::PyDict;
    let d = PyDict::new(py);
    d.set_item("pruning_power", s.pruning_power())?;
    d.set_item("abandoning_power", s.abandoning_power())?;
    d.set_item("leaves_visited", s.leaves_visited)?;
    d.set_item("envelopes_pruned", s.envelopes_pruned)?;
    d.set_item("envelopes_checked", s.envelopes_checked)?;
    d.set_item("candidates_compared", s.candidates_compared)?;
    d.set_item("points_fetched", s.points_fetched)?;
    Ok(d.into())
}

/// An in-memory collection of data series.
#[pyclass]
struct Dataset {
    inner: SeriesCollection,
}

#[pymethods]
impl Dataset {
    /// Builds a collection from a list of float lists.
    #[new]
    fn new(series: Vec<Vec<f64>>) -> Self {
        let series = series
            .into_iter()
            .enumerate()
            .map(|(i, values)| DataSeries::new(i as u32, values))
            .collect();
        Dataset {
            inner: SeriesCollection::new(series),
        }
    }

    /// Seeded Gaussian random-walk collection of `n` series x `length`.
    #[staticmethod]
    fn generate(n: usize, length: usize, seed: u64) -> PyResult<Self> {
        Ok(Dataset {
            inner: generate_random_walk(n, length, seed).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Dataset {
            inner: load_collection(&path).map_err(to_py_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_collection(&self.inner, &path).map_err(to_py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Values of series `i`.
    fn series(&self, i: usize) -> PyResult<Vec<f64>> {
        self.inner
            .series
            .get(i)
            .map(|d| d.values.clone())
            .ok_or_else(|| PyValueError::new_err(format!("no series {i}")))
    }

    /// 1-based subsequence accessor, mirroring result offsets.
    fn subsequence(&self, i: usize, offset: usize, length: usize) -> PyResult<Vec<f64>> {
        let d = self
            .inner
            .series
            .get(i)
            .ok_or_else(|| PyValueError::new_err(format!("no series {i}")))?;
        if offset < 1 || offset + length - 1 > d.len() {
            return Err(PyValueError::new_err(format!(
                "subsequence ({offset}, {length}) outside series of {} points",
                d.len()
            )));
        }
        Ok(d.subsequence(offset, length).to_vec())
    }

    /// Exhaustive k-NN scan, the verification baseline.
    #[pyo3(signature = (query, k, measure = "ed", warp_pct = 5.0, normalized = false))]
    fn scan_knn(
        &self,
        query: Vec<f64>,
        k: usize,
        measure: &str,
        warp_pct: f64,
        normalized: bool,
    ) -> PyResult<MatchRows> {
        let spec = QuerySpec {
            measure: parse_measure(measure, warp_pct, query.len())?,
            values: query,
            request: Request::Knn(k),
            normalized,
        };
        let got = scan_knn(&self.inner, &spec).map_err(to_py_err)?;
        Ok(got.iter().map(match_tuple).collect())
    }

    /// Exhaustive range scan.
    #[pyo3(signature = (query, epsilon, measure = "ed", warp_pct = 5.0, normalized = false))]
    fn scan_range(
        &self,
        query: Vec<f64>,
        epsilon: f64,
        measure: &str,
        warp_pct: f64,
        normalized: bool,
    ) -> PyResult<MatchRows> {
        let spec = QuerySpec {
            measure: parse_measure(measure, warp_pct, query.len())?,
            values: query,
            request: Request::Range(epsilon),
            normalized,
        };
        let got = scan_range(&self.inner, &spec).map_err(to_py_err)?;
        Ok(got.iter().map(match_tuple).collect())
    }
}

/// The single index answering queries of any length in [l_min, l_max].
#[pyclass]
struct Index {
    inner: UlisseIndex,
}

impl Index {
    fn spec(&self, values: Vec<f64>, request: Request, measure: &str, warp_pct: f64) -> PyResult<QuerySpec> {
        Ok(QuerySpec {
            measure: parse_measure(measure, warp_pct, values.len())?,
            values,
            request,
            normalized: self.inner.config.normalized,
        })
    }
}

#[pymethods]
impl Index {
    /// Builds an index over a dataset.
    #[staticmethod]
    #[pyo3(signature = (
        data, l_min, l_max, gamma, segment_len = 16, normalized = false,
        leaf_capacity = 2000, seed = 0,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn build(
        data: &Dataset,
        l_min: usize,
        l_max: usize,
        gamma: usize,
        segment_len: usize,
        normalized: bool,
        leaf_capacity: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let range = LengthRange::new(l_min, l_max).map_err(to_py_err)?;
        let mut opts = IndexOptions::new(segment_len, range, gamma, normalized);
        opts.leaf_capacity = leaf_capacity;
        opts.seed = seed;
        Ok(Index {
            inner: build_index(data.inner.clone(), &opts).map_err(to_py_err)?,
        })
    }

    /// Loads an index; `data_path` must hold the dataset it was built from.
    #[staticmethod]
    fn load(path: PathBuf, data_path: PathBuf) -> PyResult<Self> {
        Ok(Index {
            inner: load_index(Path::new(&path), Path::new(&data_path)).map_err(to_py_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_index(&self.inner, &path).map_err(to_py_err)
    }

    #[getter]
    fn envelope_count(&self) -> usize {
        self.inner.envelope_count()
    }

    #[getter]
    fn normalized(&self) -> bool {
        self.inner.config.normalized
    }

    #[getter]
    fn gamma(&self) -> usize {
        self.inner.config.gamma
    }

    #[getter]
    fn length_range(&self) -> (usize, usize) {
        (self.inner.config.range.l_min, self.inner.config.range.l_max)
    }

    /// Exact k-NN; returns (matches, stats) where each match is
    /// (series_id, offset, length, distance).
    #[pyo3(signature = (query, k, measure = "ed", warp_pct = 5.0))]
    fn knn(
        &self,
        py: Python<'_>,
        query: Vec<f64>,
        k: usize,
        measure: &str,
        warp_pct: f64,
    ) -> PyResult<(MatchRows, Stats)> {
        let spec = self.spec(query, Request::Knn(k), measure, warp_pct)?;
        let out = knn_exact(&self.inner, &spec).map_err(to_py_err)?;
        Ok((
            out.matches.iter().map(match_tuple).collect(),
            stats_dict(py, &out.stats)?,
        ))
    }

    /// Approximate k-NN; also reports whether the answer is provably exact.
    #[pyo3(signature = (query, k, measure = "ed", warp_pct = 5.0))]
    fn knn_approx(
        &self,
        py: Python<'_>,
        query: Vec<f64>,
        k: usize,
        measure: &str,
        warp_pct: f64,
    ) -> PyResult<(MatchRows, bool, Stats)> {
        let spec = self.spec(query, Request::Knn(k), measure, warp_pct)?;
        let out = knn_approx(&self.inner, &spec).map_err(to_py_err)?;
        Ok((
            out.matches.iter().map(match_tuple).collect(),
            out.exact,
            stats_dict(py, &out.stats)?,
        ))
    }

    /// Every subsequence within `epsilon`, canonically ordered.
    #[pyo3(signature = (query, epsilon, measure = "ed", warp_pct = 5.0))]
    fn range(
        &self,
        py: Python<'_>,
        query: Vec<f64>,
        epsilon: f64,
        measure: &str,
        warp_pct: f64,
    ) -> PyResult<(MatchRows, Stats)> {
        let spec = self.spec(query, Request::Range(epsilon), measure, warp_pct)?;
        let out = range_search(&self.inner, &spec).map_err(to_py_err)?;
        Ok((
            out.matches.iter().map(match_tuple).collect(),
            stats_dict(py, &out.stats)?,
        ))
    }
}

#[pymodule]
fn ulisse(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<Index>()?;
    Ok(())
}
