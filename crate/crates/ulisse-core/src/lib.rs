//! Single-index engine for exact and approximate similarity search over
//! data-series collections, where the query length varies within a range
//! `[l_min, l_max]`.
//!
//! The engine summarizes overlapping subsequences of several lengths into
//! discretized envelopes, organizes them in an iSAX-style tree plus a flat
//! max-cardinality envelope list, and answers k-NN and epsilon-range queries
//! under Euclidean and band-constrained DTW distances, for both raw and
//! Z-normalized series. A brute-force sequential-scan engine is included as
//! the correctness oracle.

pub mod bounds;
pub mod distance;
pub mod error;
pub mod index;
pub mod oracle;
pub mod query;
pub mod series;
pub mod summary;

pub use error::{Error, Result};
pub use series::{DataSeries, LengthRange, SeriesCollection, SubsequenceRef};
