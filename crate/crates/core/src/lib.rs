//! Grid-hash indexes for approximate near-neighbor queries among polygonal
//! curves under the continuous and discrete Fréchet distance.
//!
//! The crate provides four deterministic structures, each answering a query
//! by rounding it onto a lattice and doing a single hash lookup:
//!
//! - [`AsymIndex`]: `(1+ε)δ` near neighbors when the query size `k` is known
//!   at build time (continuous or discrete Fréchet).
//! - [`SymIndex`]: `(5+ε)δ` near neighbors under the discrete Fréchet
//!   distance for queries of any size.
//! - [`AsrsIndex`]: approximate subtrajectory range search over one long curve.
//! - [`TwdIndex`]: approximate time-window density queries over region-labelled
//!   timestamped points.
//!
//! Every structure is paired with a brute-force reference in [`oracle`] so
//! that the approximation guarantees can be checked directly.

pub mod anns_asym;
pub mod anns_sym;
pub mod asrs;
pub mod audit;
mod error;
pub mod geometry;
pub mod grid;
pub mod index_file;
pub mod oracle;
pub mod twd;

pub use anns_asym::{AsymIndex, AsymParams, QueryOutcome};
pub use anns_sym::SymIndex;
pub use asrs::{AsrsIndex, AsrsOutcome, SubcurveRange};
pub use error::{Error, Result};
pub use geometry::{Curve, Metric};
pub use grid::{Grid, LatticePoint, PathKey, DEFAULT_BUDGET};
pub use twd::{StampedPoint, TwdIndex};

/// Operation counts recorded along a query path.
///
/// Queries are constant work in the corpus size; these counters make that
/// observable in tests and benchmarks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct QueryCost {
    /// Coordinate roundings (one per vertex coordinate, or per window endpoint).
    pub roundings: usize,
    /// Clamps of a query value into the indexed domain.
    pub clamps: usize,
    /// Distance comparisons performed while canonicalizing the query.
    pub comparisons: usize,
    /// Bucket keys constructed.
    pub keys: usize,
    /// Hash map lookups.
    pub lookups: usize,
}
