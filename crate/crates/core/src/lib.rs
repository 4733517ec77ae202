//! Relative discrepancy of random k-uniform hypergraphs.
//!
//! * [`hypergraph`]: canonical hypergraphs, sampling, bijections, overlap.
//! * [`oracle`]: brute-force discrepancy and exact distributions.
//! * [`bounds`]: concentration inequalities, the tail quantity `Λ`, regime
//!   classification and predicted orders.
//! * [`certifier`]: constructive high-overlap bijections with verifiable reports.
//! * [`harness`]: seeded parameter sweeps, scaling summaries and CSV output.

// `!(x >= 0.0)` style guards deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bijection;
pub mod bounds;
pub mod certifier;
pub mod error;
pub mod harness;
pub mod hypergraph;
pub mod oracle;
pub mod report;
pub mod seeding;
pub mod subset;
pub mod textfmt;

pub use bijection::Bijection;
pub use error::{Error, Result};
pub use hypergraph::{overlap, Hypergraph, VertexSubset};
pub use report::{DiscrepancyReport, Provenance, Witness};

/// Exact rational used for densities and discrepancy values.
pub type Rational = num_rational::Ratio<i128>;
