//! Spectral ranking and reduced Google matrix analysis of directed networks.
//!
//! The crate covers PageRank, CheiRank and 2DRank on large sparse graphs,
//! reduction of the Google matrix onto a node subset with its direct,
//! projector and hidden-link components, link sensitivities of the reduced
//! PageRank, aggregation of rankings and reduced matrices across several
//! networks, and friendship networks built from effective links.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod cli;
pub mod dense;
pub mod error;
pub mod format;
pub mod friendship;
pub mod google;
pub mod graph;
pub mod io;
pub mod manifest;
pub mod ordering;
pub mod regomax;
pub mod sensitivity;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use google::{cheirank, pagerank, GoogleOperator, IterationParams, RankVector};
pub use graph::{load_edge_list, DirectedGraph, LabelMap, LoadOptions, NodeSubset};
pub use ordering::{overlap_curve, two_d_rank};
pub use regomax::{compute_components, ReducedGoogleMatrix, ReductionParams, SpectralPair};
