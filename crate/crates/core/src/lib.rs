//! Community detection on non-uniform hypergraph stochastic block models.
//!
//! The crate covers the whole pipeline for the two-community symmetric model:
//!
//! - [`model`]: model specification, label and hypergraph sampling, contraction
//!   of the hyperedge lists into a pairwise adjacency matrix, and the
//!   expected-model quantities.
//! - [`thresholds`]: the generalized Hellinger divergence and the SDP
//!   divergence, both evaluated through a concave large-deviation rate function.
//! - [`spectral`]: dense and power-iteration eigensolvers and the two spectral
//!   partition algorithms (adjacency and normalized Laplacian).
//! - [`sdp`]: an ADMM solver for the semidefinite relaxation of min-bisection,
//!   the dual-certificate check and a brute-force min-bisection oracle.
//! - [`oracle`]: exhaustive maximum-likelihood estimation for tiny instances
//!   and Monte-Carlo tail estimates.
//! - [`metrics`]: mismatch ratio and exact recovery.
//! - [`experiments`]: seeded Monte-Carlo campaigns with CSV/JSON output.
//! - [`io`]: the JSON file formats and layer-triple parsing.

pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod sdp;
pub mod spectral;
pub mod thresholds;

pub use error::{Error, Result};
pub use metrics::{exact_recovery, mismatch_ratio};
pub use model::{AdjacencyMatrix, ExpectedModel, Hypergraph, LabelVector, LayerParams, ModelSpec};
pub use spectral::{Algorithm, EigenPair, PartitionResult};
pub use thresholds::DivergenceReport;
