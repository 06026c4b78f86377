//! Directional Laplacian centrality for network-flow graphs.
//!
//! This crate turns flow records (`source, destination, time, metadata`)
//! into windowed graph sequences, scores vertices by how strongly they pull
//! on the Laplacian spectrum (directional Laplacian centrality and its
//! normalized variant), generates THeLMa synthetic temporal graphs, and runs
//! seeded anomaly-injection experiments on top of all of it.
//!
//! The narrative guide lives in `book/`; its code snippets are compiled and
//! run as doc-tests alongside the crate's own.

pub mod anomaly;
pub mod centrality;
pub mod flow;
pub mod graph;
pub mod rng;
pub mod spectra;
pub mod thelma;

mod book;

pub use graph::{Graph, GraphError, VertexId};
pub use spectra::LaplacianKind;
