//! Streaming graph classification with prototype-based embeddings.
//!
//! The crate implements the full loop: attributed graphs arrive one at a
//! time, are embedded as vectors of graph edit distances to per-class
//! prototype graphs, classified by an incrementally trained softmax
//! network, and monitored by a loss-based drift detector that triggers
//! prototype recalculation. Evaluation is prequential with fading-factor
//! G-mean; a two-feature baseline (edge density, spectral gap) and the
//! dataset tooling (GXL/CXL ingestion, synthetic stream generation,
//! result CSVs) round out the experiment harness.

pub mod classifier;
pub mod config;
pub mod drift;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod ged;
pub mod graph;
pub mod io;
pub mod memory;
pub mod pipeline;

pub use error::{Error, Result};
pub use graph::{AttributedGraph, EdgeRecord, NodeRecord, Violation};
