//! Consistency- and inconsistency-aware multi-view graph clustering.

pub mod dataset;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod solver;

pub use error::{Error, Result};
