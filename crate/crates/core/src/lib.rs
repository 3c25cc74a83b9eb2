//! Transition networks from scalar time series and their persistent
//! homology.
//!
//! The pipeline runs delay embedding, symbolization into ordinal or
//! coarse-grained states, transition network construction, graph
//! dissimilarities, Rips persistence in dimensions 0 and 1, and diagram
//! statistics. [`analysis`] holds the experiment drivers built on top.

pub mod analysis;
pub mod diagstats;
pub mod embedding;
pub mod error;
pub mod graphdist;
pub mod homology;
pub mod networks;
pub mod par;
pub mod signals;

pub use error::{Error, Result};
