//! Topological analysis and overlap-conditioned composition of monophonic music.
//!
//! A score is turned into a weighted note network, the network's shortest-path
//! distances feed a Vietoris–Rips filtration, and the persistent 1-cycles of that
//! filtration are tracked along the music flow as an *overlap matrix*. The overlap
//! matrix then drives two generators: a rule-based composer that follows the
//! matrix position by position, and a multilayer perceptron trained on cyclic
//! shifts of the piece and conditioned on synthetic seed matrices.
//!
//! Node indices are 0-based positions in the sorted [`network::NodeTable`].
//! Integer overlap matrices store `node index + 1` so that `0` can mean "empty".

pub mod composer;
pub mod error;
pub mod fixtures;
pub mod network;
pub mod neural;
pub mod nodepool;
pub mod overlap;
pub mod persistence;
pub mod rng;
pub mod score;
pub mod seedgen;

pub use error::{Error, Result};

/// Version stamped into every JSON artifact.
pub const FORMAT_VERSION: u32 = 1;
