//! Query-counted LZ factorization and compressed indexing on a simulated
//! quantum text oracle.

pub mod error;
pub mod generators;
pub mod quantum_sim;
pub mod reference_kit;
pub mod dynamic_lce;
pub mod colex_index;
pub mod lz_end_tau;
pub mod encodings;
pub mod compressed_index;
pub mod applications;
pub mod hardness;
pub mod scaling;

pub use error::{Error, Result};
