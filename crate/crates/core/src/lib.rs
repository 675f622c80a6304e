//! Local-dimension spectra of weak Gibbs measures on non-uniformly expanding
//! Markov interval maps.

pub mod cli;
pub mod error;
pub mod exec;
pub mod finite_measures;
pub mod induced;
pub mod maps;
pub mod numerics;
pub mod pressure;
pub mod spectrum;
pub mod symbolic;
pub mod weak_gibbs;

pub use error::{Error, Result};
pub use exec::Execution;
pub use numerics::Enclosure;
