//! Periodically forced harmonic chain between two Langevin thermostats:
//! exact steady-state response, work and energy observables, large-chain
//! limits, and a stochastic simulator to check them against.

pub mod asymptotics;
pub mod chain;
pub mod error;
pub mod exec;
pub mod greens;
pub mod linalg;
pub mod observables;
pub mod response;
pub mod scan;
pub mod selftest;
pub mod simulate;

pub use chain::{BandLocation, ChainParams, ForceSpec};
pub use error::{Error, Result};
pub use exec::Exec;
