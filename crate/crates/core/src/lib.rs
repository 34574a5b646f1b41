//! Truncated-oscillator Hamiltonians for one-dimensional potentials and
//! two-mode mini-superspace universes, solved exactly by dense
//! diagonalisation and variationally with a shot-sampled circuit simulator.

pub mod circuit;
pub mod config;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod oscillator;
pub mod pauli;
pub mod rng;
pub mod spectrum;
pub mod spsa;
pub mod vqe;
pub mod wavefunction;

pub use error::{Error, Result};
pub use matrix::{OperatorMatrix, C64};
pub use oscillator::{build_model, Family, ModelSpec};
