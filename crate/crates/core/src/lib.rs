//! Holonomic single-qubit gates on a laser-driven four-level system coupled
//! to a bosonic bath.
//!
//! Units: energies in meV, ħ = k_B = 1, so times are in ħ/meV internally
//! (see [`units`]). Basis order is (|G⟩, |+⟩, |0⟩, |−⟩).

pub mod bath;
pub mod dynamics;
pub mod error;
pub mod fidelity;
pub mod linalg;
pub mod qsystem;
pub mod quadrature;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
