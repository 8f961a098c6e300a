//! Simulation and verification of randomizing devices: a pendulum balanced
//! on its separatrix, Heisenberg spin chains near symmetry breaking, and the
//! counting argument that turns Hamiltonian symmetries into outcome
//! probabilities.

pub mod born;
pub mod harness;
pub mod numeric;
pub mod pendulum;
pub mod quadrature;
pub mod spinchain;
pub mod tolerances;
