//! First-order variational perturbation theory for a hydrogen atom in a
//! uniform magnetic field.
//!
//! Natural units: ħ = M = e²/4πε₀ = k_B = 1. Energies are in units of
//! 2 Ryd, lengths in Bohr radii, and the cyclotron frequency equals B.

pub mod acceptance;
pub mod effective_potential;
pub mod error;
pub mod exact_field;
pub mod greens;
pub mod jet;
pub mod optimizer;
pub mod quadrature;
pub mod smearing;
pub mod strong_field;
pub mod weak_field;

pub use error::{Result, VptError};
