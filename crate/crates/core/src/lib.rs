//! Real-gas thermodynamics from a Massieu-Planck potential and steady
//! adiabatic filtration of real gases in porous media.
//!
//! Every state quantity is derived from a single potential `φ(T, v)`:
//! `p = R T φ_v`, `ε = R T² φ_T`, `σ = R (φ + T φ_T)`. On top of that the
//! crate computes heat capacities and sound speed, spinodal and binodal
//! curves, isentropes, the filtration potential `Q(v)` whose composition with
//! the specific volume field is harmonic, a finite-difference Dirichlet
//! solver for that harmonic field, and a spatial phase classification.

pub mod equilibrium;
pub mod error;
pub mod filtration;
pub mod isentrope;
pub mod laplace;
pub mod models;
pub mod numeric;
pub mod phase_map;
pub mod thermo;

pub use error::{Error, Result};
pub use models::GasModel;
pub use thermo::{Applicability, KappaForm, ThermoState};
