//! Classical and quantum kicked top / kicked rotor.
//!
//! The classical side provides the stroboscopic maps, their tangent maps and a
//! Kolmogorov-Sinai entropy estimator. The quantum side evolves spin coherent
//! states with the kicked-top Floquet operator in the Dicke basis and measures
//! the single-spin linear entanglement entropy, ergodicity fidelity and Husimi
//! distributions. [`scan`] runs these over grids of initial conditions.

pub mod classical;
pub mod cli;
pub mod error;
pub mod grid;
pub mod husimi;
pub mod quantum;
pub mod scan;
pub mod spin;

pub use error::{Error, Result};
