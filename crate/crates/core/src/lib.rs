//! Subentropy and its relatives: von Neumann, min- and max-relative
//! entropies, conditional subentropy, guessing probabilities and classical
//! channel quantities, with seeded Monte Carlo estimators and property
//! verification suites.

pub mod classical;
pub mod entropy;
pub mod error;
pub mod guessing;
pub mod montecarlo;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
