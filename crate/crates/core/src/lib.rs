//! Numerical toolkit for symmetric random-state ensembles: sector bases,
//! Haar/Clifford/phase-permutation sampling, correlator diagnostics and
//! Weingarten moment calculus.

pub mod error;
pub mod linalg;
pub mod sectors;
pub mod ensembles;
pub mod diagnostics;
pub mod weingarten;
pub mod experiments;

pub use error::{Error, Result};
