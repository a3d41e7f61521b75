//! Spectral laboratory for the linearized dissipative quasi-geostrophic operators
//! at a single x-wavenumber: operators, propagation, energy functionals, identity and
//! inequality checks, spectra and rate sweeps.

pub mod energy;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod propagator;
pub mod random;
pub mod rates;
pub mod spectral;
pub mod spectrum;

pub use error::{LabError, Result};
