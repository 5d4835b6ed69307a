//! Delay-Doppler (OTFS) link simulation and pairwise-error bound analysis.

pub mod analysis;
pub mod channel;
pub mod coding;
pub mod ddmatrix;
pub mod eigen;
pub mod error;
pub mod format;
pub mod matrix;
pub mod modem;
pub mod montecarlo;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, C64};
