//! Discrete Walsh time-frequency analysis on dyadic grids.

pub mod certificate;
pub mod decompose;
pub mod dyadic;
pub mod error;
pub mod exec;
pub mod instance;
pub mod io;
pub mod linalg;
pub mod number;
pub mod operators;
pub mod signal;
pub mod timefreq;
pub mod walsh;

pub use error::{Error, Result};
