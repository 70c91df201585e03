//! Spectral analysis of the magnetic-barrier operator
//! `H0 = p_x^2 + (p_y - b|x|)^2` and its perturbations.

pub mod asymptotics;
pub mod bands;
pub mod counting;
pub mod error;
pub mod fiber;
pub mod linalg;
pub mod localization;
pub mod mourre;
pub mod numerics;
pub mod specfun;

pub use error::{Error, ErrorCategory, Result};
pub use fiber::{EigenPair, FieldStrength, FiberProblem, Grid, Parity, SolverOptions};
