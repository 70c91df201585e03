//! Structured linear algebra used by the solvers.

pub mod band;
pub mod tridiag;

pub use band::{band_inertia, BandLdl, BandScalar, Inertia};
pub use tridiag::SymTridiagonal;
