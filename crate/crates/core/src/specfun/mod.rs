//! Special functions: Airy, Hermite, Beta, and adaptive quadrature.

mod airy;
mod hermite;
pub mod quad;

pub use airy::{
    airy, airy_ai, airy_ai_prime, airy_moment, airy_zero, airy_zero_capped, origin_from_decaying_side,
    AiryConstants, AiryKind, AiryValue, AI_ORIGIN, AI_PRIME_ORIGIN, DEFAULT_MAX_ZERO_INDEX,
};
#[allow(unused_imports)]
pub(crate) use airy::airy_unchecked;
pub use hermite::{hermite_eigenfunction, hermite_function, MAX_HERMITE_DEGREE};
pub use quad::{integrate, QuadOptions, QuadResult};

use crate::error::{ensure_positive, Result};

/// Natural log of the Euler Beta function.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    ensure_positive("a", a)?;
    ensure_positive("b", b)?;
    Ok(statrs::function::beta::ln_beta(a, b))
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}
