//! Normalized Hermite (oscillator) functions.

use crate::error::{ensure_positive, Error, Result};
use std::f64::consts::PI;

pub const MAX_HERMITE_DEGREE: usize = 60;

/// Normalized Hermite function `phi_j(xi) = (2^j j! sqrt(pi))^{-1/2} H_j(xi) e^{-xi^2/2}`.
///
/// Runs the orthonormal three-term recurrence without the Gaussian factor and
/// applies that factor in log-space at the end, with periodic rescaling.
pub fn hermite_function(j: usize, xi: f64) -> Result<f64> {
    if j > MAX_HERMITE_DEGREE {
        return Err(Error::Capability(format!("Hermite degree {j} exceeds {MAX_HERMITE_DEGREE}")));
    }
    if !xi.is_finite() {
        return Err(Error::Domain(format!("Hermite argument must be finite, got {xi}")));
    }
    let mut log_scale = -0.5 * xi * xi;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    for n in 0..j {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * xi * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        let m = cur.abs();
        if m > 1e150 || (m < 1e-150 && m > 0.0) {
            log_scale += m.ln();
            prev /= m;
            cur /= m;
        }
    }
    if cur == 0.0 {
        return Ok(0.0);
    }
    Ok(cur.signum() * (cur.abs().ln() + log_scale).exp())
}

/// Oscillator eigenfunction centred at `x = k/b` with magnetic length `b^{-1/2}`.
pub fn hermite_eigenfunction(j: usize, b: f64, x: f64, k: f64) -> Result<f64> {
    ensure_positive("b", b)?;
    let sb = b.sqrt();
    Ok(b.powf(0.25) * hermite_function(j, sb * (x - k / b))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn peak_values() {
        for &b in &[1.0, 4.0, 9.0] {
            let k = 1.3;
            assert_abs_diff_eq!(hermite_eigenfunction(0, b, k / b, k).unwrap(), (b / PI).powf(0.25), epsilon = 1e-15);
            assert_eq!(hermite_eigenfunction(1, b, k / b, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn explicit_low_degrees() {
        let xi: f64 = 0.7;
        let g = PI.powf(-0.25) * (-xi * xi / 2.0).exp();
        assert_abs_diff_eq!(hermite_function(2, xi).unwrap(), g * (4.0 * xi * xi - 2.0) / (8.0f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            hermite_function(3, xi).unwrap(),
            g * (8.0 * xi.powi(3) - 12.0 * xi) / (48.0f64).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn orthonormal_on_grid() {
        let h = 0.01;
        let xs: Vec<f64> = (-1500..=1500).map(|i| i as f64 * h).collect();
        let vals: Vec<Vec<f64>> = (0..=8)
            .map(|j| xs.iter().map(|&x| hermite_eigenfunction(j, 1.0, x, 0.0).unwrap()).collect())
            .collect();
        for i in 0..=8 {
            for j in 0..=8 {
                let ip: f64 = vals[i].iter().zip(&vals[j]).map(|(a, b)| a * b).sum::<f64>() * h;
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(ip, expect, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn high_degree_no_overflow() {
        let v = hermite_function(60, 30.0).unwrap();
        assert!(v.is_finite());
        let v = hermite_function(60, 5.0).unwrap();
        assert!(v.is_finite() && v.abs() < 1.0);
        assert!(hermite_function(61, 0.0).is_err());
        assert!(hermite_eigenfunction(0, 0.0, 0.0, 0.0).is_err());
    }
}
