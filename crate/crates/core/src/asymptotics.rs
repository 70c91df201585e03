//! The two asymptotic regimes of the band functions: Airy behaviour as
//! `k -> -inf` and oscillator behaviour with exponentially small splitting
//! as `k -> +inf`.

use crate::error::{Error, Result};
use crate::fiber::{solve_band, solve_bands, FieldStrength, Parity, SolverOptions};
use crate::numerics::{fit_line, LineFit};
use crate::specfun::{airy_unchecked, integrate, AiryConstants, AiryKind, QuadOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Airy kind attached to a global band index: even states see `Ai'` zeros,
/// odd states see `Ai` zeros.
pub fn airy_kind(j: usize) -> AiryKind {
    match Parity::of_band(j) {
        Parity::Even => AiryKind::ZeroOfAiPrime,
        Parity::Odd => AiryKind::ZeroOfAi,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryPrediction {
    pub j: usize,
    pub k: f64,
    pub predicted: f64,
    pub bound: f64,
    pub constants: AiryConstants,
}

impl AiryPrediction {
    pub fn new(b: FieldStrength, k: f64, j: usize) -> Result<Self> {
        if !(k < 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!("Airy regime needs k < 0, got {k}")));
        }
        if j == 0 {
            return Err(Error::Domain("band index is 1-based".into()));
        }
        let constants = AiryConstants::compute(airy_kind(j), Parity::ordinal(j))?;
        let bv = b.value();
        let scale = (2.0 * bv * k.abs()).powf(2.0 / 3.0);
        Ok(AiryPrediction {
            j,
            k,
            predicted: k * k - scale * constants.z,
            bound: constants.d * bv.powf(4.0 / 3.0) / (2.0 * k.abs()).powf(2.0 / 3.0),
            constants,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryCheck {
    pub b: FieldStrength,
    pub k: f64,
    pub j: usize,
    pub predicted: f64,
    pub measured: f64,
    pub error: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Compare `omega_j(k)` with `k^2 - (2b|k|)^{2/3} z` against the error bound.
pub fn airy_check(b: FieldStrength, k: f64, j: usize, opts: &SolverOptions) -> Result<AiryCheck> {
    let pred = AiryPrediction::new(b, k, j)?;
    let measured = solve_band(b, k, j, opts)?.omega;
    let error = (measured - pred.predicted).abs();
    Ok(AiryCheck { b, k, j, predicted: pred.predicted, measured, error, bound: pred.bound, pass: error <= pred.bound })
}

/// Whether `|k|` is deep enough that the bound is below the gap to the
/// neighbouring model levels.
pub fn airy_regime_entered(b: FieldStrength, k: f64, j: usize) -> Result<bool> {
    let here = AiryPrediction::new(b, k, j)?;
    let mut gap = f64::INFINITY;
    if j > 1 {
        gap = gap.min(here.predicted - AiryPrediction::new(b, k, j - 1)?.predicted);
    }
    gap = gap.min(AiryPrediction::new(b, k, j + 1)?.predicted - here.predicted);
    Ok(here.bound < gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryResidual {
    /// `||(h(k) - prediction) Psi||` with `h(k)` applied by finite differences.
    pub residual: f64,
    /// `||b^2 x^2 Psi||`, the same quantity through the operator identity.
    pub identity: f64,
    /// Full-line norm of the model eigenfunction.
    pub norm: f64,
    pub bound: f64,
}

/// Residual of the normalized model Airy eigenfunction under the true fiber operator.
pub fn airy_residual(b: FieldStrength, k: f64, j: usize) -> Result<AiryResidual> {
    let pred = AiryPrediction::new(b, k, j)?;
    let bv = b.value();
    let gamma = (2.0 * bv * k.abs()).cbrt();
    let AiryConstants { z, c, .. } = pred.constants;
    let norm_c = (gamma / (2.0 * c)).sqrt();
    // analytic on a neighbourhood of [0, inf), so the stencil may cross x = 0
    let psi = |x: f64| norm_c * airy_unchecked(gamma * x + z).ai;
    let h = 2e-3 / gamma;
    let apply = |x: f64| {
        let d2 = (-psi(x + 2.0 * h) + 16.0 * psi(x + h) - 30.0 * psi(x) + 16.0 * psi(x - h) - psi(x - 2.0 * h))
            / (12.0 * h * h);
        let v = (k - bv * x) * (k - bv * x);
        -d2 + (v - pred.predicted) * psi(x)
    };
    // Ai(s) < 1e-40 beyond s = 30
    let upper = (30.0 - z) / gamma;
    let opts = QuadOptions { rel_tol: 1e-12, abs_tol: 1e-30, max_intervals: 4000 };
    let quad = |f: &dyn Fn(f64) -> f64, opts| -> Result<f64> { Ok(2.0 * integrate(f, 0.0, upper, opts)?.value) };
    let norm = quad(&|x| psi(x).powi(2), opts)?.sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::numerical("model Airy eigenfunction not normalized", (norm - 1.0).abs()));
    }
    // stencil rounding leaves ~1e-9 relative noise in the integrand
    let noisy = QuadOptions { rel_tol: 1e-8, ..opts };
    let residual = quad(&|x| apply(x).powi(2), noisy)?.sqrt();
    let identity = quad(&|x| (bv * bv * x * x * psi(x)).powi(2), opts)?.sqrt();
    Ok(AiryResidual { residual, identity, norm, bound: pred.bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoCheck {
    pub b: FieldStrength,
    pub k: f64,
    pub j: usize,
    pub level: f64,
    /// `e_j - omega_j^+(k)`, positive in exact arithmetic.
    pub gap_plus: f64,
    /// `omega_j^-(k) - e_j`, positive in exact arithmetic.
    pub gap_minus: f64,
    /// Gaps smaller than this are below solver resolution and carry no sign.
    pub floor: f64,
    pub resolved: bool,
    pub pass: bool,
}

/// Solver options used for the oscillator regime, where the gaps are tiny.
pub fn ho_options(opts: &SolverOptions) -> SolverOptions {
    opts.with_richardson(3)
}

/// Sign structure of the pair `(omega_{2j-1}, omega_{2j})` around the Landau level `e_j`.
pub fn ho_check(b: FieldStrength, k: f64, j: usize, opts: &SolverOptions) -> Result<HoCheck> {
    if j == 0 {
        return Err(Error::Domain("pair index is 1-based".into()));
    }
    let o = ho_options(opts);
    let pairs = solve_bands(b, k, 2 * j, &o)?;
    let level = b.landau_level(j);
    let gap_plus = level - pairs[2 * j - 2].omega;
    let gap_minus = pairs[2 * j - 1].omega - level;
    let floor = 1e-11 * level;
    let resolved = gap_plus > floor && gap_minus > floor;
    let pass = gap_plus > -floor && gap_minus > -floor;
    Ok(HoCheck { b, k, j, level, gap_plus, gap_minus, floor, resolved, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingSample {
    pub k: f64,
    pub splitting: f64,
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingFit {
    pub b: FieldStrength,
    pub j: usize,
    pub samples: Vec<SplittingSample>,
    /// Slope of `ln(omega^- - omega^+)` against `k^2/b`.
    pub rate: f64,
    pub fit: LineFit,
    /// Smallest `C` with `splitting <= 2 C b exp(-k^2/(4b))` on the used samples.
    pub fitted_c: f64,
    pub pass: bool,
}

/// Log-linear fit of the pair splitting. Samples below `1e-13 b` are recorded but not fitted.
pub fn splitting_fit(b: FieldStrength, j: usize, k_samples: &[f64], opts: &SolverOptions) -> Result<SplittingFit> {
    if j == 0 {
        return Err(Error::Domain("pair index is 1-based".into()));
    }
    let o = ho_options(opts);
    let bv = b.value();
    let split: Vec<f64> = k_samples
        .par_iter()
        .map(|&k| {
            let p = solve_bands(b, k, 2 * j, &o)?;
            Ok(p[2 * j - 1].omega - p[2 * j - 2].omega)
        })
        .collect::<Result<_>>()?;
    let floor = 1e-13 * bv;
    let samples: Vec<SplittingSample> = k_samples
        .iter()
        .zip(&split)
        .map(|(&k, &s)| SplittingSample { k, splitting: s, used: s > floor })
        .collect();
    if let Some(s) = samples.iter().find(|s| s.splitting < -floor) {
        return Err(Error::Invariant(format!("negative splitting {} at k = {}", s.splitting, s.k)));
    }
    let used: Vec<&SplittingSample> = samples.iter().filter(|s| s.used).collect();
    if used.len() < 2 {
        return Err(Error::Fit(format!(
            "splitting below {floor:e} at all but {} samples; use smaller k",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|s| s.k * s.k / bv).collect();
    let ys: Vec<f64> = used.iter().map(|s| s.splitting.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    let fitted_c = used
        .iter()
        .map(|s| s.splitting / (2.0 * bv * (-s.k * s.k / (4.0 * bv)).exp()))
        .fold(0.0, f64::max);
    let pass = fit.slope <= -0.25 + 0.05;
    Ok(SplittingFit { b, j, samples, rate: fit.slope, fit, fitted_c, pass })
}
