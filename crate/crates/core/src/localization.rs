//! Gaussian decay envelope of fiber eigenfunctions and strip localization of edge states.

use crate::error::{Error, Result};
use crate::fiber::{EigenPair, FieldStrength, Parity, SolverOptions};
use crate::mourre::{FiberState, ModeBasis, MourreReport};
use crate::specfun::erfc;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Onset `x_n` of the envelope: the smallest `x_n >= 0` with
/// `(b|x| - k)^2 - omega >= b^2 (|x| - x_n)^2` for `|x| >= x_n`.
pub fn turning_point(k: f64, b: FieldStrength, omega: f64) -> f64 {
    (k.max(0.0) + omega.max(0.0).sqrt()) / b.value()
}

/// `(2b/pi)^{1/4} exp(-b (|x| - x_n)^2 / 2)`.
pub fn envelope(b: FieldStrength, x_n: f64, x: f64) -> f64 {
    let bv = b.value();
    (2.0 * bv / PI).powf(0.25) * (-0.5 * bv * (x.abs() - x_n).powi(2)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationCheck {
    pub j: usize,
    pub k: f64,
    pub b: FieldStrength,
    pub x_n: f64,
    pub envelope_ok: bool,
    /// `max |psi| / envelope` over grid nodes with `|x| >= x_n`.
    pub max_ratio: f64,
    /// `|psi(x_n)|`, linearly interpolated.
    pub psi_at_onset: f64,
    pub prefactor_ok: bool,
    /// Envelope bound on the mass beyond the truncation wall.
    pub tail_bound: f64,
}

pub const ENVELOPE_TOLERANCE: f64 = 1e-6;

fn check_pair(pair: &EigenPair, b: FieldStrength, k: f64) -> Result<()> {
    if pair.b != b || pair.k != k {
        return Err(Error::Precondition(format!("pair solved at (b, k) = ({}, {}), not ({}, {k})", pair.b.value(), pair.k, b.value())));
    }
    Ok(())
}

/// Grid samples `(x, |psi|, envelope)` for `x >= 0`.
pub fn envelope_profile(pair: &EigenPair) -> Vec<(f64, f64, f64)> {
    let x_n = turning_point(pair.k, pair.b, pair.omega);
    (0..pair.psi.len())
        .map(|i| {
            let x = pair.grid.node(i);
            (x, pair.psi[i].abs(), envelope(pair.b, x_n, x))
        })
        .collect()
}

/// `sqrt(2) erfc(sqrt(b) (L - x_n))`: envelope mass on both sides beyond `|x| = L`.
pub fn tail_bound(pair: &EigenPair) -> f64 {
    let x_n = turning_point(pair.k, pair.b, pair.omega);
    SQRT_2 * erfc(pair.b.value().sqrt() * (pair.grid.length - x_n))
}

pub fn envelope_check(pair: &EigenPair, b: FieldStrength, k: f64) -> Result<LocalizationCheck> {
    check_pair(pair, b, k)?;
    let x_n = turning_point(k, b, pair.omega);
    let mut max_ratio = 0.0f64;
    for (x, a, env) in envelope_profile(pair) {
        if x >= x_n {
            max_ratio = max_ratio.max(a / env);
        }
    }
    let h = pair.grid.spacing();
    let i = ((x_n / h).floor() as usize).min(pair.psi.len() - 2);
    let t = (x_n / h - i as f64).clamp(0.0, 1.0);
    let psi_at_onset = ((1.0 - t) * pair.psi[i] + t * pair.psi[i + 1]).abs();
    let prefactor_ok = psi_at_onset <= (2.0 * b.value() / PI).powf(0.25);
    Ok(LocalizationCheck {
        j: pair.j,
        k,
        b,
        x_n,
        envelope_ok: max_ratio <= 1.0 + ENVELOPE_TOLERANCE,
        max_ratio,
        psi_at_onset,
        prefactor_ok,
        tail_bound: tail_bound(pair),
    })
}

/// Mass of `psi^2` in `|x| <= half_width`, by node partition of the trapezoid sum.
pub fn mass_within(pair: &EigenPair, half_width: f64) -> f64 {
    let h = pair.grid.spacing();
    let mut s = 0.0;
    for (i, p) in pair.psi.iter().enumerate() {
        if pair.grid.node(i) > half_width {
            break;
        }
        let w = if i == 0 && pair.parity == Parity::Even { 0.5 } else { 1.0 };
        s += w * p * p;
    }
    2.0 * h * s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripMass {
    pub epsilon: f64,
    /// `b^{-1/2 + epsilon}`.
    pub half_width: f64,
    pub inside: f64,
    pub outside: f64,
    /// `1 - sqrt(2) exp(-b^epsilon)`.
    pub bound: f64,
    pub pass: bool,
}

/// Fraction of a normalized fiber state inside the strip `|x| <= b^{-1/2 + epsilon}`.
pub fn strip_mass(state: &FiberState, basis: &ModeBasis, epsilon: f64) -> Result<StripMass> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let norm = state.norm_sq(basis)?;
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("state norm^2 = {norm}, expected 1")));
    }
    let bv = basis.b.value();
    let half_width = bv.powf(epsilon - 0.5);
    let (mut inside, mut outside) = (0.0, 0.0);
    for sb in &state.bands {
        let m = basis.band(sb.j).ok_or_else(|| Error::Precondition(format!("band {} not in the basis", sb.j)))?;
        for ((a, w), pair) in sb.modulus.iter().zip(&m.weights).zip(&m.pairs) {
            let mi = mass_within(pair, half_width);
            inside += w * a * a * mi;
            outside += w * a * a * (1.0 - mi);
        }
    }
    let bound = 1.0 - SQRT_2 * (-bv.powf(epsilon)).exp();
    Ok(StripMass { epsilon, half_width, inside, outside, bound, pass: inside >= bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSample {
    pub b: f64,
    /// Smallest `inside - bound` over the sampled states.
    pub worst_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripThreshold {
    pub epsilon: f64,
    pub samples: Vec<ThresholdSample>,
    /// Smallest scanned `b` from which every larger scanned `b` passes.
    pub b_tilde: Option<f64>,
}

/// Field strengths scanned for the empirical strip threshold.
pub const THRESHOLD_SCAN: [f64; 4] = [10.0, 30.0, 100.0, 300.0];

/// Scan `b` for the strip-localization threshold with `states` random states per `b`.
pub fn strip_threshold(report: &MourreReport, epsilon: f64, states: usize, nodes: usize, seed: u64, opts: &SolverOptions) -> Result<StripThreshold> {
    let mut samples = Vec::new();
    for &bv in &THRESHOLD_SCAN {
        let b = FieldStrength::new(bv)?;
        let r = report.rescaled(b);
        let basis = ModeBasis::build(&r, nodes, opts)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..states {
            let s = FiberState::random(&basis, &mut rng).normalized(&basis)?;
            let m = strip_mass(&s, &basis, epsilon)?;
            worst = worst.min(m.inside - m.bound);
        }
        samples.push(ThresholdSample { b: bv, worst_margin: worst, pass: worst >= 0.0 });
    }
    let b_tilde = (0..samples.len()).find(|&i| samples[i..].iter().all(|s| s.pass)).map(|i| samples[i].b);
    Ok(StripThreshold { epsilon, samples, b_tilde })
}
