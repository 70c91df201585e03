//! Real Airy function Ai, its derivative, zeros and moment integrals.
//!
//! On `[-8, 8]` values come from Taylor expansion about anchors spaced 0.25
//! apart. The anchors are generated once by stepping the ODE `y'' = x y`
//! with the same Taylor series: outward from the origin on the oscillatory
//! side and inward from `x = 8` on the decaying side, the two directions in
//! which the recurrence is stable. Beyond `|x| = 8` the standard asymptotic
//! expansions are used.

use super::quad::{integrate, QuadOptions};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

pub const AI_ORIGIN: f64 = 0.355_028_053_887_817_239_260;
pub const AI_PRIME_ORIGIN: f64 = -0.258_819_403_792_806_798_405;

const STEP: f64 = 0.25;
const REACH: f64 = 8.0;
const ANCHORS: usize = 65;
const MIN_ARGUMENT: f64 = -1e6;
pub const DEFAULT_MAX_ZERO_INDEX: usize = 64;

/// Which Airy zero sequence is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AiryKind {
    ZeroOfAi,
    ZeroOfAiPrime,
}

/// Ai and Ai' at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValue {
    pub ai: f64,
    pub ai_prime: f64,
}

fn taylor_step(x0: f64, ai: f64, aip: f64, d: f64) -> (f64, f64) {
    // y = sum c_n d^n with (n+2)(n+1) c_{n+2} = x0 c_n + c_{n-1}
    let mut c_prev2 = ai; // c_{n}
    let mut c_prev1 = aip; // c_{n+1}
    let mut c_before = 0.0; // c_{n-1}
    let mut value = ai + aip * d;
    let mut deriv = aip;
    let mut dn = d; // d^{n+1}
    let mut small = 0;
    for n in 0..200usize {
        let c_next = (x0 * c_prev2 + c_before) / (((n + 2) * (n + 1)) as f64);
        let dn1 = dn * d;
        let term = c_next * dn1;
        let dterm = (n + 2) as f64 * c_next * dn;
        value += term;
        deriv += dterm;
        if term.abs() <= 1e-18 * value.abs() && dterm.abs() <= 1e-18 * deriv.abs() {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
        c_before = c_prev2;
        c_prev2 = c_prev1;
        c_prev1 = c_next;
        dn = dn1;
    }
    (value, deriv)
}

fn asymptotic_coefficients(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0; count];
    let mut v = vec![1.0; count];
    for k in 1..count {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
    }
    (u, v)
}

fn coefficients() -> &'static (Vec<f64>, Vec<f64>) {
    static COEFFS: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    COEFFS.get_or_init(|| asymptotic_coefficients(60))
}

// Sum an asymptotic series sum_k s_k c_k t^k stopping at the smallest term.
fn truncated_sum(coeffs: &[f64], t: f64, alternating: bool, offset: usize, stride: usize) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut k = 0usize;
    loop {
        let idx = offset + stride * k;
        if idx >= coeffs.len() {
            break;
        }
        let sign = if alternating && k % 2 == 1 { -1.0 } else { 1.0 };
        let term = sign * coeffs[idx] * t.powi(idx as i32);
        if term.abs() > last {
            break;
        }
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        last = term.abs();
        k += 1;
    }
    sum
}

fn asymptotic(x: f64) -> AiryValue {
    let (u, v) = coefficients();
    if x > 0.0 {
        let zeta = 2.0 / 3.0 * x.powf(1.5);
        let t = 1.0 / zeta;
        let damp = (-zeta).exp() / (2.0 * PI.sqrt());
        let q = x.powf(0.25);
        let su = truncated_sum(u, -t, false, 0, 1);
        let sv = truncated_sum(v, -t, false, 0, 1);
        AiryValue {
            ai: damp / q * su,
            ai_prime: -damp * q * sv,
        }
    } else {
        let z = -x;
        let zeta = 2.0 / 3.0 * z.powf(1.5);
        let t = 1.0 / zeta;
        let phase = zeta - PI / 4.0;
        let (s, c) = phase.sin_cos();
        let q = z.powf(0.25);
        let ue = truncated_sum(u, t, true, 0, 2);
        let uo = truncated_sum(u, t, true, 1, 2);
        let ve = truncated_sum(v, t, true, 0, 2);
        let vo = truncated_sum(v, t, true, 1, 2);
        AiryValue {
            ai: (c * ue + s * uo) / (PI.sqrt() * q),
            ai_prime: q / PI.sqrt() * (s * ve - c * vo),
        }
    }
}

fn anchors() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = vec![(0.0, 0.0); ANCHORS];
        let origin = ANCHORS / 2;
        table[origin] = (AI_ORIGIN, AI_PRIME_ORIGIN);
        for i in (0..origin).rev() {
            let x0 = (i as f64 + 1.0) * STEP - REACH;
            let (a, ap) = table[i + 1];
            table[i] = taylor_step(x0, a, ap, -STEP);
        }
        let end = asymptotic(REACH);
        table[ANCHORS - 1] = (end.ai, end.ai_prime);
        for i in (origin + 1..ANCHORS - 1).rev() {
            let x0 = (i as f64 + 1.0) * STEP - REACH;
            let (a, ap) = table[i + 1];
            table[i] = taylor_step(x0, a, ap, -STEP);
        }
        table
    })
}

/// Value of Ai at the origin as reached by the inward sweep from `x = 8`.
/// Agreement with the Maclaurin constant measures the table's accuracy.
pub fn origin_from_decaying_side() -> AiryValue {
    let t = anchors();
    let i = ANCHORS / 2 + 1;
    let (a, ap) = taylor_step(STEP, t[i].0, t[i].1, -STEP);
    AiryValue { ai: a, ai_prime: ap }
}

pub(crate) fn airy_unchecked(x: f64) -> AiryValue {
    if x.abs() >= REACH {
        return asymptotic(x);
    }
    let pos = (x + REACH) / STEP;
    let i = pos.round() as usize;
    let x0 = i as f64 * STEP - REACH;
    let (a, ap) = anchors()[i];
    let (ai, ai_prime) = taylor_step(x0, a, ap, x - x0);
    AiryValue { ai, ai_prime }
}

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Airy argument must be finite, got {x}")));
    }
    if x < MIN_ARGUMENT {
        return Err(Error::Domain(format!("Airy argument {x} below supported range {MIN_ARGUMENT}")));
    }
    Ok(())
}

/// Ai(x) and Ai'(x) together.
pub fn airy(x: f64) -> Result<AiryValue> {
    check_argument(x)?;
    Ok(airy_unchecked(x))
}

pub fn airy_ai(x: f64) -> Result<f64> {
    airy(x).map(|v| v.ai)
}

pub fn airy_ai_prime(x: f64) -> Result<f64> {
    airy(x).map(|v| v.ai_prime)
}

fn zero_guess(kind: AiryKind, j: usize) -> f64 {
    let jf = j as f64;
    match kind {
        AiryKind::ZeroOfAi => {
            let t = 3.0 * PI / 8.0 * (4.0 * jf - 1.0);
            let t2 = t.powi(-2);
            -t.powf(2.0 / 3.0) * (1.0 + 5.0 / 48.0 * t2 - 5.0 / 36.0 * t2 * t2)
        }
        AiryKind::ZeroOfAiPrime => {
            let t = 3.0 * PI / 8.0 * (4.0 * jf - 3.0);
            let t2 = t.powi(-2);
            -t.powf(2.0 / 3.0) * (1.0 - 7.0 / 48.0 * t2 + 35.0 / 288.0 * t2 * t2)
        }
    }
}

fn target(kind: AiryKind, x: f64) -> (f64, f64) {
    let v = airy_unchecked(x);
    match kind {
        AiryKind::ZeroOfAi => (v.ai, v.ai_prime),
        AiryKind::ZeroOfAiPrime => (v.ai_prime, x * v.ai),
    }
}

/// The j-th (1-based) zero of Ai or Ai', counted from the origin.
pub fn airy_zero(kind: AiryKind, j: usize) -> Result<f64> {
    airy_zero_capped(kind, j, DEFAULT_MAX_ZERO_INDEX)
}

pub fn airy_zero_capped(kind: AiryKind, j: usize, max_index: usize) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("Airy zero index is 1-based".into()));
    }
    if j > max_index {
        return Err(Error::Capability(format!("Airy zero index {j} exceeds configured maximum {max_index}")));
    }
    let guess = zero_guess(kind, j);
    let spacing = PI / guess.abs().max(1.0).sqrt();
    let mut half = 0.3 * spacing;
    let (mut lo, mut hi);
    let mut tries = 0;
    loop {
        lo = guess - half;
        hi = (guess + half).min(0.0);
        if target(kind, lo).0.signum() != target(kind, hi).0.signum() {
            break;
        }
        tries += 1;
        if tries > 4 {
            return Err(Error::numerical(format!("no sign change bracketing Airy zero {j}"), half));
        }
        half *= 1.25;
    }
    let flo = target(kind, lo).0;
    let mut x = guess.clamp(lo, hi);
    for _ in 0..200 {
        let (f, df) = target(kind, x);
        if f == 0.0 {
            break;
        }
        if f.signum() == flo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() || hi - lo <= 4.0 * f64::EPSILON * x.abs();
        x = next;
        if done {
            break;
        }
    }
    let residual = target(kind, x).0.abs();
    if residual >= 1e-12 {
        return Err(Error::numerical(format!("Airy zero {j} did not converge"), residual));
    }
    Ok(x)
}

/// `int_0^inf v^power Ai(v + z)^2 dv` where z is the j-th zero of the given kind.
pub fn airy_moment(kind: AiryKind, j: usize, power: u32) -> Result<f64> {
    if power > 8 {
        return Err(Error::Domain(format!("moment power {power} not supported (max 8)")));
    }
    let z = airy_zero(kind, j)?;
    let integrand = |v: f64| {
        let a = airy_unchecked(v + z).ai;
        v.powi(power as i32) * a * a
    };
    // Past the turning point the integrand decays like exp(-4/3 x^{3/2}).
    let mut upper = -z;
    while integrand(upper) >= 1e-18 || upper + z < 1.0 {
        upper += 0.5;
    }
    let opts = QuadOptions { rel_tol: 1e-12, abs_tol: 1e-14, max_intervals: 4000 };
    let inner = integrate(integrand, 0.0, -z, opts)?;
    let outer = integrate(integrand, -z, upper, opts)?;
    let value = inner.value + outer.value;
    let err = (inner.error + outer.error) / value.abs();
    if !(value > 0.0) || err > 1e-10 {
        return Err(Error::numerical("Airy moment quadrature inaccurate", err));
    }
    Ok(value)
}

/// `z`, `c = int Ai(v+z)^2` and `D = (int v^4 Ai(v+z)^2 / c)^{1/2}` for one zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryConstants {
    pub kind: AiryKind,
    pub j: usize,
    pub z: f64,
    pub c: f64,
    pub d: f64,
}

impl AiryConstants {
    pub fn compute(kind: AiryKind, j: usize) -> Result<Self> {
        let z = airy_zero(kind, j)?;
        let c = airy_moment(kind, j, 0)?;
        let m4 = airy_moment(kind, j, 4)?;
        Ok(AiryConstants { kind, j, z, c, d: (m4 / c).sqrt() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Maclaurin series in Ai(0), Ai'(0): accurate to ~1e-15 for |x| <= 3.
    fn maclaurin(x: f64) -> (f64, f64) {
        let mut f = 1.0; // f-series term x^{3k} / (...)
        let mut g = x;
        let (mut fs, mut gs) = (f, g);
        let (mut fd, mut gd) = (0.0, 1.0);
        for k in 1..80 {
            let kf = k as f64;
            f *= x * x * x / ((3.0 * kf - 1.0) * (3.0 * kf));
            g *= x * x * x / ((3.0 * kf) * (3.0 * kf + 1.0));
            fs += f;
            gs += g;
            if x != 0.0 {
                fd += 3.0 * kf * f / x;
                gd += (3.0 * kf + 1.0) * g / x;
            }
        }
        (
            AI_ORIGIN * fs + AI_PRIME_ORIGIN * gs,
            AI_ORIGIN * fd + AI_PRIME_ORIGIN * gd,
        )
    }

    #[test]
    fn matches_maclaurin_near_origin() {
        for i in -50..=50 {
            let x = i as f64 * 0.05;
            let (a, ap) = maclaurin(x);
            let v = airy(x).unwrap();
            assert_abs_diff_eq!(v.ai, a, epsilon = 5e-14);
            assert_abs_diff_eq!(v.ai_prime, ap, epsilon = 5e-14);
        }
    }

    #[test]
    fn sweeps_meet_at_origin() {
        let v = origin_from_decaying_side();
        assert_abs_diff_eq!(v.ai, AI_ORIGIN, epsilon = 1e-13);
        assert_abs_diff_eq!(v.ai_prime, AI_PRIME_ORIGIN, epsilon = 1e-13);
    }

    #[test]
    fn continuous_across_expansion_switch() {
        let t = anchors();
        let left = asymptotic(-REACH);
        assert_abs_diff_eq!(t[0].0, left.ai, epsilon = 2e-15);
        assert_abs_diff_eq!(t[0].1, left.ai_prime, epsilon = 4e-15);
        for &x in &[-7.95, 7.95] {
            let a = asymptotic(x);
            let v = airy_unchecked(x);
            assert_abs_diff_eq!(v.ai, a.ai, epsilon = 1e-14);
            assert_abs_diff_eq!(v.ai_prime, a.ai_prime, epsilon = 1e-14);
        }
    }

    #[test]
    fn ode_residual() {
        let h = 2.5e-3;
        let f = |x: f64| airy_ai(x).unwrap();
        for i in -32..=32 {
            let x = i as f64 * 0.25;
            let d2 = (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h);
            assert!((d2 - x * airy_ai(x).unwrap()).abs() < 1e-9, "x = {x}: {:e}", d2 - x * airy_ai(x).unwrap());
        }
    }

    #[test]
    fn decay_and_domain() {
        let v = airy_ai(10.0).unwrap();
        assert!(v > 0.0 && v < 1e-9);
        assert!(airy_ai(-2e6).is_err());
        assert!(airy_ai(f64::NAN).is_err());
    }

    #[test]
    fn first_zeros() {
        assert_abs_diff_eq!(airy_zero(AiryKind::ZeroOfAi, 1).unwrap(), -2.338_107_410_459_767, epsilon = 1e-12);
        assert_abs_diff_eq!(airy_zero(AiryKind::ZeroOfAiPrime, 1).unwrap(), -1.018_792_971_647_471, epsilon = 1e-12);
        assert_abs_diff_eq!(airy_zero(AiryKind::ZeroOfAi, 2).unwrap(), -4.087_949_444_130_970, epsilon = 1e-12);
    }

    #[test]
    fn zeros_by_sign_scan() {
        // Independent oracle: bisection on sign changes of the Maclaurin series.
        for (kind, pick) in [(AiryKind::ZeroOfAi, 0usize), (AiryKind::ZeroOfAiPrime, 1usize)] {
            let f = |x: f64| {
                let (a, ap) = maclaurin(x);
                if pick == 0 { a } else { ap }
            };
            let mut found = Vec::new();
            let mut x = 0.0;
            while found.len() < 2 {
                let y = x - 0.01;
                if f(x).signum() != f(y).signum() {
                    let (mut lo, mut hi) = (y, x);
                    for _ in 0..60 {
                        let m = 0.5 * (lo + hi);
                        if f(m).signum() == f(lo).signum() { lo = m } else { hi = m }
                    }
                    found.push(0.5 * (lo + hi));
                }
                x = y;
            }
            for (j, z) in found.iter().enumerate() {
                assert_abs_diff_eq!(airy_zero(kind, j + 1).unwrap(), *z, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn zero_ordering_and_cap() {
        for kind in [AiryKind::ZeroOfAi, AiryKind::ZeroOfAiPrime] {
            let zs: Vec<f64> = (1..=12).map(|j| airy_zero(kind, j).unwrap()).collect();
            assert!(zs.iter().all(|&z| z < 0.0));
            assert!(zs.windows(2).all(|w| w[1] < w[0]));
        }
        assert!(airy_zero(AiryKind::ZeroOfAi, 64).is_ok());
        assert!(matches!(airy_zero(AiryKind::ZeroOfAi, 65), Err(Error::Capability(_))));
    }

    #[test]
    fn interlacing() {
        for j in 1..=10 {
            let ap = airy_zero(AiryKind::ZeroOfAiPrime, j).unwrap();
            let a = airy_zero(AiryKind::ZeroOfAi, j).unwrap();
            let ap2 = airy_zero(AiryKind::ZeroOfAiPrime, j + 1).unwrap();
            assert!(ap > a && a > ap2);
        }
    }

    #[test]
    fn moment_zero_closed_form() {
        // int_z^inf Ai^2 = Ai'(z)^2 - z Ai(z)^2
        for j in 1..=4 {
            let z = airy_zero(AiryKind::ZeroOfAi, j).unwrap();
            let v = airy(z).unwrap();
            let c = airy_moment(AiryKind::ZeroOfAi, j, 0).unwrap();
            assert!((c - v.ai_prime * v.ai_prime).abs() < 1e-10 * c);
            let zp = airy_zero(AiryKind::ZeroOfAiPrime, j).unwrap();
            let vp = airy(zp).unwrap();
            let cp = airy_moment(AiryKind::ZeroOfAiPrime, j, 0).unwrap();
            assert!((cp + zp * vp.ai * vp.ai).abs() < 1e-10 * cp);
        }
    }

    #[test]
    fn fourth_moment_by_simpson() {
        let z = airy_zero(AiryKind::ZeroOfAiPrime, 1).unwrap();
        let simpson = |n: usize| {
            let upper = 14.0;
            let h = upper / n as f64;
            let f = |v: f64| v.powi(4) * airy_unchecked(v + z).ai.powi(2);
            let mut s = f(0.0) + f(upper);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            s * h / 3.0
        };
        let fine = simpson(8000);
        assert!((fine - simpson(4000)).abs() < 1e-10 * fine);
        let m = airy_moment(AiryKind::ZeroOfAiPrime, 1, 4).unwrap();
        assert!((m - fine).abs() < 1e-9 * fine);
    }

    #[test]
    fn error_constants() {
        let c = AiryConstants::compute(AiryKind::ZeroOfAiPrime, 1).unwrap();
        assert_abs_diff_eq!(c.d, 1.37358, epsilon = 1e-4);
        let c = AiryConstants::compute(AiryKind::ZeroOfAi, 1).unwrap();
        assert_abs_diff_eq!(c.d, 3.88753, epsilon = 1e-4);
    }
}
