//! Banded symmetric / Hermitian LDL factorizations.
//!
//! Rows are supplied by a callback `row(i, buf)` that writes the lower band
//! of row `i` as `buf[d] = A[i][i - d]` for `d = 0..=bw` (entries with
//! `i < d` are ignored).

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

pub trait BandScalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl BandScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl BandScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Inertia of a banded Hermitian matrix by left-looking `L D L^H` without
/// pivoting. Only the last `bw` rows of `L` are kept, so memory is `O(bw^2)`.
pub fn band_inertia<T, F>(n: usize, bw: usize, row: F) -> Result<Inertia>
where
    T: BandScalar,
    F: Fn(usize, &mut [T]),
{
    let width = bw + 1;
    // ring[r % width][t] = W(r, r - bw + t) = L(r, c) * D(c), t in 0..bw
    let mut ring_w = vec![T::zero(); width * bw.max(1)];
    let mut ring_l = vec![T::zero(); width * bw.max(1)];
    let mut ring_d = vec![0.0f64; width];
    let mut a = vec![T::zero(); width];
    let mut inertia = Inertia { negative: 0, zero: 0, positive: 0 };
    let mut scale = 0.0f64;
    for j in 0..n {
        a.iter_mut().for_each(|v| *v = T::zero());
        row(j, &mut a);
        let first = j.saturating_sub(bw);
        let slot_j = j % width;
        // entries L(j, c) for c in first..j
        for c in first..j {
            let slot_c = c % width;
            let mut s = a[j - c];
            let lo = first.max(c.saturating_sub(bw));
            for m in lo..c {
                // W(j,m) conj(L(c,m))
                let wjm = ring_w[slot_j * bw + (m + bw - j)];
                let lcm = ring_l[slot_c * bw + (m + bw - c)];
                s = s - wjm * lcm.conj();
            }
            let dc = ring_d[slot_c];
            let l = s.scale(1.0 / dc);
            ring_l[slot_j * bw + (c + bw - j)] = l;
            ring_w[slot_j * bw + (c + bw - j)] = s;
        }
        let mut d = a[0].re();
        for c in first..j {
            let t = c + bw - j;
            let w = ring_w[slot_j * bw + t];
            let l = ring_l[slot_j * bw + t];
            d -= (w * l.conj()).re();
        }
        scale = scale.max(a[0].re().abs());
        if !d.is_finite() || d.abs() <= 1e3 * f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::numerical(format!("pivot breakdown at row {j}"), d));
        }
        ring_d[slot_j] = d;
        if d < 0.0 {
            inertia.negative += 1;
        } else {
            inertia.positive += 1;
        }
        // clear columns that fall outside the band of later rows
        for t in 0..bw.saturating_sub(j - first) {
            ring_w[slot_j * bw + t] = T::zero();
            ring_l[slot_j * bw + t] = T::zero();
        }
    }
    Ok(inertia)
}

/// Real symmetric banded `L D L^T` keeping the full factor for repeated solves.
#[derive(Debug, Clone)]
pub struct BandLdl {
    n: usize,
    bw: usize,
    // l[i * bw + t] = L(i, i - bw + t)
    l: Vec<f64>,
    d: Vec<f64>,
}

impl BandLdl {
    pub fn factor<F: Fn(usize, &mut [f64])>(n: usize, bw: usize, row: F) -> Result<Self> {
        let bwm = bw.max(1);
        let mut l = vec![0.0; n * bwm];
        let mut w = vec![0.0; n * bwm];
        let mut dvec = vec![0.0; n];
        let mut a = vec![0.0; bw + 1];
        let mut scale = 0.0f64;
        for j in 0..n {
            a.iter_mut().for_each(|v| *v = 0.0);
            row(j, &mut a);
            let first = j.saturating_sub(bw);
            for c in first..j {
                let mut s = a[j - c];
                let lo = first.max(c.saturating_sub(bw));
                let wj = &w[j * bwm..];
                let lc = &l[c * bwm..];
                for m in lo..c {
                    s -= wj[m + bw - j] * lc[m + bw - c];
                }
                w[j * bwm + c + bw - j] = s;
                l[j * bwm + c + bw - j] = s / dvec[c];
            }
            let mut d = a[0];
            for c in first..j {
                let t = c + bw - j;
                d -= w[j * bwm + t] * l[j * bwm + t];
            }
            scale = scale.max(a[0].abs());
            if !d.is_finite() || d.abs() <= 1e3 * f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::numerical(format!("pivot breakdown at row {j}"), d));
            }
            dvec[j] = d;
        }
        Ok(BandLdl { n, bw, l, d: dvec })
    }

    pub fn inertia(&self) -> Inertia {
        let negative = self.d.iter().filter(|&&d| d < 0.0).count();
        Inertia { negative, zero: 0, positive: self.n - negative }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let bwm = bw.max(1);
        let mut x = rhs.to_vec();
        for j in 0..n {
            let first = j.saturating_sub(bw);
            let mut s = x[j];
            for c in first..j {
                s -= self.l[j * bwm + c + bw - j] * x[c];
            }
            x[j] = s;
        }
        for j in 0..n {
            x[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let xj = x[j];
            let first = j.saturating_sub(bw);
            for c in first..j {
                x[c] -= self.l[j * bwm + c + bw - j] * xj;
            }
        }
        x
    }
}
