//! Band functions over a k-grid: derivatives, minima and effective masses.

use crate::error::{Error, Result};
use crate::fiber::{richardson, solve_band, solve_bands, EigenPair, FieldStrength, Parity, SolverOptions};
use crate::numerics::{brent_root, five_point_first, five_point_second};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSample {
    pub k: f64,
    pub omega: f64,
    pub domega_fh: f64,
    pub domega_bd: f64,
    pub psi0: f64,
    pub dpsi0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandTable {
    pub b: FieldStrength,
    pub ks: Vec<f64>,
    /// `bands[j - 1][i]` is band `j` at `ks[i]`.
    pub bands: Vec<Vec<BandSample>>,
    pub parities: Vec<Parity>,
}

impl BandTable {
    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn omega(&self, j: usize) -> Vec<f64> {
        self.bands[j - 1].iter().map(|s| s.omega).collect()
    }
}

fn check_pair(pair: &EigenPair, b: FieldStrength, k: f64) -> Result<()> {
    if pair.b != b || pair.k != k {
        return Err(Error::Precondition(format!(
            "pair solved at (b, k) = ({}, {}) used with ({}, {k})",
            pair.b.value(),
            pair.k,
            b.value()
        )));
    }
    Ok(())
}

/// Feynman-Hellmann derivative `int 2 (k - b|x|) psi^2`, extrapolated over grid levels.
pub fn derivative_fh(pair: &EigenPair, b: FieldStrength, k: f64) -> Result<f64> {
    check_pair(pair, b, k)?;
    Ok(richardson(&pair.fh_levels))
}

/// Boundary formula `(-2/b) [(omega - k^2) psi(0)^2 + psi'(0)^2]`.
pub fn derivative_boundary(pair: &EigenPair, b: FieldStrength, k: f64) -> Result<f64> {
    check_pair(pair, b, k)?;
    let bv = b.value();
    Ok(-2.0 / bv * ((pair.omega - k * k) * pair.psi0 * pair.psi0 + pair.dpsi0 * pair.dpsi0))
}

pub fn sample_from_pair(pair: &EigenPair) -> Result<BandSample> {
    Ok(BandSample {
        k: pair.k,
        omega: pair.omega,
        domega_fh: derivative_fh(pair, pair.b, pair.k)?,
        domega_bd: derivative_boundary(pair, pair.b, pair.k)?,
        psi0: pair.psi0,
        dpsi0: pair.dpsi0,
    })
}

/// All `n_bands` samples at one wave number.
pub fn sample_bands(b: FieldStrength, k: f64, n_bands: usize, opts: &SolverOptions) -> Result<Vec<BandSample>> {
    solve_bands(b, k, n_bands, opts)?.iter().map(sample_from_pair).collect()
}

/// Value of band `j` at `k`.
pub fn band_value(b: FieldStrength, k: f64, j: usize, opts: &SolverOptions) -> Result<f64> {
    Ok(solve_band(b, k, j, opts)?.omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub solver: SolverOptions,
    /// Rounds of adaptive midpoint insertion.
    pub refine_rounds: usize,
    /// Refine where the second difference exceeds this multiple of its median.
    pub refine_factor: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { solver: SolverOptions::default(), refine_rounds: 2, refine_factor: 10.0 }
    }
}

fn solve_columns(b: FieldStrength, ks: &[f64], n_bands: usize, opts: &SolverOptions) -> Result<Vec<Vec<BandSample>>> {
    ks.par_iter().map(|&k| sample_bands(b, k, n_bands, opts)).collect()
}

/// Sample `n_bands` band functions on `[k_min, k_max]` with adaptive refinement.
pub fn trace(b: FieldStrength, k_min: f64, k_max: f64, n_bands: usize, base_samples: usize, opts: &TraceOptions) -> Result<BandTable> {
    if !(k_min.is_finite() && k_max.is_finite()) || k_min > k_max {
        return Err(Error::Domain(format!("invalid k-range [{k_min}, {k_max}]")));
    }
    if n_bands == 0 {
        return Err(Error::Domain("n_bands must be positive".into()));
    }
    let ks: Vec<f64> = if k_min == k_max || base_samples <= 1 {
        vec![k_min]
    } else {
        (0..base_samples).map(|i| k_min + (k_max - k_min) * i as f64 / (base_samples - 1) as f64).collect()
    };
    let mut columns: Vec<(f64, Vec<BandSample>)> = ks.iter().cloned().zip(solve_columns(b, &ks, n_bands, &opts.solver)?).collect();

    for _ in 0..opts.refine_rounds {
        if columns.len() < 3 {
            break;
        }
        let n = columns.len();
        let mut curvature = vec![0.0f64; n];
        for i in 1..n - 1 {
            let (k0, k1, k2) = (columns[i - 1].0, columns[i].0, columns[i + 1].0);
            for j in 0..n_bands {
                let (w0, w1, w2) = (columns[i - 1].1[j].omega, columns[i].1[j].omega, columns[i + 1].1[j].omega);
                let dd = 2.0 * ((w2 - w1) / (k2 - k1) - (w1 - w0) / (k1 - k0)) / (k2 - k0);
                curvature[i] = curvature[i].max(dd.abs());
            }
        }
        let mut sorted: Vec<f64> = curvature[1..n - 1].to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let mut new_ks = Vec::new();
        for i in 1..n - 1 {
            if curvature[i] > opts.refine_factor * median {
                new_ks.push(0.5 * (columns[i - 1].0 + columns[i].0));
                new_ks.push(0.5 * (columns[i].0 + columns[i + 1].0));
            }
        }
        new_ks.sort_by(f64::total_cmp);
        new_ks.dedup();
        if new_ks.is_empty() {
            break;
        }
        let added = solve_columns(b, &new_ks, n_bands, &opts.solver)?;
        columns.extend(new_ks.into_iter().zip(added));
        columns.sort_by(|a, c| a.0.total_cmp(&c.0));
    }

    let ks: Vec<f64> = columns.iter().map(|c| c.0).collect();
    let mut bands = vec![Vec::with_capacity(ks.len()); n_bands];
    for (_, col) in columns {
        for (j, s) in col.into_iter().enumerate() {
            bands[j].push(s);
        }
    }
    for i in 0..ks.len() {
        for j in 1..n_bands {
            if !(bands[j][i].omega > bands[j - 1][i].omega) {
                return Err(Error::Invariant(format!("bands {} and {} cross at k = {}", j, j + 1, ks[i])));
            }
        }
    }
    Ok(BandTable { b, ks, bands, parities: (1..=n_bands).map(Parity::of_band).collect() })
}

/// Location and curvature of the unique minimum of an even band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimumRecord {
    /// Even-band ordinal; the global band index is `2j - 1`.
    pub j: usize,
    pub kappa: f64,
    pub energy: f64,
    pub beta: f64,
    pub psi0_at_kappa: f64,
}

/// Locate `kappa_j` as the root of `omega_{2j-1}(k) - k^2` on `(0, sqrt(e_{2j-1}))`.
pub fn find_minimum(j: usize, b: FieldStrength, opts: &SolverOptions) -> Result<MinimumRecord> {
    if j == 0 {
        return Err(Error::Domain("even-band ordinal is 1-based".into()));
    }
    let band = 2 * j - 1;
    let hi = b.landau_level(band).sqrt();
    let g = |k: f64| -> Result<f64> { Ok(band_value(b, k, band, opts)? - k * k) };
    let kappa = brent_root(g, 0.0, hi, 1e-12 * b.value().sqrt())
        .map_err(|e| Error::Invariant(format!("minimum of even band {j} not bracketed: {e}")))?;
    let pair = solve_band(b, kappa, band, opts)?;
    let energy = kappa * kappa;
    let mismatch = (pair.omega - energy).abs();
    if mismatch > 1e-8 * b.value() {
        return Err(Error::numerical(format!("omega(kappa_{j}) differs from kappa^2"), mismatch));
    }
    if !(energy > b.landau_level(j - 1) && energy < b.landau_level(j)) {
        return Err(Error::Invariant(format!("E_{j} = {energy} outside its Landau window")));
    }
    let beta = 2.0 * kappa / b.value() * pair.psi0 * pair.psi0;
    Ok(MinimumRecord { j, kappa, energy, beta, psi0_at_kappa: pair.psi0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveMass {
    pub closed_form: f64,
    pub finite_difference: f64,
    pub relative_gap: f64,
}

/// Effective mass `omega''(kappa)/2` by the closed form and by a 5-point stencil.
pub fn effective_mass(record: &MinimumRecord, b: FieldStrength, opts: &SolverOptions) -> Result<EffectiveMass> {
    let band = 2 * record.j - 1;
    let h = 1e-2 * b.value().sqrt();
    let fd = 0.5 * five_point_second(|k| band_value(b, k, band, opts), record.kappa, h)?;
    let closed = record.beta;
    let gap = (closed - fd).abs() / closed.abs().max(fd.abs());
    if !(closed > 0.0 && fd > 0.0) {
        return Err(Error::Invariant(format!("nonpositive effective mass: closed {closed}, fd {fd}")));
    }
    if gap > 1e-3 {
        return Err(Error::numerical(format!("effective mass routes disagree: closed {closed}, fd {fd}"), gap));
    }
    Ok(EffectiveMass { closed_form: closed, finite_difference: fd, relative_gap: gap })
}

/// Central 5-point derivative of band `j` at `k`.
pub fn derivative_fd(b: FieldStrength, k: f64, j: usize, h: f64, opts: &SolverOptions) -> Result<f64> {
    five_point_first(|x| band_value(b, x, j, opts), k, h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub j: usize,
    pub k: f64,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub violations: Vec<Violation>,
    /// Discrete argmin of each even band, `(j, k)` with `j` global.
    pub argmins: Vec<(usize, f64)>,
}

impl MonotonicityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn noise(w: f64) -> f64 {
    1e-11 * w.abs().max(1.0)
}

/// Check odd bands for strict decrease and even bands for a single minimum.
/// Differences below the solver noise floor are judged by the sign of the
/// boundary-formula derivative instead.
pub fn monotonicity_report(table: &BandTable) -> MonotonicityReport {
    let mut violations = Vec::new();
    let mut argmins = Vec::new();
    for (idx, band) in table.bands.iter().enumerate() {
        let j = idx + 1;
        let n = band.len();
        match table.parities[idx] {
            Parity::Odd => {
                for i in 0..n.saturating_sub(1) {
                    let (a, c) = (&band[i], &band[i + 1]);
                    let diff = c.omega - a.omega;
                    let tol = noise(a.omega);
                    let bad = if diff.abs() > tol { diff > 0.0 } else { a.domega_bd >= 0.0 || c.domega_bd >= 0.0 };
                    if bad {
                        violations.push(Violation { j, k: a.k, kind: "odd band not strictly decreasing".into() });
                    }
                }
                if let Some(s) = band.iter().find(|s| !(s.domega_bd < 0.0)) {
                    violations.push(Violation { j, k: s.k, kind: "odd band derivative not negative".into() });
                }
            }
            Parity::Even => {
                if n == 0 {
                    continue;
                }
                let imin = (0..n).min_by(|&a, &c| band[a].omega.total_cmp(&band[c].omega)).unwrap();
                argmins.push((j, band[imin].k));
                for i in 0..n - 1 {
                    let (a, c) = (&band[i], &band[i + 1]);
                    let diff = c.omega - a.omega;
                    let tol = noise(a.omega);
                    let bad = if i < imin {
                        if diff.abs() > tol { diff > 0.0 } else { a.domega_bd > 0.0 }
                    } else if diff.abs() > tol {
                        diff < 0.0
                    } else {
                        c.domega_bd < 0.0
                    };
                    if bad {
                        violations.push(Violation { j, k: a.k, kind: "even band not single-minimum shaped".into() });
                    }
                }
                let plateau = band.iter().filter(|s| s.omega - band[imin].omega <= noise(s.omega)).count();
                if plateau > 3 {
                    violations.push(Violation { j, k: band[imin].k, kind: format!("argmin plateau of {plateau} samples") });
                }
                // derivative sign flips exactly once
                let signs: Vec<f64> = band.iter().map(|s| s.domega_bd).filter(|d| *d != 0.0).map(f64::signum).collect();
                let flips = signs.windows(2).filter(|w| w[0] != w[1]).count();
                let ends_ok = signs.first().is_none_or(|&s| s < 0.0 || band[0].k >= band[imin].k);
                if flips > 1 || !ends_ok {
                    violations.push(Violation { j, k: band[imin].k, kind: format!("derivative sign flips {flips} times") });
                }
            }
        }
    }
    MonotonicityReport { violations, argmins }
}

/// Qualitative features of a traced band diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSummary {
    pub n_bands: usize,
    /// Every band has negative slope at the left end of the trace.
    pub decreasing_at_left: bool,
    /// Refined minima `(j, kappa_j, |omega(kappa_j) - kappa_j^2|)` of even bands
    /// whose sampled minimum is interior to the trace.
    pub minima: Vec<(usize, f64, f64)>,
}

impl FigureSummary {
    pub fn minima_in(&self, lo: f64, hi: f64) -> usize {
        self.minima.iter().filter(|m| m.1 > lo && m.1 < hi).count()
    }

    pub fn max_parabola_gap(&self) -> f64 {
        self.minima.iter().map(|m| m.2).fold(0.0, f64::max)
    }
}

pub fn figure_summary(table: &BandTable, opts: &SolverOptions) -> Result<FigureSummary> {
    let decreasing_at_left = table.bands.iter().all(|b| b.first().is_some_and(|s| s.domega_bd < 0.0));
    let mut minima = Vec::new();
    for (idx, band) in table.bands.iter().enumerate() {
        if table.parities[idx] != Parity::Even || band.len() < 3 {
            continue;
        }
        let imin = (0..band.len()).min_by(|&a, &c| band[a].omega.total_cmp(&band[c].omega)).unwrap();
        if imin == 0 || imin == band.len() - 1 {
            continue;
        }
        let rec = find_minimum(Parity::ordinal(idx + 1), table.b, opts)?;
        let omega = band_value(table.b, rec.kappa, idx + 1, opts)?;
        minima.push((idx + 1, rec.kappa, (omega - rec.kappa * rec.kappa).abs()));
    }
    Ok(FigureSummary { n_bands: table.n_bands(), decreasing_at_left, minima })
}
