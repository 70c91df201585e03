//! Spectral windows between Landau levels, Mourre constants, fiber-space
//! edge currents and the perturbation budget.

mod edge2d;

pub use edge2d::{edge_current_2d, Box2d, EdgeCurrent2d, Perturbation2d};

use crate::bands::{derivative_fh, find_minimum, MinimumRecord};
use crate::error::{Error, Result};
use crate::fiber::{solve_band, EigenPair, FieldStrength, SolverOptions};
use crate::numerics::{brent_root, golden_min};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Which reading of the `d_n(E)` formula caps the `delta_0` search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DnReading {
    /// Distance from `E/b` to the nearer window endpoint.
    #[default]
    Distance,
    /// The larger of the two endpoint gaps.
    PrintedMax,
}

/// The interval `Delta_E(delta) = [E - (delta/2) b, E + (delta/2) b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub n: usize,
    pub b: FieldStrength,
    pub e: f64,
    pub delta: f64,
    pub lo: f64,
    pub hi: f64,
}

impl EnergyWindow {
    /// Build `Delta_E(delta)` and check it lies inside `landau = (e_n, E_{n+1})`.
    pub fn new(n: usize, b: FieldStrength, e: f64, delta: f64, landau: (f64, f64)) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("window width must be positive, got {delta}")));
        }
        let half = 0.5 * delta * b.value();
        let w = EnergyWindow { n, b, e, delta, lo: e - half, hi: e + half };
        if !(w.lo > landau.0 && w.hi < landau.1) {
            return Err(Error::Invariant(format!(
                "[{}, {}] not inside the Landau window ({}, {})",
                w.lo, w.hi, landau.0, landau.1
            )));
        }
        Ok(w)
    }

    pub fn contains(&self, energy: f64) -> bool {
        energy >= self.lo && energy <= self.hi
    }
}

/// `(e_n(b), E_{n+1}(b))` from the minimum record of even band `n + 1`.
pub fn landau_window(n: usize, b: FieldStrength, next: &MinimumRecord) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Domain("window index is 1-based".into()));
    }
    if next.j != n + 1 {
        return Err(Error::Precondition(format!("window {n} needs the record of even band {}, got {}", n + 1, next.j)));
    }
    let (lo, hi) = (b.landau_level(n), next.energy);
    if !(lo < hi) {
        return Err(Error::Invariant(format!("empty window ({lo}, {hi}) for n = {n}")));
    }
    Ok((lo, hi))
}

/// Same as [`landau_window`], locating `kappa_{n+1}` first.
pub fn solve_landau_window(n: usize, b: FieldStrength, opts: &SolverOptions) -> Result<(f64, f64)> {
    landau_window(n, b, &find_minimum(n + 1, b, opts)?)
}

/// The unique `k` on the decreasing branch of band `j` with `omega_j(k) = energy`.
pub fn inverse_branch(b: FieldStrength, j: usize, energy: f64, opts: &SolverOptions) -> Result<f64> {
    let sb = b.value().sqrt();
    let f = |k: f64| -> Result<f64> { Ok(solve_band(b, k, j, opts)?.omega - energy) };
    // omega_j(k) > k^2 for k < 0
    let lo = -(energy.max(0.0).sqrt() + 0.1 * sb);
    let mut hi = lo;
    loop {
        hi += 0.5 * sb;
        if hi > 20.0 * sb {
            return Err(Error::Domain(format!("band {j} does not reach {energy} on its decreasing branch")));
        }
        if f(hi)? < 0.0 {
            break;
        }
    }
    brent_root(f, hi - 0.5 * sb, hi, 1e-12 * sb)
}

/// `omega_j^{-1}(Delta)` for one band, as a `k`-interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    pub j: usize,
    pub k_lo: f64,
    pub k_hi: f64,
}

impl Preimage {
    pub fn contains(&self, k: f64) -> bool {
        let tol = 1e-12 * self.k_lo.abs().max(self.k_hi.abs()).max(1.0);
        k >= self.k_lo - tol && k <= self.k_hi + tol
    }
}

fn preimages(b: FieldStrength, n: usize, lo: f64, hi: f64, opts: &SolverOptions) -> Result<Vec<Preimage>> {
    (1..=2 * n)
        .into_par_iter()
        .map(|j| Ok(Preimage { j, k_lo: inverse_branch(b, j, hi, opts)?, k_hi: inverse_branch(b, j, lo, opts)? }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta0 {
    pub n: usize,
    pub b: FieldStrength,
    pub e: f64,
    pub landau: (f64, f64),
    pub delta0: f64,
    pub cap: f64,
    pub reading: DnReading,
    /// Preimages of `Delta_E(2 delta_0)` for bands `1..=2n`.
    pub preimages: Vec<Preimage>,
}

/// Subdivisions of the `d_n` cap searched for `delta_0`.
pub const DELTA0_GRID: usize = 32;

/// Largest `delta_0 = cap * i / 32` for which the preimages of `Delta_E(2 delta_0)`
/// under bands `1..=2n` are pairwise disjoint and higher bands miss it.
pub fn find_delta0(n: usize, e: f64, b: FieldStrength, next: &MinimumRecord, reading: DnReading, opts: &SolverOptions) -> Result<Delta0> {
    let landau = landau_window(n, b, next)?;
    if !(e > landau.0 && e < landau.1) {
        return Err(Error::Domain(format!("E = {e} outside the window ({}, {})", landau.0, landau.1)));
    }
    let bv = b.value();
    let eps = e / bv;
    let (gap_lo, gap_hi) = (eps - landau.0 / bv, landau.1 / bv - eps);
    let cap = match reading {
        DnReading::Distance => gap_lo.min(gap_hi),
        DnReading::PrintedMax => gap_lo.max(gap_hi),
    };
    let admissible = |delta: f64| -> Result<Option<Vec<Preimage>>> {
        // inside the domain of the inverse branches, below the next band bottom
        if !(eps - delta > landau.0 / bv && eps + delta < landau.1 / bv) {
            return Ok(None);
        }
        let pre = preimages(b, n, e - delta * bv, e + delta * bv, opts)?;
        let disjoint = pre.windows(2).all(|w| w[1].k_lo > w[0].k_hi);
        Ok(disjoint.then_some(pre))
    };
    let (mut good, mut bad) = (0usize, DELTA0_GRID);
    let mut best = None;
    while bad - good > 1 {
        let mid = (good + bad) / 2;
        match admissible(cap * mid as f64 / DELTA0_GRID as f64)? {
            Some(pre) => {
                good = mid;
                best = Some(pre);
            }
            None => bad = mid,
        }
    }
    let preimages = match best {
        Some(p) => p,
        None => {
            return Err(Error::Resolution(format!(
                "no admissible delta_0 on the grid cap/{DELTA0_GRID} (cap = {cap:.3e}) at E = {e}"
            )))
        }
    };
    Ok(Delta0 { n, b, e, landau, delta0: cap * good as f64 / DELTA0_GRID as f64, cap, reading, preimages })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MourreOptions {
    pub solver: SolverOptions,
    pub reading: DnReading,
    /// Uniform samples of `-omega_j'` per preimage before refinement.
    pub samples: usize,
}

impl Default for MourreOptions {
    fn default() -> Self {
        MourreOptions { solver: SolverOptions::default(), reading: DnReading::Distance, samples: 17 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MourreReport {
    /// `Delta_E(2 delta_0)`.
    pub window: EnergyWindow,
    pub landau: (f64, f64),
    pub delta0: f64,
    pub cap: f64,
    pub reading: DnReading,
    pub preimages: Vec<Preimage>,
    /// `c_{n,j}` for `j = 1..=2n`.
    pub c_per_band: Vec<f64>,
    /// Where each infimum is attained.
    pub argmin: Vec<f64>,
    pub c_n: f64,
    /// Bottom of band `2n + 1`; its preimage is empty when this exceeds `window.hi`.
    pub next_band_min: f64,
}

impl MourreReport {
    pub fn n(&self) -> usize {
        self.window.n
    }

    pub fn b(&self) -> FieldStrength {
        self.window.b
    }

    pub fn preimage(&self, j: usize) -> Option<&Preimage> {
        self.preimages.iter().find(|p| p.j == j)
    }

    /// The same window at another field strength: energies scale like `b`,
    /// wave numbers like `sqrt(b)`, and `delta_0`, `c_n` are unchanged.
    pub fn rescaled(&self, b: FieldStrength) -> Self {
        let s = b.value() / self.b().value();
        let r = s.sqrt();
        let w = self.window;
        MourreReport {
            window: EnergyWindow { b, e: w.e * s, lo: w.lo * s, hi: w.hi * s, ..w },
            landau: (self.landau.0 * s, self.landau.1 * s),
            preimages: self.preimages.iter().map(|p| Preimage { j: p.j, k_lo: p.k_lo * r, k_hi: p.k_hi * r }).collect(),
            argmin: self.argmin.iter().map(|k| k * r).collect(),
            next_band_min: self.next_band_min * s,
            ..self.clone()
        }
    }
}

/// Scaled band velocity `-omega_j'(k) / sqrt(b)`.
pub fn scaled_velocity(b: FieldStrength, k: f64, j: usize, opts: &SolverOptions) -> Result<f64> {
    let pair = solve_band(b, k, j, opts)?;
    Ok(-derivative_fh(&pair, b, k)? / b.value().sqrt())
}

fn band_infimum(b: FieldStrength, pre: &Preimage, samples: usize, opts: &SolverOptions) -> Result<(f64, f64)> {
    let m = samples.max(3);
    let ks: Vec<f64> = (0..m).map(|i| pre.k_lo + (pre.k_hi - pre.k_lo) * i as f64 / (m - 1) as f64).collect();
    let vs: Vec<f64> = ks.iter().map(|&k| scaled_velocity(b, k, pre.j, opts)).collect::<Result<_>>()?;
    let i = (0..m).min_by(|&a, &c| vs[a].total_cmp(&vs[c])).unwrap();
    let (a, c) = (ks[i.saturating_sub(1)], ks[(i + 1).min(m - 1)]);
    let (k, v) = golden_min(|k| scaled_velocity(b, k, pre.j, opts), a, c, 30)?;
    Ok(if v < vs[i] { (v, k) } else { (vs[i], ks[i]) })
}

/// `c_{n,j} = inf (-omega_j') / sqrt(b)` over the preimages of `Delta_E(2 delta_0)`.
pub fn mourre_constant(d0: &Delta0, next: &MinimumRecord, opts: &MourreOptions) -> Result<MourreReport> {
    let b = d0.b;
    let window = EnergyWindow::new(d0.n, b, d0.e, 2.0 * d0.delta0, d0.landau)?;
    let inf: Vec<(f64, f64)> = d0
        .preimages
        .par_iter()
        .map(|p| band_infimum(b, p, opts.samples, &opts.solver))
        .collect::<Result<_>>()?;
    for (p, &(c, k)) in d0.preimages.iter().zip(&inf) {
        if !(c > 0.0) {
            return Err(Error::Invariant(format!("-omega_{}'({k}) / sqrt(b) = {c} is not positive", p.j)));
        }
    }
    let c_per_band: Vec<f64> = inf.iter().map(|x| x.0).collect();
    let c_n = c_per_band.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(next.energy > window.hi) {
        return Err(Error::Invariant(format!("band {} meets the window", 2 * d0.n + 1)));
    }
    Ok(MourreReport {
        window,
        landau: d0.landau,
        delta0: d0.delta0,
        cap: d0.cap,
        reading: d0.reading,
        preimages: d0.preimages.clone(),
        c_per_band,
        argmin: inf.iter().map(|x| x.1).collect(),
        c_n,
        next_band_min: next.energy,
    })
}

/// Full pipeline: locate `kappa_{n+1}`, `delta_0` and the Mourre constants at `E`.
pub fn mourre_report(n: usize, e: f64, b: FieldStrength, opts: &MourreOptions) -> Result<MourreReport> {
    let next = find_minimum(n + 1, b, &opts.solver)?;
    let d0 = find_delta0(n, e, b, &next, opts.reading, &opts.solver)?;
    mourre_constant(&d0, &next, opts)
}

/// Midpoint of `(e_n, E_{n+1})`.
pub fn mid_window(n: usize, b: FieldStrength, opts: &SolverOptions) -> Result<f64> {
    let (lo, hi) = solve_landau_window(n, b, opts)?;
    Ok(0.5 * (lo + hi))
}

/// Fiber modes sampled on the preimages of a validated window.
#[derive(Debug, Clone)]
pub struct BandModes {
    pub j: usize,
    pub ks: Vec<f64>,
    /// Trapezoid weights in `k`.
    pub weights: Vec<f64>,
    pub omega: Vec<f64>,
    /// `-omega_j'(k)`.
    pub velocity: Vec<f64>,
    pub pairs: Vec<Arc<EigenPair>>,
}

#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub b: FieldStrength,
    pub bands: Vec<BandModes>,
}

impl ModeBasis {
    pub fn build(report: &MourreReport, nodes: usize, opts: &SolverOptions) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::Domain("need at least two nodes per band".into()));
        }
        let b = report.b();
        let bands = report
            .preimages
            .iter()
            .map(|p| {
                let h = (p.k_hi - p.k_lo) / (nodes - 1) as f64;
                let ks: Vec<f64> = (0..nodes).map(|i| p.k_lo + h * i as f64).collect();
                let pairs: Vec<Arc<EigenPair>> = ks
                    .par_iter()
                    .map(|&k| solve_band(b, k, p.j, opts).map(Arc::new))
                    .collect::<Result<_>>()?;
                let velocity = pairs.iter().map(|q| Ok(-derivative_fh(q, b, q.k)?)).collect::<Result<_>>()?;
                let weights = (0..nodes).map(|i| if i == 0 || i == nodes - 1 { 0.5 * h } else { h }).collect();
                Ok(BandModes { j: p.j, omega: pairs.iter().map(|q| q.omega).collect(), ks, weights, velocity, pairs })
            })
            .collect::<Result<_>>()?;
        Ok(ModeBasis { b, bands })
    }

    pub fn band(&self, j: usize) -> Option<&BandModes> {
        self.bands.iter().find(|m| m.j == j)
    }
}

/// Band coefficients `beta_j(k)` in polar form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateBand {
    pub j: usize,
    pub ks: Vec<f64>,
    pub modulus: Vec<f64>,
    pub phase: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberState {
    pub bands: Vec<StateBand>,
}

impl FiberState {
    /// Gaussian profile on one band of the basis.
    pub fn gaussian(basis: &ModeBasis, j: usize, center: f64, width: f64) -> Result<Self> {
        let m = basis.band(j).ok_or_else(|| Error::Domain(format!("band {j} not in the basis")))?;
        let modulus = m.ks.iter().map(|k| (-((k - center) / width).powi(2) / 2.0).exp()).collect();
        Ok(FiberState { bands: vec![StateBand { j, ks: m.ks.clone(), modulus, phase: vec![0.0; m.ks.len()] }] })
    }

    /// Constant modulus on the listed bands.
    pub fn uniform(basis: &ModeBasis, js: &[usize], amplitude: &[f64]) -> Result<Self> {
        let bands = js
            .iter()
            .zip(amplitude)
            .map(|(&j, &a)| {
                let m = basis.band(j).ok_or_else(|| Error::Domain(format!("band {j} not in the basis")))?;
                Ok(StateBand { j, ks: m.ks.clone(), modulus: vec![a; m.ks.len()], phase: vec![0.0; m.ks.len()] })
            })
            .collect::<Result<_>>()?;
        Ok(FiberState { bands })
    }

    /// Rescaled to unit norm.
    pub fn normalized(mut self, basis: &ModeBasis) -> Result<Self> {
        let n = self.norm_sq(basis)?.sqrt();
        if !(n > 0.0) {
            return Err(Error::Domain("cannot normalize the zero state".into()));
        }
        for sb in &mut self.bands {
            sb.modulus.iter_mut().for_each(|a| *a /= n);
        }
        Ok(self)
    }

    /// Random moduli and phases on every band of the basis.
    pub fn random<R: Rng>(basis: &ModeBasis, rng: &mut R) -> Self {
        let bands = basis
            .bands
            .iter()
            .map(|m| {
                let weight: f64 = rng.random();
                StateBand {
                    j: m.j,
                    ks: m.ks.clone(),
                    modulus: m.ks.iter().map(|_| weight * rng.random::<f64>()).collect(),
                    phase: m.ks.iter().map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect(),
                }
            })
            .collect();
        FiberState { bands }
    }

    /// Free evolution `exp(-i t H0)`: each coefficient picks up the phase `-omega_j(k) t`.
    pub fn evolve(&self, basis: &ModeBasis, t: f64) -> Result<Self> {
        let mut out = self.clone();
        for sb in &mut out.bands {
            let m = basis.band(sb.j).ok_or_else(|| Error::Precondition(format!("band {} not in the basis", sb.j)))?;
            for (p, w) in sb.phase.iter_mut().zip(&m.omega) {
                *p -= w * t;
            }
        }
        Ok(out)
    }

    /// `sum_j int |beta_j|^2 dk`.
    pub fn norm_sq(&self, basis: &ModeBasis) -> Result<f64> {
        let mut s = 0.0;
        for sb in &self.bands {
            let m = match_band(basis, sb)?;
            s += sb.modulus.iter().zip(&m.weights).map(|(a, w)| w * a * a).sum::<f64>();
        }
        Ok(s)
    }
}

fn match_band<'a>(basis: &'a ModeBasis, sb: &StateBand) -> Result<&'a BandModes> {
    let m = basis.band(sb.j).ok_or_else(|| Error::Precondition(format!("band {} not in the basis", sb.j)))?;
    if m.ks != sb.ks || sb.modulus.len() != sb.ks.len() || sb.phase.len() != sb.ks.len() {
        return Err(Error::Precondition(format!("state on band {} is not sampled on the basis nodes", sb.j)));
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCurrent {
    pub current: f64,
    pub norm_sq: f64,
    /// `(c_n / 2) sqrt(b) ||phi||^2`.
    pub bound: f64,
    pub pass: bool,
}

/// `J_y = <phi, v_y phi> = sum_j int |beta_j|^2 (-omega_j')/2 dk` with `v_y = (1/2)[H0, iA]`.
pub fn edge_current_fiber(state: &FiberState, basis: &ModeBasis, report: &MourreReport) -> Result<EdgeCurrent> {
    let mut current = 0.0;
    for sb in &state.bands {
        let m = match_band(basis, sb)?;
        let pre = report.preimage(sb.j).ok_or_else(|| Error::Precondition(format!("band {} has no preimage", sb.j)))?;
        if let Some((k, _)) = sb.ks.iter().zip(&sb.modulus).find(|(k, a)| **a != 0.0 && !pre.contains(**k)) {
            return Err(Error::Precondition(format!("state on band {} supported at k = {k} outside the preimage", sb.j)));
        }
        current += sb
            .modulus
            .iter()
            .zip(&m.weights)
            .zip(&m.velocity)
            .map(|((a, w), v)| w * a * a * 0.5 * v)
            .sum::<f64>();
    }
    let norm_sq = state.norm_sq(basis)?;
    let bound = 0.5 * report.c_n * report.b().value().sqrt() * norm_sq;
    Ok(EdgeCurrent { current, norm_sq, bound, pass: current >= bound })
}

/// Perturbation sizes entering the budget functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetArgs {
    pub delta: f64,
    /// Bound on `(||a||^2 + ||grad a||) / b`.
    pub a_frak: f64,
    /// Bound on `||q|| / b`.
    pub q_frak: f64,
}

/// Window data entering `F_{n,E}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConstants {
    pub n: usize,
    pub delta0: f64,
    pub c_n: f64,
}

fn check_args(a: &BudgetArgs) -> Result<()> {
    if !(a.delta >= 0.0 && a.a_frak >= 0.0 && a.q_frak >= 0.0) {
        return Err(Error::Domain(format!("budget arguments must be nonnegative: {a:?}")));
    }
    Ok(())
}

/// `f_n = delta + q + 2 sqrt(a)`.
pub fn f_n(args: BudgetArgs) -> Result<f64> {
    check_args(&args)?;
    Ok(args.delta + args.q_frak + 2.0 * args.a_frak.sqrt())
}

/// `F_{n,E} = (f/delta_0)^2 + (2/c_n) (sqrt(a) + sqrt(2n + 1 + f) sqrt(f/delta_0))`.
pub fn f_ne(args: BudgetArgs, w: WindowConstants) -> Result<f64> {
    if !(w.delta0 > 0.0 && w.c_n > 0.0) {
        return Err(Error::Domain(format!("delta_0 and c_n must be positive: {w:?}")));
    }
    let f = f_n(args)?;
    let r = f / w.delta0;
    Ok(r * r + 2.0 / w.c_n * (args.a_frak.sqrt() + (2.0 * w.n as f64 + 1.0 + f).sqrt() * r.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationBudget {
    pub n: usize,
    pub e: f64,
    pub delta: f64,
    pub a_star: f64,
    pub q_star: f64,
    pub f_value: f64,
    /// The constant used in place of `c_n` (`c_n` or `c_n / 2`).
    pub c_used: f64,
}

const BUDGET_FLOOR: f64 = 1e-12;

/// Maximize `a* q*` subject to `F_{n,E}(delta, a*, q*) < 1/2` on a logarithmic grid
/// over `(a, q) in [1e-12, 1]^2` and `delta = delta_0 2^{-i}`.
/// `c_scale` multiplies `c_n` (1 for the Mourre estimate, 1/2 for the current bound).
pub fn perturbation_budget(report: &MourreReport, c_scale: f64) -> Result<PerturbationBudget> {
    let w = WindowConstants { n: report.n(), delta0: report.delta0, c_n: report.c_n * c_scale };
    let per_decade = 8;
    let a_grid: Vec<f64> = (0..=12 * per_decade).map(|i| BUDGET_FLOOR * 10f64.powf(i as f64 / per_decade as f64)).collect();
    let mut best: Option<PerturbationBudget> = None;
    for i in 1..=20 {
        let delta = w.delta0 * 0.5f64.powi(i);
        for &a in &a_grid {
            let feasible = |q: f64| -> Result<bool> { Ok(f_ne(BudgetArgs { delta, a_frak: a, q_frak: q }, w)? < 0.5) };
            if !feasible(BUDGET_FLOOR)? {
                continue;
            }
            let (mut lo, mut hi) = (BUDGET_FLOOR.ln(), 0.0f64);
            if feasible(1.0)? {
                lo = hi;
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if feasible(mid.exp())? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let q = lo.exp();
            if best.is_none_or(|bb| a * q > bb.a_star * bb.q_star) {
                let f_value = f_ne(BudgetArgs { delta, a_frak: a, q_frak: q }, w)?;
                best = Some(PerturbationBudget { n: w.n, e: report.window.e, delta, a_star: a, q_star: q, f_value, c_used: w.c_n });
            }
        }
    }
    best.ok_or_else(|| Error::Invariant(format!("no feasible perturbation budget with delta_0 = {}", w.delta0)))
}
