//! Fixed-k fiber eigenproblem `h(k) = p_x^2 + (k - b|x|)^2` on a half-line.
//!
//! Even states carry a reflecting (ghost-point) condition at the origin and
//! odd states a hard zero; both end at a Dirichlet wall `x = L`. The grid is
//! laid out in magnetic units so the discretization is scale covariant.

use crate::error::{ensure_positive, Error, Result};
use crate::linalg::SymTridiagonal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldStrength(f64);

impl FieldStrength {
    pub fn new(b: f64) -> Result<Self> {
        ensure_positive("field strength b", b)?;
        Ok(FieldStrength(b))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Landau level `(2j - 1) b`; `j = 0` gives 0 by convention.
    pub fn landau_level(self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            (2 * j - 1) as f64 * self.0
        }
    }

    pub fn magnetic_length(self) -> f64 {
        1.0 / self.0.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Parity of global band `j` (1-based): odd indices are even states.
    pub fn of_band(j: usize) -> Parity {
        if j % 2 == 1 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Position of global band `j` within its parity class (1-based).
    pub fn ordinal(j: usize) -> usize {
        j.div_ceil(2)
    }

    pub fn global_index(self, m: usize) -> usize {
        match self {
            Parity::Even => 2 * m - 1,
            Parity::Odd => 2 * m,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Uniform half-line grid `x_i = i L / N`, `i = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub length: f64,
    pub intervals: usize,
}

impl Grid {
    pub fn spacing(&self) -> f64 {
        self.length / self.intervals as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn refined(&self, factor: usize) -> Grid {
        Grid { length: self.length, intervals: self.intervals * factor }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Number of grid intervals on the coarsest level.
    pub resolution: usize,
    /// Number of grid levels combined by Richardson extrapolation (1..=3).
    pub richardson: usize,
    /// Required ratio of wall potential excess to level excess above the well bottom.
    pub margin: f64,
    /// Required WKB action between the top turning point and the wall.
    pub action: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { resolution: 4000, richardson: 2, margin: 4.0, action: 20.0 }
    }
}

pub const MIN_RESOLUTION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberProblem {
    pub b: FieldStrength,
    pub k: f64,
    pub parity: Parity,
    pub grid: Grid,
    pub levels: usize,
    pub richardson: usize,
}

/// A solved fiber eigenstate. `psi` holds samples at every node of `grid`
/// (the finest level), normalized on the full line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub j: usize,
    pub parity: Parity,
    pub b: FieldStrength,
    pub k: f64,
    pub omega: f64,
    pub psi: Vec<f64>,
    pub grid: Grid,
    pub psi0: f64,
    pub dpsi0: f64,
    /// Feynman-Hellmann quadrature per grid level, coarsest first.
    pub fh_levels: Vec<f64>,
}

impl EigenPair {
    pub fn ordinal(&self) -> usize {
        Parity::ordinal(self.j)
    }
}

/// Upper estimate of the `m`-th level of the given parity at scaled wave
/// number `q`, by comparison with an oscillator potential.
pub fn level_upper_estimate(q: f64, parity: Parity, m: usize) -> f64 {
    let g = parity.global_index(m) as f64;
    if q >= 0.0 {
        2.0 * g - 1.0
    } else {
        q * q + q.abs() + (1.0 + q.abs()).sqrt() * (2.0 * g - 1.0)
    }
}

// WKB action int_{sqrt(e)}^{u} sqrt(s^2 - e) ds.
fn barrier_action(u: f64, e: f64) -> f64 {
    let r = (u * u - e).max(0.0).sqrt();
    0.5 * u * r - 0.5 * e * ((u + r) / e.sqrt()).ln()
}

fn scaled_length(q: f64, e_up: f64, opts: &SolverOptions) -> f64 {
    let vmin = if q < 0.0 { q * q } else { 0.0 };
    let by_margin = q + (vmin + opts.margin * (e_up - vmin)).sqrt();
    let e = e_up.max(1e-12);
    let (mut lo, mut hi) = (e.sqrt(), e.sqrt() + 1.0);
    while barrier_action(hi, e) < opts.action {
        hi += hi - lo;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if barrier_action(mid, e) < opts.action {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // keeps sqrt(2) erfc(sqrt(b)(L - x_n)) below 1e-12 for the Gaussian envelope
    let by_envelope = q.max(0.0) + e_up.sqrt() + ENVELOPE_REACH;
    by_margin.max(q + hi).max(by_envelope)
}

const ENVELOPE_REACH: f64 = 5.3;

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::Configuration(format!("resolution must be at least {MIN_RESOLUTION}")));
        }
        if !(1..=3).contains(&self.richardson) {
            return Err(Error::Configuration("richardson levels must be 1, 2 or 3".into()));
        }
        if !(self.margin >= 1.0 && self.action > 0.0) {
            return Err(Error::Configuration("margin must be >= 1 and action > 0".into()));
        }
        Ok(())
    }

    pub fn with_richardson(mut self, levels: usize) -> Self {
        self.richardson = levels;
        self
    }

    pub fn build(&self, b: FieldStrength, k: f64, parity: Parity, levels: usize) -> Result<FiberProblem> {
        self.validate()?;
        if levels == 0 {
            return Err(Error::Domain("at least one level must be requested".into()));
        }
        if !k.is_finite() {
            return Err(Error::Domain(format!("wave number must be finite, got {k}")));
        }
        let sb = b.value().sqrt();
        let q = k / sb;
        let e_up = level_upper_estimate(q, parity, levels);
        let lt = scaled_length(q, e_up, self);
        let vmin = if q < 0.0 { q * q } else { 0.0 };
        let ht = lt / self.resolution as f64;
        let resolved = ht * (e_up - vmin).sqrt();
        if resolved > 0.5 {
            return Err(Error::Configuration(format!(
                "level {levels} ({parity:?}) at k = {k} needs finer grid: h*sqrt(E) = {resolved:.3} > 0.5"
            )));
        }
        Ok(FiberProblem {
            b,
            k,
            parity,
            grid: Grid { length: lt / sb, intervals: self.resolution },
            levels,
            richardson: self.richardson,
        })
    }
}

/// Build a problem with default options except for the coarse resolution.
pub fn build_problem(b: FieldStrength, k: f64, parity: Parity, requested_levels: usize, resolution: usize) -> Result<FiberProblem> {
    SolverOptions { resolution, ..SolverOptions::default() }.build(b, k, parity, requested_levels)
}

struct Level {
    omega: Vec<f64>,
    psi: Vec<Vec<f64>>,
    fh: Vec<f64>,
    psi0: Vec<f64>,
    dpsi0: Vec<f64>,
}

fn potential(b: f64, k: f64, x: f64) -> f64 {
    let t = k - b * x;
    t * t
}

// Trapezoid weight of node i on the half-line (node 0 carries 1/2 for even states).
fn weight(parity: Parity, i: usize) -> f64 {
    if i == 0 && parity == Parity::Even {
        0.5
    } else {
        1.0
    }
}

/// `int_R 2 (k - b|x|) psi^2 dx` by the half-line trapezoid rule, doubled.
pub fn fh_quadrature(psi: &[f64], grid: &Grid, parity: Parity, b: f64, k: f64) -> f64 {
    let h = grid.spacing();
    let mut s = 0.0;
    for (i, &p) in psi.iter().enumerate() {
        s += weight(parity, i) * 2.0 * (k - b * grid.node(i)) * p * p;
    }
    2.0 * h * s
}

/// Boundary values `(psi(0), psi'(0))` read off a grid vector.
pub fn boundary_data(psi: &[f64], grid: &Grid, parity: Parity) -> (f64, f64) {
    match parity {
        Parity::Even => (psi[0], 0.0),
        Parity::Odd => {
            let h = grid.spacing();
            let d = (-25.0 * psi[0] + 48.0 * psi[1] - 36.0 * psi[2] + 16.0 * psi[3] - 3.0 * psi[4]) / (12.0 * h);
            (0.0, d)
        }
    }
}

fn fix_sign(psi: &mut [f64]) {
    let mut i = 0;
    while i + 1 < psi.len() && psi[i + 1].abs() >= psi[i].abs() {
        i += 1;
    }
    if psi[i] < 0.0 {
        psi.iter_mut().for_each(|v| *v = -*v);
    }
}

fn solve_level(p: &FiberProblem, grid: Grid, n: usize) -> Result<Level> {
    let b = p.b.value();
    let k = p.k;
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let nodes = grid.intervals + 1;
    // unknown index range
    let first = match p.parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let last = grid.intervals; // exclusive (wall)
    let m = last - first;
    if n > m / 8 {
        return Err(Error::Capability(format!("{n} levels requested on {m} unknowns")));
    }
    let v: Vec<f64> = (0..nodes).map(|i| potential(b, k, grid.node(i))).collect();
    let diag: Vec<f64> = (first..last).map(|i| 2.0 * inv_h2 + v[i]).collect();
    let mut off = vec![-inv_h2; m - 1];
    if p.parity == Parity::Even {
        off[0] *= std::f64::consts::SQRT_2;
    }
    let t = SymTridiagonal::new(diag, off);

    let sb = b.sqrt();
    let e_up = b * level_upper_estimate(k / sb, p.parity, n);
    let vmin = v[first..last].iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = e_up.max(b);
    let abs_tol = 1e-11 * scale;
    let rough = t.lowest_eigenvalues(n, vmin - abs_tol, e_up * (1.0 + 1e-9) + abs_tol, abs_tol)?;
    for (i, &l) in rough.iter().enumerate() {
        let c = t.count_below(l + 2.0 * abs_tol);
        if c < i + 1 {
            return Err(Error::Invariant(format!("Sturm count {c} inconsistent with level {} at k = {k}", i + 1)));
        }
    }

    let mut out = Level { omega: vec![], psi: vec![], fh: vec![], psi0: vec![], dpsi0: vec![] };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &lambda in &rough {
        let u = t.inverse_iteration(lambda, &basis, 3)?;
        let mut psi = vec![0.0; nodes];
        for (idx, &ui) in u.iter().enumerate() {
            let i = first + idx;
            psi[i] = if i == 0 { ui * std::f64::consts::SQRT_2 } else { ui };
        }
        basis.push(u);
        // positive-term Rayleigh quotient
        let mut kin = 0.0;
        let mut pot = 0.0;
        let mut norm = 0.0;
        for i in 0..last {
            let d = psi[i + 1] - psi[i];
            kin += d * d;
            let w = weight(p.parity, i);
            pot += w * v[i] * psi[i] * psi[i];
            norm += w * psi[i] * psi[i];
        }
        let omega = (kin * inv_h2 + pot) / norm;
        let s = 1.0 / (2.0 * h * norm).sqrt();
        psi.iter_mut().for_each(|x| *x *= s);
        fix_sign(&mut psi);
        let (p0, dp0) = boundary_data(&psi, &grid, p.parity);
        out.fh.push(fh_quadrature(&psi, &grid, p.parity, b, k));
        out.omega.push(omega);
        out.psi0.push(p0);
        out.dpsi0.push(dp0);
        out.psi.push(psi);
    }
    for w in out.omega.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Invariant(format!("eigenvalues not simple at k = {k}: {} >= {}", w[0], w[1])));
        }
    }
    Ok(out)
}

/// Richardson extrapolation in `h^2` of values on grids `h, h/2, h/4`.
pub fn richardson(values: &[f64]) -> f64 {
    match values {
        [a] => *a,
        [a, b] => (4.0 * b - a) / 3.0,
        [a, b, c] => {
            let r1 = (4.0 * b - a) / 3.0;
            let r2 = (4.0 * c - b) / 3.0;
            (16.0 * r2 - r1) / 15.0
        }
        _ => panic!("richardson takes 1 to 3 levels"),
    }
}

/// The `n_levels` lowest eigenpairs of the parity-restricted fiber operator.
pub fn solve(problem: &FiberProblem, n_levels: usize) -> Result<Vec<EigenPair>> {
    if n_levels == 0 || n_levels > problem.levels {
        return Err(Error::Domain(format!(
            "n_levels must be in 1..={} for this problem, got {n_levels}",
            problem.levels
        )));
    }
    let levels: Vec<Level> = (0..problem.richardson)
        .map(|r| solve_level(problem, problem.grid.refined(1 << r), n_levels))
        .collect::<Result<_>>()?;
    let finest = problem.grid.refined(1 << (problem.richardson - 1));
    let mut finest_psi = levels.last().map(|l| l.psi.clone()).unwrap_or_default();
    let mut pairs = Vec::with_capacity(n_levels);
    for m in 0..n_levels {
        let pick = |f: fn(&Level) -> &Vec<f64>| levels.iter().map(|l| f(l)[m]).collect::<Vec<f64>>();
        let omega = richardson(&pick(|l| &l.omega));
        let psi0 = richardson(&pick(|l| &l.psi0));
        let dpsi0 = richardson(&pick(|l| &l.dpsi0));
        pairs.push(EigenPair {
            j: problem.parity.global_index(m + 1),
            parity: problem.parity,
            b: problem.b,
            k: problem.k,
            omega,
            psi: std::mem::take(&mut finest_psi[m]),
            grid: finest,
            psi0,
            dpsi0,
            fh_levels: pick(|l| &l.fh),
        });
    }
    Ok(pairs)
}

/// Interleave even and odd pairs into global band order.
pub fn merge_parities(even: Vec<EigenPair>, odd: Vec<EigenPair>) -> Result<Vec<EigenPair>> {
    if even.iter().any(|p| p.parity != Parity::Even) || odd.iter().any(|p| p.parity != Parity::Odd) {
        return Err(Error::Precondition("merge_parities got pairs of the wrong parity".into()));
    }
    if odd.len() > even.len() || even.len() > odd.len() + 1 {
        return Err(Error::Precondition("even/odd list lengths must differ by at most one".into()));
    }
    let mut merged = Vec::with_capacity(even.len() + odd.len());
    let mut odd_iter = odd.into_iter();
    for (idx, e) in even.into_iter().enumerate() {
        merged.push(e);
        if let Some(o) = odd_iter.next() {
            merged.push(o);
        }
        let _ = idx;
    }
    for (i, w) in merged.windows(2).enumerate() {
        if !(w[0].omega < w[1].omega) {
            return Err(Error::Invariant(format!(
                "parity interleaving violated between bands j = {} and {} at k = {}: {} >= {}",
                i + 1,
                i + 2,
                w[0].k,
                w[0].omega,
                w[1].omega
            )));
        }
    }
    for (i, p) in merged.iter_mut().enumerate() {
        p.j = i + 1;
    }
    Ok(merged)
}

/// The lowest `n_bands` band functions at `k`, both parities merged.
pub fn solve_bands(b: FieldStrength, k: f64, n_bands: usize, opts: &SolverOptions) -> Result<Vec<EigenPair>> {
    if n_bands == 0 {
        return Err(Error::Domain("n_bands must be positive".into()));
    }
    let n_even = n_bands.div_ceil(2);
    let n_odd = n_bands / 2;
    let even = solve(&opts.build(b, k, Parity::Even, n_even)?, n_even)?;
    let odd = if n_odd > 0 { solve(&opts.build(b, k, Parity::Odd, n_odd)?, n_odd)? } else { Vec::new() };
    merge_parities(even, odd)
}

/// A single band `j` (global index) at `k`.
pub fn solve_band(b: FieldStrength, k: f64, j: usize, opts: &SolverOptions) -> Result<EigenPair> {
    if j == 0 {
        return Err(Error::Domain("band index is 1-based".into()));
    }
    let parity = Parity::of_band(j);
    let m = Parity::ordinal(j);
    let mut pairs = solve(&opts.build(b, k, parity, m)?, m)?;
    Ok(pairs.pop().expect("m >= 1 pairs"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one() -> FieldStrength {
        FieldStrength::new(1.0).unwrap()
    }

    #[test]
    fn field_strength_validation() {
        assert!(FieldStrength::new(0.0).is_err());
        assert!(FieldStrength::new(-1.0).is_err());
        assert!(FieldStrength::new(f64::NAN).is_err());
        assert_eq!(one().landau_level(3), 5.0);
    }

    #[test]
    fn grid_lengths() {
        let p = build_problem(one(), 0.0, Parity::Even, 3, 4000).unwrap();
        assert!((p.grid.length - 2.0).abs() < 8.0);
        assert!((p.grid.length - 10.0).powi(2) >= 0.0);
        let vl = potential(1.0, 0.0, p.grid.length);
        assert!(vl >= 4.0 * 9.0);
        let p = build_problem(one(), 10.0, Parity::Even, 3, 4000).unwrap();
        assert!(p.grid.length >= 10.0 + 2.0);
        let l1 = build_problem(one(), 0.0, Parity::Odd, 2, 4000).unwrap().grid.length;
        let l100 = build_problem(FieldStrength::new(100.0).unwrap(), 0.0, Parity::Odd, 2, 4000).unwrap().grid.length;
        assert_abs_diff_eq!(l100, l1 / 10.0, epsilon = 1e-12);
        assert!(matches!(build_problem(one(), 0.0, Parity::Odd, 2000, 4000), Err(Error::Configuration(_))));
        assert!(build_problem(one(), 0.0, Parity::Odd, 1, 10).is_err());
    }

    #[test]
    fn harmonic_oscillator_anchor() {
        let opts = SolverOptions::default();
        let even = solve(&opts.build(one(), 0.0, Parity::Even, 3).unwrap(), 3).unwrap();
        let odd = solve(&opts.build(one(), 0.0, Parity::Odd, 3).unwrap(), 3).unwrap();
        for (p, e) in even.iter().zip([1.0, 5.0, 9.0]) {
            assert_abs_diff_eq!(p.omega, e, epsilon = 1e-9);
            assert_eq!(p.dpsi0, 0.0);
        }
        for (p, e) in odd.iter().zip([3.0, 7.0, 11.0]) {
            assert_abs_diff_eq!(p.omega, e, epsilon = 1e-9);
            assert_eq!(p.psi0, 0.0);
        }
        assert_abs_diff_eq!(even[0].psi0, std::f64::consts::PI.powf(-0.25), epsilon = 1e-8);
        let merged = merge_parities(even, odd).unwrap();
        let js: Vec<usize> = merged.iter().map(|p| p.j).collect();
        assert_eq!(js, vec![1, 2, 3, 4, 5, 6]);
        assert!(merged.iter().zip([Parity::Even, Parity::Odd].iter().cycle()).all(|(p, &q)| p.parity == q));
    }

    #[test]
    fn normalization_and_positivity() {
        let pairs = solve_bands(one(), 0.7, 4, &SolverOptions::default()).unwrap();
        for p in &pairs {
            let h = p.grid.spacing();
            let n: f64 = p.psi.iter().enumerate().map(|(i, v)| weight(p.parity, i) * v * v).sum::<f64>() * 2.0 * h;
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-12);
            assert!(p.psi0 * p.psi0 + p.dpsi0 * p.dpsi0 > 0.0);
        }
        assert!(pairs[0].psi.iter().all(|&v| v >= 0.0));
        assert!(pairs[0].psi[..pairs[0].psi.len() - 1].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn orthonormal_within_parity() {
        let opts = SolverOptions::default();
        let pairs = solve(&opts.build(one(), -1.5, Parity::Even, 4).unwrap(), 4).unwrap();
        for a in &pairs {
            for c in &pairs {
                let h = a.grid.spacing();
                let ip: f64 = a.psi.iter().zip(&c.psi).enumerate().map(|(i, (x, y))| weight(Parity::Even, i) * x * y).sum::<f64>() * 2.0 * h;
                assert_abs_diff_eq!(ip, if a.j == c.j { 1.0 } else { 0.0 }, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn scaling_law() {
        let opts = SolverOptions::default();
        let a = solve_bands(FieldStrength::new(4.0).unwrap(), 2.0, 4, &opts).unwrap();
        let c = solve_bands(one(), 1.0, 4, &opts).unwrap();
        for (x, y) in a.iter().zip(&c) {
            assert!((x.omega - 4.0 * y.omega).abs() <= 1e-7 * x.omega);
        }
    }

    #[test]
    fn second_order_convergence() {
        let opts = SolverOptions { resolution: 200, richardson: 1, ..SolverOptions::default() };
        let exact = 1.0;
        let e1 = solve(&opts.build(one(), 0.0, Parity::Even, 1).unwrap(), 1).unwrap()[0].omega - exact;
        let opts2 = SolverOptions { resolution: 400, ..opts };
        let e2 = solve(&opts2.build(one(), 0.0, Parity::Even, 1).unwrap(), 1).unwrap()[0].omega - exact;
        let order = (e1 / e2).abs().log2();
        assert!(order > 1.9, "order {order}");
    }

    #[test]
    fn lower_bounds_on_bands() {
        let opts = SolverOptions::default();
        for &k in &[-3.0, -0.5, 0.0, 1.0, 2.5, 4.0] {
            let pairs = solve_bands(one(), k, 4, &opts).unwrap();
            assert!(pairs[1].omega > 1.0);
            assert!(pairs[3].omega > 3.0);
            if k >= 0.0 {
                assert!(pairs[0].omega <= 1.0 + 1e-12);
                assert!(pairs[2].omega <= 5.0 + 1e-12);
            }
        }
    }

    #[test]
    fn merge_rejects_flip() {
        let opts = SolverOptions::default();
        let even = solve(&opts.build(one(), 0.0, Parity::Even, 1).unwrap(), 1).unwrap();
        let mut odd = solve(&opts.build(one(), 0.0, Parity::Odd, 1).unwrap(), 1).unwrap();
        odd[0].omega = 0.5;
        assert!(matches!(merge_parities(even.clone(), odd), Err(Error::Invariant(_))));
        assert_eq!(merge_parities(even, vec![]).unwrap().len(), 1);
    }
}
