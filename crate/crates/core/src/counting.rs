//! Eigenvalue counting below the spectrum bottom for `H0 - V` with slowly
//! decaying `V`, and the one-dimensional reduced model.

use crate::bands::MinimumRecord;
use crate::error::{Error, Result};
use crate::fiber::{EigenPair, FieldStrength, Parity};
use crate::linalg::{band_inertia, SymTridiagonal};
use crate::numerics::{fit_line, golden_min};
use crate::specfun::log_beta;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// One-variable decay profile `p(s)` with `|s|^alpha p(s) -> 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    /// `(1 + |s|)^{-alpha}`.
    Algebraic,
    /// `(1 + s^2)^{-alpha/2}`.
    Soft,
}

impl Profile {
    pub fn eval(self, alpha: f64, s: f64) -> f64 {
        match self {
            Profile::Algebraic => (1.0 + s.abs()).powf(-alpha),
            Profile::Soft => (1.0 + s * s).powf(-0.5 * alpha),
        }
    }

    // sup of p(s) (1 + |s|)^alpha
    fn bound(self, alpha: f64) -> f64 {
        match self {
            Profile::Algebraic => 1.0,
            Profile::Soft => 2f64.powf(0.5 * alpha),
        }
    }
}

pub type PotentialFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Shape {
    /// `V = coupling * v1(x) * v2(y)`.
    Separable { v1: Profile, v2: Profile },
    /// Arbitrary `V(x, y)`, scaled by `coupling`; `bound` is the user's `C`.
    Custom { f: PotentialFn, bound: f64 },
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Separable { v1, v2 } => f.debug_struct("Separable").field("v1", v1).field("v2", v2).finish(),
            Shape::Custom { bound, .. } => f.debug_struct("Custom").field("bound", bound).finish_non_exhaustive(),
        }
    }
}

/// A nonnegative potential with `V <= C (1+|x|)^{-alpha} (1+|y|)^{-alpha}`.
#[derive(Debug, Clone)]
pub struct DecayPotential {
    pub alpha: f64,
    pub coupling: f64,
    pub shape: Shape,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!("decay exponent must lie in (0, 2), got {alpha}")));
    }
    Ok(())
}

impl DecayPotential {
    pub fn separable(alpha: f64, coupling: f64, v1: Profile, v2: Profile) -> Result<Self> {
        check_alpha(alpha)?;
        if !(coupling >= 0.0 && coupling.is_finite()) {
            return Err(Error::Domain(format!("coupling must be nonnegative, got {coupling}")));
        }
        Ok(DecayPotential { alpha, coupling, shape: Shape::Separable { v1, v2 } })
    }

    /// A user-supplied potential, checked against its decay bound on a sample grid.
    pub fn custom(alpha: f64, coupling: f64, bound: f64, f: PotentialFn) -> Result<Self> {
        check_alpha(alpha)?;
        let v = DecayPotential { alpha, coupling, shape: Shape::Custom { f, bound } };
        for i in -40..=40 {
            for j in -40..=40 {
                let (x, y) = (0.37 * i as f64 * (1.0 + (i as f64).abs()), 0.53 * j as f64 * (1.0 + (j as f64).abs()));
                let val = v.eval(x, y);
                let cap = v.bound_constant() * ((1.0 + x.abs()) * (1.0 + y.abs())).powf(-alpha);
                if !(val >= 0.0 && val <= cap * (1.0 + 1e-12)) {
                    return Err(Error::Domain(format!("V({x}, {y}) = {val} violates 0 <= V <= {cap}")));
                }
            }
        }
        Ok(v)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.shape {
            Shape::Separable { v1, v2 } => self.coupling * v1.eval(self.alpha, x) * v2.eval(self.alpha, y),
            Shape::Custom { f, .. } => self.coupling * f(x, y),
        }
    }

    /// The constant `C` of the decay bound.
    pub fn bound_constant(&self) -> f64 {
        match &self.shape {
            Shape::Separable { v1, v2 } => self.coupling * v1.bound(self.alpha) * v2.bound(self.alpha),
            Shape::Custom { bound, .. } => self.coupling * bound,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        DecayPotential { coupling: self.coupling * factor, ..self.clone() }
    }
}

/// `Q(y) = int V(x, y) psi_1(x, kappa_1)^2 dx` with its tail constant `ell`.
#[derive(Clone)]
pub struct ReducedPotential {
    pub alpha: f64,
    pub ell: f64,
    /// Samples used for the tail fit.
    pub ys: Vec<f64>,
    pub qs: Vec<f64>,
    /// RMS residual of the tail fit relative to `ell`.
    pub fit_residual: f64,
    q: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for ReducedPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReducedPotential")
            .field("alpha", &self.alpha)
            .field("ell", &self.ell)
            .field("fit_residual", &self.fit_residual)
            .finish_non_exhaustive()
    }
}

impl ReducedPotential {
    pub fn eval(&self, y: f64) -> f64 {
        (self.q)(y)
    }

    /// `Q(y) = ell p(y)` for a model profile, with exact tail constant.
    pub fn model(alpha: f64, ell: f64, profile: Profile) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(ReducedPotential { alpha, ell, ys: vec![], qs: vec![], fit_residual: 0.0, q: Arc::new(move |y| ell * profile.eval(alpha, y)) })
    }

    /// The zero potential.
    pub fn zero(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(ReducedPotential { alpha, ell: 0.0, ys: vec![], qs: vec![], fit_residual: 0.0, q: Arc::new(|_| 0.0) })
    }
}

// int g(x) psi(x)^2 dx over the full line from half-line samples
fn against_density(pair: &EigenPair, g: impl Fn(f64) -> f64) -> f64 {
    let h = pair.grid.spacing();
    let mut s = 0.0;
    for (i, p) in pair.psi.iter().enumerate() {
        let x = pair.grid.node(i);
        let w = if i == 0 && pair.parity == Parity::Even { 0.5 } else { 1.0 };
        s += w * p * p * g(x);
    }
    h * s
}

/// Reduced potential from the band-1 ground state at `kappa_1`. `ell` is fitted as
/// the constant term of a quadratic in `1/|y|` over the largest decade of `y_grid`.
pub fn reduced_potential(v: &DecayPotential, ground: &EigenPair, y_grid: &[f64]) -> Result<ReducedPotential> {
    if ground.j != 1 {
        return Err(Error::Precondition(format!("reduced potential needs band 1, got band {}", ground.j)));
    }
    let q: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match &v.shape {
        Shape::Separable { v1, v2 } => {
            let (alpha, v1, v2) = (v.alpha, *v1, *v2);
            let i1 = 2.0 * v.coupling * against_density(ground, |x| v1.eval(alpha, x));
            Arc::new(move |y| i1 * v2.eval(alpha, y))
        }
        Shape::Custom { .. } => {
            let (v, g) = (v.clone(), Arc::new(ground.clone()));
            Arc::new(move |y| against_density(&g, |x| v.eval(x, y) + v.eval(-x, y)))
        }
    };
    let ys: Vec<f64> = y_grid.to_vec();
    let qs: Vec<f64> = ys.iter().map(|&y| q(y)).collect();
    if let Some((y, qv)) = ys.iter().zip(&qs).find(|(_, qv)| !(**qv >= 0.0)) {
        return Err(Error::Invariant(format!("Q({y}) = {qv} is negative")));
    }
    let ymax = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let tail: Vec<(f64, f64)> = ys
        .iter()
        .zip(&qs)
        .filter(|(y, _)| y.abs() >= 0.1 * ymax && y.abs() > 0.0)
        .map(|(y, qv)| (1.0 / y.abs(), y.abs().powf(v.alpha) * qv))
        .collect();
    if tail.len() < 4 {
        return Err(Error::Fit("need at least four samples in the largest decade of |y|".into()));
    }
    let a = DMatrix::from_fn(tail.len(), 3, |r, c| tail[r].0.powi(c as i32));
    let rhs = DVector::from_iterator(tail.len(), tail.iter().map(|t| t.1));
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Fit(format!("tail fit failed: {e}")))?;
    let ell = coef[0];
    let resid = (&a * &coef - &rhs).norm() / (tail.len() as f64).sqrt();
    let fit_residual = resid / ell.abs().max(f64::MIN_POSITIVE);
    if !(ell > 0.0) || fit_residual > 1e-4 {
        return Err(Error::Fit(format!("tail of |y|^alpha Q(y) does not settle: ell = {ell}, relative residual {fit_residual:.3e}")));
    }
    Ok(ReducedPotential { alpha: v.alpha, ell, ys, qs, fit_residual, q })
}

/// `2 ell^{1/alpha} / (pi alpha m) B(3/2, 1/alpha - 1/2)`.
pub fn lemma53_constant(alpha: f64, ell: f64, m: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(ell > 0.0 && m > 0.0) {
        return Err(Error::Domain(format!("ell and m must be positive, got {ell}, {m}")));
    }
    Ok(2.0 * ell.powf(1.0 / alpha) / (PI * alpha * m) * log_beta(1.5, 1.0 / alpha - 0.5)?.exp())
}

/// `(2 / (alpha pi)) beta_1^{-1/2} L^{1/alpha} B(3/2, 1/alpha - 1/2)`.
pub fn theorem51_constant(alpha: f64, l: f64, beta1: f64) -> Result<f64> {
    if !(beta1 > 0.0) {
        return Err(Error::Domain(format!("effective mass must be positive, got {beta1}")));
    }
    lemma53_constant(alpha, l, beta1.sqrt())
}

/// `-m^2 d^2/dy^2 - Q` on `[-Y, Y]` with Dirichlet ends, `2n + 1` interior nodes.
pub fn model_matrix(m: f64, q: &[f64], h: f64) -> SymTridiagonal {
    let c = m * m / (h * h);
    SymTridiagonal::new(q.iter().map(|qv| 2.0 * c - qv).collect(), vec![-c; q.len().saturating_sub(1)])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Count1dOptions {
    /// Grid step as a fraction of the shortest local wavelength `m / sqrt(Q_max + lambda)`.
    pub step_fraction: f64,
    /// Initial half-width as a multiple of the turning point `(ell/lambda)^{1/alpha}`.
    pub reach: f64,
    pub max_widenings: usize,
}

impl Default for Count1dOptions {
    fn default() -> Self {
        Count1dOptions { step_fraction: 0.1, reach: 3.0, max_widenings: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Count1d {
    pub lambda: f64,
    pub count: usize,
    pub half_width: f64,
    pub step: f64,
    pub widenings: usize,
}

fn samples(q: &ReducedPotential, half_width: f64, h: f64) -> Vec<f64> {
    let n = (half_width / h).ceil() as i64;
    (-n + 1..n).map(|i| q.eval(i as f64 * h)).collect()
}

/// `N(-lambda)` for `-m^2 d^2/dy^2 - Q`, widening the box by 1.5 until the count repeats.
pub fn count_1d(m: f64, q: &ReducedPotential, lambda: f64, opts: &Count1dOptions) -> Result<Count1d> {
    if !(lambda > 0.0 && m > 0.0) {
        return Err(Error::Domain(format!("need lambda > 0 and m > 0, got {lambda}, {m}")));
    }
    let qmax = (0..=200).map(|i| q.eval(0.05 * i as f64)).fold(0.0f64, f64::max);
    let h = opts.step_fraction * m / (qmax + lambda).sqrt();
    let turning = if q.ell > 0.0 { (q.ell / lambda).powf(1.0 / q.alpha) } else { 1.0 };
    let mut half_width = opts.reach * turning.max(10.0 * h);
    let count_at = |w: f64| model_matrix(m, &samples(q, w, h), h).count_below(-lambda);
    let mut prev = count_at(half_width);
    for widenings in 1..=opts.max_widenings {
        let wider = 1.5 * half_width;
        let next = count_at(wider);
        if next == prev {
            return Ok(Count1d { lambda, count: next, half_width, step: h, widenings });
        }
        prev = next;
        half_width = wider;
    }
    Err(Error::Resolution(format!("count at lambda = {lambda} still changing after {} widenings", opts.max_widenings)))
}

/// Negative inertia of `T - Q + lambda` by banded factorization, with `T = -m^2 D^2`.
pub fn count_1d_inertia(m: f64, q: &[f64], h: f64, lambda: f64) -> Result<usize> {
    let t = model_matrix(m, q, h);
    let diag: Vec<f64> = (0..t.len()).map(|i| t.diag[i] + lambda).collect();
    Ok(band_inertia::<f64, _>(t.len(), 1, |i, buf| {
        buf[0] = diag[i];
        if i > 0 {
            buf[1] = t.off[i - 1];
        }
    })?
    .negative)
}

/// Eigenvalues above 1 of `Q^{1/2} (T + lambda)^{-1} Q^{1/2}` on the same grid.
pub fn birman_schwinger_count(m: f64, q: &[f64], h: f64, lambda: f64) -> Result<usize> {
    if q.iter().any(|v| *v < 0.0) {
        return Err(Error::Domain("Birman-Schwinger count needs Q >= 0".into()));
    }
    let n = q.len();
    let c = m * m / (h * h);
    let t = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * c + lambda
        } else if i.abs_diff(j) == 1 {
            -c
        } else {
            0.0
        }
    });
    let tinv = t.cholesky().ok_or_else(|| Error::numerical("T + lambda not positive definite", lambda))?.inverse();
    let s: Vec<f64> = q.iter().map(|v| v.sqrt()).collect();
    let k = DMatrix::from_fn(n, n, |i, j| s[i] * tinv[(i, j)] * s[j]);
    Ok(SymmetricEigen::new(k).eigenvalues.iter().filter(|&&e| e > 1.0).count())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingCurve {
    pub lambdas: Vec<f64>,
    pub counts: Vec<usize>,
    pub fitted_exponent: f64,
    pub fitted_prefactor: f64,
}

impl CountingCurve {
    /// Fit `N ~ A lambda^{-p}` over the nonzero counts.
    pub fn new(lambdas: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if lambdas.len() != counts.len() {
            return Err(Error::Domain("lambdas and counts differ in length".into()));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = lambdas
            .iter()
            .zip(&counts)
            .filter(|(_, c)| **c > 0)
            .map(|(l, c)| (l.ln(), (*c as f64).ln()))
            .unzip();
        if ys.len() < 2 || ys.iter().all(|y| *y == ys[0]) {
            return Err(Error::Fit("counting curve is degenerate (fewer than two distinct nonzero counts)".into()));
        }
        let fit = fit_line(&xs, &ys)?;
        Ok(CountingCurve { lambdas, counts, fitted_exponent: -fit.slope, fitted_prefactor: fit.intercept.exp() })
    }
}

/// 1D counts over a list of `lambda` values.
pub fn curve_1d(m: f64, q: &ReducedPotential, lambdas: &[f64], opts: &Count1dOptions) -> Result<CountingCurve> {
    let counts: Vec<usize> = lambdas.par_iter().map(|&l| Ok(count_1d(m, q, l, opts)?.count)).collect::<Result<_>>()?;
    CountingCurve::new(lambdas.to_vec(), counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsCheck {
    pub expected_exponent: f64,
    pub fitted_exponent: f64,
    pub exponent_gap: f64,
    /// Free-fit prefactor over the predicted constant.
    pub prefactor_ratio: f64,
    /// Mean of `lambda^{1/alpha - 1/2} N` over the predicted constant.
    pub fixed_exponent_ratio: f64,
}

pub fn asymptotics_check(curve: &CountingCurve, alpha: f64, constant: f64) -> Result<AsymptoticsCheck> {
    check_alpha(alpha)?;
    if curve.lambdas.len() < 4 {
        return Err(Error::Domain("need at least four points".into()));
    }
    let (lo, hi) = curve.lambdas.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::Domain("lambdas must span at least one decade".into()));
    }
    let p = 1.0 / alpha - 0.5;
    let fixed = curve.lambdas.iter().zip(&curve.counts).map(|(l, c)| l.powf(p) * *c as f64).sum::<f64>() / curve.lambdas.len() as f64;
    Ok(AsymptoticsCheck {
        expected_exponent: p,
        fitted_exponent: curve.fitted_exponent,
        exponent_gap: (curve.fitted_exponent - p).abs(),
        prefactor_ratio: curve.fitted_prefactor / constant,
        fixed_exponent_ratio: fixed / constant,
    })
}

/// Magnetic 5-point discretization of `H0 - V` on `[-Lx, Lx] x [-Ly, Ly]` with
/// Dirichlet walls and Peierls phases on the `y` links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2d {
    pub half_x: f64,
    pub half_y: f64,
    pub hx: f64,
    pub hy: f64,
}

/// Default unknown budget of a 2D count.
pub const MAX_UNKNOWNS: usize = 10_000_000;

impl Grid2d {
    pub fn nx(&self) -> usize {
        (2.0 * self.half_x / self.hx).round() as usize - 1
    }

    pub fn ny(&self) -> usize {
        (2.0 * self.half_y / self.hy).round() as usize - 1
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_x + (i + 1) as f64 * self.hx
    }

    pub fn y(&self, i: usize) -> f64 {
        -self.half_y + (i + 1) as f64 * self.hy
    }

    pub fn unknowns(&self) -> usize {
        self.nx() * self.ny()
    }

    /// Envelope-based `x` extent and three turning points in `y`.
    pub fn for_lambda(b: FieldStrength, ground: &MinimumRecord, ell: f64, alpha: f64, lambda: f64) -> Self {
        let sb = b.value().sqrt();
        let x_n = (ground.kappa + ground.energy.sqrt()) / b.value();
        let hx = 0.25 / sb;
        let hy = 0.5 / sb;
        let half_x = ((x_n + 5.5 / sb) / hx).ceil() * hx;
        let half_y = ((3.0 * (ell / lambda).powf(1.0 / alpha)).max(10.0 / sb) / hy).ceil() * hy;
        Grid2d { half_x, half_y, hx, hy }
    }

    pub fn refined(&self, factor: f64) -> Self {
        Grid2d { hx: self.hx / factor, hy: self.hy / factor, ..*self }
    }
}

/// Bottom of the discrete spectrum of `H0` on the grid's `x` discretization,
/// `min_k` of the lowest eigenvalue of the discrete fiber.
pub fn discrete_threshold(b: FieldStrength, grid: &Grid2d, kappa: f64) -> Result<f64> {
    let (nx, hx, hy, bv) = (grid.nx(), grid.hx, grid.hy, b.value());
    let fiber = |k: f64| -> Result<f64> {
        let diag = (0..nx).map(|i| 2.0 / (hx * hx) + 2.0 / (hy * hy) * (1.0 - ((k - bv * grid.x(i).abs()) * hy).cos())).collect();
        let t = SymTridiagonal::new(diag, vec![-1.0 / (hx * hx); nx - 1]);
        let (lo, hi) = t.gershgorin();
        t.eigenvalue_in(0, lo, hi, 1e-14 * hi.abs().max(1.0))
    };
    let sb = bv.sqrt();
    Ok(golden_min(fiber, kappa - 0.5 * sb, kappa + 0.5 * sb, 80)?.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Count2d {
    pub lambda: f64,
    pub count: usize,
    pub threshold: f64,
    pub grid: Grid2d,
    /// Count on a grid refined by 4/3, when requested.
    pub refined_count: Option<usize>,
    /// False when refinement moved the count by more than one.
    pub stable: bool,
}

fn inertia_2d(b: FieldStrength, v: &DecayPotential, grid: &Grid2d, shift: f64) -> Result<usize> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy, bv) = (grid.hx, grid.hy, b.value());
    let xs: Vec<f64> = (0..nx).map(|i| grid.x(i)).collect();
    let links: Vec<Complex64> = xs.iter().map(|x| -Complex64::from_polar(1.0 / (hy * hy), -bv * x.abs() * hy)).collect();
    let diag0 = 2.0 / (hx * hx) + 2.0 / (hy * hy) - shift;
    let row = |r: usize, buf: &mut [Complex64]| {
        let (iy, ix) = (r / nx, r % nx);
        buf[0] = Complex64::new(diag0 - v.eval(xs[ix], grid.y(iy)), 0.0);
        if ix > 0 {
            buf[1] = Complex64::new(-1.0 / (hx * hx), 0.0);
        }
        if iy > 0 {
            buf[nx] = links[ix];
        }
    };
    Ok(band_inertia::<Complex64, _>(nx * ny, nx, row)?.negative)
}

/// `N(E1 - lambda; H0 - V)` on `grid`, the threshold being the discrete `E1`.
pub fn count_2d(b: FieldStrength, v: &DecayPotential, lambda: f64, grid: &Grid2d, kappa: f64, refine: bool) -> Result<Count2d> {
    let count_on = |g: &Grid2d| -> Result<(usize, f64)> {
        if g.unknowns() > MAX_UNKNOWNS {
            return Err(Error::Configuration(format!("{} unknowns exceed the budget of {MAX_UNKNOWNS}", g.unknowns())));
        }
        let threshold = discrete_threshold(b, g, kappa)?;
        if !(lambda > 0.0 && lambda < threshold) {
            return Err(Error::Domain(format!("lambda = {lambda} outside (0, E1 = {threshold})")));
        }
        let mut shift = threshold - lambda;
        for attempt in 0..4 {
            match inertia_2d(b, v, g, shift) {
                Ok(c) => return Ok((c, threshold)),
                Err(e) if attempt == 3 => return Err(e),
                Err(_) => shift -= 1e-9 * lambda * (attempt + 1) as f64,
            }
        }
        unreachable!()
    };
    let (count, threshold) = count_on(grid)?;
    let refined_count = if refine { Some(count_on(&grid.refined(4.0 / 3.0))?.0) } else { None };
    let stable = refined_count.is_none_or(|c| c.abs_diff(count) <= 1);
    Ok(Count2d { lambda, count, threshold, grid: *grid, refined_count, stable })
}
