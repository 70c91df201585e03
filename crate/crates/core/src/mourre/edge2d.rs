//! Edge current of window eigenvectors of the perturbed operator
//! `(p_x - a_1)^2 + (p_y - b|x| - a_2)^2 + q` on a box that is periodic in `y`
//! and has Dirichlet walls in `x`.

use super::{inverse_branch, EnergyWindow, MourreReport};
use crate::bands::derivative_fh;
use crate::error::{Error, Result};
use crate::fiber::{solve_bands, FieldStrength, SolverOptions};
use crate::linalg::{BandLdl, SymTridiagonal};
use crate::numerics::brent_root;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest number of `x` nodes or `y` modes.
pub const MAX_BOX_DIMENSION: usize = 256;

/// Discretization: `x` nodes `-L + i h` (interior), `y`-modes `exp(i k_m y)`
/// with `k_m = 2 pi m / period` for `m` in `modes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2d {
    pub b: FieldStrength,
    pub half_width: f64,
    pub nx: usize,
    pub period: f64,
    pub modes: (i64, i64),
}

impl Box2d {
    pub fn hx(&self) -> f64 {
        2.0 * self.half_width / (self.nx + 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.hx()
    }

    pub fn n_modes(&self) -> usize {
        (self.modes.1 - self.modes.0 + 1) as usize
    }

    pub fn k(&self, mode: usize) -> f64 {
        2.0 * PI * (self.modes.0 + mode as i64) as f64 / self.period
    }

    pub fn unknowns(&self) -> usize {
        self.nx * self.n_modes()
    }

    fn validate(&self) -> Result<()> {
        if self.modes.1 < self.modes.0 || self.nx < 3 {
            return Err(Error::Configuration("empty 2D box".into()));
        }
        if self.nx > MAX_BOX_DIMENSION || self.n_modes() > MAX_BOX_DIMENSION {
            return Err(Error::Configuration(format!(
                "2D box {} x {} exceeds {MAX_BOX_DIMENSION} x {MAX_BOX_DIMENSION}",
                self.nx,
                self.n_modes()
            )));
        }
        Ok(())
    }

    /// One `y`-mode of the unperturbed box operator: a tridiagonal matrix in `x`.
    pub fn mode_operator(&self, k: f64) -> SymTridiagonal {
        let (h, b) = (self.hx(), self.b.value());
        let diag = (0..self.nx).map(|i| 2.0 / (h * h) + (k - b * self.x(i).abs()).powi(2)).collect();
        SymTridiagonal::new(diag, vec![-1.0 / (h * h); self.nx - 1])
    }

    fn lowest_mode_level(&self, k: f64) -> Result<f64> {
        let t = self.mode_operator(k);
        let (lo, hi) = t.gershgorin();
        t.eigenvalue_in(0, lo, hi, 1e-13 * hi.abs().max(1.0))
    }

    /// Box sized for the window of `report`, with the period chosen so one
    /// mode sits exactly where the box's lowest band crosses `E`.
    pub fn for_report(report: &MourreReport, opts: &SolverOptions) -> Result<Self> {
        let b = report.b();
        let (bv, sb) = (b.value(), b.value().sqrt());
        let e = report.window.e;
        let k_lo = report.preimages.iter().map(|p| p.k_lo).fold(f64::INFINITY, f64::min) - 2.0 * sb;
        let k_hi = report.preimages.iter().map(|p| p.k_hi).fold(f64::NEG_INFINITY, f64::max) + 2.0 * sb;
        let half_width = (k_hi.max(0.0) + e.sqrt()) / bv + 5.5 / sb;
        let nx = (2.0 * half_width / (0.25 / sb)).ceil() as usize - 1;
        let mut bx = Box2d { b, half_width, nx, period: 1.0, modes: (0, 0) };
        let k1 = inverse_branch(b, 1, e, opts)?;
        let star = brent_root(|k| Ok(bx.lowest_mode_level(k)? - e), k1 - 0.5 * sb, k1 + 0.5 * sb, 1e-13 * sb)?;
        let spacing = 0.25 * sb;
        let m0 = (star.abs() / spacing).round().max(1.0);
        bx.period = 2.0 * PI * m0 / star.abs();
        let kappa = 2.0 * PI / bx.period;
        bx.modes = ((k_lo / kappa).floor() as i64, (k_hi / kappa).ceil() as i64);
        bx.validate()?;
        Ok(bx)
    }
}

/// `a = (0, A cos(pi x / 2L) cos(2 pi y / period))` and `q = Q cos(2 pi y / period)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Perturbation2d {
    pub a_amp: f64,
    pub q_amp: f64,
}

impl Perturbation2d {
    /// `(||a||^2 + ||grad a||) / b` on the box.
    pub fn a_frak(&self, bx: &Box2d) -> f64 {
        let a = self.a_amp.abs();
        let grad = a * ((PI / (2.0 * bx.half_width)).powi(2) + (2.0 * PI / bx.period).powi(2)).sqrt();
        (a * a + grad) / bx.b.value()
    }

    /// `||q|| / b`.
    pub fn q_frak(&self, bx: &Box2d) -> f64 {
        self.q_amp.abs() / bx.b.value()
    }

    /// Amplitudes scaled so that `(a_frak, q_frak)` equal the given budget fractions.
    pub fn within(bx: &Box2d, a_frak: f64, q_frak: f64) -> Self {
        let b = bx.b.value();
        let g = ((PI / (2.0 * bx.half_width)).powi(2) + (2.0 * PI / bx.period).powi(2)).sqrt();
        // positive root of A^2 + g A = a_frak b
        let a_amp = 0.5 * (-g + (g * g + 4.0 * a_frak * b).sqrt());
        Perturbation2d { a_amp, q_amp: q_frak * b }
    }

    fn profile(&self, bx: &Box2d, i: usize) -> f64 {
        self.a_amp * (PI * bx.x(i) / (2.0 * bx.half_width)).cos()
    }
}

struct Operator<'a> {
    bx: &'a Box2d,
    pert: Perturbation2d,
    bw: usize,
}

impl Operator<'_> {
    fn new(bx: &Box2d, pert: Perturbation2d) -> Operator<'_> {
        let bw = if pert.a_amp != 0.0 {
            2 * bx.nx
        } else if pert.q_amp != 0.0 {
            bx.nx
        } else {
            1
        };
        Operator { bx, pert, bw }
    }

    fn n(&self) -> usize {
        self.bx.unknowns()
    }

    // buf[d] = H[r][r - d] - shift delta_{d0}
    fn row(&self, r: usize, shift: f64, buf: &mut [f64]) {
        let bx = self.bx;
        let (nx, h, b) = (bx.nx, bx.hx(), bx.b.value());
        let (m, i) = (r / nx, r % nx);
        let x = bx.x(i);
        let km = bx.k(m);
        let alpha = self.pert.profile(bx, i);
        buf.iter_mut().for_each(|v| *v = 0.0);
        buf[0] = 2.0 / (h * h) + (km - b * x.abs()).powi(2) + 0.5 * alpha * alpha - shift;
        if i > 0 && self.bw >= 1 {
            buf[1] = -1.0 / (h * h);
        }
        if m >= 1 && self.bw >= nx {
            let kp = bx.k(m - 1);
            buf[nx] = -0.5 * alpha * (km + kp - 2.0 * b * x.abs()) + 0.5 * self.pert.q_amp;
        }
        if m >= 2 && self.bw >= 2 * nx {
            buf[2 * nx] = 0.25 * alpha * alpha;
        }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        let mut buf = vec![0.0; self.bw + 1];
        for r in 0..v.len() {
            self.row(r, 0.0, &mut buf);
            out[r] += buf[0] * v[r];
            for d in 1..=self.bw.min(r) {
                if buf[d] != 0.0 {
                    out[r] += buf[d] * v[r - d];
                    out[r - d] += buf[d] * v[r];
                }
            }
        }
        out
    }

    /// `<v, (-(p_y - b|x|) + a_2) v>`.
    fn current(&self, v: &[f64]) -> f64 {
        let bx = self.bx;
        let (nx, b) = (bx.nx, bx.b.value());
        let mut s = 0.0;
        for r in 0..v.len() {
            let (m, i) = (r / nx, r % nx);
            let x = bx.x(i);
            s -= (bx.k(m) - b * x.abs()) * v[r] * v[r];
            if m >= 1 {
                s += 2.0 * 0.5 * self.pert.profile(bx, i) * v[r] * v[r - nx];
            }
        }
        s
    }

    fn factor(&self, shift: f64) -> Result<BandLdl> {
        let scale = shift.abs().max(1.0);
        let mut s = shift;
        for attempt in 0..4 {
            match BandLdl::factor(self.n(), self.bw, |r, buf| self.row(r, s, buf)) {
                Ok(f) => return Ok(f),
                Err(e) if attempt == 3 => return Err(e),
                Err(_) => s += 1e-10 * scale * (attempt + 1) as f64,
            }
        }
        unreachable!()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCurrent2d {
    pub window: EnergyWindow,
    pub grid: Box2d,
    pub perturbation: Perturbation2d,
    pub energies: Vec<f64>,
    /// `J / ||phi||^2` for each window eigenvector.
    pub currents: Vec<f64>,
    /// `-omega_j'(k_m)/2` at each eigenvector's dominant mode, when unperturbed.
    pub fiber_prediction: Vec<Option<f64>>,
    /// `(c_n / 4) sqrt(b)`.
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Relative allowance for the box discretization in the current bound.
pub const DISCRETIZATION_SLACK: f64 = 0.05;

/// Eigenvectors of the discretized operator with eigenvalues in `window`, and their currents.
pub fn edge_current_2d(
    report: &MourreReport,
    window: &EnergyWindow,
    pert: Perturbation2d,
    bx: &Box2d,
    opts: &SolverOptions,
) -> Result<EdgeCurrent2d> {
    bx.validate()?;
    if bx.b != report.b() {
        return Err(Error::Precondition("box and report use different field strengths".into()));
    }
    let op = Operator::new(bx, pert);
    let below = |e: f64| -> Result<usize> { Ok(op.factor(e)?.inertia().negative) };
    let count = below(window.hi)? - below(window.lo)?;
    if count == 0 {
        return Err(Error::Resolution(format!(
            "no eigenvalue of the {} x {} box in [{}, {}]",
            bx.nx,
            bx.n_modes(),
            window.lo,
            window.hi
        )));
    }
    let (values, vectors) = subspace_iteration(&op, window, count)?;
    let bound = 0.25 * report.c_n * bx.b.value().sqrt();
    let slack = DISCRETIZATION_SLACK * bound;
    let mut currents = Vec::with_capacity(count);
    let mut fiber_prediction = Vec::with_capacity(count);
    for (e, v) in values.iter().zip(&vectors) {
        let norm: f64 = v.iter().map(|x| x * x).sum();
        currents.push(op.current(v) / norm);
        fiber_prediction.push(if pert == Perturbation2d::default() { Some(fiber_velocity(bx, v, *e, report.n(), opts)?) } else { None });
    }
    let pass = currents.iter().all(|&j| j >= bound - slack);
    Ok(EdgeCurrent2d {
        window: *window,
        grid: *bx,
        perturbation: pert,
        energies: values,
        currents,
        fiber_prediction,
        bound,
        slack,
        pass,
    })
}

// -omega_j'(k)/2 for the fiber band nearest `e` at the dominant mode of `v`.
fn fiber_velocity(bx: &Box2d, v: &[f64], e: f64, n: usize, opts: &SolverOptions) -> Result<f64> {
    let weights: Vec<f64> = v.chunks(bx.nx).map(|c| c.iter().map(|x| x * x).sum()).collect();
    let m = (0..weights.len()).max_by(|&a, &c| weights[a].total_cmp(&weights[c])).unwrap();
    let k = bx.k(m);
    let pairs = solve_bands(bx.b, k, 2 * n + 2, opts)?;
    let p = pairs.iter().min_by(|a, c| (a.omega - e).abs().total_cmp(&(c.omega - e).abs())).unwrap();
    Ok(-0.5 * derivative_fh(p, bx.b, k)?)
}

fn subspace_iteration(op: &Operator, window: &EnergyWindow, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = op.n();
    let s = (count + 4).min(n);
    let sigma = window.e;
    let ldl = op.factor(sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DMatrix::<f64>::from_fn(n, s, |_, _| rng.random::<f64>() - 0.5);
    let scale = window.hi.abs().max(1.0);
    let mut last_residual = f64::INFINITY;
    for _ in 0..300 {
        for c in 0..s {
            let y = ldl.solve(x.column(c).as_slice());
            x.column_mut(c).copy_from_slice(&y);
        }
        let q = x.clone().qr().q();
        let aq = DMatrix::from_fn(n, s, |_, _| 0.0);
        let mut aq = aq;
        for c in 0..s {
            let y = op.apply(q.column(c).as_slice());
            aq.column_mut(c).copy_from_slice(&y);
        }
        let h = q.transpose() * &aq;
        let h = 0.5 * (&h + h.transpose());
        let eig = SymmetricEigen::new(h);
        x = &q * &eig.eigenvectors;
        let ax = &aq * &eig.eigenvectors;
        let inside: Vec<usize> = (0..s).filter(|&i| window.contains(eig.eigenvalues[i])).collect();
        let residual = inside
            .iter()
            .map(|&i| (ax.column(i) - x.column(i) * eig.eigenvalues[i]).norm())
            .fold(0.0, f64::max);
        last_residual = residual;
        if inside.len() == count && residual <= 1e-9 * scale {
            let mut pairs: Vec<(f64, Vec<f64>)> =
                inside.iter().map(|&i| (eig.eigenvalues[i], x.column(i).iter().cloned().collect())).collect();
            pairs.sort_by(|a, c| a.0.total_cmp(&c.0));
            return Ok(pairs.into_iter().unzip());
        }
    }
    Err(Error::numerical("subspace iteration did not converge", last_residual))
}
