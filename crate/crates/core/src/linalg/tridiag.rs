//! Symmetric tridiagonal matrices: Sturm counts, bisection, inverse iteration.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty() && off.len() + 1 == diag.len(), "off-diagonal length must be n - 1");
        SymTridiagonal { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn pivmin(&self) -> f64 {
        let m = self.off.iter().fold(1.0f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * m
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester inertia of `T - sigma`).
    pub fn count_below(&self, sigma: f64) -> usize {
        let pivmin = self.pivmin();
        let mut q = self.diag[0] - sigma;
        let mut count = 0;
        if q.abs() <= pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let e = self.off[i - 1];
            q = self.diag[i] - sigma - e * e / q;
            if q.abs() <= pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection inside `[lo, hi]`.
    pub fn eigenvalue_in(&self, index: usize, mut lo: f64, mut hi: f64, abs_tol: f64) -> Result<f64> {
        if self.count_below(lo) > index || self.count_below(hi) <= index {
            return Err(Error::Invariant(format!(
                "bisection bracket [{lo}, {hi}] does not isolate eigenvalue {index}"
            )));
        }
        for _ in 0..200 {
            let tol = abs_tol.max(2.0 * f64::EPSILON * lo.abs().max(hi.abs()));
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The `n` smallest eigenvalues, searched inside `[lo, hi]` (widened to
    /// the Gershgorin interval if it does not contain them).
    pub fn lowest_eigenvalues(&self, n: usize, lo: f64, hi: f64, abs_tol: f64) -> Result<Vec<f64>> {
        if n > self.len() {
            return Err(Error::Capability(format!("requested {n} eigenvalues of a {}x{} matrix", self.len(), self.len())));
        }
        let (glo, ghi) = self.gershgorin();
        let lo = if self.count_below(lo) == 0 { lo } else { glo };
        let hi = if self.count_below(hi) >= n { hi } else { ghi };
        let mut out = Vec::with_capacity(n);
        let mut floor = lo;
        for i in 0..n {
            let v = self.eigenvalue_in(i, floor, hi, abs_tol)?;
            out.push(v);
            floor = floor.max(v - 4.0 * abs_tol.max(f64::EPSILON * v.abs()));
            if self.count_below(floor) > i + 1 {
                floor = lo;
            }
        }
        Ok(out)
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// Solve `(T - sigma) x = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut b = rhs.to_vec();
        if n == 1 {
            let p = self.diag[0] - sigma;
            b[0] /= if p == 0.0 { f64::EPSILON } else { p };
            return b;
        }
        let (glo, ghi) = self.gershgorin();
        let tiny = f64::EPSILON * glo.abs().max(ghi.abs()).max(1.0);
        let mut dl = self.off.clone();
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - sigma).collect();
        let mut du = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        for i in 0..n - 1 {
            if swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - dl[i] * b[i];
            } else {
                b[i + 1] -= dl[i] * b[i];
            }
        }
        b[n - 1] /= d[n - 1];
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
        b
    }

    /// Shifted inverse iteration for the eigenvector of `lambda`, kept
    /// orthogonal to `previous` (unit vectors in the Euclidean product).
    pub fn inverse_iteration(&self, lambda: f64, previous: &[Vec<f64>], iterations: usize) -> Result<Vec<f64>> {
        let n = self.len();
        // Deterministic, non-symmetric start so no eigenvector is missed.
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract()).collect();
        for _ in 0..iterations.max(1) {
            orthogonalize(&mut x, previous);
            normalize(&mut x)?;
            x = self.solve_shifted(lambda, &x);
            orthogonalize(&mut x, previous);
            normalize(&mut x)?;
        }
        let tx = self.mul(&x);
        let res: f64 = tx.iter().zip(&x).map(|(t, v)| (t - lambda * v).powi(2)).sum::<f64>().sqrt();
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(1.0);
        if res > 1e-7 * scale {
            return Err(Error::numerical("inverse iteration did not converge", res / scale));
        }
        Ok(x)
    }
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for v in basis {
        let p: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi -= p * vi;
        }
    }
}

fn normalize(x: &mut [f64]) -> Result<()> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::numerical("degenerate iterate in inverse iteration", norm));
    }
    x.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}
