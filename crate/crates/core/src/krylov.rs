//! Lanczos approximation of `exp(−iHτ) v` for Hermitian sparse `H`.
//!
//! The Krylov space `span{v, Hv, ..., H^{m−1}v}` is built by the three-term
//! recurrence with a local second orthogonalization pass, `H` is projected to a real tridiagonal `T_m`, and the
//! small exponential is evaluated through the eigendecomposition of `T_m`.
//! The a-posteriori estimate `‖v‖ β_m |e_mᵀ exp(−iτT_m) e_1|` controls both
//! the subspace dimension and, when the dimension cap is hit, the length of
//! the substeps taken to cover `τ`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

pub const DEFAULT_MAX_KRYLOV_DIM: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Bound on the estimated error of the whole propagation.
    pub tol: f64,
    pub max_dim: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_dim: DEFAULT_MAX_KRYLOV_DIM,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KrylovStats {
    pub substeps: usize,
    pub matvecs: usize,
    pub largest_dim: usize,
    /// Sum of the per-substep error estimates.
    pub error_estimate: f64,
}

impl KrylovStats {
    pub fn absorb(&mut self, other: &KrylovStats) {
        self.substeps += other.substeps;
        self.matvecs += other.matvecs;
        self.largest_dim = self.largest_dim.max(other.largest_dim);
        self.error_estimate += other.error_estimate;
    }
}

/// Eigendecomposition of the Lanczos tridiagonal, used to evaluate
/// `exp(−iτT) e_1` for several `τ`.
struct Projected {
    values: Vec<f64>,
    /// First component of each eigenvector.
    first: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl Projected {
    fn new(alpha: &[f64], beta: &[f64]) -> Self {
        let m = alpha.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let first = (0..m).map(|k| eig.eigenvectors[(0, k)]).collect();
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            first,
            vectors: eig.eigenvectors,
        }
    }

    /// Component `i` of `exp(−iτT) e_1`.
    fn component(&self, i: usize, tau: f64) -> C64 {
        self.values
            .iter()
            .zip(&self.first)
            .enumerate()
            .map(|(k, (&lam, &s0))| C64::from_polar(s0 * self.vectors[(i, k)], -lam * tau))
            .sum()
    }

    fn column(&self, tau: f64) -> Vec<C64> {
        (0..self.values.len()).map(|i| self.component(i, tau)).collect()
    }
}

/// `Σ conj(a_i) b_i` with four independent partial sums.
fn dot(a: &[C64], b: &[C64]) -> C64 {
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: C64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x.conj() * y).sum();
    for (xs, ys) in ca.zip(cb) {
        for k in 0..4 {
            let (x, y) = (xs[k], ys[k]);
            re[k] += x.re * y.re + x.im * y.im;
            im[k] += x.re * y.im - x.im * y.re;
        }
    }
    C64::new(re.iter().sum::<f64>() + tail.re, im.iter().sum::<f64>() + tail.im)
}

fn norm(a: &[C64]) -> f64 {
    dot(a, a).re.sqrt()
}

/// Subspace sizes at which the error estimate is evaluated.
fn checkpoint(m: usize) -> bool {
    m >= 4 && (m <= 8 || m % 4 == 0)
}

/// `exp(−iHτ) v`.
pub fn expm_multiply(op: &SparseOperator, v: &[C64], tau: f64, opts: &KrylovOptions) -> Result<(Vec<C64>, KrylovStats)> {
    let dim = op.dim();
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: v.len(),
        });
    }
    let mut stats = KrylovStats::default();
    let mut w = v.to_vec();
    if tau == 0.0 || dim == 0 {
        return Ok((w, stats));
    }
    let max_dim = opts.max_dim.clamp(1, dim.max(1));
    let sign = tau.signum();
    let total = tau.abs();
    let mut remaining = total;
    let mut au = vec![C64::new(0.0, 0.0); dim];

    while remaining > 0.0 {
        let beta0 = norm(&w);
        if beta0 == 0.0 {
            break;
        }
        if !beta0.is_finite() {
            return Err(Error::Numerical("non-finite vector in Krylov propagation".into()));
        }
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(max_dim);
        basis.push(w.iter().map(|x| x / beta0).collect());
        let mut alpha = Vec::with_capacity(max_dim);
        let mut beta: Vec<f64> = Vec::with_capacity(max_dim);
        let mut scale = 0.0f64;
        // (substep, error) once a usable subspace is found
        let mut accepted: Option<(f64, f64, Projected)> = None;

        for j in 0..max_dim {
            op.apply_into(&basis[j], &mut au);
            stats.matvecs += 1;
            let a = dot(&basis[j], &au).re;
            alpha.push(a);
            for (x, q) in au.iter_mut().zip(&basis[j]) {
                *x -= a * q;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (x, q) in au.iter_mut().zip(&basis[j - 1]) {
                    *x -= b * q;
                }
            }
            // second pass against the two vectors of the recurrence
            for q in basis.iter().rev().take(2) {
                let c = dot(q, &au);
                for (x, qi) in au.iter_mut().zip(q) {
                    *x -= c * qi;
                }
            }
            let b = norm(&au);
            scale = scale.max(a.abs()).max(b);
            let m = j + 1;

            let invariant = b <= 1e-13 * scale.max(1e-300) || m == dim;
            if invariant {
                accepted = Some((remaining, 0.0, Projected::new(&alpha, &beta)));
                break;
            }
            if checkpoint(m) || m == max_dim {
                let proj = Projected::new(&alpha, &beta);
                let err = |tau: f64| beta0 * b * proj.component(m - 1, sign * tau).norm();
                let budget = |tau: f64| opts.tol * tau / total;
                if err(remaining) <= budget(remaining) {
                    accepted = Some((remaining, err(remaining), proj));
                    break;
                }
                if m == max_dim {
                    let mut step = remaining;
                    let mut tries = 0;
                    while err(step) > budget(step) {
                        step *= 0.5;
                        tries += 1;
                        if tries > 60 {
                            return Err(Error::Numerical(format!(
                                "Krylov substep underflow (tau = {tau}, tol = {})",
                                opts.tol
                            )));
                        }
                    }
                    let e = err(step);
                    accepted = Some((step, e, proj));
                    break;
                }
            }
            beta.push(b);
            basis.push(au.iter().map(|x| x / b).collect());
        }

        let (step, err, proj) = accepted.expect("Krylov loop always accepts a step");
        let coeffs = proj.column(sign * step);
        w.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        for (c, q) in coeffs.iter().zip(&basis) {
            let c = c * beta0;
            for (x, qi) in w.iter_mut().zip(q) {
                *x += c * qi;
            }
        }
        stats.substeps += 1;
        stats.largest_dim = stats.largest_dim.max(alpha.len());
        stats.error_estimate += err;
        remaining -= step;
        if remaining <= total * 1e-15 {
            break;
        }
    }
    if w.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::Numerical("non-finite amplitudes after Krylov propagation".into()));
    }
    Ok((w, stats))
}
