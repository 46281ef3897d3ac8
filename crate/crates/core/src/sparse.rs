//! Compressed-row sparse operators with complex entries.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance used when verifying `H = H†`.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A square sparse operator in compressed-row form.
///
/// Construction goes through a coordinate list that is sorted row-major and
/// has duplicate entries summed, so two builds from the same triplets give
/// identical storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
    hermitian: bool,
    /// All stored values have zero imaginary part.
    real: bool,
}

impl SparseOperator {
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.max(c) + 1,
            });
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }

        let real = values.iter().all(|v| v.im == 0.0);
        let mut op = Self {
            dim,
            row_ptr,
            col_idx,
            values,
            hermitian: false,
            real,
        };
        op.hermitian = op.hermiticity_defect() < HERMITICITY_TOL;
        Ok(op)
    }

    /// Row-by-row construction for operators known to be Hermitian by
    /// construction. `fill(r, row)` pushes the entries of row `r` in any
    /// order; they are sorted and duplicates summed.
    pub(crate) fn from_hermitian_rows<F>(dim: usize, mut fill: F) -> Self
    where
        F: FnMut(usize, &mut Vec<(usize, C64)>),
    {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut row = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            row.clear();
            fill(r, &mut row);
            row.sort_by_key(|&(c, _)| c);
            let mut last = None;
            for &(c, v) in &row {
                debug_assert!(c < dim);
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let real = values.iter().all(|v: &C64| v.im == 0.0);
        let op = Self {
            dim,
            row_ptr,
            col_idx,
            values,
            hermitian: true,
            real,
        };
        debug_assert!(op.hermiticity_defect() < HERMITICITY_TOL);
        op
    }

    /// Same sparsity pattern, new values in storage order.
    pub(crate) fn with_values(&self, values: Vec<C64>, hermitian: bool) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            real: values.iter().all(|v| v.im == 0.0),
            values,
            hermitian,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: diag.iter().map(|&d| C64::new(d, 0.0)).collect(),
            hermitian: true,
            real: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
            hermitian: true,
            real: true,
        }
    }

    /// `a A + b B`. Operators with identical sparsity patterns are combined
    /// entry by entry; otherwise rows are merged.
    pub fn linear_combination(a: f64, lhs: &SparseOperator, b: f64, rhs: &SparseOperator) -> Result<Self> {
        if lhs.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: lhs.dim,
                got: rhs.dim,
            });
        }
        let hermitian = lhs.hermitian && rhs.hermitian;
        if lhs.row_ptr == rhs.row_ptr && lhs.col_idx == rhs.col_idx {
            return Ok(Self {
                dim: lhs.dim,
                row_ptr: lhs.row_ptr.clone(),
                col_idx: lhs.col_idx.clone(),
                values: lhs.values.iter().zip(&rhs.values).map(|(x, y)| x * a + y * b).collect(),
                hermitian,
                real: lhs.real && rhs.real,
            });
        }
        let mut row_ptr = Vec::with_capacity(lhs.dim + 1);
        let mut col_idx = Vec::with_capacity(lhs.nnz().max(rhs.nnz()));
        let mut values = Vec::with_capacity(col_idx.capacity());
        row_ptr.push(0);
        for r in 0..lhs.dim {
            let (mut i, ie) = (lhs.row_ptr[r], lhs.row_ptr[r + 1]);
            let (mut j, je) = (rhs.row_ptr[r], rhs.row_ptr[r + 1]);
            while i < ie || j < je {
                let ci = if i < ie { lhs.col_idx[i] } else { usize::MAX };
                let cj = if j < je { rhs.col_idx[j] } else { usize::MAX };
                let c = ci.min(cj);
                let mut v = C64::new(0.0, 0.0);
                if ci == c {
                    v += lhs.values[i] * a;
                    i += 1;
                }
                if cj == c {
                    v += rhs.values[j] * b;
                    j += 1;
                }
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            dim: lhs.dim,
            row_ptr,
            col_idx,
            values,
            hermitian,
            real: lhs.real && rhs.real,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Set at construction when the stored entries pass the hermiticity check.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Stored entries as `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// `max |H - H†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Largest absolute row sum, an upper bound on the spectral norm for
    /// Hermitian operators.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.values[self.row_ptr[r]..self.row_ptr[r + 1]].iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        let rows = y.iter_mut().zip(self.row_ptr.windows(2));
        if self.real {
            for (out, w) in rows {
                let (mut re, mut im) = (0.0, 0.0);
                for (&c, v) in self.col_idx[w[0]..w[1]].iter().zip(&self.values[w[0]..w[1]]) {
                    re += x[c].re * v.re;
                    im += x[c].im * v.re;
                }
                *out = C64::new(re, im);
            }
            return;
        }
        for (out, w) in rows {
            let mut acc = C64::new(0.0, 0.0);
            for (&c, v) in self.col_idx[w[0]..w[1]].iter().zip(&self.values[w[0]..w[1]]) {
                acc += v * x[c];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// `⟨x|H|x⟩`, real part only (exact for Hermitian `H`).
    pub fn expectation(&self, x: &[C64]) -> f64 {
        let hx = self.apply(x);
        x.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] += v;
        }
        m
    }
}
