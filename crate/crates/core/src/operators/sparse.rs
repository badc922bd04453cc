//! Compressed-row matrices and a pivot-free banded LU factorization.
//!
//! Every matrix assembled by the monotone scheme is a Z-matrix, and a nonsingular
//! M-matrix admits LU factorization without pivoting with positive pivots, so the
//! band structure of the grid ordering is preserved exactly.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds a square matrix from per-row `(column, value)` lists; duplicates are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, T)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let start = cols.len();
            for (c, v) in row {
                if cols.len() > start && *cols.last().unwrap() == c {
                    let last = vals.len() - 1;
                    vals[last] = vals[last] + v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.row(i).find(|&(c, _)| c == j).map_or(T::zero(), |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    /// Largest off-diagonal entry (`-∞` for a diagonal matrix).
    pub fn max_off_diagonal(&self) -> T {
        (0..self.n)
            .flat_map(|i| self.row(i).filter(move |&(c, _)| c != i).map(|(_, v)| v))
            .fold(T::neg_infinity(), T::max)
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| self.row(i).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// `(lower, upper)` bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut lo = 0;
        let mut up = 0;
        for i in 0..self.n {
            for (c, _) in self.row(i) {
                if c < i {
                    lo = lo.max(i - c);
                } else {
                    up = up.max(c - i);
                }
            }
        }
        (lo, up)
    }

    /// Infinity norm, used to scale pivot tests.
    pub fn norm_inf(&self) -> T {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<T>()).fold(T::zero(), T::max)
    }
}

/// Band LU factors `A = L U` with `L` unit lower triangular, stored in one band array.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    lower: usize,
    upper: usize,
    band: Vec<T>,
}

impl<T: Real> BandLu<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let (lower, upper) = a.bandwidths();
        let width = lower + upper + 1;
        let mut band = vec![T::zero(); n * width];
        for i in 0..n {
            for (c, v) in a.row(i) {
                band[i * width + c + lower - i] = v;
            }
        }
        let tiny = a.norm_inf() * T::epsilon() * T::lit(16.0);
        for k in 0..n {
            let pivot = band[k * width + lower];
            if !(pivot.abs() > tiny) {
                return Err(Error::Singular { row: k, pivot: pivot.f64() });
            }
            let last_row = (k + lower).min(n - 1);
            let last_col = (k + upper).min(n - 1);
            for i in k + 1..=last_row {
                let ik = i * width + k + lower - i;
                let l = band[ik] / pivot;
                band[ik] = l;
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = band[k * width + j + lower - k];
                    let ij = i * width + j + lower - i;
                    band[ij] = band[ij] - l * kj;
                }
            }
        }
        Ok(Self { n, lower, upper, band })
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let (n, lo, up) = (self.n, self.lower, self.upper);
        let width = lo + up + 1;
        let mut x = b.to_vec();
        for i in 0..n {
            let first = i.saturating_sub(lo);
            let mut s = x[i];
            for j in first..i {
                s = s - self.band[i * width + j + lo - i] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let last = (i + up).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=last {
                s = s - self.band[i * width + j + lo - i] * x[j];
            }
            x[i] = s / self.band[i * width + lo];
        }
        x
    }

    /// Diagonal of `U`; all positive for a nonsingular M-matrix.
    pub fn pivots(&self) -> Vec<T> {
        let width = self.lower + self.upper + 1;
        (0..self.n).map(|i| self.band[i * width + self.lower]).collect()
    }
}
