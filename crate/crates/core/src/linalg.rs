//! Small dense matrices and a cyclic Jacobi eigen-solver for symmetric input.
//!
//! The graphs handled here have at most a few hundred vertices, so a
//! row-major `Vec` and an O(n^3) sweep are all that is needed.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetric_part(&self) -> Self {
        assert_eq!(self.rows, self.cols, "symmetric part of a non-square matrix");
        let half = T::lit(0.5);
        let mut s = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                s[(i, j)] = (self[(i, j)] + self[(j, i)]) * half;
            }
        }
        s
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        dot(x, &self.mul_vec(y))
    }

    pub fn quadratic_form(&self, x: &[T]) -> T {
        self.bilinear(x, x)
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows).map(|i| self.row(i).iter().copied().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)]).sum()).collect()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    fn off_diagonal_norm(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    acc += self[(i, j)] * self[(i, j)];
                }
            }
        }
        acc.sqrt()
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (entry ({i},{j}) differs from its transpose)")]
    NotSymmetric { i: usize, j: usize },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: DenseMatrix<T>,
    pub sweeps: usize,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi diagonalization.
///
/// Sweeps over every upper off-diagonal pair and annihilates it with a plane
/// rotation until the off-diagonal Frobenius norm drops below
/// `tol * max(1, ‖A‖_F)`.
pub fn symmetric_eigen<T: Real>(a: &DenseMatrix<T>, tol: T) -> Result<SymmetricEigen<T>, EigenError> {
    let n = a.rows();
    if a.cols() != n {
        return Err(EigenError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let scale = a.frobenius_norm().max(T::one());
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[(i, j)] - a[(j, i)]).abs() > tol * scale {
                return Err(EigenError::NotSymmetric { i, j });
            }
        }
    }

    let mut m = a.symmetric_part();
    let mut v = DenseMatrix::identity(n);
    let threshold = tol * scale;
    let mut sweeps = 0;
    while m.off_diagonal_norm() > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(EigenError::NotConverged {
                sweeps,
                residual: m.off_diagonal_norm().to_f64_lossy(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[(x, x)].partial_cmp(&m[(y, y)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&k| m[(k, k)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, k)];
        }
    }
    Ok(SymmetricEigen { values, vectors, sweeps })
}

/// One Jacobi rotation zeroing `m[p][q]`; accumulates into `v`.
fn rotate<T: Real>(m: &mut DenseMatrix<T>, v: &mut DenseMatrix<T>, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == T::zero() {
        return;
    }
    let app = m[(p, p)];
    let aqq = m[(q, q)];
    let two = T::lit(2.0);
    let theta = (aqq - app) / (two * apq);
    // Smaller root of t^2 + 2θt - 1 = 0 keeps the rotation angle below π/4.
    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
    let t = if theta == T::zero() { T::one() } else { t };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = T::zero();
    m[(q, p)] = T::zero();
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}
