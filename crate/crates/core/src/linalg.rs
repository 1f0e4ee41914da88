//! Small dense matrices and LU factorization with partial pivoting.

use std::ops::{Index, IndexMut};

use crate::error::{check_len, Error, Result};
use crate::scalar::{dot, to_f64, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            check_len(format!("matrix row {}", i + 1), cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
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

    pub fn data(&self) -> &[T] {
        &self.data
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

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        check_len("matrix-vector product", self.cols, v.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// `P A = L U` with unit lower `L`, stored in place.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    /// Factors a square matrix. Fails with [`Error::Singular`] when the best
    /// available pivot in some column has magnitude below `pivot_tol`.
    pub fn factor(mut a: Matrix<T>, pivot_tol: T) -> Result<Self> {
        check_len("square matrix columns", a.rows, a.cols)?;
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (p, pivot) = (col..n)
                .map(|r| (r, a[(r, col)].abs()))
                .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot >= pivot_tol) {
                return Err(Error::Singular {
                    pivot: to_f64(pivot),
                    column: col,
                });
            }
            if p != col {
                perm.swap(p, col);
                for j in 0..n {
                    a.data.swap(p * n + j, col * n + j);
                }
            }
            let d = a[(col, col)];
            for r in col + 1..n {
                let f = a[(r, col)] / d;
                a[(r, col)] = f;
                if f != T::zero() {
                    for j in col + 1..n {
                        let v = a[(col, j)];
                        a[(r, j)] = a[(r, j)] - f * v;
                    }
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.lu.rows;
        check_len("right-hand side", n, b.len())?;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu.row(i)[..i], &x[..i]);
            x[i] = x[i] - s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.lu.row(i)[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        Ok(x)
    }
}
