//! Small dense linear algebra, generic over `f64` and [`Jet`] entries.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Field-like scalar: what Gaussian elimination needs.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn value(&self) -> f64;
    /// A constant compatible with `self` (same jet dimension/order).
    fn lift(&self, c: f64) -> Self;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> f64 {
        c
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn lift(&self, c: f64) -> Jet {
        self.constant_like(c)
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S = f64> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Clone> Matrix<S> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn map<T: Clone>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn matmul(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = self.get(i, 0).clone() * other.get(0, j).clone();
            for k in 1..self.cols {
                acc = acc + self.get(i, k).clone() * other.get(k, j).clone();
            }
            acc
        })
    }

    pub fn values(&self) -> Matrix<f64> {
        self.map(Scalar::value)
    }

    /// Max-row-sum norm of the values.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).value().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Solve `self * X = rhs` by Gaussian elimination with partial pivoting.
    ///
    /// Pivots are chosen on values; a pivot below `1e-12 * ||A||_inf` is
    /// reported as singular.
    pub fn solve(&self, rhs: &Matrix<S>) -> Result<Matrix<S>> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(self.rows, rhs.rows, "right-hand side row mismatch");
        let n = self.rows;
        let m = rhs.cols;
        let scale = self.norm_inf();
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let (piv_row, piv_abs) = (col..n)
                .map(|r| (r, a.get(r, col).value().abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(piv_abs > 1e-12 * scale) || !piv_abs.is_finite() {
                return Err(Error::SingularMatrix { pivot: piv_abs, scale });
            }
            if piv_row != col {
                for j in 0..n {
                    a.data.swap(col * n + j, piv_row * n + j);
                }
                for j in 0..m {
                    b.data.swap(col * m + j, piv_row * m + j);
                }
            }
            let pivot = a.get(col, col).clone();
            for r in col + 1..n {
                let factor = a.get(r, col).clone() / pivot.clone();
                for j in col..n {
                    let v = a.get(r, j).clone() - factor.clone() * a.get(col, j).clone();
                    a.set(r, j, v);
                }
                for j in 0..m {
                    let v = b.get(r, j).clone() - factor.clone() * b.get(col, j).clone();
                    b.set(r, j, v);
                }
            }
        }
        let mut x = b.clone();
        for j in 0..m {
            for r in (0..n).rev() {
                let mut acc = b.get(r, j).clone();
                for k in r + 1..n {
                    acc = acc - a.get(r, k).clone() * x.get(k, j).clone();
                }
                x.set(r, j, acc / a.get(r, r).clone());
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix<S>> {
        let probe = self.get(0, 0);
        let eye = Matrix::from_fn(self.rows, self.rows, |i, j| probe.lift(if i == j { 1.0 } else { 0.0 }));
        self.solve(&eye)
    }

    pub fn determinant_value(&self) -> f64 {
        let v = self.values();
        determinant(&v)
    }
}

impl Matrix<f64> {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }
}

/// Solve `A x = b` for a single right-hand side.
pub fn solve_linear(a: &Matrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    if a.rows() != a.cols() {
        return Err(Error::Contract("solve_linear needs a square matrix".into()));
    }
    if b.len() != a.rows() {
        return Err(Error::Contract("right-hand side length mismatch".into()));
    }
    let rhs = Matrix::from_vec(b.len(), 1, b.to_vec());
    Ok(a.solve(&rhs)?.column(0))
}

/// Determinant by elimination; zero for singular input.
pub fn determinant(a: &Matrix<f64>) -> f64 {
    let n = a.rows();
    let mut m = a.clone();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m.get(x, col).abs().total_cmp(&m.get(y, col).abs()))
            .unwrap_or(col);
        let p = *m.get(piv, col);
        if p == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..n {
                m.data.swap(col * n + j, piv * n + j);
            }
            det = -det;
        }
        det *= p;
        for r in col + 1..n {
            let f = m.get(r, col) / p;
            for j in col..n {
                let v = m.get(r, j) - f * m.get(col, j);
                m.set(r, j, v);
            }
        }
    }
    det
}
