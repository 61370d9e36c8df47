//! Dense linear algebra for the small matrices that appear here (d <= 16 or so).
//!
//! Everything is row-major `f64`. The two Lyapunov routes ([`solve_lyapunov_kron`]
//! and [`solve_lyapunov_quadrature`]) share nothing but the matrix exponential,
//! which is itself tested against closed forms.

mod eigen;
mod expm;
mod flow;
mod lu;
mod lyapunov;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use eigen::{sym_eigen, sym_sqrt, SymEigen};
pub use expm::{mat_exp, mat_exp_unscaled};
pub use flow::{covariance_flow, CovarianceFlow};
pub use lu::Lu;
pub use lyapunov::{
    lyapunov_residual, solve_lyapunov_kron, solve_lyapunov_quadrature,
    solve_lyapunov_quadrature_with_rate, LyapunovMethod, LyapunovSolution,
};

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds from row-major data. Panics on length mismatch.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn scalar(v: f64) -> Self {
        Self::from_row_major(1, 1, vec![v])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
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

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `(M + M^T) / 2`.
    pub fn symmetric_part(&self) -> Self {
        let t = self.transpose();
        (self + &t).scale(0.5)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Entrywise 1-norm, the sum of all `|m_ij|` (not the induced operator norm).
    pub fn one_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    /// Induced 1-norm (max column sum), used for scaling in `expm`.
    pub fn op_norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mat_vec_into(x, &mut out);
        out
    }

    pub fn mat_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate().take(self.rows) {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::InvalidInput(format!(
                "{what}: expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !self.is_finite() {
            return Err(Error::InvalidInput(format!("{what}: non-finite entries")));
        }
        Ok(self.rows)
    }
}

/// Frobenius norm (free-function form).
pub fn fro_norm(m: &Matrix) -> f64 {
    m.fro_norm()
}

/// Entrywise 1-norm (free-function form).
pub fn one_norm(m: &Matrix) -> f64 {
    m.one_norm()
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &'a Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn add(self, rhs: &'a Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &'a Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

// Matrices go over the wire as arrays of rows.
impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Euclidean norm of a vector.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn norms_of_identity() {
        let i = Matrix::identity(2);
        assert!((i.fro_norm() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(i.one_norm(), 2.0);
    }

    #[test]
    fn norms_of_small_matrix() {
        let m = Matrix::from_rows(&[vec![1.0, -2.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(m.one_norm(), 6.0);
        assert!((m.fro_norm() - 14f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn json_is_array_of_rows() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.0]]");
        let back: Matrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<Matrix>("[[1.0],[2.0,3.0]]").is_err());
    }

    fn square(d: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-3.0..3.0f64, d * d).prop_map(move |v| Matrix::from_row_major(d, d, v))
    }

    fn pair() -> impl Strategy<Value = (Matrix, Matrix)> {
        (1usize..=8).prop_flat_map(|d| (square(d), square(d)))
    }

    proptest! {
        #[test]
        fn norm_equivalence((a, _b) in pair()) {
            let d = a.rows() as f64;
            prop_assert!(a.fro_norm() <= a.one_norm() + 1e-12);
            prop_assert!(a.one_norm() <= d * a.fro_norm() + 1e-12);
        }

        #[test]
        fn frobenius_is_submultiplicative((a, b) in pair()) {
            prop_assert!((&a * &b).fro_norm() <= a.fro_norm() * b.fro_norm() + 1e-12);
        }

        #[test]
        fn trace_bound((a, b) in pair()) {
            let d = a.rows() as f64;
            let ab = &a * &b;
            prop_assert!(ab.trace().abs() <= ab.one_norm() + 1e-12);
            prop_assert!(ab.one_norm() <= d * a.one_norm() * b.fro_norm() + 1e-12);
        }
    }
}
