//! Dense row-major matrices, Cholesky factorization and triangular products.

use std::ops::{Index, IndexMut};

use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from a row-major buffer.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from rows, rejecting ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|v| U::from_f64_lossy(v.as_f64()))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(
            T::zero(),
            |acc, v| if v.abs() > acc { v.abs() } else { acc },
        )
    }

    /// Largest `|a_ij − a_ji|`, with its position.
    pub fn max_asymmetry(&self) -> (T, usize, usize) {
        let mut worst = (T::zero(), 0, 0);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let d = (self[(i, j)] - self[(j, i)]).abs();
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        worst
    }

    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Dot product with four independent accumulators.
#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [T::zero(); 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] = acc[0] + x[0] * y[0];
        acc[1] = acc[1] + x[1] * y[1];
        acc[2] = acc[2] + x[2] * y[2];
        acc[3] = acc[3] + x[3] * y[3];
    }
    let mut tail = T::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail = tail + *x * *y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = A`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor<T> {
    dim: usize,
    lower: Matrix<T>,
}

impl<T: Scalar> CholeskyFactor<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &Matrix<T> {
        &self.lower
    }

    /// Writes `L·g` into `out`.
    pub fn mul_into(&self, g: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = dot(&self.lower.row(i)[..=i], &g[..=i]);
        }
    }

    /// `L·Lᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.dim;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = dot(&self.lower.row(i)[..=j], &self.lower.row(j)[..=j]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
}

fn symmetry_tolerance<T: Scalar>() -> T {
    let eps = T::epsilon() * T::from_f64_lossy(1e3);
    let floor = T::from_f64_lossy(1e-10);
    if eps > floor {
        eps
    } else {
        floor
    }
}

/// Cholesky–Banachiewicz factorization of a symmetric positive definite
/// matrix. Fails at the first non-positive pivot.
pub fn cholesky<T: Scalar>(m: &Matrix<T>) -> Result<CholeskyFactor<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let n = m.rows();
    let scale = m.max_abs().max(T::one());
    let (asym, i, j) = m.max_asymmetry();
    if asym > symmetry_tolerance::<T>() * scale {
        return Err(Error::InvalidMatrix {
            row: i,
            col: j,
            reason: format!("not symmetric (difference {asym})"),
        });
    }
    let mut lower = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = m[(i, j)] - dot(&lower.row(i)[..j], &lower.row(j)[..j]);
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return Err(Error::NotPositiveDefinite { index: i });
                }
                lower[(i, i)] = s.sqrt();
            } else {
                lower[(i, j)] = s / lower[(j, j)];
            }
        }
    }
    Ok(CholeskyFactor { dim: n, lower })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_factors_to_identity() {
        let f = cholesky(&Matrix::<f64>::identity(5)).unwrap();
        assert_eq!(f.lower(), &Matrix::identity(5));
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let l = cholesky(&m).unwrap();
        let l = l.lower();
        assert_eq!(l[(0, 0)], 1.0);
        assert_eq!(l[(0, 1)], 0.0);
        assert_eq!(l[(1, 0)], 0.5);
        assert!((l[(1, 1)] - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn indefinite_input_reports_pivot() {
        // eigenvalues 1.9 and 1.0 and −0.1: pivot 2 goes negative
        let m = Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 1.0, 0.9],
        ])
        .unwrap();
        match cholesky(&m) {
            Err(Error::NotPositiveDefinite { index }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 0.2], vec![0.3, 1.0]]).unwrap();
        assert!(matches!(cholesky(&m), Err(Error::InvalidMatrix { .. })));
    }

    #[test]
    fn random_spd_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..100 {
            let p = 1 + case % 50;
            let b = Matrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
            // A = B·Bᵀ + p·I
            let mut a = Matrix::from_fn(p, p, |i, j| dot(b.row(i), b.row(j)));
            for i in 0..p {
                a[(i, i)] += p as f64 * 0.1;
            }
            let f = cholesky(&a).unwrap();
            for i in 0..p {
                assert!(f.lower()[(i, i)] > 0.0);
            }
            let r = f.reconstruct();
            let scale = a.max_abs();
            for i in 0..p {
                for j in 0..p {
                    assert!((r[(i, j)] - a[(i, j)]).abs() <= 1e-10 * scale);
                }
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let m = Matrix::<f32>::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let l = cholesky(&m).unwrap();
        assert!((l.lower()[(1, 1)] - 0.75f32.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..13).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..13).map(|i| 1.0 - i as f64).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }
}
