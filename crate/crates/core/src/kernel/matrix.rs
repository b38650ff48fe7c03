use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::vector::{dotc, CVector};
use crate::error::{Error, Result};

/// Dense complex matrix in column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Builds a matrix whose columns are the given slices, all of length `rows`.
    pub fn from_columns<C: AsRef<[Complex64]>>(rows: usize, columns: &[C]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for col in columns {
            let col = col.as_ref();
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            data.extend_from_slice(col);
        }
        Ok(CMatrix {
            rows,
            cols: columns.len(),
            data,
        })
    }

    /// Builds a matrix from row-major nested data.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch {
                expected: ncols,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(nrows, ncols, |i, j| rows[i][j]))
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

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector::from(self.col(j))
    }

    pub fn row(&self, i: usize) -> CVector {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> CMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (l, &b) in rhs.col(j).iter().enumerate() {
                if b == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (d, a) in dst.iter_mut().zip(self.col(l)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Product `self^* * rhs` without forming the adjoint.
    pub fn adjoint_matmul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: rhs.rows,
            });
        }
        Ok(Self::from_fn(self.cols, rhs.cols, |i, j| dotc(self.col(i), rhs.col(j))))
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> CVector {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        let mut y = CVector::zeros(self.rows);
        for (j, &xj) in x.iter().enumerate() {
            if xj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (yi, a) in y.iter_mut().zip(self.col(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    /// `self^* x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> CVector {
        assert_eq!(x.len(), self.rows, "adjoint_mul_vec dimension mismatch");
        (0..self.cols).map(|j| dotc(self.col(j), x)).collect()
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scaled(&self, alpha: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * alpha).collect(),
        }
    }

    /// `self - delta * I` for square matrices (identity padded for rectangular shapes).
    pub fn shifted(&self, delta: Complex64) -> CMatrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= delta;
        }
        m
    }

    /// Copy of the block `rows r0..r1`, `cols c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> CMatrix {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols, "submatrix out of range");
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Leading `cols` columns.
    pub fn leading_columns(&self, cols: usize) -> CMatrix {
        assert!(cols <= self.cols);
        CMatrix {
            rows: self.rows,
            cols,
            data: self.data[..cols * self.rows].to_vec(),
        }
    }

    pub fn push_column(&mut self, col: &[Complex64]) -> Result<()> {
        if self.cols > 0 && col.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: col.len(),
            });
        }
        if self.cols == 0 {
            self.rows = col.len();
        }
        self.data.extend_from_slice(col);
        self.cols += 1;
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        super::vector::norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Singular values in nonincreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Vec::new();
        }
        let mut sv: Vec<f64> = self.to_nalgebra().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Spectral norm (largest singular value).
    pub fn spectral_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_column_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<Complex64>) -> CMatrix {
        CMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.as_slice().to_vec(),
        }
    }

    /// Eigenvalues of a square matrix via a complex Schur decomposition.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let schur = nalgebra::Schur::new(self.to_nalgebra());
        let (_, t) = schur.unpack();
        Ok((0..self.rows).map(|i| t[(i, i)]).collect())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matmul_matches_hand_product() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(2.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let b = CMatrix::from_rows(&[vec![c(0.0, 1.0)], vec![c(1.0, 0.0)]]).unwrap();
        let p = a.matmul(&b).unwrap();
        assert_eq!(p[(0, 0)], c(0.0, 2.0));
        assert_eq!(p[(1, 0)], c(1.0, 2.0));
    }

    #[test]
    fn adjoint_matmul_equals_explicit_adjoint() {
        let a = CMatrix::from_fn(3, 2, |i, j| c(i as f64, j as f64 + 1.0));
        let b = CMatrix::from_fn(3, 2, |i, j| c(j as f64, -(i as f64)));
        let lhs = a.adjoint_matmul(&b).unwrap();
        let rhs = a.adjoint().matmul(&b).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let d = CMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, -3.0), c(2.0, 0.0)]);
        assert!((d.spectral_norm() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_triangular_matrix_are_its_diagonal() {
        let t = CMatrix::from_rows(&[vec![c(1.0, 1.0), c(5.0, 0.0)], vec![c(0.0, 0.0), c(-2.0, 0.0)]]).unwrap();
        let mut ev = t.eigenvalues().unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-2.0, 0.0)).norm() < 1e-12);
        assert!((ev[1] - c(1.0, 1.0)).norm() < 1e-12);
    }
}
