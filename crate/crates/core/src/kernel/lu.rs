use num_complex::Complex64;

use super::matrix::CMatrix;
use super::vector::CVector;
use crate::error::{Error, Result};

/// Pivots below this multiple of the largest entry mark the matrix as singular.
const SINGULAR_THRESHOLD: f64 = 1e-13;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn new(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: a.cols(),
            });
        }
        let n = a.rows();
        let scale = a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
                .unwrap_or(k);
            if lu[(p, k)].norm() <= SINGULAR_THRESHOLD * scale || scale == 0.0 {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(LuFactor { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<CVector> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut x: CVector = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.dim();
        let cols: Vec<CVector> = (0..n)
            .map(|j| self.solve(&CVector::unit(n, j)).expect("dimension checked"))
            .collect();
        CMatrix::from_columns(n, &cols).expect("consistent column lengths")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rng::Rng;

    #[test]
    fn solves_random_system() {
        let mut rng = Rng::new(21);
        let a = CMatrix::from_fn(8, 8, |_, _| rng.complex_normal());
        let x0: CVector = (0..8).map(|_| rng.complex_normal()).collect();
        let b = a.mul_vec(&x0);
        let x = LuFactor::new(&a).unwrap().solve(&b).unwrap();
        assert!(x.sub(&x0).norm() < 1e-11 * x0.norm());
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let mut rng = Rng::new(2);
        let a = CMatrix::from_fn(5, 5, |_, _| rng.complex_normal());
        let inv = LuFactor::new(&a).unwrap().inverse();
        let prod = a.matmul(&inv).unwrap();
        assert!(prod.sub(&CMatrix::identity(5)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CMatrix::from_fn(3, 3, |i, _| Complex64::new(i as f64, 0.0));
        assert_eq!(LuFactor::new(&a).unwrap_err(), Error::Singular);
    }
}
