use num_complex::Complex64;

use super::matrix::CMatrix;
use super::vector::CVector;

/// A square linear map given by its action and the action of its adjoint.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[Complex64]) -> CVector;

    fn apply_adjoint(&self, x: &[Complex64]) -> CVector;

    fn to_dense(&self) -> CMatrix;
}

impl LinearOperator for CMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[Complex64]) -> CVector {
        self.mul_vec(x)
    }

    fn apply_adjoint(&self, x: &[Complex64]) -> CVector {
        self.adjoint_mul_vec(x)
    }

    fn to_dense(&self) -> CMatrix {
        self.clone()
    }
}

/// Diagonal matrix stored by its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonal(pub Vec<Complex64>);

impl LinearOperator for Diagonal {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &[Complex64]) -> CVector {
        self.0.iter().zip(x).map(|(d, v)| d * v).collect()
    }

    fn apply_adjoint(&self, x: &[Complex64]) -> CVector {
        self.0.iter().zip(x).map(|(d, v)| d.conj() * v).collect()
    }

    fn to_dense(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.0)
    }
}
