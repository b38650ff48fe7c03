//! Dense complex linear algebra shared by the Krylov routines.

mod lu;
mod matrix;
mod operator;
mod qr;
mod rng;
mod vector;

pub use lu::LuFactor;
pub use matrix::CMatrix;
pub use operator::{Diagonal, LinearOperator};
pub use qr::{lsq_solve, lsq_solve_min_norm, svd_rank, HouseholderQr, PIVOT_THRESHOLD};
pub use rng::{randn_cvector, random_unitary, Rng};
pub use vector::{axpy, dotc, norm2, CVector};

pub use num_complex::Complex64;

/// Shorthand constructor for a complex scalar.
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(-1)^k` as a real number.
pub fn parity_sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
