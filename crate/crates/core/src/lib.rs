//! Fast Arnoldi iteration for BML matrices, progressive GMRES residuals and diagnostics.

pub mod analysis;
pub mod bml;
pub mod bmref;
pub mod error;
pub mod genmat;
pub mod kernel;
pub mod hessqr;
pub mod krylov;
pub mod residuals;

pub use error::{Error, Result};
pub use kernel::{CMatrix, CVector, Complex64, LinearOperator, Rng};
