use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::CMatrix;
use super::qr::HouseholderQr;
use super::vector::CVector;
use crate::error::{Error, Result};

/// Seeded random stream; ChaCha8 keeps it identical across platforms.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform sample from `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.inner.random::<f64>()
    }

    /// Complex number with independent standard normal real and imaginary parts.
    pub fn complex_normal(&mut self) -> Complex64 {
        let re = self.normal();
        Complex64::new(re, self.normal())
    }
}

/// Real-valued vector of standard normal entries stored as complex numbers.
pub fn randn_cvector(n: usize, rng: &mut Rng) -> Result<CVector> {
    if n == 0 {
        return Err(Error::InvalidDimension("vector length must be positive".into()));
    }
    Ok((0..n).map(|_| Complex64::new(rng.normal(), 0.0)).collect())
}

/// Haar-distributed unitary matrix: QR of a complex Gaussian matrix with the phases of
/// `diag(R)` moved into `Q` so that `R` has a positive diagonal.
pub fn random_unitary(n: usize, rng: &mut Rng) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("matrix order must be positive".into()));
    }
    let g = CMatrix::from_fn(n, n, |_, _| rng.complex_normal());
    let qr = HouseholderQr::new(&g, false);
    let mut q = qr.thin_q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for x in q.col_mut(j) {
            *x *= phase;
        }
    }
    Ok(q)
}
