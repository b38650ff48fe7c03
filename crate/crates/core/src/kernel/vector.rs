use std::ops::{Deref, DerefMut};

use num_complex::Complex64;

/// Hermitian inner product `x^* y`.
pub fn dotc(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Euclidean norm, scaled to avoid overflow for large entries.
pub fn norm2(x: &[Complex64]) -> f64 {
    let scale = x.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = x.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * sum.sqrt()
}

/// `y <- y + alpha * x`.
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CVector(Vec<Complex64>);

impl CVector {
    pub fn zeros(n: usize) -> Self {
        CVector(vec![Complex64::new(0.0, 0.0); n])
    }

    /// The `i`-th canonical basis vector of length `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        CVector(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    /// Inner product `self^* other`.
    pub fn dot(&self, other: &[Complex64]) -> Complex64 {
        dotc(&self.0, other)
    }

    pub fn axpy(&mut self, alpha: Complex64, x: &[Complex64]) {
        axpy(alpha, x, &mut self.0);
    }

    pub fn scale(&mut self, alpha: Complex64) {
        for z in &mut self.0 {
            *z *= alpha;
        }
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        CVector(self.0.iter().map(|z| z * alpha).collect())
    }

    /// Divides by the norm and returns the norm that was removed.
    pub fn normalize(&mut self) -> f64 {
        let nrm = self.norm();
        if nrm > 0.0 {
            let inv = 1.0 / nrm;
            for z in &mut self.0 {
                *z *= inv;
            }
        }
        nrm
    }

    pub fn sub(&self, other: &[Complex64]) -> Self {
        CVector(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &[Complex64]) -> Self {
        CVector(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn conj(&self) -> Self {
        CVector(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn push(&mut self, z: Complex64) {
        self.0.push(z);
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Deref for CVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for CVector {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl AsRef<[Complex64]> for CVector {
    fn as_ref(&self) -> &[Complex64] {
        &self.0
    }
}

impl From<Vec<Complex64>> for CVector {
    fn from(v: Vec<Complex64>) -> Self {
        CVector(v)
    }
}

impl From<&[Complex64]> for CVector {
    fn from(v: &[Complex64]) -> Self {
        CVector(v.to_vec())
    }
}

impl FromIterator<Complex64> for CVector {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        CVector(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dot_conjugates_left_argument() {
        let x = [c(0.0, 1.0)];
        let y = [c(0.0, 1.0)];
        assert_eq!(dotc(&x, &y), c(1.0, 0.0));
    }

    #[test]
    fn norm_survives_huge_entries() {
        let v = CVector::from(vec![c(1e200, 0.0), c(0.0, 1e200)]);
        let expected = 1e200 * 2f64.sqrt();
        assert!((v.norm() - expected).abs() / expected < 1e-15);
    }

    #[test]
    fn normalize_returns_removed_norm() {
        let mut v = CVector::from_real(&[3.0, 4.0]);
        assert_eq!(v.normalize(), 5.0);
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }
}
