//! Matrices whose adjoint is a rational function of the matrix plus a low-rank term,
//! `A^* = sum_j d_j (A - z_j I)^{-1} + pi(A) + F G^*`, and the Arnoldi variants that
//! exploit this structure.

mod fast;
mod isometric;
mod specialized;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{svd_rank, CMatrix, CVector, LinearOperator, LuFactor, Rng};

pub use fast::{fast_arnoldi, FastArnoldiOptions, FastArnoldiState};
pub use isometric::{isometric_arnoldi, IsometricState};
pub use specialized::{nearly_hermitian_tau, nearly_unitary_tau, p_vector_update, shifted_unitary_tau};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative tolerance for the full-column-rank check on `F` and `G`.
const RANK_TOL: f64 = 1e-10;

/// Seed of the random probes drawn by [`validate_bml`].
const PROBE_SEED: u64 = 0x0b1d;

/// Special forms that admit cheaper pivot formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Specialization {
    General,
    /// `A^* - alpha A - beta I = F G^*`.
    NearlyHermitian { alpha: Complex64, beta: Complex64 },
    /// `A^* - beta A^{-1} = F G^*`.
    NearlyUnitary { beta: Complex64 },
    /// `A^* - alpha I - beta (A - delta I)^{-1} = F G^*` with `alpha != 0`.
    ShiftedUnitary { alpha: Complex64, beta: Complex64, delta: Complex64 },
}

impl Specialization {
    pub fn name(&self) -> &'static str {
        match self {
            Specialization::General => "general",
            Specialization::NearlyHermitian { .. } => "nearly Hermitian",
            Specialization::NearlyUnitary { .. } => "nearly unitary",
            Specialization::ShiftedUnitary { .. } => "shifted unitary",
        }
    }
}

/// A matrix together with a certificate of its BML structure.
#[derive(Clone)]
pub struct BmlOperator {
    matrix: Arc<dyn LinearOperator>,
    poles: Vec<Complex64>,
    residues: Vec<Complex64>,
    /// Coefficients of `pi` in ascending powers, without trailing zeros.
    pi_coeffs: Vec<Complex64>,
    f: CMatrix,
    g: CMatrix,
    specialization: Specialization,
    use_specialized: bool,
}

impl fmt::Debug for BmlOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BmlOperator")
            .field("n", &self.dim())
            .field("poles", &self.poles)
            .field("residues", &self.residues)
            .field("pi_coeffs", &self.pi_coeffs)
            .field("m3", &self.m3())
            .field("specialization", &self.specialization)
            .field("use_specialized", &self.use_specialized)
            .finish()
    }
}

impl BmlOperator {
    /// Checks dimensions, distinct poles and full column rank of `F` and `G`.
    pub fn new(
        matrix: Arc<dyn LinearOperator>,
        poles: Vec<Complex64>,
        residues: Vec<Complex64>,
        mut pi_coeffs: Vec<Complex64>,
        f: CMatrix,
        g: CMatrix,
    ) -> Result<Self> {
        let n = matrix.dim();
        if poles.len() != residues.len() {
            return Err(Error::DimensionMismatch {
                expected: poles.len(),
                found: residues.len(),
            });
        }
        for (i, z) in poles.iter().enumerate() {
            if poles[..i].iter().any(|w| (w - z).norm() <= 1e-14 * z.norm().max(1.0)) {
                return Err(Error::InvalidCertificate(format!("pole {z} is repeated")));
            }
        }
        for m in [&f, &g] {
            if m.rows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.rows() });
            }
        }
        if f.cols() != g.cols() {
            return Err(Error::DimensionMismatch {
                expected: f.cols(),
                found: g.cols(),
            });
        }
        if f.cols() > 0 && (svd_rank(&f, RANK_TOL) < f.cols() || svd_rank(&g, RANK_TOL) < g.cols()) {
            return Err(Error::InvalidCertificate("F and G must have full column rank".into()));
        }
        while pi_coeffs.last() == Some(&ZERO) {
            pi_coeffs.pop();
        }
        Ok(BmlOperator {
            matrix,
            poles,
            residues,
            pi_coeffs,
            f,
            g,
            specialization: Specialization::General,
            use_specialized: false,
        })
    }

    /// `A^* = alpha A + beta I + F G^*`.
    pub fn nearly_hermitian(matrix: Arc<dyn LinearOperator>, alpha: Complex64, beta: Complex64, f: CMatrix, g: CMatrix) -> Result<Self> {
        if alpha == ZERO {
            return Err(Error::InvalidCertificate("nearly Hermitian form needs alpha != 0".into()));
        }
        let mut op = Self::new(matrix, vec![], vec![], vec![beta, alpha], f, g)?;
        op.specialization = Specialization::NearlyHermitian { alpha, beta };
        Ok(op)
    }

    /// `A^* = alpha I + beta (A - delta I)^{-1} + F G^*`.
    ///
    /// With `alpha = 0` the form has no polynomial part. For `delta = 0` it is the nearly
    /// unitary form; otherwise no specialized pivot formula applies.
    pub fn shifted_unitary(
        matrix: Arc<dyn LinearOperator>,
        alpha: Complex64,
        beta: Complex64,
        delta: Complex64,
        f: CMatrix,
        g: CMatrix,
    ) -> Result<Self> {
        let mut op = Self::new(matrix, vec![delta], vec![beta], vec![alpha], f, g)?;
        op.specialization = if alpha != ZERO {
            Specialization::ShiftedUnitary { alpha, beta, delta }
        } else if delta == ZERO {
            Specialization::NearlyUnitary { beta }
        } else {
            log::debug!("alpha = 0 with delta != 0 has no specialized pivot route");
            Specialization::General
        };
        Ok(op)
    }

    /// `A^* = beta A^{-1} + F G^*`.
    pub fn nearly_unitary(matrix: Arc<dyn LinearOperator>, beta: Complex64, f: CMatrix, g: CMatrix) -> Result<Self> {
        Self::shifted_unitary(matrix, ZERO, beta, ZERO, f, g)
    }

    /// Enables or disables the specialized pivot formulas.
    pub fn with_specialized_tau(mut self, enabled: bool) -> Self {
        self.use_specialized = enabled;
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Arc<dyn LinearOperator> {
        &self.matrix
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn residues(&self) -> &[Complex64] {
        &self.residues
    }

    pub fn pi_coeffs(&self) -> &[Complex64] {
        &self.pi_coeffs
    }

    pub fn f(&self) -> &CMatrix {
        &self.f
    }

    pub fn g(&self) -> &CMatrix {
        &self.g
    }

    pub fn specialization(&self) -> Specialization {
        self.specialization
    }

    /// Whether the specialized pivot formulas are used.
    pub fn uses_specialized_tau(&self) -> bool {
        self.use_specialized && self.specialization != Specialization::General
    }

    /// Band width: `deg pi + 1`, or zero without polynomial part.
    pub fn m(&self) -> usize {
        self.pi_coeffs.len()
    }

    pub fn m2(&self) -> usize {
        self.poles.len()
    }

    pub fn m3(&self) -> usize {
        self.f.cols()
    }

    /// Degree of the numerator, `m1 = m2 + deg pi` (or 0 without polynomial part).
    pub fn m1(&self) -> usize {
        if self.pi_coeffs.is_empty() {
            0
        } else {
            self.m2() + self.pi_coeffs.len() - 1
        }
    }

    /// Right-hand side of the certificate applied to `x`, with dense solves for the poles.
    fn certificate_apply(&self, solvers: &[LuFactor], x: &[Complex64]) -> Result<CVector> {
        let mut out = CVector::zeros(x.len());
        for (solver, d) in solvers.iter().zip(&self.residues) {
            out.axpy(*d, &solver.solve(x)?);
        }
        // Horner: pi(A) x = c_0 x + A (c_1 x + A (c_2 x + ...)).
        if let Some((&lead, rest)) = self.pi_coeffs.split_last() {
            let mut acc = CVector::from(x).scaled(lead);
            for c in rest.iter().rev() {
                acc = self.matrix.apply(&acc);
                acc.axpy(*c, x);
            }
            out.axpy(Complex64::new(1.0, 0.0), &acc);
        }
        let gx = self.g.adjoint_mul_vec(x);
        out.axpy(Complex64::new(1.0, 0.0), &self.f.mul_vec(&gx));
        Ok(out)
    }
}

/// Outcome of [`validate_bml`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub probes: usize,
    /// Largest `||A^* x - rhs(x)|| / ||A^* x||` over the probes.
    pub max_defect: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Evaluates both sides of the certificate on random unit vectors.
pub fn validate_bml(op: &BmlOperator, probes: usize, tol: f64) -> Result<ValidationReport> {
    if probes == 0 {
        return Err(Error::InvalidDimension("at least one probe is required".into()));
    }
    let n = op.dim();
    let dense = op.matrix.to_dense();
    let solvers = op
        .poles
        .iter()
        .map(|&z| LuFactor::new(&dense.shifted(z)).map_err(|_| Error::SingularShift { re: z.re, im: z.im }))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = Rng::new(PROBE_SEED);
    let mut max_defect = 0.0f64;
    for _ in 0..probes {
        let mut x: CVector = (0..n).map(|_| rng.complex_normal()).collect();
        x.normalize();
        let lhs = op.matrix.apply_adjoint(&x);
        let rhs = op.certificate_apply(&solvers, &x)?;
        let scale = lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
        max_defect = max_defect.max(lhs.sub(&rhs).norm() / scale);
    }
    Ok(ValidationReport {
        probes,
        max_defect,
        tol,
        passed: max_defect <= tol,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::kernel::{c64, random_unitary};

    pub(crate) fn hermitian(n: usize, rng: &mut Rng) -> CMatrix {
        let x = CMatrix::from_fn(n, n, |_, _| rng.complex_normal());
        x.add(&x.adjoint()).unwrap().scaled(c64(0.5, 0.0))
    }

    #[test]
    fn band_width_from_polynomial_degree() {
        let mut rng = Rng::new(1);
        let h = Arc::new(hermitian(6, &mut rng));
        let empty = CMatrix::zeros(6, 0);
        let op = BmlOperator::new(h.clone(), vec![], vec![], vec![ZERO, c64(1.0, 0.0)], empty.clone(), empty.clone()).unwrap();
        assert_eq!((op.m1(), op.m2(), op.m3(), op.m()), (1, 0, 0, 2));
        let op = BmlOperator::new(h, vec![ZERO], vec![c64(1.0, 0.0)], vec![ZERO], empty.clone(), empty).unwrap();
        assert_eq!(op.m(), 0);
    }

    #[test]
    fn rejects_bad_certificates() {
        let mut rng = Rng::new(2);
        let h = Arc::new(hermitian(5, &mut rng));
        let empty = CMatrix::zeros(5, 0);
        let one = c64(1.0, 0.0);
        assert!(BmlOperator::new(h.clone(), vec![one, one], vec![one, one], vec![], empty.clone(), empty.clone()).is_err());
        let dependent = CMatrix::from_fn(5, 2, |i, _| c64(i as f64, 0.0));
        assert!(BmlOperator::new(h, vec![], vec![], vec![], dependent.clone(), dependent).is_err());
    }

    #[test]
    fn validation_examples() {
        let mut rng = Rng::new(3);
        let empty = CMatrix::zeros(12, 0);
        let one = c64(1.0, 0.0);
        let h = Arc::new(hermitian(12, &mut rng));
        let op = BmlOperator::nearly_hermitian(h, one, ZERO, empty.clone(), empty.clone()).unwrap();
        assert!(validate_bml(&op, 4, 1e-12).unwrap().passed);

        let u: Arc<dyn LinearOperator> = Arc::new(random_unitary(12, &mut rng).unwrap());
        let op = BmlOperator::nearly_unitary(u.clone(), one, empty.clone(), empty.clone()).unwrap();
        let report = validate_bml(&op, 4, 1e-12).unwrap();
        assert!(report.passed, "defect {}", report.max_defect);

        let wrong = BmlOperator::nearly_unitary(u, c64(0.5, 0.0), empty.clone(), empty).unwrap();
        let report = validate_bml(&wrong, 4, 1e-12).unwrap();
        assert!(!report.passed && report.max_defect > 0.1);
    }

    #[test]
    fn singular_pole_is_reported() {
        let empty = CMatrix::zeros(3, 0);
        let a: Arc<dyn LinearOperator> = Arc::new(CMatrix::identity(3));
        let one = c64(1.0, 0.0);
        let op = BmlOperator::new(a, vec![one], vec![one], vec![], empty.clone(), empty).unwrap();
        assert!(matches!(validate_bml(&op, 1, 1e-12), Err(Error::SingularShift { .. })));
    }
}
