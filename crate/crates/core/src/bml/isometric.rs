use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{CVector, LinearOperator, Rng};
use crate::krylov::{start_vector, KrylovState};

/// Allowed defect `||A x|| - ||x||` and `||A^* A x - x||` on the unitarity probes.
const UNITARY_TOL: f64 = 1e-10;
const PROBES: usize = 3;
const PROBE_SEED: u64 = 0x150;

/// Arnoldi data of a unitary matrix from the two-term recurrence.
#[derive(Debug, Clone)]
pub struct IsometricState {
    pub base: KrylovState,
    /// `gamma_k = -vt_k^* A v_k`.
    pub gammas: Vec<Complex64>,
    /// Complementary parameters `(1 - |gamma_k|^2)^{1/2}`.
    pub complements: Vec<f64>,
    /// Auxiliary vectors `vt_1, vt_2, ...`.
    pub auxiliary: Vec<CVector>,
}

fn check_unitary(a: &dyn LinearOperator) -> Result<()> {
    let mut rng = Rng::new(PROBE_SEED);
    let n = a.dim();
    let mut defect = 0.0f64;
    for _ in 0..PROBES {
        let mut x: CVector = (0..n).map(|_| rng.complex_normal()).collect();
        x.normalize();
        let ax = a.apply(&x);
        defect = defect.max((ax.norm() - 1.0).abs());
        defect = defect.max(a.apply_adjoint(&ax).sub(&x).norm());
    }
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

/// Isometric Arnoldi algorithm for unitary `A`:
/// `v_{k+1} = (A v_k + gamma_k vt_k) / sigma_k` and `vt_{k+1} = sigma_k vt_k + conj(gamma_k) v_{k+1}`.
///
/// The Hessenberg matrix is assembled in full from `h_{i,k} = -gamma_k (vt_k)_i`, with the
/// coordinates of `vt_k` in the basis propagated by the same recurrence. A step with
/// `|gamma_k| >= 1 - 1e-14` ends the run with `N = k`.
pub fn isometric_arnoldi(a: &dyn LinearOperator, b: &[Complex64], kmax: usize) -> Result<IsometricState> {
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.len(),
        });
    }
    if kmax == 0 {
        return Err(Error::InvalidDimension("kmax must be positive".into()));
    }
    check_unitary(a)?;
    let v1 = start_vector(b)?;
    let mut st = IsometricState {
        base: KrylovState::new(v1.clone()),
        gammas: Vec::new(),
        complements: Vec::new(),
        auxiliary: vec![v1],
    };
    let mut coords = CVector::unit(1, 0);
    for k in 1..=kmax {
        let av = a.apply(&st.base.basis[k - 1]);
        let vt = &st.auxiliary[k - 1];
        let gamma = -vt.dot(&av);
        let mut col: Vec<Complex64> = coords.iter().map(|c| -gamma * c).collect();
        st.gammas.push(gamma);
        if gamma.norm() >= 1.0 - 1e-14 {
            st.complements.push(0.0);
            col.push(Complex64::new(0.0, 0.0));
            st.base.hessenberg.push_column(col)?;
            st.base.termination = Some(k);
            break;
        }
        let sigma = (1.0 - gamma.norm_sqr()).sqrt();
        st.complements.push(sigma);
        let mut next = av;
        next.axpy(gamma, vt);
        next.scale(Complex64::new(1.0 / sigma, 0.0));
        let mut next_vt = vt.scaled(Complex64::new(sigma, 0.0));
        next_vt.axpy(gamma.conj(), &next);
        col.push(Complex64::new(sigma, 0.0));
        st.base.hessenberg.push_column(col)?;
        coords.scale(Complex64::new(sigma, 0.0));
        coords.push(gamma.conj());
        st.base.basis.push(next);
        st.auxiliary.push(next_vt);
    }
    Ok(st)
}
