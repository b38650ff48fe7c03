//! Progressive GMRES residuals for shifted systems and an independent reference GMRES.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hessqr::{cs_from_tau, GivensChain};
use crate::kernel::{dotc, lsq_solve, parity_sign, CMatrix, CVector, LinearOperator};

/// Relative residuals below this are reported as zero.
pub const RELNORM_FLOOR: f64 = 1e-300;

/// Normalized residual `w_k(delta)` of GMRES for `(A - delta I) x = b`, updated one step
/// at a time.
#[derive(Debug, Clone)]
pub struct ResidualTrack {
    pub shift: Complex64,
    pub w: CVector,
    pub chain: GivensChain,
    /// `||r_k|| / ||r_0||`.
    pub relnorm: f64,
    /// Number of updates so far, `k`.
    pub parity: usize,
    pub converged: bool,
}

impl ResidualTrack {
    pub fn new(shift: Complex64, v1: &CVector) -> Self {
        ResidualTrack {
            shift,
            w: v1.clone(),
            chain: GivensChain::new(shift),
            relnorm: 1.0,
            parity: 0,
            converged: false,
        }
    }

    /// Pivot of the next step from `A v_{k+1}` and `v_{k+1}`.
    pub fn next_tau(&self, av: &[Complex64], v: &[Complex64]) -> Complex64 {
        tau_general(&self.w, av, v, self.shift, self.parity + 1)
    }

    /// Advances `w_{k-1}` to `w_k` given `v_{k+1}`, the pivot `tau_k` and `h_{k+1,k}`.
    pub fn update(&mut self, v_next: &[Complex64], tau: Complex64, h_sub: f64) -> Result<()> {
        let (s, c) = cs_from_tau(tau, h_sub)?;
        let k = self.parity + 1;
        let coeff = c.conj() * parity_sign(k);
        for (wi, vi) in self.w.iter_mut().zip(v_next) {
            *wi = *wi * s + coeff * vi;
        }
        self.w.normalize();
        self.chain.push(s, c, tau);
        self.relnorm *= s;
        if self.relnorm < RELNORM_FLOOR {
            self.relnorm = 0.0;
            self.converged = true;
        }
        self.parity = k;
        Ok(())
    }
}

/// `(-1)^{k-1} w_{k-1}^* (A v_k - delta v_k)`.
pub fn tau_general(w_prev: &[Complex64], av: &[Complex64], v: &[Complex64], delta: Complex64, k: usize) -> Complex64 {
    let raw = dotc(w_prev, av) - delta * dotc(w_prev, v);
    raw * parity_sign(k + 1)
}

/// Functional form of [`ResidualTrack::update`].
pub fn update_residual(track: &ResidualTrack, v_next: &[Complex64], tau: Complex64, h_sub: f64) -> Result<ResidualTrack> {
    let mut next = track.clone();
    next.update(v_next, tau, h_sub)?;
    Ok(next)
}

/// Relative GMRES residuals `||r_k|| / ||r_0||`, `k = 0, 1, ...`, for `(A - delta I) x = b`
/// from a full Arnoldi run with classical Gram-Schmidt applied twice and a Householder
/// least-squares solve at every step.
///
/// The list ends at `kmax` or at the step where the Krylov space becomes invariant.
pub fn reference_gmres(a: &dyn LinearOperator, b: &[Complex64], delta: Complex64, kmax: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let beta = crate::kernel::norm2(b);
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::ZeroStartVector);
    }
    let mut basis = vec![CVector::from(b).scaled(Complex64::new(1.0 / beta, 0.0))];
    let mut hess = CMatrix::zeros(kmax + 1, kmax);
    let mut out = vec![1.0];
    for k in 0..kmax {
        let mut w = a.apply(&basis[k]);
        let scale = w.norm();
        for _ in 0..2 {
            let coeffs: Vec<Complex64> = basis.iter().map(|v| dotc(v, &w)).collect();
            for (v, h) in basis.iter().zip(&coeffs) {
                w.axpy(-h, v);
            }
            for (i, h) in coeffs.into_iter().enumerate() {
                hess[(i, k)] += h;
            }
        }
        let sub = w.normalize();
        let invariant = sub <= 1e-14 * scale;
        let rows = if invariant { k + 1 } else { k + 2 };
        if !invariant {
            hess[(k + 1, k)] = Complex64::new(sub, 0.0);
        }
        let mut shifted = hess.submatrix(0, rows, 0, k + 1);
        for j in 0..=k {
            shifted[(j, j)] -= delta;
        }
        let rhs = CVector::unit(rows, 0);
        let y = lsq_solve(&shifted, &rhs)?;
        let resid = rhs.sub(&shifted.mul_vec(&y));
        out.push(resid.norm());
        if invariant {
            break;
        }
        basis.push(w);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hessqr::givens_qr;
    use crate::kernel::{c64, random_unitary, randn_cvector, Rng};
    use crate::krylov::{arnoldi, eval_orthopoly, sigma_sequence, DEFAULT_BREAKDOWN_TOL};

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn random_matrix(n: usize, rng: &mut Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| rng.complex_normal())
    }

    /// Runs the progressive recurrence over a precomputed orthonormal basis.
    fn progressive(a: &CMatrix, basis: &[CVector], hs: &[f64], delta: Complex64) -> ResidualTrack {
        let mut track = ResidualTrack::new(delta, &basis[0]);
        for k in 0..hs.len() {
            let av = a.apply(&basis[k]);
            let tau = track.next_tau(&av, &basis[k]);
            track.update(&basis[k + 1], tau, hs[k]).unwrap();
        }
        track
    }

    #[test]
    fn tau_identity_first_step() {
        let v = CVector::unit(3, 0);
        assert_eq!(tau_general(&v, &v, &v, ZERO, 1), c64(1.0, 0.0));
    }

    #[test]
    fn zero_tau_keeps_residual() {
        let v1 = CVector::unit(3, 0);
        let track = ResidualTrack::new(ZERO, &v1);
        let next = update_residual(&track, &CVector::unit(3, 1), ZERO, 0.7).unwrap();
        assert_eq!(next.w, v1);
        assert_eq!(next.relnorm, 1.0);
        assert_eq!(next.parity, 1);
    }

    #[test]
    fn first_update_formula() {
        let v1 = CVector::unit(2, 0);
        let v2 = CVector::unit(2, 1);
        let tau = c64(2.0, 0.0);
        let next = update_residual(&ResidualTrack::new(ZERO, &v1), &v2, tau, 1.0).unwrap();
        let (s, c) = (1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt());
        assert!((next.w[0] - c64(s, 0.0)).norm() < 1e-15);
        assert!((next.w[1] - c64(-c, 0.0)).norm() < 1e-15);
        assert!((next.relnorm - s).abs() < 1e-15);
        assert!(update_residual(&next, &v1, tau, 0.0).is_err());
    }

    #[test]
    fn unitary_tau_matches_first_row() {
        let mut rng = Rng::new(8);
        let u = random_unitary(25, &mut rng).unwrap();
        let b = randn_cvector(25, &mut rng).unwrap();
        let st = arnoldi(&u, &b, 10, true, DEFAULT_BREAKDOWN_TOL).unwrap();
        let q = eval_orthopoly(&st.hessenberg, 10, ZERO).unwrap();
        let sig = sigma_sequence(&q);
        let mut track = ResidualTrack::new(ZERO, &st.basis[0]);
        for k in 1..=10 {
            let av = u.apply(&st.basis[k - 1]);
            let tau = track.next_tau(&av, &st.basis[k - 1]);
            let expected = st.hessenberg.get(0, k - 1) * (parity_sign(k - 1) * sig[k - 1]);
            assert!((tau - expected).norm() < 1e-12);
            track.update(&st.basis[k], tau, st.hessenberg.subdiag(k - 1)).unwrap();
            assert!((tau - track.chain.c[k - 1]).norm() < 1e-12);
        }
    }

    #[test]
    fn tau_matches_triangular_factor_route() {
        let mut rng = Rng::new(20);
        let a = random_matrix(20, &mut rng);
        let b = randn_cvector(20, &mut rng).unwrap();
        let k = 12;
        let st = arnoldi(&a, &b, k, true, DEFAULT_BREAKDOWN_TOL).unwrap();
        let delta = c64(0.4, -0.3);
        let hs: Vec<f64> = (0..k).map(|j| st.hessenberg.subdiag(j)).collect();
        let track = progressive(&a, &st.basis, &hs, delta);
        let (chain, _) = givens_qr(&st.hessenberg, k, delta).unwrap();
        for j in 0..k {
            assert!((track.chain.tau[j] - chain.tau[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn orthogonality_expansion_and_reference() {
        let mut rng = Rng::new(3);
        let n = 40;
        let a = random_matrix(n, &mut rng);
        let b = randn_cvector(n, &mut rng).unwrap();
        let k = 25;
        let st = arnoldi(&a, &b, k, true, DEFAULT_BREAKDOWN_TOL).unwrap();
        let delta = c64(-0.5, 1.0);
        let hs: Vec<f64> = (0..k).map(|j| st.hessenberg.subdiag(j)).collect();
        let track = progressive(&a, &st.basis, &hs, delta);
        assert!((track.w.norm() - 1.0).abs() < 1e-12);
        let prod: f64 = track.chain.s.iter().product();
        assert!((track.relnorm - prod).abs() < 1e-12 * prod);
        for v in &st.basis[..k] {
            let image = a.apply(v).sub(&v.scaled(delta));
            assert!(track.w.dot(&image).norm() < 1e-10);
        }

        let q = eval_orthopoly(&st.hessenberg, k, delta).unwrap();
        let sig = sigma_sequence(&q);
        let mut expansion = CVector::zeros(n);
        for (j, qj) in q.iter().enumerate() {
            expansion.axpy(qj.conj() / sig[k], &st.basis[j]);
        }
        assert!(expansion.sub(&track.w).norm() < 1e-10);

        let reference = reference_gmres(&a, &b, delta, k).unwrap();
        assert_eq!(reference[0], 1.0);
        for j in 1..=k {
            assert!((reference[j] - 1.0 / sig[j]).abs() < 1e-10);
        }
        assert!((reference[k] - track.relnorm).abs() < 1e-8 * reference[k]);
    }

    #[test]
    fn unitary_residual_is_kernel_polynomial() {
        let mut rng = Rng::new(41);
        let n = 30;
        let u = random_unitary(n, &mut rng).unwrap();
        let b = randn_cvector(n, &mut rng).unwrap();
        let k = 8;
        let st = arnoldi(&u, &b, k, true, DEFAULT_BREAKDOWN_TOL).unwrap();
        let hs: Vec<f64> = (0..k).map(|j| st.hessenberg.subdiag(j)).collect();
        let track = progressive(&u, &st.basis, &hs, ZERO);
        let q0 = eval_orthopoly(&st.hessenberg, k, ZERO).unwrap();
        let sig = sigma_sequence(&q0);
        let mut qa: Vec<CVector> = vec![st.basis[0].clone()];
        for j in 0..k {
            let col = st.hessenberg.column(j);
            let mut next = u.apply(&qa[j]);
            for (i, qi) in qa.iter().enumerate() {
                next.axpy(-col[i], qi);
            }
            next.scale(c64(1.0 / col[j + 1].re, 0.0));
            qa.push(next);
        }
        let mut kernel = CVector::zeros(n);
        for (j, v) in qa.iter().enumerate() {
            kernel.axpy(q0[j].conj() / sig[k], v);
        }
        assert!(kernel.sub(&track.w).norm() < 1e-10);
    }

    #[test]
    fn reference_identity_solves_in_one_step() {
        let a = CMatrix::identity(5);
        let b = CVector::from_real(&[1.0, 2.0, 0.0, -1.0, 3.0]);
        let r = reference_gmres(&a, &b, ZERO, 4).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0], 1.0);
        assert!(r[1] < 1e-14);
        assert!(matches!(reference_gmres(&a, &CVector::zeros(5), ZERO, 3), Err(Error::ZeroStartVector)));
    }
}
