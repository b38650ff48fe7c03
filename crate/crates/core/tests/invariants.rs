//! Property tests of invariants that hold for every input in the sampled ranges.

use proptest::prelude::*;

use bml_core::analysis::{paige_measure, upper_separable_check, DEFAULT_RANK_TOL};
use bml_core::bml::validate_bml;
use bml_core::genmat::{self, diag_arc_spectrum};
use bml_core::kernel::{c64, dotc, lsq_solve, norm2, randn_cvector, svd_rank, LuFactor};
use bml_core::krylov::{arnoldi, eval_orthopoly, Hessenberg, DEFAULT_BREAKDOWN_TOL};
use bml_core::residuals::ResidualTrack;
use bml_core::{CMatrix, CVector, Rng};

fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut rng = Rng::new(seed);
    CMatrix::from_fn(rows, cols, |_, _| rng.complex_normal())
}

/// `p(M) e_1` for the polynomial with values given by the recurrence in `hess`, applied to `m`.
fn polynomial_images(hess: &Hessenberg, m: &CMatrix, start: &CVector, k: usize) -> Vec<CVector> {
    let mut out = vec![start.clone()];
    for j in 0..k {
        let col = hess.column(j);
        let mut next = m.mul_vec(&out[j]);
        for (i, prev) in out.iter().enumerate() {
            next.axpy(-col[i], prev);
        }
        next.scale(c64(1.0 / hess.subdiag(j), 0.0));
        out.push(next);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn least_squares_residual_is_orthogonal(seed in 0u64..10_000, rows in 4usize..16, cols in 1usize..4) {
        let m = random_matrix(rows, cols, seed);
        let y = random_matrix(rows, 1, seed + 1).column(0);
        let x = lsq_solve(&m, &y).unwrap();
        let r = m.mul_vec(&x).sub(&y);
        for j in 0..cols {
            prop_assert!(dotc(m.col(j), &r).norm() <= 1e-10 * y.norm() * norm2(m.col(j)));
        }
    }

    #[test]
    fn svd_rank_decreases_with_tolerance(seed in 0u64..10_000, lo in 0.0f64..0.5, gap in 0.0f64..0.5) {
        let m = random_matrix(5, 4, seed);
        prop_assert!(svd_rank(&m, lo + gap) <= svd_rank(&m, lo));
    }

    #[test]
    fn start_vectors_depend_only_on_seed(seed in any::<u64>(), n in 1usize..50) {
        let a = randn_cvector(n, &mut Rng::new(seed)).unwrap();
        let b = randn_cvector(n, &mut Rng::new(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn polynomials_reproduce_basis(seed in 0u64..10_000, n in 4usize..21) {
        // Spectral radius near one keeps q_k bounded; beyond degree 20 the recurrence
        // amplifies rounding past 1e-10 on non-normal Gaussian matrices.
        let a = random_matrix(n, n, seed).scaled(c64(1.0 / (n as f64).sqrt(), 0.0));
        let b = randn_cvector(n, &mut Rng::new(seed + 1)).unwrap();
        let st = arnoldi(&a, &b, n, true, DEFAULT_BREAKDOWN_TOL).unwrap();
        let big_n = st.termination.unwrap_or(n);
        let hess = &st.hessenberg;
        let images = polynomial_images(hess, &a, &st.basis[0], big_n - 1);
        for (k, image) in images.iter().enumerate() {
            prop_assert!(image.sub(&st.basis[k]).norm() <= 1e-8, "k = {}", k);
        }
        let h = hess.square(big_n);
        let units = polynomial_images(hess, &h, &CVector::unit(big_n, 0), big_n - 1);
        for (k, image) in units.iter().enumerate() {
            prop_assert!(image.sub(&CVector::unit(big_n, k)).norm() <= 1e-10, "k = {}", k);
        }
    }

    #[test]
    fn reorthogonalized_basis_is_orthonormal(seed in 0u64..10_000) {
        let a = random_matrix(100, 100, seed);
        let b = randn_cvector(100, &mut Rng::new(seed + 1)).unwrap();
        let st = arnoldi(&a, &b, 49, true, DEFAULT_BREAKDOWN_TOL).unwrap();
        prop_assert!(paige_measure(&st.basis_matrix()).unwrap() <= 1e-12);
    }

    #[test]
    fn residual_is_orthogonal_to_shifted_images(seed in 0u64..10_000, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let n = 40;
        let a = random_matrix(n, n, seed);
        let b = randn_cvector(n, &mut Rng::new(seed + 1)).unwrap();
        let k = 20;
        let st = arnoldi(&a, &b, k, true, DEFAULT_BREAKDOWN_TOL).unwrap();
        let delta = c64(re, im);
        let mut track = ResidualTrack::new(delta, &st.basis[0]);
        for j in 0..k {
            let av = a.mul_vec(&st.basis[j]);
            let tau = track.next_tau(&av, &st.basis[j]);
            track.update(&st.basis[j + 1], tau, st.hessenberg.subdiag(j)).unwrap();
            for v in &st.basis[..=j] {
                let image = a.mul_vec(v).sub(&v.scaled(delta));
                prop_assert!(track.w.dot(&image).norm() <= 1e-10 * image.norm().max(1.0));
            }
        }
        let q = eval_orthopoly(&st.hessenberg, k, delta).unwrap();
        let sigma = norm2(&q);
        let mut expansion = CVector::zeros(n);
        for (j, qj) in q.iter().enumerate() {
            expansion.axpy(qj.conj() / sigma, &st.basis[j]);
        }
        prop_assert!(expansion.sub(&track.w).norm() <= 1e-10);
    }

    #[test]
    fn generated_cases_carry_valid_certificates(seed in 0u64..1_000, n in 12usize..40) {
        for name in ["arc", "shifted-circle", "outliers", "unitary-rank-one", "qcd-surrogate", "embree"] {
            let case = genmat::preset(name, Some(n), seed).unwrap();
            prop_assert!(validate_bml(&case.op, 5, 1e-10).unwrap().passed, "{}", name);
        }
    }

    #[test]
    fn arc_eigenvalues_lie_on_the_circle(seed in 0u64..1_000, n in 5usize..40, re in -1.0f64..1.0, radius in 0.2f64..2.0) {
        let center = c64(re, 0.3);
        let case = diag_arc_spectrum(n, 0.75, center, radius, &[], &mut Rng::new(seed)).unwrap();
        let d = genmat::dense(&case);
        for i in 0..n {
            prop_assert!(((d[(i, i)] - center).norm() - radius).abs() <= 1e-14 * radius.max(1.0));
        }
    }

    #[test]
    fn heritage_and_separability_of_terminal_hessenberg(seed in 0u64..1_000) {
        for name in ["unitary-rank-one", "qcd-surrogate", "outliers", "embree"] {
            let case = genmat::preset(name, Some(24), seed).unwrap();
            let b = randn_cvector(24, &mut Rng::new(seed + 7)).unwrap();
            let st = arnoldi(&genmat::dense(&case), &b, 24, true, DEFAULT_BREAKDOWN_TOL).unwrap();
            let big_n = st.termination.unwrap_or(24);
            let h = st.hessenberg.square(big_n);
            let v = st.leading_basis(big_n);
            let op = &case.op;
            let mut rational = CMatrix::zeros(big_n, big_n);
            for (z, d) in op.poles().iter().zip(op.residues()) {
                let inv = LuFactor::new(&h.shifted(*z)).unwrap().inverse();
                rational = rational.add(&inv.scaled(*d)).unwrap();
            }
            if let Some((&lead, rest)) = op.pi_coeffs().split_last() {
                let mut acc = CMatrix::identity(big_n).scaled(lead);
                for c in rest.iter().rev() {
                    acc = h.matmul(&acc).unwrap().add(&CMatrix::identity(big_n).scaled(*c)).unwrap();
                }
                rational = rational.add(&acc).unwrap();
            }
            let low_rank = v.adjoint_matmul(op.f()).unwrap().matmul(&v.adjoint_matmul(op.g()).unwrap().adjoint()).unwrap();
            let defect = h.adjoint().sub(&rational).unwrap().sub(&low_rank).unwrap();
            prop_assert!(defect.spectral_norm() <= 1e-8 * h.spectral_norm(), "{}", name);
            let report = upper_separable_check(&h, op.m() as i64, op.m2() + op.m3(), DEFAULT_RANK_TOL).unwrap();
            prop_assert!(report.passed, "{} ranks {:?}", name, report.ranks);
        }
    }
}
