//! Pivot formulas for the nearly Hermitian, nearly unitary and shifted unitary forms.
//!
//! They replace the length-`n` inner product `w_{k-1}^* (A - delta I) v_k` by
//! scalars already known to the iteration and one product of length `m3`.
//! Row vectors `p_k^*` are stored unconjugated, so `p_k^* x` is a plain sum of products.

use num_complex::Complex64;

use crate::hessqr::GivensChain;
use crate::kernel::{parity_sign, CVector};

fn row_times(row: &[Complex64], x: &[Complex64]) -> Complex64 {
    row.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// `p_k^* = -s_{k-1} p_{k-1}^* + c_{k-1} v_k^* G`.
pub fn p_vector_update(p_prev: &[Complex64], s: f64, c: Complex64, g_row: &[Complex64]) -> CVector {
    p_prev.iter().zip(g_row).map(|(p, g)| -s * p + c * g).collect()
}

/// Pivot `tau_k(delta)` when `H - G_N F_N^*` is tridiagonal.
///
/// `diag` and `super_diag` are `h_{k,k}` and `h_{k-1,k}` with the generator term
/// `(v_j^* G)(F^* v_k)` removed; `super_diag` is ignored for `k = 1`. The chain must hold
/// the first `k - 1` rotations for `delta`.
pub fn nearly_hermitian_tau(
    k: usize,
    diag: Complex64,
    super_diag: Complex64,
    delta: Complex64,
    chain: &GivensChain,
    p_row: &[Complex64],
    f_k: &[Complex64],
) -> Complex64 {
    let mut tau = (diag - delta) * chain.cosine(k - 1) + row_times(p_row, f_k);
    if k >= 2 {
        tau -= super_diag * chain.sine(k - 1) * chain.cosine(k - 2);
    }
    tau
}

/// Pivot `tau_k(0)` for the nearly unitary form from `a_{1,k}`.
pub fn nearly_unitary_tau(k: usize, a1: Complex64, p_row: &[Complex64], f_k: &[Complex64]) -> Complex64 {
    a1 * parity_sign(k - 1) + row_times(p_row, f_k)
}

/// Pivot `tau_i(delta)` for the shifted unitary form.
///
/// Uses `a_{1,i}`, `h_{i,i}`, the rotations up to `i - 1` and `p_{i-1}^*`; for `i = 1`
/// only `h_{1,1} - delta` enters.
pub fn shifted_unitary_tau(
    i: usize,
    a1: Complex64,
    h_diag: Complex64,
    delta: Complex64,
    chain: &GivensChain,
    p_prev_row: &[Complex64],
    f_i: &[Complex64],
) -> Complex64 {
    if i == 1 {
        return h_diag - delta;
    }
    let s = chain.sine(i - 1);
    a1 * (parity_sign(i - 1) * s) + chain.cosine(i - 1) * (h_diag - delta) - s * row_times(p_prev_row, f_i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::c64;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    #[test]
    fn p_update_examples() {
        let p = [c64(1.0, 2.0), c64(-0.5, 0.0)];
        let g = [c64(3.0, 0.0), c64(0.0, 1.0)];
        let out = p_vector_update(&p, 1.0, ZERO, &g);
        assert_eq!(out.as_slice(), &[c64(-1.0, -2.0), c64(0.5, 0.0)]);
        let zero = p_vector_update(&[ZERO, ZERO], 0.6, c64(0.8, 0.0), &[ZERO, ZERO]);
        assert!(zero.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn nearly_hermitian_first_step() {
        let chain = GivensChain::new(ZERO);
        let tau = nearly_hermitian_tau(1, c64(2.5, 0.0), ZERO, ZERO, &chain, &[], &[]);
        assert_eq!(tau, c64(2.5, 0.0));
    }

    #[test]
    fn nearly_unitary_without_low_rank_part() {
        assert_eq!(nearly_unitary_tau(2, c64(0.3, 0.1), &[], &[]), c64(-0.3, -0.1));
        assert_eq!(nearly_unitary_tau(3, c64(0.3, 0.1), &[], &[]), c64(0.3, 0.1));
    }

    #[test]
    fn shifted_unitary_with_vanishing_data() {
        let mut chain = GivensChain::new(ZERO);
        chain.push(0.6, c64(0.0, 0.8), c64(1.0, 0.0));
        let delta = c64(0.5, -1.0);
        let tau = shifted_unitary_tau(2, ZERO, ZERO, delta, &chain, &[ZERO], &[ZERO]);
        assert!((tau + delta * c64(0.0, 0.8)).norm() < 1e-15);
        assert_eq!(shifted_unitary_tau(1, c64(9.0, 0.0), c64(2.0, 0.0), delta, &chain, &[], &[]), c64(2.0, 0.0) - delta);
    }
}
