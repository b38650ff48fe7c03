//! QR factorization of shifted Hessenberg matrices by chains of Givens rotations, and the
//! closed form of the unitary factor in terms of orthonormal polynomial values.
//!
//! Rotation `j` (0-based) acts on rows `j, j+1` with the block `[[conj(c), s], [-s, c]]`,
//! `s >= 0`, so every rotation has determinant one.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{parity_sign, CMatrix};
use crate::krylov::{sigma_sequence, Hessenberg};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Sines, cosines and pivots of the rotations reducing `H - delta I` to triangular form.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensChain {
    pub shift: Complex64,
    pub s: Vec<f64>,
    pub c: Vec<Complex64>,
    pub tau: Vec<Complex64>,
    /// Running `sigma_k(delta) = 1 / prod s_j`.
    pub sigma: f64,
}

impl GivensChain {
    pub fn new(shift: Complex64) -> Self {
        GivensChain {
            shift,
            s: Vec::new(),
            c: Vec::new(),
            tau: Vec::new(),
            sigma: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn push(&mut self, s: f64, c: Complex64, tau: Complex64) {
        self.s.push(s);
        self.c.push(c);
        self.tau.push(tau);
        self.sigma = if s > 0.0 { self.sigma / s } else { f64::INFINITY };
    }

    /// Cosine with index `k` in 1-based numbering; `c_0 = 1` by convention.
    pub fn cosine(&self, k: usize) -> Complex64 {
        if k == 0 {
            ONE
        } else {
            self.c[k - 1]
        }
    }

    /// Sine with index `k` in 1-based numbering.
    pub fn sine(&self, k: usize) -> f64 {
        self.s[k - 1]
    }

    /// `sigma_0, ..., sigma_k` rebuilt from the sines.
    pub fn sigmas(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(1.0);
        for &s in &self.s {
            let last = *out.last().expect("nonempty");
            out.push(if s > 0.0 { last / s } else { f64::INFINITY });
        }
        out
    }

    /// Product of the rotations, `Q_{k+1}(delta)^*`, as a dense `(k+1) x (k+1)` matrix.
    pub fn q_adjoint(&self) -> CMatrix {
        let k = self.len();
        let mut q = CMatrix::identity(k + 1);
        for j in 0..k {
            rotate_rows(&mut q, j, self.s[j], self.c[j]);
        }
        q
    }
}

/// Applies the rotation with sine `s` and cosine `c` to rows `j, j+1` of `m`.
fn rotate_rows(m: &mut CMatrix, j: usize, s: f64, c: Complex64) {
    for col in 0..m.cols() {
        let a = m[(j, col)];
        let b = m[(j + 1, col)];
        m[(j, col)] = c.conj() * a + s * b;
        m[(j + 1, col)] = -s * a + c * b;
    }
}

/// Rotation annihilating `h` below the pivot `tau`.
pub fn cs_from_tau(tau: Complex64, h: f64) -> Result<(f64, Complex64)> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::NonpositiveSubdiagonal(h));
    }
    let r = h.hypot(tau.norm());
    Ok((h / r, tau / r))
}

/// Givens QR of the leading `(k+1) x k` block of `H - delta I`.
///
/// Returns the chain and the `k x k` triangular factor, whose diagonal is positive.
pub fn givens_qr(h: &Hessenberg, k: usize, delta: Complex64) -> Result<(GivensChain, CMatrix)> {
    if k > h.ncols() {
        return Err(Error::IndexOutOfRange(format!("{k} columns requested, {} available", h.ncols())));
    }
    let mut chain = GivensChain::new(delta);
    let mut r = CMatrix::zeros(k, k);
    for j in 0..k {
        let mut col: Vec<Complex64> = h.column(j).to_vec();
        col[j] -= delta;
        for (i, (&s, &c)) in chain.s.iter().zip(&chain.c).enumerate() {
            let a = col[i];
            let b = col[i + 1];
            col[i] = c.conj() * a + s * b;
            col[i + 1] = -s * a + c * b;
        }
        let sub = h.subdiag(j);
        if sub <= 0.0 {
            return Err(Error::BreakdownEncountered { index: j + 1 });
        }
        let tau = col[j];
        let (s, c) = cs_from_tau(tau, sub)?;
        chain.push(s, c, tau);
        for i in 0..j {
            r[(i, j)] = col[i];
        }
        r[(j, j)] = c.conj() * tau + s * sub;
    }
    Ok((chain, r))
}

/// Closed-form `Q_{k+1}(delta)^*` from `q_0(delta), ..., q_k(delta)`.
pub fn explicit_q(qvals: &[Complex64]) -> CMatrix {
    let k = qvals.len() - 1;
    let sig = sigma_sequence(qvals);
    let mut q = CMatrix::zeros(k + 1, k + 1);
    for j in 1..=k {
        let row = j - 1;
        let denom = sig[j] * sig[j - 1];
        for i in 0..j {
            q[(row, i)] = -qvals[i] * qvals[j].conj() / denom;
        }
        q[(row, j)] = Complex64::new(sig[j - 1] / sig[j], 0.0);
    }
    let sign = parity_sign(k);
    for i in 0..=k {
        q[(k, i)] = qvals[i] * (sign / sig[k]);
    }
    q
}

/// Spectral norm of the block of `Q_{k+1}(delta)` formed by its first `m` rows and last
/// `l` columns, `sigma_{m-1} / sigma_{k-l+1}`.
pub fn submatrix_norm_formula(sigmas: &[f64], m: usize, l: usize) -> Result<f64> {
    let k = sigmas
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::IndexOutOfRange("empty sigma list".into()))?;
    if m < 1 || m > k + 1 || l < 1 || l + m > k + 2 {
        return Err(Error::IndexOutOfRange(format!("(m, l) = ({m}, {l}) not admissible for k = {k}")));
    }
    Ok(sigmas[m - 1] / sigmas[k + 1 - l])
}

/// QR factorization of a square shifted Hessenberg matrix.
#[derive(Debug, Clone)]
pub struct SquareQr {
    pub q_adjoint: CMatrix,
    pub r: CMatrix,
    /// Unit-modulus factor that makes the last diagonal entry of `r` real nonnegative.
    pub phase: Complex64,
}

/// QR of the square `(k+1) x (k+1)` matrix `H - delta I`.
///
/// The rotations come from the leading `(k+1) x k` block. With `rescale_last_row` the
/// last row of `Q^*` and `R` is multiplied by `phase`; otherwise the determinant-one
/// convention is kept and `phase` is only reported.
pub fn square_qr(h: &CMatrix, delta: Complex64, rescale_last_row: bool) -> Result<SquareQr> {
    let n = h.rows();
    if !h.is_square() || n == 0 {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: h.cols(),
        });
    }
    let rect = Hessenberg::from_rect(&h.submatrix(0, n, 0, n - 1))?;
    let (chain, _) = givens_qr(&rect, n - 1, delta)?;
    let mut q_adjoint = chain.q_adjoint();
    let mut r = q_adjoint.matmul(&h.shifted(delta))?;
    for j in 0..n {
        for i in j + 1..n {
            r[(i, j)] = ZERO;
        }
    }
    let last = r[(n - 1, n - 1)];
    let phase = if last.norm() > 0.0 { last.conj() / last.norm() } else { ONE };
    if rescale_last_row {
        for j in 0..n {
            q_adjoint[(n - 1, j)] *= phase;
            r[(n - 1, j)] *= phase;
        }
    }
    Ok(SquareQr { q_adjoint, r, phase })
}
