//! Structure checks for Hessenberg matrices and orthogonality diagnostics.

use num_complex::Complex64;

use crate::bml::BmlOperator;
use crate::error::{Error, Result};
use crate::hessqr::submatrix_norm_formula;
use crate::kernel::{CMatrix, LuFactor};
use crate::krylov::{eval_orthopoly, Hessenberg};

/// Default rank threshold for separability checks, relative to `||B||`.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityReport {
    /// Diagonal offset `r`.
    pub offset: i64,
    /// Claimed rank bound `s`.
    pub rank_bound: usize,
    /// Observed rank of the block for `j = 1, ..., n - |r|`.
    pub ranks: Vec<usize>,
    pub max_rank: usize,
    pub passed: bool,
}

/// Checks `rank B(1 : j - min(r,0), j + max(r,0) : n) <= s` for every `j`.
///
/// Singular values count towards the rank when they exceed `tol * ||B||_2`.
pub fn upper_separable_check(b: &CMatrix, r: i64, s: usize, tol: f64) -> Result<SeparabilityReport> {
    let n = b.rows();
    if !b.is_square() {
        return Err(Error::DimensionMismatch { expected: n, found: b.cols() });
    }
    let shift = r.unsigned_abs() as usize;
    if shift >= n {
        return Err(Error::IndexOutOfRange(format!("offset {r} for a {n} x {n} matrix")));
    }
    let threshold = tol * b.spectral_norm();
    let ranks: Vec<usize> = (1..=n - shift)
        .map(|j| {
            let (rows, first_col) = if r >= 0 { (j, j - 1 + shift) } else { (j + shift, j - 1) };
            let block = b.submatrix(0, rows, first_col, n);
            block.singular_values().iter().filter(|&&sv| sv > threshold).count()
        })
        .collect();
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    Ok(SeparabilityReport {
        offset: r,
        rank_bound: s,
        ranks,
        max_rank,
        passed: max_rank <= s,
    })
}

/// Largest deviation between `H_{k,l}`, `l >= k + m`, and its generator representation
/// `sum_j conj(d_j q_{k-1}(z_j)) ((H - z_j I)^{-*})_{1,l} + (G_N F_N^*)_{k,l}`
/// with `G_N = V^* G` and `F_N = V^* F`.
///
/// `H` must be the terminal square Hessenberg matrix with `A V = V H`.
pub fn structure_generators_check(h: &CMatrix, op: &BmlOperator, v: &CMatrix) -> Result<f64> {
    let big_n = h.rows();
    if !h.is_square() {
        return Err(Error::DimensionMismatch { expected: big_n, found: h.cols() });
    }
    if v.cols() != big_n || v.rows() != op.dim() {
        return Err(Error::DimensionMismatch { expected: big_n, found: v.cols() });
    }
    let m = op.m();
    if m >= big_n {
        return Ok(0.0);
    }
    let hess = Hessenberg::from_square(h)?;
    let gf = v.adjoint_matmul(op.g())?.matmul(&v.adjoint_matmul(op.f())?.adjoint())?;
    let mut model = CMatrix::from_fn(big_n, big_n, |k, l| gf[(k, l)]);
    for (z, d) in op.poles().iter().zip(op.residues()) {
        let qvals = eval_orthopoly(&hess, big_n - 1, *z)?;
        let lu = LuFactor::new(&h.shifted(*z)).map_err(|_| Error::SingularShift { re: z.re, im: z.im })?;
        let mut e1 = vec![Complex64::new(0.0, 0.0); big_n];
        e1[0] = Complex64::new(1.0, 0.0);
        // Row one of (H - z I)^{-*} is the conjugate of column one of (H - z I)^{-1}.
        let first_col = lu.solve(&e1)?;
        for k in 0..big_n {
            let coef = (d * qvals[k]).conj();
            for l in k + m..big_n {
                model[(k, l)] += coef * first_col[l].conj();
            }
        }
    }
    let mut defect = 0.0f64;
    for k in 0..big_n {
        for l in k + m..big_n {
            defect = defect.max((h[(k, l)] - model[(k, l)]).norm());
        }
    }
    Ok(defect)
}

/// Orthogonality measure `||S_k||_2` with `S_k = (I + U_k)^{-1} U_k`, where `U_k` is the
/// strictly upper triangular part of `V^* V - I`.
///
/// The diagonal of `V^* V - I` is ignored. The result is clamped to `[0, 1]`; non-finite
/// values count as complete loss of orthogonality.
pub fn paige_measure(v: &CMatrix) -> Result<f64> {
    let k = v.cols();
    if k == 0 && v.rows() > 0 {
        return Ok(0.0);
    }
    let s = paige_factor(v)?;
    Ok(clamped_norm(&s))
}

/// `paige_measure(V_j)` for every leading block `V_j`, `j = 1, ..., cols(V)`.
///
/// `S_j` is the leading `j x j` block of `S_k`, so one triangular solve serves all `j`.
pub fn paige_profile(v: &CMatrix) -> Result<Vec<f64>> {
    let s = paige_factor(v)?;
    Ok((1..=v.cols()).map(|j| clamped_norm(&s.submatrix(0, j, 0, j))).collect())
}

fn paige_factor(v: &CMatrix) -> Result<CMatrix> {
    let k = v.cols();
    if k > v.rows() {
        return Err(Error::DimensionMismatch { expected: v.rows(), found: k });
    }
    let gram = v.adjoint_matmul(v)?;
    let mut s = CMatrix::zeros(k, k);
    // Back substitution for (I + U) S = U, column by column.
    for col in 0..k {
        for row in (0..col).rev() {
            let mut acc = gram[(row, col)];
            for t in row + 1..col {
                acc -= gram[(row, t)] * s[(t, col)];
            }
            s[(row, col)] = acc;
        }
    }
    Ok(s)
}

fn clamped_norm(s: &CMatrix) -> f64 {
    if !s.is_finite() {
        return 1.0;
    }
    s.spectral_norm().min(1.0)
}

/// Which bound [`decay_profile`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayKind {
    /// The matrix is `Q_{k+1}(delta)`; the block norm equals the prediction.
    Unitary,
    /// The matrix is `(H_{k+1} - delta I)^{-*}`; the prediction is an upper bound.
    Resolvent { inv_norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEntry {
    /// Number of leading rows.
    pub m: usize,
    /// Number of trailing columns.
    pub l: usize,
    pub observed: f64,
    pub predicted: f64,
    /// `|observed - predicted|` for the unitary case, `predicted - observed` for the resolvent.
    pub defect: f64,
}

/// Norms of the blocks formed by the first `m` rows and last `l <= k - m + 2` columns,
/// next to `sigma_{m-1} / sigma_{k-l+1}` (times `inv_norm` for the resolvent).
pub fn decay_profile(matrix: &CMatrix, sigmas: &[f64], kind: DecayKind) -> Result<Vec<DecayEntry>> {
    let size = matrix.rows();
    if !matrix.is_square() || sigmas.len() != size || size == 0 {
        return Err(Error::DimensionMismatch { expected: size, found: sigmas.len() });
    }
    let k = size - 1;
    let mut out = Vec::new();
    for m in 1..=size {
        for l in 1..=k + 2 - m {
            let observed = matrix.submatrix(0, m, size - l, size).spectral_norm();
            let ratio = submatrix_norm_formula(sigmas, m, l)?;
            let (predicted, defect) = match kind {
                DecayKind::Unitary => (ratio, (observed - ratio).abs()),
                DecayKind::Resolvent { inv_norm } => (inv_norm * ratio, inv_norm * ratio - observed),
            };
            out.push(DecayEntry { m, l, observed, predicted, defect });
        }
    }
    Ok(out)
}
