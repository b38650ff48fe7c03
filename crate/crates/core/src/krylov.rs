//! Arnoldi iteration, the Hessenberg data model and orthonormal polynomials.
//!
//! Indices are 0-based throughout: column `j` of the Hessenberg matrix holds
//! `h[0..=j+1][j]`, and its last entry `h[j+1][j]` is the real nonnegative subdiagonal.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{dotc, CMatrix, CVector, LinearOperator};

/// Relative breakdown tolerance used when none is given.
pub const DEFAULT_BREAKDOWN_TOL: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Rectangular upper Hessenberg matrix grown one column at a time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Hessenberg {
    columns: Vec<Vec<Complex64>>,
}

impl Hessenberg {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from a `(k+1) x k` matrix, checking the Hessenberg pattern.
    pub fn from_rect(m: &CMatrix) -> Result<Self> {
        let k = m.cols();
        if m.rows() != k + 1 {
            return Err(Error::DimensionMismatch {
                expected: k + 1,
                found: m.rows(),
            });
        }
        let mut h = Hessenberg::new();
        for j in 0..k {
            for i in j + 2..=k {
                if m[(i, j)] != ZERO {
                    return Err(Error::InvalidDimension(format!("entry ({i}, {j}) lies below the subdiagonal")));
                }
            }
            h.push_column((0..=j + 1).map(|i| m[(i, j)]).collect())?;
        }
        Ok(h)
    }

    /// Builds from a square `N x N` Hessenberg matrix of a terminated run.
    pub fn from_square(m: &CMatrix) -> Result<Self> {
        let n = m.rows();
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.cols(),
            });
        }
        let padded = CMatrix::from_fn(n + 1, n, |i, j| if i < n { m[(i, j)] } else { ZERO });
        Self::from_rect(&padded)
    }

    /// Appends column `j = ncols()`, which must have `j + 2` entries.
    pub fn push_column(&mut self, mut col: Vec<Complex64>) -> Result<()> {
        let j = self.columns.len();
        if col.len() != j + 2 {
            return Err(Error::DimensionMismatch {
                expected: j + 2,
                found: col.len(),
            });
        }
        let sub = col[j + 1];
        if sub.re < 0.0 || sub.im.abs() > 1e-14 * sub.re.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NonpositiveSubdiagonal(sub.re));
        }
        col[j + 1] = Complex64::new(sub.re, 0.0);
        self.columns.push(col);
        Ok(())
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    /// Entry `(i, j)`; zero below the subdiagonal.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.columns[j].get(i).copied().unwrap_or(ZERO)
    }

    /// Overwrites an entry on or above the diagonal.
    pub fn set_upper(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(i <= j, "set_upper only touches entries on or above the diagonal");
        self.columns[j][i] = value;
    }

    /// Subdiagonal entry `h[j+1][j]`.
    pub fn subdiag(&self, j: usize) -> f64 {
        self.columns[j][j + 1].re
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.columns[j]
    }

    /// Leading `(k+1) x k` block.
    pub fn rect(&self, k: usize) -> CMatrix {
        assert!(k <= self.ncols());
        CMatrix::from_fn(k + 1, k, |i, j| self.get(i, j))
    }

    /// Leading `k x k` block.
    pub fn square(&self, k: usize) -> CMatrix {
        assert!(k <= self.ncols());
        CMatrix::from_fn(k, k, |i, j| self.get(i, j))
    }

    /// Largest modulus of any entry more than `offset` diagonals above the main one.
    pub fn max_above(&self, offset: usize) -> f64 {
        let mut best = 0.0f64;
        for (j, col) in self.columns.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                if i + offset < j {
                    best = best.max(z.norm());
                }
            }
        }
        best
    }
}

/// Orthonormal Krylov basis with its Hessenberg matrix.
#[derive(Debug, Clone)]
pub struct KrylovState {
    pub basis: Vec<CVector>,
    pub hessenberg: Hessenberg,
    /// Set to `N` when `h[N][N-1]` vanished; the basis then holds exactly `N` vectors.
    pub termination: Option<usize>,
}

impl KrylovState {
    pub fn new(v1: CVector) -> Self {
        KrylovState {
            basis: vec![v1],
            hessenberg: Hessenberg::new(),
            termination: None,
        }
    }

    pub fn is_terminated(&self) -> bool {
        self.termination.is_some()
    }

    /// Completed steps, i.e. Hessenberg columns.
    pub fn steps(&self) -> usize {
        self.hessenberg.ncols()
    }

    pub fn dim(&self) -> usize {
        self.basis[0].len()
    }

    pub fn basis_matrix(&self) -> CMatrix {
        self.leading_basis(self.basis.len())
    }

    pub fn leading_basis(&self, k: usize) -> CMatrix {
        CMatrix::from_columns(self.dim(), &self.basis[..k]).expect("basis vectors share a length")
    }

    /// Square Hessenberg block `H_N` of a terminated run.
    pub fn terminal_hessenberg(&self) -> Option<CMatrix> {
        self.termination.map(|n| self.hessenberg.square(n))
    }
}

/// Gram–Schmidt sweep of `w` against `basis[range]` in the given order, returning the
/// removed coefficients in basis order.
pub(crate) fn gram_schmidt(basis: &[CVector], indices: impl Iterator<Item = usize>, w: &mut CVector) -> Vec<(usize, Complex64)> {
    indices
        .map(|j| {
            let h = dotc(&basis[j], w);
            w.axpy(-h, &basis[j]);
            (j, h)
        })
        .collect()
}

pub(crate) fn start_vector(b: &[Complex64]) -> Result<CVector> {
    let mut v1 = CVector::from(b);
    let nrm = v1.normalize();
    if nrm == 0.0 || !nrm.is_finite() {
        return Err(Error::ZeroStartVector);
    }
    Ok(v1)
}

/// Arnoldi iteration with modified Gram–Schmidt and an optional second full pass.
///
/// Stops early, recording `N = k`, when `h[k][k-1] <= breakdown_tol * ||A v_k||`.
pub fn arnoldi(a: &dyn LinearOperator, b: &[Complex64], kmax: usize, reorth: bool, breakdown_tol: f64) -> Result<KrylovState> {
    if kmax == 0 {
        return Err(Error::InvalidDimension("kmax must be positive".into()));
    }
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.len(),
        });
    }
    let mut state = KrylovState::new(start_vector(b)?);
    for k in 0..kmax {
        let mut w = a.apply(&state.basis[k]);
        let scale = w.norm();
        let mut col = vec![ZERO; k + 2];
        for (j, h) in gram_schmidt(&state.basis, 0..=k, &mut w) {
            col[j] = h;
        }
        if reorth {
            for (j, h) in gram_schmidt(&state.basis, 0..=k, &mut w) {
                col[j] += h;
            }
        }
        let sub = w.normalize();
        if sub <= breakdown_tol * scale {
            state.hessenberg.push_column(col)?;
            state.termination = Some(k + 1);
            break;
        }
        col[k + 1] = Complex64::new(sub, 0.0);
        state.hessenberg.push_column(col)?;
        state.basis.push(w);
    }
    Ok(state)
}

/// Values `q_0(z), ..., q_k(z)` of the orthonormal polynomials attached to `h`.
pub fn eval_orthopoly(h: &Hessenberg, k: usize, z: Complex64) -> Result<Vec<Complex64>> {
    if k > h.ncols() {
        return Err(Error::IndexOutOfRange(format!("degree {k} needs {k} Hessenberg columns, have {}", h.ncols())));
    }
    let mut q = Vec::with_capacity(k + 1);
    q.push(Complex64::new(1.0, 0.0));
    for j in 0..k {
        let sub = h.subdiag(j);
        if sub <= 0.0 {
            return Err(Error::BreakdownEncountered { index: j + 1 });
        }
        let col = h.column(j);
        let mut acc = z * q[j];
        for (i, qi) in q.iter().enumerate() {
            acc -= qi * col[i];
        }
        q.push(acc / sub);
    }
    Ok(q)
}

/// `sqrt(sum |q_j|^2)`.
pub fn sigma(qvals: &[Complex64]) -> f64 {
    crate::kernel::norm2(qvals)
}

/// Running values `sigma_0, ..., sigma_k` for a list of polynomial values.
pub fn sigma_sequence(qvals: &[Complex64]) -> Vec<f64> {
    (1..=qvals.len()).map(|j| sigma(&qvals[..j])).collect()
}
