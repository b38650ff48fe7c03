//! Householder QR factorizations and least-squares solvers.

use num_complex::Complex64;

use super::matrix::CMatrix;
use super::vector::{dotc, norm2, CVector};
use crate::error::{Error, Result};

/// Relative pivot threshold below which a column counts as dependent.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Householder QR factorization `M P = Q R`, optionally with column pivoting.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    /// Upper trapezoid holds R; reflector data lives in `reflectors`.
    r: CMatrix,
    reflectors: Vec<(CVector, f64)>,
    perm: Vec<usize>,
    rank: usize,
}

impl HouseholderQr {
    pub fn new(m: &CMatrix, pivoting: bool) -> Self {
        let rows = m.rows();
        let cols = m.cols();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut reflectors = Vec::new();
        let steps = rows.min(cols);
        let mut col_norms: Vec<f64> = (0..cols).map(|j| norm2(a.col(j))).collect();

        for k in 0..steps {
            if pivoting {
                // Recompute the trailing norms exactly; the matrices here are small.
                for (j, norm) in col_norms.iter_mut().enumerate().skip(k) {
                    *norm = norm2(&a.col(j)[k..]);
                }
                let (best, _) = col_norms[k..]
                    .iter()
                    .enumerate()
                    .fold((0, -1.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
                let p = k + best;
                if p != k {
                    swap_columns(&mut a, k, p);
                    perm.swap(k, p);
                    col_norms.swap(k, p);
                }
            }
            let x = &a.col(k)[k..];
            let alpha_norm = norm2(x);
            let mut v = CVector::from(x);
            if alpha_norm == 0.0 {
                reflectors.push((v, 0.0));
                continue;
            }
            let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
            let alpha = -phase * alpha_norm;
            v[0] -= alpha;
            let vnorm2 = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
            for j in k..cols {
                let col = &mut a.col_mut(j)[k..];
                let s = dotc(&v, col) * beta;
                for (ci, vi) in col.iter_mut().zip(v.iter()) {
                    *ci -= s * vi;
                }
            }
            for i in k + 1..rows {
                a[(i, k)] = ZERO;
            }
            a[(k, k)] = alpha;
            reflectors.push((v, beta));
        }

        let largest = (0..steps).map(|i| a[(i, i)].norm()).fold(0.0, f64::max);
        let rank = if largest == 0.0 {
            0
        } else if pivoting {
            (0..steps).take_while(|&i| a[(i, i)].norm() > PIVOT_THRESHOLD * largest).count()
        } else {
            (0..steps).filter(|&i| a[(i, i)].norm() > PIVOT_THRESHOLD * largest).count()
        };
        HouseholderQr {
            r: a,
            reflectors,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Column permutation: column `k` of `M P` is column `perm[k]` of `M`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// The upper trapezoidal factor, `min(rows, cols) x cols`.
    pub fn r(&self) -> CMatrix {
        let steps = self.r.rows().min(self.r.cols());
        self.r.submatrix(0, steps, 0, self.r.cols())
    }

    /// Applies `Q^*` to `y`.
    pub fn apply_q_adjoint(&self, y: &[Complex64]) -> CVector {
        let mut z = CVector::from(y);
        for (k, (v, beta)) in self.reflectors.iter().enumerate() {
            let tail = &mut z[k..];
            let s = dotc(v, tail) * *beta;
            for (ti, vi) in tail.iter_mut().zip(v.iter()) {
                *ti -= s * vi;
            }
        }
        z
    }

    /// Applies `Q` to `y`.
    pub fn apply_q(&self, y: &[Complex64]) -> CVector {
        let mut z = CVector::from(y);
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            let tail = &mut z[k..];
            let s = dotc(v, tail) * *beta;
            for (ti, vi) in tail.iter_mut().zip(v.iter()) {
                *ti -= s * vi;
            }
        }
        z
    }

    /// The leading `min(rows, cols)` columns of `Q`.
    pub fn thin_q(&self) -> CMatrix {
        let rows = self.r.rows();
        let steps = rows.min(self.r.cols());
        let cols: Vec<CVector> = (0..steps).map(|j| self.apply_q(&CVector::unit(rows, j))).collect();
        CMatrix::from_columns(rows, &cols).expect("consistent column lengths")
    }

    /// Basic least-squares solution: dependent pivots get coefficient zero.
    pub fn solve_basic(&self, y: &[Complex64]) -> CVector {
        let cols = self.r.cols();
        let z = self.apply_q_adjoint(y);
        let r = self.rank;
        let mut u = CVector::zeros(r);
        for i in (0..r).rev() {
            let mut acc = z[i];
            for j in i + 1..r {
                acc -= self.r[(i, j)] * u[j];
            }
            u[i] = acc / self.r[(i, i)];
        }
        let mut x = CVector::zeros(cols);
        for i in 0..r {
            x[self.perm[i]] = u[i];
        }
        x
    }

    /// Minimum-norm least-squares solution via a complete orthogonal decomposition.
    pub fn solve_min_norm(&self, y: &[Complex64]) -> CVector {
        let cols = self.r.cols();
        let r = self.rank;
        if r == cols || r == 0 {
            return self.solve_basic(y);
        }
        let z = self.apply_q_adjoint(y);
        // T = R(0:r, :) is r x cols; factor T^* = Q2 R2 and solve R2^* u = z(0:r).
        let t_adj = CMatrix::from_fn(cols, r, |i, j| self.r[(j, i)].conj());
        let second = HouseholderQr::new(&t_adj, false);
        let r2 = &second.r;
        let mut u = CVector::zeros(cols);
        for i in 0..r {
            let mut acc = z[i];
            for j in 0..i {
                acc -= r2[(j, i)].conj() * u[j];
            }
            u[i] = acc / r2[(i, i)].conj();
        }
        let xp = second.apply_q(&u);
        let mut x = CVector::zeros(cols);
        for i in 0..cols {
            x[self.perm[i]] = xp[i];
        }
        x
    }
}

fn swap_columns(a: &mut CMatrix, i: usize, j: usize) {
    for r in 0..a.rows() {
        let tmp = a[(r, i)];
        a[(r, i)] = a[(r, j)];
        a[(r, j)] = tmp;
    }
}

fn check_rhs(m: &CMatrix, y: &[Complex64]) -> Result<()> {
    if m.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: y.len(),
        });
    }
    Ok(())
}

/// Minimizes `||M x - y||` with column-pivoted Householder QR.
///
/// Pivots below `1e-12` times the largest pivot are treated as rank deficiency and the
/// corresponding coefficients are set to zero.
pub fn lsq_solve(m: &CMatrix, y: &[Complex64]) -> Result<CVector> {
    check_rhs(m, y)?;
    Ok(HouseholderQr::new(m, true).solve_basic(y))
}

/// Like [`lsq_solve`] but returns the minimum-norm minimizer when `M` is rank deficient.
/// The flag reports whether rank deficiency was detected.
pub fn lsq_solve_min_norm(m: &CMatrix, y: &[Complex64]) -> Result<(CVector, bool)> {
    check_rhs(m, y)?;
    let qr = HouseholderQr::new(m, true);
    let deficient = qr.rank() < m.cols();
    Ok((qr.solve_min_norm(y), deficient))
}

/// Number of singular values above `tol * sigma_max(M)`; zero for the zero matrix.
pub fn svd_rank(m: &CMatrix, tol: f64) -> usize {
    let sv = m.singular_values();
    let Some(&largest) = sv.first() else {
        return 0;
    };
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * largest).count()
}
