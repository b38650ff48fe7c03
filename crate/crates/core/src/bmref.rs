//! Reference implementation of the Barth–Manteuffel multiple recurrence.
//!
//! The iteration keeps the unnormalized orthogonal basis `p_0, p_1, ...` of the original
//! formulation (Hessenberg matrix with ones on the subdiagonal) together with the generators
//! `rho`, `eta`, `mu`, `tau` of its upper part. Normalized quantities are only formed by the
//! accessors, with `v_{i+1} = p_i / nu_i` and `nu_i = ||p_i||`.
//!
//! Indices of the raw state are zero-based like the basis `p_i`; the normalized accessors are
//! one-based like `v_j`.

use num_complex::Complex64;

use crate::bml::BmlOperator;
use crate::error::{Error, Result};
use crate::kernel::{lsq_solve_min_norm, CMatrix, CVector, LuFactor};
use crate::krylov::DEFAULT_BREAKDOWN_TOL;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Threshold on `sigma_min(V_{m2}^* M_k) / ||M_k||` below which the link counts as singular.
pub const LINK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct BmOptions {
    /// Compute `tau_i = G^* (p_i - P_{m2} rho_i)` explicitly, which removes the extra delay.
    pub explicit_tau: bool,
    /// Relative size of `p_{j+1}` against `A p_j` at which the run terminates.
    pub breakdown_tol: f64,
}

impl Default for BmOptions {
    fn default() -> Self {
        BmOptions {
            explicit_tau: false,
            breakdown_tol: DEFAULT_BREAKDOWN_TOL,
        }
    }
}

/// The integers `(l, m, kappa, theta)` of the original formulation, next to the band width
/// of the fast method and the delay actually used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayParams {
    /// `l`: degree of the numerator, equal to `m1`.
    pub ell: usize,
    /// `m`: number of poles, equal to `m2`.
    pub poles: usize,
    /// `kappa`: rank of the low-rank part, equal to `m3`.
    pub kappa: usize,
    /// `theta = kappa - 1 + band`; with `kappa = 0` this is `band`.
    pub theta: usize,
    /// Band width of the short recurrence.
    pub band: usize,
    /// Step lag between a basis vector and the generators it uses.
    pub delay: usize,
}

impl DelayParams {
    fn new(op: &BmlOperator, explicit_tau: bool) -> Self {
        let band = op.m();
        let kappa = op.m3();
        let theta = band + kappa.saturating_sub(1);
        DelayParams {
            ell: op.m1(),
            poles: op.m2(),
            kappa,
            theta,
            band,
            delay: if explicit_tau { band } else { theta },
        }
    }
}

/// Coefficients `p_i^* A p_j` for `i = first..=j` of one column.
#[derive(Debug, Clone)]
struct RawColumn {
    first: usize,
    values: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct BmState {
    pub params: DelayParams,
    pub explicit_tau: bool,
    /// Orthogonal, unnormalized basis `p_0, p_1, ...`.
    pub p: Vec<CVector>,
    /// `p_i^* p_i`.
    pub norms_sq: Vec<f64>,
    /// `rho_i` in the basis `q_0, ..., q_{m2-1}` of monic orthogonal polynomials.
    pub rho: Vec<CVector>,
    /// `eta_j = (p_i^* A p_j)_{i < m2}`.
    pub eta: Vec<CVector>,
    /// `mu_j = F^* p_j`.
    pub mu: Vec<CVector>,
    pub tau: Vec<CVector>,
    /// `sum_{i <= g} p_i rho_i^* / (p_i^* p_i)` for the latest generator index `g`.
    pub w_aux: CMatrix,
    /// `sum_{i <= g} p_i tau_i^* / (p_i^* p_i)`.
    pub w_hat_aux: CMatrix,
    /// Images of `w_aux` and `w_hat_aux` in the `rho` coordinates.
    pub rho_w: CMatrix,
    pub rho_w_hat: CMatrix,
    /// Indices of `tau` whose generator system was rank deficient (minimum-norm solution).
    pub singular_tau_systems: Vec<usize>,
    /// Set to `N` when `p_N` vanished; the basis then holds `N` vectors.
    pub termination: Option<usize>,
    raw: Vec<RawColumn>,
}

/// Monic `prod (z - z_j)`, lowest degree first.
fn monic_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![ONE];
    for z in roots {
        let mut next = vec![ZERO; c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= z * ci;
        }
        c = next;
    }
    c
}

fn add_outer_scaled(target: &mut CMatrix, x: &[Complex64], y: &[Complex64], scale: f64) {
    for (j, yj) in y.iter().enumerate() {
        let coef = yj.conj() * scale;
        for (t, xi) in target.col_mut(j).iter_mut().zip(x) {
            *t += xi * coef;
        }
    }
}

impl BmState {
    fn new(op: &BmlOperator, p0: CVector, explicit_tau: bool) -> Self {
        let n = op.dim();
        let (m2, m3) = (op.m2(), op.m3());
        let norm0 = p0.norm().powi(2);
        let rho0 = if m2 > 0 { CVector::unit(m2, 0) } else { CVector::zeros(0) };
        BmState {
            params: DelayParams::new(op, explicit_tau),
            explicit_tau,
            p: vec![p0],
            norms_sq: vec![norm0],
            rho: vec![rho0],
            eta: Vec::new(),
            mu: Vec::new(),
            tau: Vec::new(),
            w_aux: CMatrix::zeros(n, m2),
            w_hat_aux: CMatrix::zeros(n, m3),
            rho_w: CMatrix::zeros(m2, m2),
            rho_w_hat: CMatrix::zeros(m2, m3),
            singular_tau_systems: Vec::new(),
            termination: None,
            raw: Vec::new(),
        }
    }

    /// Completed steps, i.e. columns `A p_j` processed.
    pub fn steps(&self) -> usize {
        self.eta.len()
    }

    /// Number of basis vectors `N` or `k + 1`.
    pub fn basis_len(&self) -> usize {
        self.p.len()
    }

    /// `nu_i = ||p_i||`.
    pub fn nu(&self, i: usize) -> f64 {
        self.norms_sq[i].sqrt()
    }

    /// Stored `p_i^* A p_j` when `i` lies in the band kept for column `j`.
    pub fn raw_entry(&self, i: usize, j: usize) -> Option<Complex64> {
        let col = self.raw.get(j)?;
        i.checked_sub(col.first).and_then(|o| col.values.get(o)).copied()
    }

    /// `v_j = p_{j-1} / nu_{j-1}`.
    pub fn normalized(&self, j: usize) -> CVector {
        self.p[j - 1].scaled(ONE / self.nu(j - 1))
    }

    pub fn basis_matrix(&self) -> CMatrix {
        let cols: Vec<CVector> = (1..=self.p.len()).map(|j| self.normalized(j)).collect();
        CMatrix::from_columns(self.p[0].len(), &cols).expect("basis vectors share a length")
    }

    /// Normalized `rho_j`, entries `rho~_{j-1,l} nu_l / nu_{j-1}`.
    pub fn rho_normalized(&self, j: usize) -> CVector {
        let nu = self.nu(j - 1);
        self.rho[j - 1].iter().enumerate().map(|(l, r)| r * (self.nu(l) / nu)).collect()
    }

    /// Normalized `eta_k = (H_{i,k})_{i <= m2}`.
    pub fn eta_normalized(&self, k: usize) -> CVector {
        let nu = self.nu(k - 1);
        self.eta[k - 1].iter().enumerate().map(|(l, e)| e / (self.nu(l) * nu)).collect()
    }

    /// Normalized `mu_k = F^* v_k`.
    pub fn mu_normalized(&self, k: usize) -> CVector {
        self.mu[k - 1].scaled(ONE / self.nu(k - 1))
    }

    /// Normalized `tau_j`, or `None` if not yet computed.
    pub fn tau_normalized(&self, j: usize) -> Option<CVector> {
        if self.params.kappa == 0 {
            return Some(CVector::zeros(0));
        }
        self.tau.get(j - 1).map(|t| t.scaled(ONE / self.nu(j - 1)))
    }

    /// `W_k = sum_{j <= k+1} v_j rho_j^*`.
    pub fn w_matrix(&self, k: usize) -> CMatrix {
        let mut w = CMatrix::zeros(self.p[0].len(), self.params.poles);
        for j in 1..=k + 1 {
            add_outer_scaled(&mut w, &self.normalized(j), &self.rho_normalized(j), 1.0);
        }
        w
    }

    /// `W^_k = sum_{j <= k+1} v_j tau_j^*`, if the needed `tau_j` are known.
    pub fn w_hat_matrix(&self, k: usize) -> Option<CMatrix> {
        let mut w = CMatrix::zeros(self.p[0].len(), self.params.kappa);
        for j in 1..=k + 1 {
            add_outer_scaled(&mut w, &self.normalized(j), &self.tau_normalized(j)?, 1.0);
        }
        Some(w)
    }

    /// Entry `H_{i,j}` of the normalized Hessenberg matrix, from the stored band, the unit
    /// subdiagonal, or the generators.
    pub fn hessenberg_entry(&self, i: usize, j: usize) -> Result<Complex64> {
        if j == 0 || j > self.steps() || i == 0 {
            return Err(Error::IndexOutOfRange(format!("H[{i},{j}] with {} steps", self.steps())));
        }
        if i == j + 1 {
            return Ok(Complex64::new(self.p.get(j).map_or(0.0, |_| self.nu(j) / self.nu(j - 1)), 0.0));
        }
        if i > j + 1 {
            return Ok(ZERO);
        }
        if let Some(raw) = self.raw_entry(i - 1, j - 1) {
            return Ok(raw / (self.nu(i - 1) * self.nu(j - 1)));
        }
        generator_entry(self, i, j)
    }

    /// `tau_i = G^* (p_i - P_{m2} rho_i)` for all `i` whose `rho_i` is known.
    fn extend_explicit_tau(&mut self, g: &CMatrix) {
        let m2 = self.params.poles;
        while self.tau.len() < self.rho.len() && self.tau.len() < self.p.len() {
            let i = self.tau.len();
            if i < m2 {
                // rho_i is the unit vector e_i, so the difference vanishes.
                self.tau.push(CVector::zeros(g.cols()));
                continue;
            }
            let mut x = self.p[i].clone();
            for l in 0..m2 {
                x.axpy(-self.rho[i][l], &self.p[l]);
            }
            self.tau.push(g.adjoint_mul_vec(&x));
        }
    }

    /// `tau_g` from the generator system `tau_g^* [mu_{j-l}] = [p_g^* A p_{j-l} - rho_g^* eta_{j-l}]`.
    fn solve_tau(&mut self, g: usize, j: usize) -> Result<()> {
        let kappa = self.params.kappa;
        let cols: Vec<&CVector> = (0..kappa).map(|l| &self.mu[j - l]).collect();
        let coeffs = CMatrix::from_columns(kappa, &cols)?.adjoint();
        let rhs: Vec<Complex64> = (0..kappa)
            .map(|l| {
                let raw = self.raw_entry(g, j - l).expect("generator row is inside the stored band");
                (raw - self.rho[g].dot(&self.eta[j - l])).conj()
            })
            .collect();
        let (t, deficient) = lsq_solve_min_norm(&coeffs, &rhs)?;
        if deficient {
            log::warn!("generator system for tau_{g} is singular; using the minimum-norm solution");
            self.singular_tau_systems.push(g);
        }
        self.tau.push(t);
        Ok(())
    }
}

fn generator_entry(state: &BmState, j: usize, k: usize) -> Result<Complex64> {
    let tau = state
        .tau_normalized(j)
        .ok_or_else(|| Error::IndexOutOfRange(format!("tau_{j} not computed")))?;
    Ok(state.rho_normalized(j).dot(&state.eta_normalized(k)) + tau.dot(&state.mu_normalized(k)))
}

/// Runs the multiple recurrence for `kmax` steps.
///
/// The first `theta` steps are full Gram–Schmidt with bookkeeping of the polynomial
/// coefficients; afterwards `p_{j+1}` is formed from the band `p_{g+1}, ..., p_j` and the
/// accumulated `W`, `W^` with `g = j - delay`.
pub fn bm_iterate(op: &BmlOperator, b: &[Complex64], kmax: usize, options: &BmOptions) -> Result<BmState> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if kmax == 0 {
        return Err(Error::InvalidDimension("kmax must be positive".into()));
    }
    let p0 = CVector::from(b);
    let nrm = p0.norm();
    if nrm == 0.0 || !nrm.is_finite() {
        return Err(Error::ZeroStartVector);
    }
    let a = op.matrix();
    let (f, g_mat) = (op.f(), op.g());
    let m2 = op.m2();
    let kappa = op.m3();
    let q_monic = monic_from_roots(op.poles());
    let mut st = BmState::new(op, p0, options.explicit_tau);
    let delay = st.params.delay;
    // Leading (m2+1) x m2 block of the unit-subdiagonal Hessenberg matrix.
    let mut pole_block: Option<CMatrix> = None;

    for j in 0..kmax {
        let ap = a.apply(&st.p[j]);
        st.mu.push(f.adjoint_mul_vec(&st.p[j]));
        // Rows below the subdiagonal vanish; the subdiagonal row is set once p_{j+1} exists.
        st.eta.push((0..m2).map(|i| if i <= j { st.p[i].dot(&ap) } else { ZERO }).collect());
        let lo = j.saturating_sub(delay);
        st.raw.push(RawColumn {
            first: lo,
            values: (lo..=j).map(|i| st.p[i].dot(&ap)).collect(),
        });

        let generator = j.checked_sub(delay);
        let mut y = ap.clone();
        if let Some(g) = generator {
            if kappa > 0 {
                if options.explicit_tau {
                    st.extend_explicit_tau(g_mat);
                } else {
                    st.solve_tau(g, j)?;
                }
            }
            let scale = 1.0 / st.norms_sq[g];
            let (pg, rg) = (st.p[g].clone(), st.rho[g].clone());
            add_outer_scaled(&mut st.w_aux, &pg, &rg, scale);
            add_outer_scaled(&mut st.rho_w, &rg, &rg, scale);
            if kappa > 0 {
                let tg = st.tau[g].clone();
                add_outer_scaled(&mut st.w_hat_aux, &pg, &tg, scale);
                add_outer_scaled(&mut st.rho_w_hat, &rg, &tg, scale);
            }
            y = y.sub(&st.w_aux.mul_vec(&st.eta[j]));
            if kappa > 0 {
                y = y.sub(&st.w_hat_aux.mul_vec(&st.mu[j]));
            }
        }
        let band_start = generator.map_or(0, |g| g + 1);
        let theta: Vec<(usize, Complex64)> = (band_start..=j).map(|i| (i, st.p[i].dot(&y) / st.norms_sq[i])).collect();
        let mut next = y;
        for (i, t) in &theta {
            next.axpy(-t, &st.p[*i]);
        }
        let next_norm = next.norm();
        if next_norm <= options.breakdown_tol * ap.norm() {
            st.termination = Some(j + 1);
            break;
        }
        st.p.push(next);
        st.norms_sq.push(next_norm * next_norm);
        if j + 1 < m2 {
            st.eta[j][j + 1] = Complex64::new(next_norm * next_norm, 0.0);
        }

        let rho_next = if m2 == 0 {
            CVector::zeros(0)
        } else if j + 1 < m2 {
            CVector::unit(m2, j + 1)
        } else if j + 1 == m2 {
            let block = CMatrix::from_fn(m2 + 1, m2, |i, l| {
                if i == l + 1 {
                    ONE
                } else if i <= l {
                    st.eta[l][i] / st.norms_sq[i]
                } else {
                    ZERO
                }
            });
            let rho = remainder_of_last(&block, &q_monic)?;
            pole_block = Some(block);
            rho
        } else {
            let block = pole_block.as_ref().expect("pole block is set once m2 vectors exist");
            // z times the remainder, reduced with rho_{m2}, minus the Arnoldi coefficients.
            let c = block.mul_vec(&st.rho[j]);
            let mut z = CVector::zeros(m2);
            for (i, ci) in c.iter().enumerate() {
                z.axpy(*ci, &st.rho[i]);
            }
            if generator.is_some() {
                z = z.sub(&st.rho_w.mul_vec(&st.eta[j]));
                if kappa > 0 {
                    z = z.sub(&st.rho_w_hat.mul_vec(&st.mu[j]));
                }
                for (i, t) in &theta {
                    z.axpy(-t, &st.rho[*i]);
                }
            } else {
                for i in 0..=j {
                    let h = st.raw_entry(i, j).expect("startup keeps full columns") / st.norms_sq[i];
                    z.axpy(-h, &st.rho[i]);
                }
            }
            z
        };
        st.rho.push(rho_next);
    }
    if options.explicit_tau && kappa > 0 {
        st.extend_explicit_tau(g_mat);
    }
    Ok(st)
}

/// `rho_{m2} = -gamma_{0..m2} / gamma_{m2}` from `q = sum_l gamma_l q~_l`, where `q~_l` are the
/// monic polynomials of the unit-subdiagonal Hessenberg block.
fn remainder_of_last(block: &CMatrix, q_monic: &[Complex64]) -> Result<CVector> {
    let m2 = block.cols();
    let mut polys: Vec<Vec<Complex64>> = vec![vec![ONE]];
    for l in 0..m2 {
        let mut next = vec![ZERO; l + 2];
        next[1..].copy_from_slice(&polys[l]);
        for i in 0..=l {
            let s = block[(i, l)];
            for (x, c) in next.iter_mut().zip(&polys[i]) {
                *x -= s * c;
            }
        }
        polys.push(next);
    }
    let coeffs = CMatrix::from_fn(m2 + 1, m2 + 1, |r, l| polys[l].get(r).copied().unwrap_or(ZERO));
    let gamma = LuFactor::new(&coeffs)?.solve(q_monic)?;
    Ok((0..m2).map(|l| -gamma[l] / gamma[m2]).collect())
}

/// `H_{j,k} = rho_j^* eta_k + tau_j^* mu_k` for `j <= k - (m + m3)`.
pub fn bm_reconstruct_h(state: &BmState, j: usize, k: usize) -> Result<Complex64> {
    let lag = state.params.band + state.params.kappa;
    if j == 0 || k > state.steps() || j + lag > k {
        return Err(Error::IndexOutOfRange(format!(
            "H[{j},{k}] is outside the generator region (lag {lag}, {} steps)",
            state.steps()
        )));
    }
    generator_entry(state, j, k)
}

/// `||W_k - M_k (V_{m2}^* M_k)^{-1}||_2` with `k = cols(V) - 1`.
///
/// `W_k` is formed from the state; `V` supplies `V_{m2}` and fixes `k`.
pub fn bm_w_link_check(state: &BmState, v: &CMatrix, m_k: &CMatrix) -> Result<f64> {
    let m2 = state.params.poles;
    if v.cols() == 0 || v.cols() > state.basis_len() {
        return Err(Error::IndexOutOfRange(format!("V has {} columns, state has {}", v.cols(), state.basis_len())));
    }
    if m_k.cols() != m2 || v.cols() < m2 {
        return Err(Error::DimensionMismatch { expected: m2, found: m_k.cols() });
    }
    let link = v.leading_columns(m2).adjoint_matmul(m_k)?;
    let scale = m_k.spectral_norm();
    let smallest = link.singular_values().last().copied().unwrap_or(0.0);
    let ratio = if scale > 0.0 { smallest / scale } else { 0.0 };
    if ratio < LINK_TOL {
        return Err(Error::SingularLink(ratio));
    }
    let predicted = m_k.matmul(&LuFactor::new(&link)?.inverse())?;
    Ok(state.w_matrix(v.cols() - 1).sub(&predicted)?.spectral_norm())
}
