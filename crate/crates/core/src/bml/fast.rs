use std::collections::VecDeque;

use num_complex::Complex64;

use super::specialized::{nearly_hermitian_tau, nearly_unitary_tau, p_vector_update, shifted_unitary_tau};
use super::{BmlOperator, Specialization};
use crate::error::{Error, Result};
use crate::kernel::{parity_sign, CMatrix, CVector, HouseholderQr};
use crate::krylov::{gram_schmidt, start_vector, KrylovState, DEFAULT_BREAKDOWN_TOL};
use crate::residuals::ResidualTrack;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct FastArnoldiOptions {
    /// Shifts whose GMRES residuals are tracked without delay, besides the poles.
    pub extra_shifts: Vec<Complex64>,
    /// For a single pole, project out the residual direction before the band.
    pub reorder_single_pole: bool,
    pub breakdown_tol: f64,
}

impl Default for FastArnoldiOptions {
    fn default() -> Self {
        FastArnoldiOptions {
            extra_shifts: Vec::new(),
            reorder_single_pole: false,
            breakdown_tol: DEFAULT_BREAKDOWN_TOL,
        }
    }
}

/// Result of [`fast_arnoldi`]. Step indices `k` are 1-based; the vectors indexed by
/// step store entry `k` at position `k - 1`.
#[derive(Debug, Clone)]
pub struct FastArnoldiState {
    pub base: KrylovState,
    pub m: usize,
    pub specialization: Specialization,
    pub specialized_tau: bool,
    /// Residual tracks at the poles, which lag `m` steps behind the basis.
    pub tracks: Vec<ResidualTrack>,
    /// Residual tracks at the extra shifts, updated every step.
    pub extra_tracks: Vec<ResidualTrack>,
    /// `sum_{i <= k-m} v_i (v_i^* G)`.
    pub gtilde: CMatrix,
    /// Number of basis vectors accumulated in `gtilde`.
    pub gtilde_terms: usize,
    /// Coefficients `a_{j,k}`; empty for the startup steps.
    pub a_coeffs: Vec<Vec<Complex64>>,
    /// `F^* v_k`.
    pub f_proj: Vec<CVector>,
    /// `v_k^* G` as an unconjugated row.
    pub g_proj: Vec<CVector>,
    /// Rows `p_i^*` for every pole track.
    pub pole_p_rows: Vec<Vec<CVector>>,
    /// Rows `p_k^*` for every extra track.
    pub extra_p_rows: Vec<Vec<CVector>>,
    /// `||A v_k - gtilde F^* v_k||` for the steps after startup.
    pub vprime_norms: Vec<f64>,
    /// Steps whose least-squares matrix was numerically rank deficient.
    pub deficient_steps: Vec<usize>,
    pole_coefs: Vec<CVector>,
    av_window: VecDeque<(usize, CVector)>,
}

impl FastArnoldiState {
    pub fn steps(&self) -> usize {
        self.base.steps()
    }

    /// Relative residual history `1, ||r_1||, ...` of a track.
    pub fn residual_history(track: &ResidualTrack) -> Vec<f64> {
        let mut out = vec![1.0];
        let mut acc = 1.0;
        for &s in &track.chain.s {
            acc *= s;
            out.push(if acc < crate::residuals::RELNORM_FLOOR { 0.0 } else { acc });
        }
        out
    }

    /// Pole tracks advanced over the steps they still lag behind, with the general
    /// pivot formula and cached products `A v_i`.
    pub fn completed_pole_tracks(&self) -> Result<Vec<ResidualTrack>> {
        let last = self.base.basis.len() - 1;
        let mut out = self.tracks.clone();
        for track in &mut out {
            for i in track.parity + 1..=last {
                let av = self.cached_av(i)?;
                let tau = track.next_tau(av, &self.base.basis[i - 1]);
                track.update(&self.base.basis[i], tau, self.base.hessenberg.subdiag(i - 1))?;
            }
        }
        Ok(out)
    }

    fn cached_av(&self, i: usize) -> Result<&CVector> {
        self.av_window
            .iter()
            .find(|(j, _)| *j == i)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::IndexOutOfRange(format!("A v_{i} is no longer cached")))
    }

    fn require(&self, expected: &'static str, ok: bool) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::SpecializationMismatch { expected })
        }
    }

    fn check_step(&self, k: usize, available: usize) -> Result<()> {
        if k == 0 || k > available {
            return Err(Error::IndexOutOfRange(format!("step {k} not available (have {available})")));
        }
        Ok(())
    }

    /// `h_{i,k} - (v_i^* G)(F^* v_k)` with 1-based indices.
    fn corrected_entry(&self, i: usize, k: usize) -> Complex64 {
        let row = &self.g_proj[i - 1];
        let f = &self.f_proj[k - 1];
        self.base.hessenberg.get(i - 1, k - 1) - row.iter().zip(f.iter()).map(|(a, b)| a * b).sum::<Complex64>()
    }

    /// `tau_k` of extra track `track` recomputed by the nearly Hermitian formula.
    pub fn tau_nearly_hermitian(&self, track: usize, k: usize) -> Result<Complex64> {
        self.require("nearly Hermitian", matches!(self.specialization, Specialization::NearlyHermitian { .. }))?;
        let t = self
            .extra_tracks
            .get(track)
            .ok_or_else(|| Error::IndexOutOfRange(format!("extra track {track}")))?;
        self.check_step(k, t.chain.len().min(self.extra_p_rows[track].len()))?;
        Ok(self.tau_nearly_hermitian_pending(track, k))
    }

    fn tau_nearly_hermitian_pending(&self, track: usize, k: usize) -> Complex64 {
        let t = &self.extra_tracks[track];
        let super_diag = if k >= 2 { self.corrected_entry(k - 1, k) } else { ZERO };
        nearly_hermitian_tau(
            k,
            self.corrected_entry(k, k),
            super_diag,
            t.shift,
            &t.chain,
            &self.extra_p_rows[track][k - 1],
            &self.f_proj[k - 1],
        )
    }

    /// `tau_k(0)` of the pole track recomputed by the nearly unitary formula.
    pub fn tau_nearly_unitary(&self, k: usize) -> Result<Complex64> {
        self.require("nearly unitary", matches!(self.specialization, Specialization::NearlyUnitary { .. }))?;
        self.check_step(k, self.tracks[0].chain.len().min(self.pole_p_rows[0].len()))?;
        Ok(self.tau_nearly_unitary_pending(k))
    }

    /// `tau_i(delta)` of the pole track recomputed by the shifted unitary formula.
    pub fn tau_shifted_unitary(&self, i: usize) -> Result<Complex64> {
        self.require("shifted unitary", matches!(self.specialization, Specialization::ShiftedUnitary { .. }))?;
        self.check_step(i, self.tracks[0].chain.len())?;
        Ok(self.tau_shifted_unitary_pending(i))
    }
}

fn push_p_row(rows: &mut Vec<CVector>, track: &ResidualTrack, g_row: &CVector) {
    let next = match rows.last() {
        None => g_row.clone(),
        Some(prev) => {
            let i = rows.len();
            p_vector_update(prev, track.chain.sine(i), track.chain.cosine(i), g_row)
        }
    };
    rows.push(next);
}

fn row_times(row: &[Complex64], x: &[Complex64]) -> Complex64 {
    row.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Arnoldi iteration for a BML matrix using the short recurrence
/// `A v_k - gtilde F^* v_k = sum_j a_{j,k} w_{k-m-1}(z_j) + sum_{j=k-m+1}^{k+1} h_{j,k} v_j`.
///
/// The first `m` steps are classical Arnoldi against all computed vectors. Entries of
/// `H` outside the band are filled from the generators, so the returned Hessenberg
/// matrix is complete.
pub fn fast_arnoldi(op: &BmlOperator, b: &[Complex64], kmax: usize, options: &FastArnoldiOptions) -> Result<FastArnoldiState> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if kmax == 0 || kmax > n {
        return Err(Error::InvalidDimension(format!("kmax = {kmax} must lie in 1..={n}")));
    }
    let a = op.matrix().as_ref();
    let m = op.m();
    let m2 = op.m2();
    let m3 = op.m3();
    let v1 = start_vector(b)?;
    let specialized = op.uses_specialized_tau();
    let spec = op.specialization();
    let reorder = options.reorder_single_pole && m2 == 1;

    let mut st = FastArnoldiState {
        base: KrylovState::new(v1.clone()),
        m,
        specialization: spec,
        specialized_tau: specialized,
        tracks: op.poles().iter().map(|&z| ResidualTrack::new(z, &v1)).collect(),
        extra_tracks: options.extra_shifts.iter().map(|&z| ResidualTrack::new(z, &v1)).collect(),
        gtilde: CMatrix::zeros(n, m3),
        gtilde_terms: 0,
        a_coeffs: Vec::with_capacity(kmax),
        f_proj: Vec::with_capacity(kmax),
        g_proj: Vec::with_capacity(kmax),
        pole_p_rows: vec![Vec::new(); m2],
        extra_p_rows: vec![Vec::new(); options.extra_shifts.len()],
        vprime_norms: Vec::new(),
        deficient_steps: Vec::new(),
        pole_coefs: vec![CVector::unit(1, 0); m2],
        av_window: VecDeque::with_capacity(m + 2),
    };

    for k in 1..=kmax {
        let vk = st.base.basis[k - 1].clone();
        let av = a.apply(&vk);
        let scale = av.norm();
        let fk = op.f().adjoint_mul_vec(&vk);
        let gk = op.g().adjoint_mul_vec(&vk).conj();
        st.f_proj.push(fk.clone());
        st.g_proj.push(gk);
        let mut col = vec![ZERO; k + 1];
        let mut w;
        if k <= m {
            w = av.clone();
            for (j, h) in gram_schmidt(&st.base.basis, 0..k, &mut w) {
                col[j] = h;
            }
            st.a_coeffs.push(Vec::new());
        } else {
            let old = k - m;
            {
                let v_old = &st.base.basis[old - 1];
                let g_old = &st.g_proj[old - 1];
                for j in 0..m3 {
                    for (r, x) in st.gtilde.col_mut(j).iter_mut().zip(v_old.iter()) {
                        *r += x * g_old[j];
                    }
                }
                st.gtilde_terms = old;
            }
            w = av.sub(&st.gtilde.mul_vec(&fk));
            st.vprime_norms.push(w.norm());
            let residual_dirs: Vec<&CVector> = st.tracks.iter().map(|t| &t.w).collect();
            let mut coeffs = vec![ZERO; m2];
            if reorder {
                let alpha = residual_dirs[0].dot(&w);
                w.axpy(-alpha, residual_dirs[0]);
                coeffs[0] = alpha;
            }
            for (j, h) in gram_schmidt(&st.base.basis, (old..k).rev(), &mut w) {
                col[j] = h;
            }
            if m2 > 0 && !reorder {
                let mk = CMatrix::from_columns(n, &residual_dirs)?;
                let qr = HouseholderQr::new(&mk, true);
                if qr.rank() < m2 {
                    st.deficient_steps.push(k);
                    log::debug!("step {k}: residual matrix has rank {} < {m2}", qr.rank());
                }
                let sol = qr.solve_basic(&w);
                for (j, (dir, c)) in residual_dirs.iter().zip(sol.iter()).enumerate() {
                    w.axpy(-c, dir);
                    coeffs[j] = *c;
                }
            }
            for (i, entry) in col.iter_mut().enumerate().take(old) {
                let mut value = row_times(&st.g_proj[i], &fk);
                for (coef, a_j) in st.pole_coefs.iter().zip(&coeffs) {
                    if let Some(c) = coef.get(i) {
                        value += a_j * c;
                    }
                }
                *entry = value;
            }
            st.a_coeffs.push(coeffs);
        }

        let h = w.normalize();
        st.av_window.push_back((k, av.clone()));
        while st.av_window.len() > m + 1 {
            st.av_window.pop_front();
        }
        if h.is_nan() || h <= options.breakdown_tol * scale {
            col[k] = ZERO;
            st.base.hessenberg.push_column(col)?;
            st.base.termination = Some(k);
            for track in &mut st.extra_tracks {
                let tau = track.next_tau(&av, &vk);
                if tau.norm() > 0.0 {
                    track.relnorm = 0.0;
                    track.converged = true;
                }
            }
            log::debug!("fast Arnoldi terminated at N = {k}");
            break;
        }
        col[k] = Complex64::new(h, 0.0);
        st.base.hessenberg.push_column(col)?;
        st.base.basis.push(w);

        if k > m {
            advance_pole_tracks(&mut st, k - m, specialized)?;
        }
        for t in 0..st.extra_tracks.len() {
            push_p_row(&mut st.extra_p_rows[t], &st.extra_tracks[t], &st.g_proj[k - 1]);
            let tau = if specialized && matches!(spec, Specialization::NearlyHermitian { .. }) {
                st.tau_nearly_hermitian_pending(t, k)
            } else {
                st.extra_tracks[t].next_tau(&av, &vk)
            };
            st.extra_tracks[t].update(&st.base.basis[k], tau, h)?;
        }
    }
    Ok(st)
}

/// Moves every pole track from `w_{i-1}` to `w_i`.
fn advance_pole_tracks(st: &mut FastArnoldiState, i: usize, specialized: bool) -> Result<()> {
    let h = st.base.hessenberg.subdiag(i - 1);
    for t in 0..st.tracks.len() {
        push_p_row(&mut st.pole_p_rows[t], &st.tracks[t], &st.g_proj[i - 1]);
        let tau = match st.specialization {
            Specialization::NearlyUnitary { .. } if specialized => st.tau_nearly_unitary_pending(i),
            Specialization::ShiftedUnitary { .. } if specialized => st.tau_shifted_unitary_pending(i),
            _ => {
                let av = st.cached_av(i)?;
                st.tracks[t].next_tau(av, &st.base.basis[i - 1])
            }
        };
        st.tracks[t].update(&st.base.basis[i], tau, h)?;
        let coef = &mut st.pole_coefs[t];
        let last = st.tracks[t].chain.len() - 1;
        let (s, c) = (st.tracks[t].chain.s[last], st.tracks[t].chain.c[last]);
        let mut next: CVector = coef.iter().map(|x| x * s).collect();
        next.push(c.conj() * parity_sign(i));
        next.normalize();
        *coef = next;
    }
    Ok(())
}

impl FastArnoldiState {
    fn tau_nearly_unitary_pending(&self, k: usize) -> Complex64 {
        nearly_unitary_tau(k, self.a_coeffs[k - 1][0], &self.pole_p_rows[0][k - 1], &self.f_proj[k - 1])
    }

    fn tau_shifted_unitary_pending(&self, i: usize) -> Complex64 {
        let Specialization::ShiftedUnitary { delta, .. } = self.specialization else {
            unreachable!("caller checked the specialization");
        };
        let h_diag = self.base.hessenberg.get(i - 1, i - 1);
        if i == 1 {
            return h_diag - delta;
        }
        shifted_unitary_tau(
            i,
            self.a_coeffs[i - 1][0],
            h_diag,
            delta,
            &self.tracks[0].chain,
            &self.pole_p_rows[0][i - 2],
            &self.f_proj[i - 1],
        )
    }
}
