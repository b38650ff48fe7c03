//! Test matrices with known BML certificates.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bml::{validate_bml, BmlOperator};
use crate::error::{Error, Result};
use crate::kernel::{random_unitary, CMatrix, CVector, Diagonal, Rng};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance for the certificate check run by every constructor.
pub const CERTIFICATE_TOL: f64 = 1e-10;
const CERTIFICATE_PROBES: usize = 5;
const MAX_RESAMPLES: usize = 100;

/// A generated matrix with its certificate.
#[derive(Debug, Clone)]
pub struct TestCase {
    pub op: BmlOperator,
    pub label: String,
    pub spectrum: String,
    pub seed: Option<u64>,
}

fn finish(op: BmlOperator, label: String, spectrum: String, seed: Option<u64>) -> Result<TestCase> {
    let report = validate_bml(&op, CERTIFICATE_PROBES, CERTIFICATE_TOL)?;
    if !report.passed {
        return Err(Error::InvalidCertificate(format!("{label}: certificate defect {:e}", report.max_defect)));
    }
    Ok(TestCase { op, label, spectrum, seed })
}

/// Diagonal matrix with eigenvalues on an arc of the circle `|z - center| = radius`
/// plus the given outliers, which occupy the last positions.
pub fn diag_arc_spectrum(
    n: usize,
    arc_fraction: f64,
    center: Complex64,
    radius: f64,
    outliers: &[Complex64],
    rng: &mut Rng,
) -> Result<TestCase> {
    if n <= outliers.len() {
        return Err(Error::InvalidDimension(format!("n = {n} must exceed the {} outliers", outliers.len())));
    }
    if !(arc_fraction > 0.0 && arc_fraction <= 1.0) || radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidDimension("arc fraction must lie in (0, 1] and radius must be positive".into()));
    }
    for z in outliers {
        let dist = (z - center).norm();
        if (dist - radius).abs() <= 1e-12 * radius.max(1.0) {
            return Err(Error::OutlierOnCircle { re: z.re, im: z.im });
        }
        if dist == 0.0 {
            return Err(Error::SingularShift { re: z.re, im: z.im });
        }
    }
    let on_circle = n - outliers.len();
    let mut diag: Vec<Complex64> = (0..on_circle)
        .map(|_| center + Complex64::from_polar(radius, rng.uniform(0.0, 2.0 * PI * arc_fraction)))
        .collect();
    diag.extend_from_slice(outliers);
    let r2 = radius * radius;
    let mut f = CMatrix::zeros(n, outliers.len());
    let mut g = CMatrix::zeros(n, outliers.len());
    for (j, z) in outliers.iter().enumerate() {
        let i = on_circle + j;
        f[(i, j)] = z.conj() - center.conj() - r2 / (z - center);
        g[(i, j)] = ONE;
    }
    let op = BmlOperator::shifted_unitary(Arc::new(Diagonal(diag)), center.conj(), Complex64::new(r2, 0.0), center, f, g)?;
    let spectrum = format!(
        "{:.0}% of circle |z - ({center})| = {radius}, {} outliers",
        100.0 * arc_fraction,
        outliers.len()
    );
    finish(op, format!("arc n={n}"), spectrum, Some(rng.seed()))
}

/// `U + u v^*` for given `U`, `u`, `v`; the low-rank part is dropped when `u` or `v` vanishes.
pub fn unitary_plus_rank_one_from(u_mat: &CMatrix, u: &CVector, v: &CVector) -> Result<TestCase> {
    let n = u_mat.rows();
    let uh_u = u_mat.adjoint_mul_vec(u);
    let link = ONE + v.dot(&uh_u);
    if link.norm() < 1e-8 {
        return Err(Error::Singular);
    }
    let mut a = u_mat.clone();
    for j in 0..n {
        let vj = v[j].conj();
        for (x, ui) in a.col_mut(j).iter_mut().zip(u.iter()) {
            *x += ui * vj;
        }
    }
    let (f, g) = if u.norm() == 0.0 || v.norm() == 0.0 {
        (CMatrix::zeros(n, 0), CMatrix::zeros(n, 0))
    } else {
        let second = uh_u.scaled(ONE / link);
        (
            CMatrix::from_columns(n, &[v.as_slice(), second.as_slice()])?,
            CMatrix::from_columns(n, &[u.as_slice(), u_mat.mul_vec(v).as_slice()])?,
        )
    };
    let op = BmlOperator::nearly_unitary(Arc::new(a), ONE, f, g)?;
    finish(op, format!("unitary plus rank one n={n}"), "unitary plus rank-one perturbation".into(), None)
}

/// `U + u v^*` with random unitary `U` and random `u`, `v` of norm about one.
pub fn unitary_plus_rank_one(n: usize, rng: &mut Rng) -> Result<TestCase> {
    let u_mat = random_unitary(n, rng)?;
    let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    for _ in 0..MAX_RESAMPLES {
        let u: CVector = (0..n).map(|_| rng.complex_normal() * scale).collect();
        let v: CVector = (0..n).map(|_| rng.complex_normal() * scale).collect();
        match unitary_plus_rank_one_from(&u_mat, &u, &v) {
            Err(Error::Singular) => continue,
            Ok(mut case) => {
                case.seed = Some(rng.seed());
                return Ok(case);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::ResamplingExhausted(MAX_RESAMPLES))
}

/// Block diagonal `diag(L_-, L_+, Z)` with `p` eigenvalues in `[-beta, -alpha]`, the rest
/// of the real ones in `[alpha, beta]`, and `Z = [[0, gamma], [-gamma, 0]]`.
pub fn nearly_hermitian_class(n: usize, p: usize, alpha: f64, beta: f64, gamma: f64, rng: &mut Rng) -> Result<TestCase> {
    if alpha.is_nan() || beta.is_nan() || alpha >= beta {
        return Err(Error::InvalidInterval { alpha, beta });
    }
    if n < 3 || p < 1 || p > n - 2 {
        return Err(Error::InvalidDimension(format!("need 1 <= p <= n - 2, got p = {p}, n = {n}")));
    }
    let mut a = CMatrix::zeros(n, n);
    for i in 0..p {
        a[(i, i)] = Complex64::new(rng.uniform(-beta, -alpha), 0.0);
    }
    for i in p..n - 2 {
        a[(i, i)] = Complex64::new(rng.uniform(alpha, beta), 0.0);
    }
    a[(n - 2, n - 1)] = Complex64::new(gamma, 0.0);
    a[(n - 1, n - 2)] = Complex64::new(-gamma, 0.0);
    let (f, g) = if gamma == 0.0 {
        (CMatrix::zeros(n, 0), CMatrix::zeros(n, 0))
    } else {
        let scale = Complex64::new(-2.0 * gamma, 0.0);
        (
            CMatrix::from_columns(n, &[CVector::unit(n, n - 2).scaled(scale), CVector::unit(n, n - 1).scaled(scale)])?,
            CMatrix::from_columns(n, &[CVector::unit(n, n - 1), CVector::unit(n, n - 2).scaled(-ONE)])?,
        )
    };
    let op = BmlOperator::nearly_hermitian(Arc::new(a), ONE, ZERO, f, g)?;
    let spectrum = format!("{p} in [-{beta}, -{alpha}], {} in [{alpha}, {beta}], +-{gamma}i", n - 2 - p);
    finish(op, format!("nearly Hermitian n={n}"), spectrum, Some(rng.seed()))
}

/// `rho I + gamma U` with a random unitary `U`.
pub fn shifted_unitary_synthetic(n: usize, rho: f64, gamma: f64, rng: &mut Rng) -> Result<TestCase> {
    if gamma == 0.0 {
        return Err(Error::InvalidCertificate("gamma must be nonzero".into()));
    }
    let u = random_unitary(n, rng)?;
    let rho_c = Complex64::new(rho, 0.0);
    let a = u.scaled(Complex64::new(gamma, 0.0)).add(&CMatrix::identity(n).scaled(rho_c))?;
    let empty = CMatrix::zeros(n, 0);
    let op = BmlOperator::shifted_unitary(Arc::new(a), rho_c, Complex64::new(gamma * gamma, 0.0), rho_c, empty.clone(), empty)?;
    let spectrum = format!("circle |z - {rho}| = {}", gamma.abs());
    finish(op, format!("shifted unitary n={n}"), spectrum, Some(rng.seed()))
}

/// `n x n` identity, certified as Hermitian.
pub fn identity(n: usize) -> Result<TestCase> {
    let empty = CMatrix::zeros(n, 0);
    let op = BmlOperator::nearly_hermitian(Arc::new(CMatrix::identity(n)), ONE, ZERO, empty.clone(), empty)?;
    finish(op, format!("identity n={n}"), "{1}".into(), None)
}

/// Names accepted by [`preset`].
pub const PRESETS: &[&str] = &[
    "arc",
    "full-circle",
    "shifted-circle",
    "outliers",
    "unitary-rank-one",
    "qcd-surrogate",
    "embree",
    "embree-strong",
    "identity",
];

/// Default dimension of a preset.
pub fn preset_dim(name: &str) -> Option<usize> {
    match name {
        "arc" | "full-circle" | "shifted-circle" | "outliers" | "qcd-surrogate" => Some(200),
        "unitary-rank-one" | "embree" | "embree-strong" => Some(100),
        "identity" => Some(10),
        _ => None,
    }
}

/// Center of the shifted-circle preset.
pub const SHIFTED_CIRCLE_CENTER: f64 = 1.5;

/// Outliers of the outliers preset.
pub fn preset_outliers() -> [Complex64; 2] {
    [Complex64::new(1.5, 0.5), Complex64::new(-0.4, 0.0)]
}

/// Builds a named preset, optionally with a different dimension.
pub fn preset(name: &str, n: Option<usize>, seed: u64) -> Result<TestCase> {
    let dim = n
        .or_else(|| preset_dim(name))
        .ok_or_else(|| Error::InvalidCertificate(format!("unknown preset {name:?}")))?;
    let mut rng = Rng::new(seed);
    let mut case = match name {
        "arc" => diag_arc_spectrum(dim, 0.75, ZERO, 1.0, &[], &mut rng),
        "full-circle" => diag_arc_spectrum(dim, 1.0, ZERO, 1.0, &[], &mut rng),
        "shifted-circle" => diag_arc_spectrum(dim, 1.0, Complex64::new(SHIFTED_CIRCLE_CENTER, 0.0), 1.0, &[], &mut rng),
        "outliers" => diag_arc_spectrum(dim, 1.0, ZERO, 1.0, &preset_outliers(), &mut rng),
        "unitary-rank-one" => unitary_plus_rank_one(dim, &mut rng),
        "qcd-surrogate" => shifted_unitary_synthetic(dim, 2.0, 1.0, &mut rng),
        "embree" => nearly_hermitian_class(dim, dim / 2 - 1, 1.0, 10.0, 1.0, &mut rng),
        "embree-strong" => nearly_hermitian_class(dim, dim / 2 - 1, 1.0, 10.0, 100.0, &mut rng),
        "identity" => identity(dim),
        _ => Err(Error::InvalidCertificate(format!("unknown preset {name:?}"))),
    }?;
    case.label = format!("{name} (n={dim}, seed={seed})");
    case.seed = Some(seed);
    Ok(case)
}

/// Starting vector with independent standard normal real entries.
pub fn start_vector(n: usize, rng: &mut Rng) -> Result<CVector> {
    crate::kernel::randn_cvector(n, rng)
}

/// Dense copy of a test case's matrix, for diagnostics.
pub fn dense(case: &TestCase) -> CMatrix {
    case.op.matrix().to_dense()
}
