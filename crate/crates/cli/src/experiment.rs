//! Runs the selected Arnoldi variants on one test case and tabulates orthogonality and
//! residual histories.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bml_core::analysis::paige_profile;
use bml_core::bml::{fast_arnoldi, isometric_arnoldi, validate_bml, BmlOperator, FastArnoldiOptions, FastArnoldiState};
use bml_core::bmref::{bm_iterate, BmOptions};
use bml_core::krylov::{arnoldi, DEFAULT_BREAKDOWN_TOL};
use bml_core::residuals::reference_gmres;
use bml_core::{genmat, CMatrix, CVector, Rng};

use crate::certificate::read_certificate;
use crate::config::{CaseSpec, ExperimentConfig, Method};
use crate::error::{CliError, Result};
use crate::mmio::read_matrix_market;

/// Tolerance of the certificate check for user-supplied matrices.
pub const CERTIFICATE_CHECK_TOL: f64 = 1e-6;
const CERTIFICATE_PROBES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub k: usize,
    /// Paige measure of `V_k` per method, in the order of [`ExperimentRecord::methods`].
    pub paige: Vec<f64>,
    /// Progressive relative residual from the fast method.
    pub resid_prog: f64,
    /// Relative GMRES residual from the least-squares reference.
    pub resid_exact: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub label: String,
    pub methods: Vec<Method>,
    pub rows: Vec<ExperimentRow>,
    /// Full computed basis per method.
    pub bases: Vec<CMatrix>,
}

impl ExperimentRecord {
    pub fn csv_header(&self) -> String {
        let mut cols = vec!["k".to_string()];
        cols.extend(self.methods.iter().map(|m| format!("paige_{}", m.name())));
        cols.push("resid_prog".into());
        cols.push("resid_exact".into());
        cols.join(",")
    }

    /// CSV with a header row; numbers in scientific notation with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}", row.k);
            for x in row.paige.iter().chain([&row.resid_prog, &row.resid_exact]) {
                let _ = write!(out, ",{x:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// `|V^* V - I|` of a method's full basis as CSV rows.
    pub fn gram_defect_csv(&self, method: Method) -> Option<String> {
        let idx = self.methods.iter().position(|m| *m == method)?;
        let v = &self.bases[idx];
        let gram = v.adjoint_matmul(v).ok()?;
        let mut out = String::new();
        for i in 0..gram.rows() {
            let cells: Vec<String> = (0..gram.cols())
                .map(|j| {
                    let target = if i == j { 1.0 } else { 0.0 };
                    format!("{:.16e}", (gram[(i, j)] - target).norm())
                })
                .collect();
            out += &cells.join(",");
            out.push('\n');
        }
        Some(out)
    }
}

/// Path of the `|V^* V - I|` dump for `method` next to `csv`.
pub fn gram_defect_path(csv: &Path, method: Method) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "experiment".into());
    csv.with_file_name(format!("{stem}.vv_{}.csv", method.name()))
}

/// Builds the operator of a case, checking file-based certificates.
pub fn load_case(case: &CaseSpec, seed: u64) -> Result<(BmlOperator, String)> {
    match case {
        CaseSpec::Preset { name, n } => {
            let tc = genmat::preset(name, *n, seed)?;
            Ok((tc.op, tc.label))
        }
        CaseSpec::Files { matrix, certificate } => {
            let a = read_matrix_market(matrix)?;
            if !a.is_square() {
                return Err(CliError::Config(format!("{} is not square", matrix.display())));
            }
            let op = read_certificate(certificate)?.into_operator(Arc::new(a))?;
            let report = validate_bml(&op, CERTIFICATE_PROBES, CERTIFICATE_CHECK_TOL)?;
            if !report.passed {
                return Err(CliError::CertificateInvalid(format!(
                    "defect {:.3e} exceeds {:.0e}",
                    report.max_defect, CERTIFICATE_CHECK_TOL
                )));
            }
            Ok((op, matrix.display().to_string()))
        }
    }
}

/// Normalized Gaussian starting vector drawn from `seed`.
pub fn start_vector(n: usize, seed: u64) -> Result<CVector> {
    let mut b = genmat::start_vector(n, &mut Rng::new(seed))?;
    b.normalize();
    Ok(b)
}

fn run_method(method: Method, op: &BmlOperator, b: &CVector, iters: usize, fast: &FastArnoldiState) -> Result<CMatrix> {
    let a = op.matrix().as_ref();
    Ok(match method {
        Method::Arnoldi => arnoldi(a, b, iters, false, DEFAULT_BREAKDOWN_TOL)?.basis_matrix(),
        Method::ArnoldiReorth => arnoldi(a, b, iters, true, DEFAULT_BREAKDOWN_TOL)?.basis_matrix(),
        Method::Fast => fast.base.basis_matrix(),
        Method::Bm => bm_iterate(op, b, iters, &BmOptions::default())?.basis_matrix(),
        Method::Isometric => isometric_arnoldi(a, b, iters)?.base.basis_matrix(),
    })
}

/// Runs every selected method with the same starting vector and records one row per
/// iteration. Writes the CSV (and the Gram dumps) when `config.out` is set.
///
/// Row `k` holds the Paige measure of the first `k` basis vectors; after a method
/// terminates with `N < k` vectors its last value is repeated. `resid_prog` comes from the
/// fast method in every case.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRecord> {
    if config.methods.is_empty() {
        return Err(CliError::Config("at least one method is required".into()));
    }
    let (op, label) = load_case(&config.case, config.seed)?;
    let n = op.dim();
    config.check_dimension(n)?;
    let b = start_vector(n, config.seed)?;
    let options = FastArnoldiOptions {
        extra_shifts: vec![config.shift],
        ..Default::default()
    };
    let fast = fast_arnoldi(&op, &b, config.iters, &options)?;
    log::info!("{label}: fast method ran {} steps", fast.steps());

    let bases: Vec<CMatrix> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .methods
            .iter()
            .map(|&m| {
                let (op, b, fast) = (&op, &b, &fast);
                scope.spawn(move || run_method(m, op, b, config.iters, fast))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("method thread panicked")).collect::<Result<_>>()
    })?;
    let profiles = bases.iter().map(paige_profile).collect::<bml_core::Result<Vec<_>>>()?;

    let track = &fast.extra_tracks[0];
    let prog = FastArnoldiState::residual_history(track);
    let exact = reference_gmres(op.matrix().as_ref(), &b, config.shift, config.iters)?;
    let at = |list: &[f64], k: usize, fallback: f64| list.get(k).copied().unwrap_or(fallback);
    let rows = (1..=config.iters)
        .map(|k| ExperimentRow {
            k,
            paige: profiles.iter().map(|p| p[k.min(p.len()) - 1]).collect(),
            resid_prog: at(&prog, k, track.relnorm),
            resid_exact: at(&exact, k, *exact.last().expect("history starts with one")),
        })
        .collect();
    let record = ExperimentRecord {
        label,
        methods: config.methods.clone(),
        rows,
        bases,
    };
    if let Some(path) = &config.out {
        write_file(path, &record.to_csv())?;
        if config.log_vv {
            for &m in &record.methods {
                let text = record.gram_defect_csv(m).expect("method is part of the record");
                write_file(&gram_defect_path(path, m), &text)?;
            }
        }
    }
    Ok(record)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
