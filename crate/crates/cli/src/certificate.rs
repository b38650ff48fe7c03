//! Text format for BML certificates.
//!
//! One `key = value` entry per line; `#` starts a comment. Keys:
//!
//! ```text
//! pole = re, im          # one line per pole z_j
//! residue = re, im       # one line per residue d_j, same order as the poles
//! pi = re, im            # polynomial coefficients, constant term first
//! f = file.mtx           # Matrix Market file with the columns of F (relative paths
//! g = file.mtx           #   are resolved against the certificate's directory)
//! f_col = re,im re,im …  # one inline column of F, n entries
//! g_col = re,im re,im …  # one inline column of G
//! ```
//!
//! A scalar written as a single number has imaginary part zero. File columns come before
//! inline columns.

use std::path::Path;
use std::sync::Arc;

use bml_core::bml::BmlOperator;
use bml_core::{CMatrix, CVector, Complex64, LinearOperator};

use crate::error::{parse_error, read_text, CliError, Result};
use crate::mmio::read_matrix_market;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Certificate {
    pub poles: Vec<Complex64>,
    pub residues: Vec<Complex64>,
    pub pi_coeffs: Vec<Complex64>,
    pub f_cols: Vec<CVector>,
    pub g_cols: Vec<CVector>,
}

/// Parses `re, im`, `re,im` or `re`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [re] => Some(Complex64::new(re.parse().ok()?, 0.0)),
        [re, im] => Some(Complex64::new(re.parse().ok()?, im.parse().ok()?)),
        _ => None,
    }
}

/// Splits `key = value` lines, dropping comments and blank lines.
pub(crate) fn key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_error(i + 1, format!("expected 'key = value', found {line:?}")))?;
        out.push((i + 1, key.trim().to_ascii_lowercase(), value.trim().to_string()));
    }
    Ok(out)
}

fn matrix_columns(m: &CMatrix) -> Vec<CVector> {
    (0..m.cols()).map(|j| m.column(j)).collect()
}

/// Parses certificate text; `base_dir` resolves relative matrix paths.
pub fn parse_certificate(text: &str, base_dir: &Path) -> Result<Certificate> {
    let mut cert = Certificate::default();
    let (mut f_inline, mut g_inline) = (Vec::new(), Vec::new());
    for (line, key, value) in key_values(text)? {
        let scalar = || parse_complex(&value).ok_or_else(|| parse_error(line, format!("invalid complex number {value:?}")));
        match key.as_str() {
            "pole" => cert.poles.push(scalar()?),
            "residue" => cert.residues.push(scalar()?),
            "pi" => cert.pi_coeffs.push(scalar()?),
            "f" | "g" => {
                let m = read_matrix_market(&base_dir.join(&value))?;
                let target = if key == "f" { &mut cert.f_cols } else { &mut cert.g_cols };
                target.extend(matrix_columns(&m));
            }
            "f_col" | "g_col" => {
                let col = value
                    .split_whitespace()
                    .map(|t| parse_complex(t).ok_or_else(|| parse_error(line, format!("invalid entry {t:?}"))))
                    .collect::<Result<CVector>>()?;
                if key == "f_col" {
                    f_inline.push(col);
                } else {
                    g_inline.push(col);
                }
            }
            other => return Err(parse_error(line, format!("unknown key {other:?}"))),
        }
    }
    cert.f_cols.extend(f_inline);
    cert.g_cols.extend(g_inline);
    if cert.poles.len() != cert.residues.len() {
        return Err(CliError::CertificateInvalid(format!(
            "{} poles but {} residues",
            cert.poles.len(),
            cert.residues.len()
        )));
    }
    if cert.f_cols.len() != cert.g_cols.len() {
        return Err(CliError::CertificateInvalid(format!(
            "F has {} columns but G has {}",
            cert.f_cols.len(),
            cert.g_cols.len()
        )));
    }
    Ok(cert)
}

pub fn read_certificate(path: &Path) -> Result<Certificate> {
    let text = read_text(path)?;
    parse_certificate(&text, path.parent().unwrap_or(Path::new(".")))
}

impl Certificate {
    /// Attaches the certificate to `matrix`.
    pub fn into_operator(self, matrix: Arc<dyn LinearOperator>) -> Result<BmlOperator> {
        let n = matrix.dim();
        for col in self.f_cols.iter().chain(&self.g_cols) {
            if col.len() != n {
                return Err(CliError::CertificateInvalid(format!("column of length {} for n = {n}", col.len())));
            }
        }
        let f = CMatrix::from_columns(n, &self.f_cols)?;
        let g = CMatrix::from_columns(n, &self.g_cols)?;
        BmlOperator::new(matrix, self.poles, self.residues, self.pi_coeffs, f, g)
            .map_err(|e| CliError::CertificateInvalid(e.to_string()))
    }

    /// Text form accepted by [`parse_certificate`], with inline columns.
    pub fn to_text(&self) -> String {
        let scalar = |z: &Complex64| format!("{:.17e}, {:.17e}", z.re, z.im);
        let column = |c: &CVector| c.iter().map(|z| format!("{:.17e},{:.17e}", z.re, z.im)).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        for z in &self.poles {
            out += &format!("pole = {}\n", scalar(z));
        }
        for z in &self.residues {
            out += &format!("residue = {}\n", scalar(z));
        }
        for z in &self.pi_coeffs {
            out += &format!("pi = {}\n", scalar(z));
        }
        for c in &self.f_cols {
            out += &format!("f_col = {}\n", column(c));
        }
        for c in &self.g_cols {
            out += &format!("g_col = {}\n", column(c));
        }
        out
    }

    pub fn from_operator(op: &BmlOperator) -> Self {
        Certificate {
            poles: op.poles().to_vec(),
            residues: op.residues().to_vec(),
            pi_coeffs: op.pi_coeffs().to_vec(),
            f_cols: matrix_columns(op.f()),
            g_cols: matrix_columns(op.g()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_and_columns() {
        let text = "# unitary plus rank one\npole = 0, 0\nresidue = 1\npi = 0.5, -1 # constant\nf_col = 1,0 0,1\ng_col = 2 3,0.5\n";
        let cert = parse_certificate(text, Path::new(".")).unwrap();
        assert_eq!(cert.poles, vec![Complex64::new(0.0, 0.0)]);
        assert_eq!(cert.residues, vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(cert.pi_coeffs, vec![Complex64::new(0.5, -1.0)]);
        assert_eq!(cert.f_cols[0].as_slice(), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        assert_eq!(cert.g_cols[0].as_slice(), &[Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.5)]);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(parse_certificate("pole 1", Path::new(".")), Err(CliError::Parse { line: 1, .. })));
        assert!(matches!(parse_certificate("\nresidue = x", Path::new(".")), Err(CliError::Parse { line: 2, .. })));
        assert!(matches!(parse_certificate("colour = 1", Path::new(".")), Err(CliError::Parse { .. })));
        assert!(matches!(parse_certificate("pole = 1", Path::new(".")), Err(CliError::CertificateInvalid(_))));
        assert!(matches!(parse_certificate("f_col = 1 2", Path::new(".")), Err(CliError::CertificateInvalid(_))));
    }

    #[test]
    fn text_round_trip() {
        let case = bml_core::genmat::preset("unitary-rank-one", Some(6), 3).unwrap();
        let cert = Certificate::from_operator(&case.op);
        assert_eq!(parse_certificate(&cert.to_text(), Path::new(".")).unwrap(), cert);
    }

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex(" -0.3 , 0.1 "), Some(Complex64::new(-0.3, 0.1)));
        assert_eq!(parse_complex("2"), Some(Complex64::new(2.0, 0.0)));
        assert_eq!(parse_complex("1,2,3"), None);
        assert_eq!(parse_complex(""), None);
    }
}
