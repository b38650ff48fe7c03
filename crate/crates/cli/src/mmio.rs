//! Matrix Market reader and a dense array writer.

use std::fmt::Write as _;
use std::path::Path;

use bml_core::{CMatrix, Complex64};

use crate::error::{parse_error, read_text, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    Skew,
}

struct Header {
    layout: Layout,
    field: Field,
    symmetry: Symmetry,
}

fn parse_header(line_no: usize, line: &str) -> Result<Header> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_error(line_no, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if tokens[1] != "matrix" {
        return Err(parse_error(line_no, format!("unsupported object {:?}", tokens[1])));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_error(line_no, format!("unknown format {other:?}"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        "integer" => return Err(CliError::UnsupportedField(tokens[3].clone())),
        other => return Err(parse_error(line_no, format!("unknown field {other:?}"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(parse_error(line_no, format!("unknown symmetry {other:?}"))),
    };
    if layout == Layout::Array && field == Field::Pattern {
        return Err(parse_error(line_no, "pattern field requires coordinate format"));
    }
    Ok(Header { layout, field, symmetry })
}

fn parse_number<T: std::str::FromStr>(line_no: usize, token: &str) -> Result<T> {
    token.parse().map_err(|_| parse_error(line_no, format!("invalid number {token:?}")))
}

fn parse_value(line_no: usize, field: Field, tokens: &[&str]) -> Result<Complex64> {
    let expected = match field {
        Field::Pattern => 0,
        Field::Real => 1,
        Field::Complex => 2,
    };
    if tokens.len() != expected {
        return Err(parse_error(line_no, format!("expected {expected} value(s), found {}", tokens.len())));
    }
    Ok(match field {
        Field::Pattern => Complex64::new(1.0, 0.0),
        Field::Real => Complex64::new(parse_number(line_no, tokens[0])?, 0.0),
        Field::Complex => Complex64::new(parse_number(line_no, tokens[0])?, parse_number(line_no, tokens[1])?),
    })
}

/// Writes `value` at `(i, j)` and its mirror image implied by the symmetry.
fn store(m: &mut CMatrix, symmetry: Symmetry, i: usize, j: usize, value: Complex64) {
    m[(i, j)] = value;
    if i != j {
        match symmetry {
            Symmetry::General => {}
            Symmetry::Symmetric => m[(j, i)] = value,
            Symmetry::Hermitian => m[(j, i)] = value.conj(),
            Symmetry::Skew => m[(j, i)] = -value,
        }
    }
}

/// Parses Matrix Market text into a dense matrix.
///
/// Supports coordinate and array formats with real, complex or pattern fields; symmetric,
/// Hermitian and skew-symmetric files store one triangle and are expanded.
pub fn parse_matrix_market(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (header_no, header_line) = lines.next().ok_or_else(|| parse_error(1, "empty file"))?;
    let header = parse_header(header_no, header_line)?;
    let mut data = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_no, size_line) = data.next().ok_or_else(|| parse_error(header_no + 1, "missing size line"))?;
    let sizes: Vec<&str> = size_line.split_whitespace().collect();
    let needed = if header.layout == Layout::Coordinate { 3 } else { 2 };
    if sizes.len() != needed {
        return Err(parse_error(size_no, format!("expected {needed} sizes")));
    }
    let rows: usize = parse_number(size_no, sizes[0])?;
    let cols: usize = parse_number(size_no, sizes[1])?;
    if header.symmetry != Symmetry::General && rows != cols {
        return Err(parse_error(size_no, "symmetric storage requires a square matrix"));
    }
    let mut m = CMatrix::zeros(rows, cols);
    let mut last_line = size_no;
    match header.layout {
        Layout::Coordinate => {
            let nnz: usize = parse_number(size_no, sizes[2])?;
            for _ in 0..nnz {
                let (no, line) = data
                    .next()
                    .ok_or_else(|| parse_error(last_line + 1, format!("expected {nnz} entries")))?;
                last_line = no;
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.len() < 2 {
                    return Err(parse_error(no, "expected row and column index"));
                }
                let i: usize = parse_number(no, tokens[0])?;
                let j: usize = parse_number(no, tokens[1])?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_error(no, format!("index ({i}, {j}) outside {rows} x {cols}")));
                }
                let value = parse_value(no, header.field, &tokens[2..])?;
                store(&mut m, header.symmetry, i - 1, j - 1, value);
            }
        }
        Layout::Array => {
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let first = match header.symmetry {
                        Symmetry::General => 0,
                        Symmetry::Skew => j + 1,
                        _ => j,
                    };
                    (first..rows).map(move |i| (i, j))
                })
                .collect();
            for (i, j) in positions {
                let (no, line) = data
                    .next()
                    .ok_or_else(|| parse_error(last_line + 1, "too few array entries"))?;
                last_line = no;
                let tokens: Vec<&str> = line.split_whitespace().collect();
                let value = parse_value(no, header.field, &tokens)?;
                store(&mut m, header.symmetry, i, j, value);
            }
        }
    }
    if let Some((no, _)) = data.next() {
        return Err(parse_error(no, "unexpected data after the last entry"));
    }
    Ok(m)
}

pub fn read_matrix_market(path: &Path) -> Result<CMatrix> {
    parse_matrix_market(&read_text(path)?)
}

/// Dense `array complex general` representation.
pub fn write_matrix_market(m: &CMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array complex general\n");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for j in 0..m.cols() {
        for z in m.col(j) {
            let _ = writeln!(out, "{:.17e} {:.17e}", z.re, z.im);
        }
    }
    out
}
