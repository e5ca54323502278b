//! Matrix Market files for matrices and two-column CSV files for vectors.
//!
//! Writing always produces the dense `array` layout; Hermitian matrices are
//! stored with the `hermitian` symmetry qualifier (lower triangle only).
//! Reading accepts `array` and `coordinate` layouts with `real`, `integer` or
//! `complex` fields and `general`, `symmetric`, `skew-symmetric` or
//! `hermitian` symmetry.

use super::matrix::{ComplexMatrix, ComplexVector};
use super::DenseError;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Serializes a matrix in Matrix Market array format.
pub fn matrix_market_string(m: &ComplexMatrix) -> String {
    let hermitian = m.is_square() && m.hermitian_deviation() == 0.0;
    let mut out = String::new();
    let symmetry = if hermitian { "hermitian" } else { "general" };
    let _ = writeln!(out, "%%MatrixMarket matrix array complex {symmetry}");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for j in 0..m.cols() {
        let start = if hermitian { j } else { 0 };
        for i in start..m.rows() {
            let z = m[(i, j)];
            let _ = writeln!(out, "{} {}", fmt_f64(z.re), fmt_f64(z.im));
        }
    }
    out
}

/// Writes a matrix to a Matrix Market file.
pub fn write_matrix_market(path: &Path, m: &ComplexMatrix) -> Result<(), DenseError> {
    std::fs::write(path, matrix_market_string(m))?;
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
    Hermitian,
}

fn parse_err(msg: impl Into<String>) -> DenseError {
    DenseError::Parse(msg.into())
}

fn parse_value(tokens: &[&str], field: Field) -> Result<Complex64, DenseError> {
    let num = |s: &str| s.parse::<f64>().map_err(|_| parse_err(format!("bad number '{s}'")));
    match field {
        Field::Real => {
            let t = tokens.first().ok_or_else(|| parse_err("missing value"))?;
            Ok(Complex64::new(num(t)?, 0.0))
        }
        Field::Complex => {
            if tokens.len() < 2 {
                return Err(parse_err("complex entry needs two values"));
            }
            Ok(Complex64::new(num(tokens[0])?, num(tokens[1])?))
        }
    }
}

fn mirror(m: &mut ComplexMatrix, i: usize, j: usize, z: Complex64, symmetry: Symmetry) {
    m[(i, j)] = z;
    if i != j {
        match symmetry {
            Symmetry::General => {}
            Symmetry::Symmetric => m[(j, i)] = z,
            Symmetry::Skew => m[(j, i)] = -z,
            Symmetry::Hermitian => m[(j, i)] = z.conj(),
        }
    }
}

/// Parses Matrix Market text.
pub fn parse_matrix_market(text: &str) -> Result<ComplexMatrix, DenseError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err("empty file"))?;
    let h: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" {
        return Err(parse_err("missing %%MatrixMarket matrix header"));
    }
    let coordinate = match h[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(format!("unsupported layout '{other}'"))),
    };
    let field = match h[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_err(format!("unsupported field '{other}'"))),
    };
    let symmetry = match h[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(format!("unsupported symmetry '{other}'"))),
    };
    let mut body = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size_line = body.next().ok_or_else(|| parse_err("missing size line"))?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|s| s.parse::<usize>().map_err(|_| parse_err(format!("bad size '{s}'"))))
        .collect::<Result<_, _>>()?;
    let (rows, cols) = match sizes.as_slice() {
        [r, c, ..] => (*r, *c),
        _ => return Err(parse_err("size line needs rows and cols")),
    };
    let mut m = ComplexMatrix::zeros(rows, cols);
    if coordinate {
        let nnz = *sizes.get(2).ok_or_else(|| parse_err("coordinate size line needs nnz"))?;
        for _ in 0..nnz {
            let line = body.next().ok_or_else(|| parse_err("too few entries"))?;
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() < 2 {
                return Err(parse_err("entry needs row and column"));
            }
            let i: usize = t[0].parse().map_err(|_| parse_err("bad row index"))?;
            let j: usize = t[1].parse().map_err(|_| parse_err("bad column index"))?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(parse_err(format!("index ({i},{j}) out of range")));
            }
            let z = parse_value(&t[2..], field)?;
            mirror(&mut m, i - 1, j - 1, z, symmetry);
        }
    } else {
        for j in 0..cols {
            let start = match symmetry {
                Symmetry::General => 0,
                Symmetry::Skew => j + 1,
                _ => j,
            };
            for i in start..rows {
                let line = body.next().ok_or_else(|| parse_err("too few entries"))?;
                let t: Vec<&str> = line.split_whitespace().collect();
                let z = parse_value(&t, field)?;
                mirror(&mut m, i, j, z, symmetry);
            }
        }
    }
    ComplexMatrix::new(rows, cols, m.as_slice().to_vec())
}

/// Reads a Matrix Market file.
pub fn read_matrix_market(path: &Path) -> Result<ComplexMatrix, DenseError> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

/// Serializes a vector as CSV with a `re,im` header.
pub fn vector_csv_string(v: &[Complex64]) -> String {
    let mut out = String::from("re,im\n");
    for z in v {
        let _ = writeln!(out, "{},{}", fmt_f64(z.re), fmt_f64(z.im));
    }
    out
}

/// Writes a vector as CSV.
pub fn write_vector_csv(path: &Path, v: &[Complex64]) -> Result<(), DenseError> {
    std::fs::write(path, vector_csv_string(v))?;
    Ok(())
}

/// Parses vector CSV; one entry per line, either `re` or `re,im`. A
/// non-numeric first line is treated as a header.
pub fn parse_vector_csv(text: &str) -> Result<ComplexVector, DenseError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = parts.iter().map(|s| s.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => match vals.as_slice() {
                [re] => out.push(Complex64::new(*re, 0.0)),
                [re, im] => out.push(Complex64::new(*re, *im)),
                _ => return Err(parse_err(format!("line {}: expected 1 or 2 columns", idx + 1))),
            },
            Err(_) if idx == 0 => continue,
            Err(_) => return Err(parse_err(format!("line {}: bad number", idx + 1))),
        }
    }
    Ok(out)
}

/// Reads a vector CSV file.
pub fn read_vector_csv(path: &Path) -> Result<ComplexVector, DenseError> {
    parse_vector_csv(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_general() {
        let i = Complex64::new(0.0, 1.0);
        let m = ComplexMatrix::new(2, 3, vec![1.0 + i, 2.0 * i, Complex64::new(0.1, 0.0), -i, Complex64::new(1e-300, 0.0), Complex64::new(3.0, -7.5)]).unwrap();
        let back = parse_matrix_market(&matrix_market_string(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn round_trip_hermitian() {
        let i = Complex64::new(0.0, 1.0);
        let m = ComplexMatrix::new(2, 2, vec![Complex64::new(2.0, 0.0), 1.0 + i, 1.0 - i, Complex64::new(3.0, 0.0)]).unwrap();
        let s = matrix_market_string(&m);
        assert!(s.starts_with("%%MatrixMarket matrix array complex hermitian"));
        assert_eq!(parse_matrix_market(&s).unwrap(), m);
    }

    #[test]
    fn coordinate_symmetric_real() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 4\n2 1 -1\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, ComplexMatrix::from_real(2, 2, &[4.0, -1.0, -1.0, 0.0]).unwrap());
    }

    #[test]
    fn bad_header_rejected() {
        assert!(parse_matrix_market("hello\n1 1\n1\n").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let v = vec![Complex64::new(1.0, -2.0), Complex64::new(0.3, 0.0)];
        assert_eq!(parse_vector_csv(&vector_csv_string(&v)).unwrap(), v);
        assert_eq!(parse_vector_csv("1\n2\n").unwrap(), vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]);
    }
}
