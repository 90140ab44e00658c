//! Plain-text artifacts: Matrix Market, vectors, CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use skel_core::sparse::CsrMatrix;

use crate::{Result, SkelError};

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| SkelError::Io { path: path.into(), source })
}

/// Coordinate real general format, 1-based, 17 significant digits.
pub fn matrix_market_string(m: &CsrMatrix) -> String {
    let mut s = String::with_capacity(32 * m.nnz() + 128);
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    s.push_str("% interfacial system C u = r\n");
    let _ = writeln!(s, "{} {} {}", m.nrows(), m.ncols(), m.nnz());
    for (i, j, v) in m.iter() {
        let _ = writeln!(s, "{} {} {:.16e}", i + 1, j + 1, v);
    }
    s
}

pub fn write_matrix_market(path: &Path, m: &CsrMatrix) -> Result<()> {
    write_file(path, &matrix_market_string(m))
}

/// Coordinate `real`/`integer` matrices, `general` or `symmetric`.
pub fn parse_matrix_market(text: &str) -> Result<CsrMatrix> {
    let err = |m: String| SkelError::MatrixMarket(m);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| err("empty file".into()))?;
    let h: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(err(format!("unsupported header {header:?}")));
    }
    if h[3] != "real" && h[3] != "integer" {
        return Err(err(format!("unsupported field {:?}", h[3])));
    }
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(format!("unsupported symmetry {other:?}"))),
    };
    let mut body = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size = body.next().ok_or_else(|| err("missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(format!("bad size line {size:?}"))))
        .collect::<Result<_>>()?;
    let [nr, nc, nnz] = dims[..] else {
        return Err(err(format!("bad size line {size:?}")));
    };
    let mut trip = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    for k in 0..nnz {
        let line = body.next().ok_or_else(|| err(format!("expected {nnz} entries, found {k}")))?;
        let bad = || err(format!("bad entry {line:?}"));
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(bad());
        }
        let i: usize = t[0].parse().map_err(|_| bad())?;
        let j: usize = t[1].parse().map_err(|_| bad())?;
        let v: f64 = t[2].parse().map_err(|_| bad())?;
        if i == 0 || j == 0 || i > nr || j > nc {
            return Err(err(format!("entry ({i}, {j}) outside {nr}x{nc}")));
        }
        trip.push((i - 1, j - 1, v));
        if symmetric && i != j {
            trip.push((j - 1, i - 1, v));
        }
    }
    if body.next().is_some() {
        return Err(err(format!("more than {nnz} entries")));
    }
    CsrMatrix::from_triplets(nr, nc, &trip).map_err(|e| err(e.to_string()))
}

pub fn read_matrix_market(path: &Path) -> Result<CsrMatrix> {
    let text = fs::read_to_string(path).map_err(|source| SkelError::Io { path: path.into(), source })?;
    parse_matrix_market(&text)
}

/// One value per line, 17 significant digits.
pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    let mut s = String::with_capacity(25 * v.len());
    for x in v {
        let _ = writeln!(s, "{x:.16e}");
    }
    write_file(path, &s)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|source| SkelError::Io { path: path.into(), source })?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse().map_err(|_| SkelError::Config(format!("{}: bad number {l:?}", path.display()))))
        .collect()
}

/// CSV with a header row; cells are written verbatim.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    write_file(path, &s)
}

pub fn write_json(path: &Path, v: &serde_json::Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    write_file(path, &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_market_round_trip_is_exact() {
        let vals = [1.0 / 3.0, -2.5e-17, std::f64::consts::PI, 1e300, -0.1];
        let m = CsrMatrix::from_triplets(3, 4, &[(0, 0, vals[0]), (0, 3, vals[1]), (1, 1, vals[2]), (2, 0, vals[3]), (2, 2, vals[4])]).unwrap();
        let text = matrix_market_string(&m);
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n"));
        assert_eq!(parse_matrix_market(&text).unwrap(), m);
    }

    #[test]
    fn symmetric_and_malformed_inputs() {
        let sym = "%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 4\n2 1 -1\n";
        let m = parse_matrix_market(sym).unwrap();
        assert_eq!(m.get(0, 1), -1.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\n1\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n").is_err());
    }

    #[test]
    fn vector_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.txt");
        let v = vec![0.1, -1.0 / 7.0, 6.02e23, 0.0];
        write_vector(&p, &v).unwrap();
        assert_eq!(read_vector(&p).unwrap(), v);
    }
}
