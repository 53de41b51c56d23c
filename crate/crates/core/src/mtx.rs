//! Matrix Market files for assembled systems.
//!
//! Matrices use the coordinate format, vectors the array format. Indices are
//! 1-based and values are written with `{:e}`, which round-trips exactly.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use crate::assembly::BlockSystem;
use crate::error::{Error, Result};
use crate::output::write_atomic;
use crate::sparse::{CsrMatrix, Scalar};
use crate::Complex64;

/// Entry types that can appear in a Matrix Market file.
pub trait MtxValue: Scalar {
    const FIELD: &'static str;
    fn format(self, out: &mut String);
    fn parse(fields: &[&str]) -> Option<Self>;
}

impl MtxValue for f64 {
    const FIELD: &'static str = "real";
    fn format(self, out: &mut String) {
        let _ = write!(out, "{:e}", self);
    }
    fn parse(fields: &[&str]) -> Option<Self> {
        match fields {
            [x] => x.parse().ok(),
            _ => None,
        }
    }
}

impl MtxValue for Complex64 {
    const FIELD: &'static str = "complex";
    fn format(self, out: &mut String) {
        let _ = write!(out, "{:e} {:e}", self.re, self.im);
    }
    fn parse(fields: &[&str]) -> Option<Self> {
        match fields {
            [re, im] => Some(Complex64::new(re.parse().ok()?, im.parse().ok()?)),
            _ => None,
        }
    }
}

pub fn matrix_to_string<T: MtxValue>(m: &CsrMatrix<T>) -> String {
    let mut s = String::with_capacity(32 * (m.nnz() + 2));
    let _ = writeln!(s, "%%MatrixMarket matrix coordinate {} general", T::FIELD);
    let _ = writeln!(s, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz());
    for (i, j, v) in m.iter() {
        let _ = write!(s, "{} {} ", i + 1, j + 1);
        v.format(&mut s);
        s.push('\n');
    }
    s
}

pub fn vector_to_string<T: MtxValue>(v: &[T]) -> String {
    let mut s = String::with_capacity(24 * (v.len() + 2));
    let _ = writeln!(s, "%%MatrixMarket matrix array {} general", T::FIELD);
    let _ = writeln!(s, "{} 1", v.len());
    for &x in v {
        x.format(&mut s);
        s.push('\n');
    }
    s
}

/// Data lines after the banner, with comments and blank lines dropped.
fn body<'a>(text: &'a str, layout: &str, field: &str) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate();
    let banner = lines
        .next()
        .map(|(_, l)| l.to_ascii_lowercase())
        .ok_or_else(|| Error::invalid("empty Matrix Market input"))?;
    let expected = format!("%%matrixmarket matrix {layout} {field} general");
    if banner.split_whitespace().collect::<Vec<_>>().join(" ") != expected {
        return Err(Error::invalid(format!("unsupported Matrix Market banner: {banner}")));
    }
    Ok(lines
        .filter(|(_, l)| !l.trim_start().starts_with('%') && !l.trim().is_empty())
        .map(|(n, l)| (n + 1, l.split_whitespace().collect())))
}

fn bad_line(n: usize) -> Error {
    Error::invalid(format!("malformed Matrix Market line {n}"))
}

pub fn parse_matrix<T: MtxValue>(text: &str) -> Result<CsrMatrix<T>> {
    let mut lines = body(text, "coordinate", T::FIELD)?;
    let (n, size) = lines.next().ok_or_else(|| Error::invalid("missing size line"))?;
    let dims: Vec<usize> = size.iter().map(|f| f.parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad_line(n))?;
    let [rows, cols, nnz] = dims[..] else { return Err(bad_line(n)) };
    let mut triplets = Vec::with_capacity(nnz);
    for (n, fields) in lines {
        if fields.len() < 3 {
            return Err(bad_line(n));
        }
        let i: usize = fields[0].parse().map_err(|_| bad_line(n))?;
        let j: usize = fields[1].parse().map_err(|_| bad_line(n))?;
        let v = T::parse(&fields[2..]).ok_or_else(|| bad_line(n))?;
        if i == 0 || j == 0 {
            return Err(bad_line(n));
        }
        triplets.push((i - 1, j - 1, v));
    }
    if triplets.len() != nnz {
        return Err(Error::invalid(format!("expected {nnz} entries, found {}", triplets.len())));
    }
    CsrMatrix::from_triplets(rows, cols, triplets)
}

pub fn parse_vector<T: MtxValue>(text: &str) -> Result<Vec<T>> {
    let mut lines = body(text, "array", T::FIELD)?;
    let (n, size) = lines.next().ok_or_else(|| Error::invalid("missing size line"))?;
    let len = match size[..] {
        [r, "1"] => r.parse::<usize>().map_err(|_| bad_line(n))?,
        _ => return Err(bad_line(n)),
    };
    let v = lines
        .map(|(n, f)| T::parse(&f).ok_or_else(|| bad_line(n)))
        .collect::<Result<Vec<T>>>()?;
    if v.len() != len {
        return Err(Error::invalid(format!("expected {len} values, found {}", v.len())));
    }
    Ok(v)
}

pub fn write_matrix<T: MtxValue>(path: &Path, m: &CsrMatrix<T>) -> Result<()> {
    write_atomic(path, matrix_to_string(m).as_bytes())
}

pub fn write_vector<T: MtxValue>(path: &Path, v: &[T]) -> Result<()> {
    write_atomic(path, vector_to_string(v).as_bytes())
}

pub fn read_matrix<T: MtxValue>(path: &Path) -> Result<CsrMatrix<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

pub fn read_vector<T: MtxValue>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vector(&text)
}

/// Metadata written next to `L.mtx` and `F.mtx`.
pub fn system_sidecar(sys: &BlockSystem) -> Value {
    json!({
        "scheme": sys.scheme.as_str(),
        "order": sys.order(),
        "nnz": sys.l.nnz(),
        "sparsity": sys.l.sparsity(),
        "block": sys.block,
        "rescaled": sys.rescaled,
        "config": sys.cfg.to_document(),
    })
}

/// Writes `L.mtx`, `F.mtx` and `system.json` into `dir`.
pub fn write_system(dir: &Path, sys: &BlockSystem) -> Result<()> {
    write_matrix(&dir.join("L.mtx"), &sys.l)?;
    write_vector(&dir.join("F.mtx"), &sys.f)?;
    let meta = serde_json::to_string_pretty(&system_sidecar(sys)).expect("json value serializes");
    write_atomic(&dir.join("system.json"), meta.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_ap_system;
    use crate::model::{GridConfig, ParityField};
    use crate::quadrature::half_range_rule;

    #[test]
    fn real_round_trip_is_exact() {
        let m = CsrMatrix::from_dense_rows(&[vec![0.1, 0.0, -3.0e-300], vec![0.0, 1.0 / 3.0, 0.0]]);
        let text = matrix_to_string(&m);
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n2 3 3\n1 1 "));
        assert_eq!(parse_matrix::<f64>(&text).unwrap(), m);
        let v = vec![1.0, -2.5e-17, std::f64::consts::PI];
        assert_eq!(parse_vector::<f64>(&vector_to_string(&v)).unwrap(), v);
    }

    #[test]
    fn complex_round_trip_is_exact() {
        let m = CsrMatrix::from_dense_rows(&[
            vec![Complex64::new(0.5, -0.25), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 1e-9), Complex64::new(2.0, 0.0)],
        ]);
        let text = matrix_to_string(&m);
        assert!(text.contains("complex"));
        assert_eq!(parse_matrix::<Complex64>(&text).unwrap(), m);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_matrix::<f64>("%%MatrixMarket matrix coordinate complex general\n1 1 0\n").is_err());
        assert!(parse_matrix::<f64>("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.0\n").is_err());
        assert!(parse_matrix::<f64>("%%MatrixMarket matrix coordinate real general\n1 1 1\n0 1 1.0\n").is_err());
        assert!(parse_matrix::<f64>("%%MatrixMarket matrix coordinate real general\n1 1 1\n2 1 1.0\n").is_err());
        assert!(parse_vector::<f64>("%%MatrixMarket matrix array real general\n2 1\n1.0\n").is_err());
    }

    #[test]
    fn system_files_round_trip() {
        let cfg = GridConfig::ap(0.1, 0.005, 0.1, 2, 4, 3);
        let rule = half_range_rule(2).unwrap();
        let mut init = ParityField::zeros(2, 4);
        init.r[3] = 1.0;
        let sys = assemble_ap_system(&cfg, &rule, true, &init).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_system(dir.path(), &sys).unwrap();
        assert_eq!(read_matrix::<f64>(&dir.path().join("L.mtx")).unwrap(), sys.l);
        assert_eq!(read_vector::<f64>(&dir.path().join("F.mtx")).unwrap(), sys.f);
        let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("system.json")).unwrap()).unwrap();
        assert_eq!(meta["order"], sys.order());
        assert_eq!(meta["config"]["scheme"], "AP");
    }
}
