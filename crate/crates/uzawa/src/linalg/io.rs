//! Matrix Market coordinate I/O for sparse matrices and a small vector
//! format (plain text, or binary little-endian with a "UZVEC1" header).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;

const VEC_MAGIC: &[u8; 6] = b"UZVEC1";

/// Write a matrix in Matrix Market coordinate format. With `symmetric` the
/// matrix must be exactly symmetric and only the lower triangle is stored.
pub fn write_matrix_market<W: Write>(w: &mut W, a: &CsrMatrix, symmetric: bool) -> Result<()> {
    let kind = if symmetric { "symmetric" } else { "general" };
    if symmetric && !(a.is_square() && a.asymmetry() == 0.0) {
        return Err(Error::InvalidStructure(
            "symmetric output requested for a matrix that is not exactly symmetric".into(),
        ));
    }
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if !symmetric || j <= i {
                entries.push((i, j, v));
            }
        }
    }
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn write_matrix_market_file<P: AsRef<Path>>(
    path: P,
    a: &CsrMatrix,
    symmetric: bool,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market(&mut w, a, symmetric)
}

/// Read a Matrix Market coordinate file (real, general or symmetric).
/// Symmetric input is expanded to full storage.
pub fn read_matrix_market<R: BufRead>(r: R) -> Result<CsrMatrix> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix market stream".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%MatrixMarket" || fields[1] != "matrix" {
        return Err(Error::Parse(format!("bad matrix market header: {header}")));
    }
    if fields[2] != "coordinate" {
        return Err(Error::Parse("only coordinate format is supported".into()));
    }
    if fields[3] != "real" {
        return Err(Error::Parse("only real matrices are supported".into()));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(Error::Parse(format!(
                "unsupported symmetry qualifier: {other}"
            )))
        }
    };

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        match dims {
            None => {
                if toks.len() != 3 {
                    return Err(Error::Parse(format!("bad size line: {t}")));
                }
                let m = toks[0]
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                let n = toks[1]
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                let nnz = toks[2]
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                dims = Some((m, n, nnz));
                triplets.reserve(nnz);
            }
            Some((m, n, _)) => {
                if toks.len() != 3 {
                    return Err(Error::Parse(format!("bad entry line: {t}")));
                }
                let i = toks[0]
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                let j = toks[1]
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                let v = toks[2]
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(Error::Parse(format!("index out of range: {t}")));
                }
                if !v.is_finite() {
                    return Err(Error::Parse(format!("non-finite value: {t}")));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (m, n, nnz) = dims.ok_or_else(|| Error::Parse("missing size line".into()))?;
    let stored = if symmetric {
        // expanded count: nnz plus one mirror per off-diagonal entry
        triplets.len()
    } else {
        nnz
    };
    if !symmetric && triplets.len() != stored {
        return Err(Error::Parse(format!(
            "expected {nnz} entries, found {}",
            triplets.len()
        )));
    }
    CsrMatrix::from_triplets(m, n, &triplets)
}

pub fn read_matrix_market_file<P: AsRef<Path>>(path: P) -> Result<CsrMatrix> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

/// Plain-text vector: '%'-comments, a count line, then one entry per line.
pub fn write_vector_text<W: Write>(w: &mut W, x: &[f64]) -> Result<()> {
    writeln!(w, "% vector")?;
    writeln!(w, "{}", x.len())?;
    for v in x {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn write_vector_text_file<P: AsRef<Path>>(path: P, x: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vector_text(&mut w, x)
}

pub fn read_vector_text<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut len: Option<usize> = None;
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        match len {
            None => {
                len = Some(
                    t.parse::<usize>()
                        .map_err(|e| Error::Parse(e.to_string()))?,
                );
                out.reserve(len.unwrap());
            }
            Some(_) => {
                let v = t.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?;
                if !v.is_finite() {
                    return Err(Error::Parse(format!("non-finite vector entry: {t}")));
                }
                out.push(v);
            }
        }
    }
    let len = len.ok_or_else(|| Error::Parse("missing vector length line".into()))?;
    if out.len() != len {
        return Err(Error::Parse(format!(
            "vector length mismatch: header {len}, found {}",
            out.len()
        )));
    }
    Ok(out)
}

pub fn read_vector_text_file<P: AsRef<Path>>(path: P) -> Result<Vec<f64>> {
    read_vector_text(BufReader::new(File::open(path)?))
}

/// Binary vector: magic "UZVEC1", u64 little-endian length, f64 LE entries.
pub fn write_vector_binary<W: Write>(w: &mut W, x: &[f64]) -> Result<()> {
    w.write_all(VEC_MAGIC)?;
    w.write_all(&(x.len() as u64).to_le_bytes())?;
    for v in x {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_vector_binary_file<P: AsRef<Path>>(path: P, x: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vector_binary(&mut w, x)
}

pub fn read_vector_binary<R: Read>(r: &mut R) -> Result<Vec<f64>> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != VEC_MAGIC {
        return Err(Error::Parse("bad vector magic (expected UZVEC1)".into()));
    }
    let mut lenb = [0u8; 8];
    r.read_exact(&mut lenb)?;
    let len = u64::from_le_bytes(lenb) as usize;
    let mut out = Vec::with_capacity(len);
    let mut buf = [0u8; 8];
    for _ in 0..len {
        r.read_exact(&mut buf)?;
        let v = f64::from_le_bytes(buf);
        if !v.is_finite() {
            return Err(Error::Parse(
                "non-finite vector entry in binary stream".into(),
            ));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn read_vector_binary_file<P: AsRef<Path>>(path: P) -> Result<Vec<f64>> {
    let mut r = BufReader::new(File::open(path)?);
    read_vector_binary(&mut r)
}
