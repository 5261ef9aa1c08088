//! File formats.
//!
//! `.lprm` binary matrices (all integers little-endian):
//!
//! | offset | size | field                      |
//! |--------|------|----------------------------|
//! | 0      | 4    | magic `b"LPRM"`            |
//! | 4      | 4    | `u32` version = 1          |
//! | 8      | 4    | `u32` rows M               |
//! | 12     | 4    | `u32` cols N               |
//! | 16     | 1    | `u8` ensemble code         |
//! | 17     | 8    | `u64` seed                 |
//! | 25     | 8·MN | `f64` entries, row-major   |
//!
//! Ensemble codes: 0 gaussian, 1 uniform_sphere, 2 external.
//!
//! CSV matrices hold one matrix row per line. CSV vectors hold one value
//! per line (a single comma-separated line is also accepted on input).

use std::io::{BufRead, Read, Write};

use crate::ensembles::{Ensemble, MeasurementMatrix};
use crate::error::{Error, Result};

pub const MATRIX_MAGIC: &[u8; 4] = b"LPRM";
pub const MATRIX_VERSION: u32 = 1;
const HEADER_LEN: usize = 25;

pub fn write_matrix_binary<W: Write>(mut w: W, a: &MeasurementMatrix) -> Result<()> {
    let dim = |d: usize| {
        u32::try_from(d).map_err(|_| Error::invalid(format!("dimension {d} does not fit in u32")))
    };
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MATRIX_MAGIC);
    header.extend_from_slice(&MATRIX_VERSION.to_le_bytes());
    header.extend_from_slice(&dim(a.rows())?.to_le_bytes());
    header.extend_from_slice(&dim(a.cols())?.to_le_bytes());
    header.push(a.ensemble().code());
    header.extend_from_slice(&a.seed().to_le_bytes());
    w.write_all(&header)?;
    let mut body = Vec::with_capacity(8 * a.as_slice().len());
    for v in a.as_slice() {
        body.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&body)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix_binary<R: Read>(mut r: R) -> Result<MeasurementMatrix> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::Format(format!("truncated matrix header: {e}")))?;
    if &header[0..4] != MATRIX_MAGIC {
        return Err(Error::Format("bad magic, expected LPRM".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != MATRIX_VERSION {
        return Err(Error::Format(format!("unsupported matrix version {version}")));
    }
    let rows = u32_at(8) as usize;
    let cols = u32_at(12) as usize;
    let ensemble = Ensemble::from_code(header[16])
        .ok_or_else(|| Error::Format(format!("unknown ensemble code {}", header[16])))?;
    let seed = u64::from_le_bytes(header[17..25].try_into().unwrap());

    let len = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Format("matrix dimensions overflow".into()))?;
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)
        .map_err(|e| Error::Format(format!("truncated matrix body: {e}")))?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after matrix body".into()));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    MeasurementMatrix::with_provenance(rows, cols, data, ensemble, seed)
        .map_err(|e| Error::Format(e.to_string()))
}

pub fn write_matrix_csv<W: Write>(mut w: W, a: &MeasurementMatrix) -> Result<()> {
    for i in 0..a.rows() {
        writeln!(w, "{}", join(a.row(i)))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a CSV matrix; the result is tagged as an external matrix.
pub fn read_matrix_csv<R: BufRead>(r: R) -> Result<MeasurementMatrix> {
    let mut rows = Vec::new();
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        rows.push(parse_fields(line)?);
    }
    if rows.is_empty() {
        return Err(Error::Format("empty matrix file".into()));
    }
    MeasurementMatrix::from_rows(&rows).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_vector_csv<W: Write>(mut w: W, x: &[f64]) -> Result<()> {
    for v in x {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vector_csv<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if !line.is_empty() {
            out.extend(parse_fields(line)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Format("empty vector file".into()));
    }
    Ok(out)
}

fn parse_fields(line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|f| {
            let f = f.trim();
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Format(format!("not a finite number: {f:?}")))
        })
        .collect()
}

pub(crate) fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
