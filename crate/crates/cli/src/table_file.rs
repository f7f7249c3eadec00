//! Binary table files.
//!
//! Layout: `b"F2FN"`, a version byte, `n` as a little-endian `u32`, then
//! `2^n` little-endian `f64` values in index order.

use std::fs;
use std::io::Write;
use std::path::Path;

use f2reglab::gf2::check_dense;
use f2reglab::FunctionTable;
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"F2FN";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 9;

#[derive(Debug, Error)]
pub enum TableFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: u64, found: u64 },
    #[error("value {value} at index {index} is outside [0, 1]")]
    ValueOutOfRange { index: u64, value: f64 },
    #[error(transparent)]
    Guard(f2reglab::Error),
}

pub fn encode(f: &FunctionTable) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * f.values().len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(f.n() as u32).to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], dense_limit: u32) -> Result<FunctionTable, TableFileError> {
    if bytes.len() < HEADER_LEN {
        return Err(TableFileError::MalformedHeader(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(TableFileError::MalformedHeader("bad magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(TableFileError::MalformedHeader(format!(
            "unsupported version {}",
            bytes[4]
        )));
    }
    let n = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    check_dense(n, dense_limit).map_err(TableFileError::Guard)?;
    let expected = 8u64 << n;
    let found = (bytes.len() - HEADER_LEN) as u64;
    if found < expected {
        return Err(TableFileError::TruncatedPayload { expected, found });
    }
    if found > expected {
        return Err(TableFileError::MalformedHeader(format!(
            "n = {n} needs {expected} payload bytes, file has {found}"
        )));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(TableFileError::ValueOutOfRange {
            index: index as u64,
            value,
        });
    }
    FunctionTable::new(n, values).map_err(TableFileError::Guard)
}

pub fn write_table(path: &Path, f: &FunctionTable) -> Result<(), TableFileError> {
    let io = |source| TableFileError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io)?;
    file.write_all(&encode(f)).map_err(io)
}

pub fn read_table(path: &Path, dense_limit: u32) -> Result<FunctionTable, TableFileError> {
    let bytes = fs::read(path).map_err(|source| TableFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes, dense_limit)
}

/// Smallest `g <= 64` with every value a multiple of `1/g`, if any.
pub fn detect_grid(f: &FunctionTable) -> Option<u64> {
    (1..=64u64).find(|&g| {
        f.values().iter().all(|&v| {
            let scaled = v * g as f64;
            (scaled - scaled.round()).abs() < 1e-9
        })
    })
}
