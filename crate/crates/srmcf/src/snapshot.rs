//! SRMCF1 snapshot files.
//!
//! An ASCII header
//!
//! ```text
//! SRMCF1
//! dims: n_1 ... n_k
//! spacing: h_1 ... h_k
//! origin: o_1 ... o_k
//! periodic: 0/1 ... 0/1
//! time: t
//!
//! ```
//!
//! followed by the node values as little-endian `f64`, row-major with the
//! last axis fastest. Header reals are written with 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use srmcf_core::{Axis, GridSpec, ScalarField};

use crate::error::{AppError, Result};
use crate::report::fmt_f64;

const MAGIC: &str = "SRMCF1";

pub fn encode(u: &ScalarField) -> Vec<u8> {
    let axes = u.grid().axes();
    let join = |f: &dyn Fn(&Axis) -> String| axes.iter().map(f).collect::<Vec<_>>().join(" ");
    let mut out = format!(
        "{MAGIC}\ndims: {}\nspacing: {}\norigin: {}\nperiodic: {}\ntime: {}\n\n",
        join(&|a| a.count.to_string()),
        join(&|a| fmt_f64(a.spacing)),
        join(&|a| fmt_f64(a.origin)),
        join(&|a| u8::from(a.periodic).to_string()),
        fmt_f64(u.time()),
    )
    .into_bytes();
    out.reserve(8 * u.values().len());
    for v in u.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<ScalarField> {
    let bad = |reason: &str| AppError::format(path, reason.to_string());
    let mut lines = Vec::with_capacity(6);
    let mut pos = 0;
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("truncated header"))?;
        let line =
            std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| bad("header is not ASCII"))?;
        pos += end + 1;
        if line.is_empty() {
            break;
        }
        lines.push(line);
        if lines.len() > 6 {
            return Err(bad("header has no terminating blank line"));
        }
    }
    if lines.first() != Some(&MAGIC) || lines.len() != 6 {
        return Err(bad("not an SRMCF1 header"));
    }
    let field = |line: &str, key: &str| -> Result<Vec<String>> {
        let rest = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(':'))
            .ok_or_else(|| bad(&format!("expected `{key}:`")))?;
        Ok(rest.split_whitespace().map(str::to_string).collect())
    };
    let parse_all = |words: Vec<String>, key: &str| -> Result<Vec<f64>> {
        words
            .iter()
            .map(|w| {
                w.parse::<f64>()
                    .map_err(|_| bad(&format!("bad number `{w}` in `{key}`")))
            })
            .collect()
    };
    let dims: Vec<usize> = field(lines[1], "dims")?
        .iter()
        .map(|w| w.parse::<usize>().map_err(|_| bad("bad dims")))
        .collect::<Result<_>>()?;
    let spacing = parse_all(field(lines[2], "spacing")?, "spacing")?;
    let origin = parse_all(field(lines[3], "origin")?, "origin")?;
    let periodic: Vec<bool> = field(lines[4], "periodic")?
        .iter()
        .map(|w| match w.as_str() {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad("periodic flags must be 0 or 1")),
        })
        .collect::<Result<_>>()?;
    let time = parse_all(field(lines[5], "time")?, "time")?;
    let k = dims.len();
    if k == 0 || spacing.len() != k || origin.len() != k || periodic.len() != k || time.len() != 1 {
        return Err(bad("header axis counts disagree"));
    }
    let axes = (0..k)
        .map(|a| Axis {
            count: dims[a],
            origin: origin[a],
            spacing: spacing[a],
            periodic: periodic[a],
        })
        .collect();
    let grid = GridSpec::new(axes).map_err(|e| bad(&e.to_string()))?;
    let payload = &bytes[pos..];
    if payload.len() != 8 * grid.len() {
        return Err(bad(&format!(
            "payload has {} bytes, header needs {}",
            payload.len(),
            8 * grid.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunks of 8")))
        .collect();
    ScalarField::new(grid, values, time[0]).map_err(|e| bad(&e.to_string()))
}

pub fn write(path: &Path, u: &ScalarField) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| AppError::io(path, e))?;
    file.write_all(&encode(u))
        .map_err(|e| AppError::io(path, e))
}

pub fn read(path: &Path) -> Result<ScalarField> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    decode(&bytes, path)
}
