//! CSV reports. Reals are written with 17 significant digits so that they
//! parse back to the same `f64`.

use std::path::Path;

use srmcf_core::barriers::ResidualReport;
use srmcf_core::phi::BoundAudit;
use srmcf_core::{Point, SweepReport};

use crate::error::{AppError, Result};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::io(path, io),
        other => AppError::format(path, format!("{other:?}")),
    })
}

/// One row per ε level. `sup_diff` is empty on the first level, decay
/// columns are empty when no fit was possible.
pub fn write_sweep(path: &Path, report: &SweepReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "epsilon",
        "delta",
        "sup_diff",
        "confinement_radius",
        "decay_b",
        "decay_B",
        "fit_r2",
    ])?;
    for l in &report.levels {
        w.write_record([
            fmt_f64(l.epsilon),
            fmt_f64(l.delta),
            opt(l.sup_diff),
            opt(l.confinement_radius),
            opt(l.decay.map(|d| d.b)),
            opt(l.decay.map(|d| d.big_b)),
            opt(l.decay.map(|d| d.r2)),
        ])?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Columns `sample, x_1 … x_n, t, residual`.
pub fn write_residuals(
    path: &Path,
    report: &ResidualReport,
    samples: &[(Point, f64)],
) -> Result<()> {
    let mut w = writer(path)?;
    let n = samples.first().map_or(0, |s| s.0.len());
    let mut header = vec!["sample".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend(["t".to_string(), "residual".to_string()]);
    w.write_record(&header)?;
    for (k, ((p, t), r)) in samples.iter().zip(&report.residuals).enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(p.iter().map(|&v| fmt_f64(v)));
        row.push(fmt_f64(*t));
        row.push(fmt_f64(*r));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Columns `bound, kind, samples, ratio, half_ratio, drift, stable, pass,
/// enforced, xi_1 … xi_n, eta_1 … eta_n`.
pub fn write_audits(path: &Path, audits: &[BoundAudit], enforced: &[String]) -> Result<()> {
    let mut w = writer(path)?;
    let n = audits.first().map_or(0, |a| a.argmax_pair.0.len());
    let mut header: Vec<String> = [
        "bound",
        "kind",
        "samples",
        "ratio",
        "half_ratio",
        "drift",
        "stable",
        "pass",
        "enforced",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=n).map(|i| format!("xi{i}")));
    header.extend((1..=n).map(|i| format!("eta{i}")));
    w.write_record(&header)?;
    for a in audits {
        let mut row = vec![
            a.id.to_string(),
            format!("{:?}", a.kind).to_lowercase(),
            a.samples.to_string(),
            fmt_f64(a.ratio),
            fmt_f64(a.half_ratio),
            fmt_f64(a.drift),
            a.stable.to_string(),
            a.pass().to_string(),
            enforced.iter().any(|e| e == a.id).to_string(),
        ];
        row.extend(
            a.argmax_pair
                .0
                .iter()
                .chain(&a.argmax_pair.1)
                .map(|&v| fmt_f64(v)),
        );
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Long format `i, j, value` for a 2D slice with `cols` entries per row.
pub fn write_slice(path: &Path, values: &[f64], cols: usize) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["i", "j", "value"])?;
    for (k, v) in values.iter().enumerate() {
        w.write_record([(k / cols).to_string(), (k % cols).to_string(), fmt_f64(*v)])?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Reads back a file written by [`write_slice`].
pub fn read_slice(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            let field = |k: usize| {
                rec.get(k)
                    .ok_or_else(|| AppError::format(path, "short row"))
            };
            let bad = |_| AppError::format(path, "bad number");
            Ok((
                field(0)?
                    .parse()
                    .map_err(|_| AppError::format(path, "bad index"))?,
                field(1)?
                    .parse()
                    .map_err(|_| AppError::format(path, "bad index"))?,
                field(2)?.parse().map_err(bad)?,
            ))
        })
        .collect()
}
