//! Land-cover tables: one row per cell, one proportion column per cover.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use landdiv::compositions::EXACT_SUM_TOL;
use landdiv::Composition;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, CliResult};

pub const DEFAULT_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowRejection {
    /// 1-based data row number (the header is row 0).
    pub row: usize,
    pub cell_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub renormalized: Vec<String>,
    pub rejected: Vec<RowRejection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<PathBuf>,
    pub report: IngestReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellDataset {
    pub covers: Vec<String>,
    pub rows: Vec<(String, Composition)>,
    pub provenance: Provenance,
}

impl CellDataset {
    pub fn compositions(&self) -> Vec<Composition> {
        self.rows.iter().map(|(_, c)| c.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> CliResult<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let bad = |e: csv::Error| CliError::Input(e.to_string());
        let mut header = vec!["cell_id".to_string()];
        header.extend(self.covers.iter().cloned());
        wtr.write_record(&header).map_err(bad)?;
        for (id, c) in &self.rows {
            let mut rec = vec![id.clone()];
            rec.extend(c.parts().iter().map(|p| p.to_string()));
            wtr.write_record(&rec).map_err(bad)?;
        }
        wtr.flush().map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn export(&self, path: &Path) -> CliResult<()> {
        let file = File::create(path).map_err(io_err(path))?;
        self.write_csv(file)
    }
}

/// Parses one row into a composition or a rejection reason.
fn parse_row(fields: &[&str], zero_tol: f64, sum_tol: f64) -> Result<(Composition, bool), String> {
    let mut parts = Vec::with_capacity(fields.len());
    for (k, f) in fields.iter().enumerate() {
        let v: f64 = f
            .trim()
            .parse()
            .map_err(|_| format!("column {}: {:?} is not a number", k + 1, f))?;
        if !v.is_finite() {
            return Err(format!("column {}: non-finite value", k + 1));
        }
        if v < -zero_tol {
            return Err(format!("column {}: negative proportion {v}", k + 1));
        }
        if v > 1.0 + sum_tol {
            return Err(format!("column {}: proportion {v} above 1", k + 1));
        }
        parts.push(if v.abs() <= zero_tol { 0.0 } else { v });
    }
    let snapped = parts
        .iter()
        .zip(fields)
        .any(|(p, f)| f.trim().parse::<f64>().ok() != Some(*p));
    let sum: f64 = parts.iter().sum();
    if (sum - 1.0).abs() > sum_tol {
        return Err(format!("parts sum to {sum}, outside tolerance {sum_tol}"));
    }
    let changed = snapped || (sum - 1.0).abs() > EXACT_SUM_TOL;
    let c = Composition::with_tolerance(parts, sum_tol).map_err(|e| e.to_string())?;
    Ok((c, changed))
}

/// Reads a table with header `cell_id,<cover>,...`. Structural problems
/// fail the whole read; bad values reject only their row.
pub fn ingest_reader<R: Read>(
    input: R,
    source: Option<PathBuf>,
    zero_tol: f64,
    sum_tol: f64,
) -> CliResult<CellDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("malformed CSV header: {e}")))?
        .clone();
    if header.len() < 3 {
        return Err(CliError::Input(
            "header needs cell_id and at least two cover columns".into(),
        ));
    }
    if &header[0] != "cell_id" {
        return Err(CliError::Input(format!(
            "first column must be cell_id, found {:?}",
            &header[0]
        )));
    }
    let covers: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut rows = Vec::new();
    let mut report = IngestReport::default();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("malformed CSV at data row {}: {e}", k + 1)))?;
        let id = rec[0].to_string();
        let fields: Vec<&str> = rec.iter().skip(1).collect();
        match parse_row(&fields, zero_tol, sum_tol) {
            Ok((c, changed)) => {
                if changed {
                    log::info!("row {} ({id}) renormalized", k + 1);
                    report.renormalized.push(id.clone());
                }
                report.accepted += 1;
                rows.push((id, c));
            }
            Err(reason) => {
                log::warn!("row {} ({id}) rejected: {reason}", k + 1);
                report.rejected.push(RowRejection {
                    row: k + 1,
                    cell_id: id,
                    reason,
                });
            }
        }
    }
    Ok(CellDataset {
        covers,
        rows,
        provenance: Provenance { source, report },
    })
}

pub fn ingest(path: &Path, zero_tol: f64, sum_tol: f64) -> CliResult<CellDataset> {
    let file = File::open(path).map_err(io_err(path))?;
    ingest_reader(file, Some(path.to_path_buf()), zero_tol, sum_tol)
}
