//! Trace CSV: `iter,solver,exploitability,grad_map_norm,restart_index,a_0..a_{D-1}`.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which reads back
//! to the same `f64`.

use std::io::{Read, Write};

use gne_core::solvers::{Algorithm, TraceRow};

use crate::BenchError;

pub const FIXED_COLUMNS: [&str; 5] = ["iter", "solver", "exploitability", "grad_map_norm", "restart_index"];

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub solver: String,
    pub exploitability: f64,
    pub grad_map_norm: f64,
    pub restart_index: usize,
    pub profile: Vec<f64>,
}

impl TraceRecord {
    pub fn from_row(row: &TraceRow, solver: Algorithm, restart_index: usize) -> Self {
        Self {
            iter: row.iteration,
            solver: solver.as_str().to_string(),
            exploitability: row.exploitability,
            grad_map_norm: row.grad_map_norm,
            restart_index,
            profile: row.profile.clone(),
        }
    }
}

pub fn header(dim: usize) -> Vec<String> {
    FIXED_COLUMNS.iter().map(|c| c.to_string()).chain((0..dim).map(|k| format!("a_{k}"))).collect()
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(path: &str, e: impl std::fmt::Display) -> BenchError {
    BenchError::Trace { path: path.to_string(), message: e.to_string() }
}

/// Writes the header for profiles of length `dim`, then one line per record.
pub fn write_trace<W: Write>(out: W, dim: usize, records: &[TraceRecord]) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header(dim)).map_err(|e| csv_error("<output>", e))?;
    for r in records {
        if r.profile.len() != dim {
            return Err(csv_error("<output>", format!("row {} has {} profile entries, header has {dim}", r.iter, r.profile.len())));
        }
        let fields = [
            r.iter.to_string(),
            r.solver.clone(),
            format_float(r.exploitability),
            format_float(r.grad_map_norm),
            r.restart_index.to_string(),
        ]
        .into_iter()
        .chain(r.profile.iter().map(|x| format_float(*x)));
        writer.write_record(fields).map_err(|e| csv_error("<output>", e))?;
    }
    writer.flush().map_err(|e| csv_error("<output>", e))
}

/// Parses a trace written by [`write_trace`], checking the header exactly.
pub fn read_trace<R: Read>(input: R, name: &str) -> Result<Vec<TraceRecord>, BenchError> {
    let mut reader = csv::Reader::from_reader(input);
    let columns: Vec<String> = reader.headers().map_err(|e| csv_error(name, e))?.iter().map(String::from).collect();
    let dim = columns.len().checked_sub(FIXED_COLUMNS.len()).ok_or_else(|| csv_error(name, "too few columns"))?;
    if columns != header(dim) {
        return Err(csv_error(name, format!("unexpected header `{}`", columns.join(","))));
    }
    let mut records = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_error(name, e))?;
        let at = |k: usize| -> &str { row.get(k).unwrap_or("") };
        let bad = |k: usize| csv_error(name, format!("line {}: bad `{}` value `{}`", line + 2, columns[k], at(k)));
        let float = |k: usize| at(k).parse::<f64>().map_err(|_| bad(k));
        records.push(TraceRecord {
            iter: at(0).parse().map_err(|_| bad(0))?,
            solver: at(1).to_string(),
            exploitability: float(2)?,
            grad_map_norm: float(3)?,
            restart_index: at(4).parse().map_err(|_| bad(4))?,
            profile: (0..dim).map(|k| float(FIXED_COLUMNS.len() + k)).collect::<Result<_, _>>()?,
        });
    }
    Ok(records)
}
