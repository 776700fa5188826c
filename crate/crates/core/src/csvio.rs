//! CSV tables with a `#` provenance header. Floats are written with 17
//! significant digits so that they parse back to the same bits.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_table<W: Write>(mut out: W, provenance: &[(&str, String)], header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    for (k, v) in provenance {
        writeln!(out, "# {k}: {v}").map_err(io_err)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// Header and rows of a table, skipping `#` lines.
pub fn read_table<R: Read>(input: R) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

pub fn parse_f64(field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("not a number: {field:?}")))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
