//! CSV serialization of result tables.

use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::scenario::{Cell, Table};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Empty => String::new(),
        Cell::Num(v) => format_number(*v),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

pub fn write_table<W: Write>(table: &Table, sink: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(sink);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell_text))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_string(table: &Table) -> String {
    let mut buf = Vec::new();
    write_table(table, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn write_file(table: &Table, path: &Path) -> Result<()> {
    let err = |message: String| CliError::Output {
        path: path.display().to_string(),
        message,
    };
    let file = std::fs::File::create(path).map_err(|e| err(e.to_string()))?;
    write_table(table, std::io::BufWriter::new(file)).map_err(|e| err(e.to_string()))
}
