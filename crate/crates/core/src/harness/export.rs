//! CSV and JSON persistence of ensemble records.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::ensemble::RunRecord;
use crate::error::{param, Error, Result};

pub const CSV_HEADER: [&str; 6] = ["iteration", "mean_sumrate", "std_sumrate", "n_sims", "method", "scenario_hash"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(param(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| {
        let msg = e.to_string();
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io { path: path.to_path_buf(), source },
            _ => Error::Format { path: path.to_path_buf(), msg },
        }
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Aggregate columns of one record as read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvBlock {
    pub method: String,
    pub scenario_hash: String,
    pub n_sims: usize,
    pub mean_sumrate: Vec<f64>,
    pub std_sumrate: Vec<f64>,
}

impl From<&RunRecord> for CsvBlock {
    fn from(r: &RunRecord) -> Self {
        Self {
            method: r.method.clone(),
            scenario_hash: r.scenario_hash.clone(),
            n_sims: r.n_sims,
            mean_sumrate: r.mean_sumrate.clone(),
            std_sumrate: r.std_sumrate.clone(),
        }
    }
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let n = r.n_sims.to_string();
        for (t, (m, s)) in r.mean_sumrate.iter().zip(&r.std_sumrate).enumerate() {
            w.write_record([t.to_string(), fmt_sig17(*m), fmt_sig17(*s), n.clone(), r.method.clone(), r.scenario_hash.clone()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn export_csv(records: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    write_csv(records, BufWriter::new(file)).map_err(csv_err(path))
}

/// Reads a CSV written by [`export_csv`]; a block starts at every
/// `iteration = 0` row.
pub fn import_csv(path: impl AsRef<Path>) -> Result<Vec<CsvBlock>> {
    let path = path.as_ref();
    let bad = |msg: String| Error::Format { path: path.to_path_buf(), msg };
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rdr.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut blocks: Vec<CsvBlock> = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(csv_err(path))?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let num = |i: usize| field(i).parse::<f64>().map_err(|_| bad(format!("row {}: bad number `{}`", line + 1, field(i))));
        let iteration: usize = field(0).parse().map_err(|_| bad(format!("row {}: bad iteration", line + 1)))?;
        let n_sims: usize = field(3).parse().map_err(|_| bad(format!("row {}: bad n_sims", line + 1)))?;
        if iteration == 0 {
            blocks.push(CsvBlock {
                method: field(4).to_string(),
                scenario_hash: field(5).to_string(),
                n_sims,
                mean_sumrate: Vec::new(),
                std_sumrate: Vec::new(),
            });
        }
        let block = blocks
            .last_mut()
            .filter(|b| b.mean_sumrate.len() == iteration && b.method == field(4) && b.scenario_hash == field(5))
            .ok_or_else(|| bad(format!("row {}: iteration {iteration} out of sequence", line + 1)))?;
        block.mean_sumrate.push(num(1)?);
        block.std_sumrate.push(num(2)?);
    }
    Ok(blocks)
}

/// `serde_json` formatter writing floats with 17 significant digits.
struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        writer.write_all(format!("{value:.8e}").as_bytes())
    }
}

pub fn write_json<W: Write, S: Serialize + ?Sized>(value: &S, out: W) -> serde_json::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(out, Sig17);
    value.serialize(&mut ser)
}

pub fn export_json(records: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_json(records, &mut w).map_err(|e| Error::Format { path: path.to_path_buf(), msg: e.to_string() })?;
    w.flush().map_err(io_err(path))
}

pub fn import_json(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::Format { path: path.to_path_buf(), msg: e.to_string() })
}

pub fn export_results(records: &[RunRecord], path: impl AsRef<Path>, format: Format) -> Result<()> {
    match format {
        Format::Csv => export_csv(records, path),
        Format::Json => export_json(records, path),
    }
}
