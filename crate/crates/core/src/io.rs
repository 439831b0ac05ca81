//! CSV input and report output.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// A parsed numeric table.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub data: Dataset,
}

fn is_numeric(cell: &str) -> bool {
    cell.trim().parse::<f64>().is_ok()
}

/// Reads comma separated numbers. A first row with any non-numeric cell is
/// taken as a header; lines starting with `#` are skipped.
pub fn parse_table<R: Read>(input: R) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut header = None;
    let mut values = Vec::new();
    let mut p = None;
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |pos| pos.line() as usize);
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if rows == 0 && header.is_none() && record.iter().any(|c| !is_numeric(c)) {
            header = Some(record.iter().map(str::to_string).collect());
            p = Some(record.len());
            continue;
        }
        let width = *p.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::RaggedRow { row: line, found: record.len(), expected: width });
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                column: j + 1,
                message: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row: line, column: j + 1 });
            }
            values.push(v);
        }
        rows += 1;
    }
    let p = p.unwrap_or(0);
    if p == 0 || rows <= p {
        return Err(Error::TooFewObservations { n: rows, p });
    }
    Ok(Table { header, data: Dataset::from_row_major(rows, p, values)? })
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_table(std::io::BufReader::new(file))
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| {
        Error::InvalidParameter(format!("{} is not a file path", path.display()))
    })?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Formats with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// 1-based data row.
    pub row_id: usize,
    pub outlyingness: f64,
    pub in_h_star: bool,
    pub in_j_plus: bool,
}

/// Per-row result of one detection run.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectReport {
    pub method: String,
    pub alpha: f64,
    pub h: usize,
    pub seed: u64,
    pub exact_fit: Option<String>,
    pub rows: Vec<ReportRow>,
}

pub const REPORT_COLUMNS: [&str; 4] = ["row_id", "outlyingness", "in_h_star", "in_j_plus"];

impl DetectReport {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(out, "# method={}", self.method).expect("vec write");
        writeln!(out, "# alpha={}", self.alpha).expect("vec write");
        writeln!(out, "# h={}", self.h).expect("vec write");
        writeln!(out, "# seed={}", self.seed).expect("vec write");
        writeln!(out, "# exact_fit={}", self.exact_fit.as_deref().unwrap_or("none")).expect("vec write");
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.row_id.to_string(),
                fmt_f64(r.outlyingness),
                r.in_h_star.to_string(),
                r.in_j_plus.to_string(),
            ])?;
        }
        w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_csv()?)
    }

    pub fn parse<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text).map_err(|e| Error::io("<report>", e))?;
        let mut meta = std::collections::HashMap::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            if let Some((k, v)) = line.trim_start_matches('#').trim().split_once('=') {
                meta.insert(k.to_string(), v.to_string());
            }
        }
        let get = |k: &str| {
            meta.get(k).cloned().ok_or_else(|| Error::Parse {
                line: 0,
                column: 0,
                message: format!("report header lacks '{k}'"),
            })
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::Parse { line: 0, column: 0, message: format!("bad '{k}'") })
        };
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let cell = |j: usize| record.get(j).unwrap_or("");
            let bad = |j: usize| Error::Parse { line, column: j + 1, message: format!("bad value '{}'", cell(j)) };
            rows.push(ReportRow {
                row_id: cell(0).parse().map_err(|_| bad(0))?,
                outlyingness: cell(1).parse().map_err(|_| bad(1))?,
                in_h_star: cell(2).parse().map_err(|_| bad(2))?,
                in_j_plus: cell(3).parse().map_err(|_| bad(3))?,
            });
        }
        let exact = get("exact_fit")?;
        Ok(DetectReport {
            method: get("method")?,
            alpha: num("alpha")?,
            h: num("h")? as usize,
            seed: get("seed")?.parse().map_err(|_| Error::Parse { line: 0, column: 0, message: "bad 'seed'".into() })?,
            exact_fit: (exact != "none").then_some(exact),
            rows,
        })
    }
}
