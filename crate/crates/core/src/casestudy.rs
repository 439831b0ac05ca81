//! The concrete slump case study: an early batch of 78 mixtures and a later
//! batch of 25, and three harder variants built from them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::baselines::{run_method, Method};
use crate::chisq::chisq_quantile;
use crate::data::{Dataset, SubsetIndex};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::{fmt_f64, Table};
use crate::moments::subset_moments;
use crate::params::AlgoParams;

/// Rows in the early batch `J_O`.
pub const N_OLD: usize = 78;
/// Rows in the late batch `J_N`.
pub const N_NEW: usize = 25;
/// Measurement columns: seven mixture inputs and three test outputs.
pub const COLUMNS: usize = 10;
/// Random starts (and SDE directions) used for every method.
pub const CASE_STUDY_STARTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Raw data.
    I,
    /// Late batch pulled halfway towards the early batch mean.
    Ii,
    /// Raw data plus 25 midpoints inside the late batch.
    Iii,
    /// Both changes.
    Iv,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::I, Variant::Ii, Variant::Iii, Variant::Iv];

    pub fn name(self) -> &'static str {
        match self {
            Variant::I => "i",
            Variant::Ii => "ii",
            Variant::Iii => "iii",
            Variant::Iv => "iv",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Variant::I),
            "ii" | "2" => Ok(Variant::Ii),
            "iii" | "3" => Ok(Variant::Iii),
            "iv" | "4" => Ok(Variant::Iv),
            other => Err(Error::InvalidParameter(format!("unknown variant '{other}'"))),
        }
    }
}

/// Checks the shape of the raw table and drops a leading id column.
pub fn concrete_dataset(table: &Table) -> Result<Dataset> {
    let data = &table.data;
    if data.n() != N_OLD + N_NEW {
        return Err(Error::InvalidParameter(format!(
            "expected {} rows of concrete data, found {}",
            N_OLD + N_NEW,
            data.n()
        )));
    }
    match data.p() {
        COLUMNS => Ok(data.clone()),
        p if p == COLUMNS + 1 => {
            let rows: Vec<Vec<f64>> = data.rows().map(|r| r[1..].to_vec()).collect();
            Dataset::from_rows(&rows)
        }
        p => Err(Error::InvalidParameter(format!(
            "expected {COLUMNS} measurement columns (optionally preceded by an id), found {p}"
        ))),
    }
}

#[derive(Debug, Clone)]
pub struct CaseStudyVariant {
    pub variant: Variant,
    pub data: Dataset,
    pub j_o: SubsetIndex,
    pub j_n: SubsetIndex,
}

fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Builds one variant from the 103-row base data.
///
/// The appended rows of variants iii and iv are midpoints between the first
/// late row and each late row in turn, itself included.
pub fn build_variant(base: &Dataset, variant: Variant) -> Result<CaseStudyVariant> {
    if base.n() != N_OLD + N_NEW || base.p() != COLUMNS {
        return Err(Error::InvalidParameter(format!(
            "case study needs {} x {COLUMNS} data, got {} x {}",
            N_OLD + N_NEW,
            base.n(),
            base.p()
        )));
    }
    let mut rows: Vec<Vec<f64>> = base.rows().map(<[f64]>::to_vec).collect();
    if matches!(variant, Variant::Ii | Variant::Iv) {
        let t_o = subset_moments(base, &SubsetIndex::range(0..N_OLD))?;
        for row in &mut rows[N_OLD..] {
            *row = midpoint(row, t_o.center().as_slice());
        }
    }
    if matches!(variant, Variant::Iii | Variant::Iv) {
        let added: Vec<Vec<f64>> = (0..N_NEW).map(|j| midpoint(&rows[N_OLD], &rows[N_OLD + j])).collect();
        rows.extend(added);
    }
    let n = rows.len();
    Ok(CaseStudyVariant {
        variant,
        data: Dataset::from_rows(&rows)?,
        j_o: SubsetIndex::range(0..N_OLD),
        j_n: SubsetIndex::range(N_OLD..n),
    })
}

/// Closest late-batch row to the early batch moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation {
    pub min_d2: f64,
    /// `min_d2 / chi2_{0.99,p}`.
    pub ratio: f64,
}

pub fn reference_separation(v: &CaseStudyVariant) -> Result<Separation> {
    let fit = subset_moments(&v.data, &v.j_o)?;
    let mut min_d2 = f64::INFINITY;
    for i in v.j_n.iter() {
        min_d2 = min_d2.min(fit.mahalanobis_sq(v.data.row(i))?);
    }
    Ok(Separation { min_d2, ratio: min_d2 / chisq_quantile(0.99, v.data.p())? })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseStudyRow {
    pub variant: Variant,
    pub method: Method,
    /// 1-based row of the variant's data.
    pub row_id: usize,
    pub late: bool,
    pub outlyingness: f64,
}

/// Runs each method at `alpha = 0.5` with [`CASE_STUDY_STARTS`] starts.
pub fn run_case_study(
    v: &CaseStudyVariant,
    methods: &[Method],
    seed: u64,
    execution: Execution,
) -> Result<Vec<CaseStudyRow>> {
    let params = AlgoParams::new(v.data.n(), v.data.p(), 0.5)?
        .with_starts(CASE_STUDY_STARTS)
        .with_seed(seed);
    let mut rows = Vec::new();
    for &method in methods {
        let fit = run_method(method, &v.data, &params, execution)?;
        rows.extend(fit.outlyingness.iter().enumerate().map(|(i, &o)| CaseStudyRow {
            variant: v.variant,
            method,
            row_id: i + 1,
            late: v.j_n.contains(i),
            outlyingness: o,
        }));
    }
    Ok(rows)
}

/// Whether every late row is more outlying than every early row.
pub fn groups_separated(rows: &[CaseStudyRow]) -> bool {
    let max_old = rows.iter().filter(|r| !r.late).map(|r| r.outlyingness).fold(f64::NEG_INFINITY, f64::max);
    let min_new = rows.iter().filter(|r| r.late).map(|r| r.outlyingness).fold(f64::INFINITY, f64::min);
    max_old < min_new
}

pub fn write_case_study_csv<W: Write>(rows: &[CaseStudyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["variant", "method", "row_id", "group", "outlyingness"])?;
    for r in rows {
        w.write_record([
            r.variant.to_string(),
            r.method.to_string(),
            r.row_id.to_string(),
            if r.late { "J_N" } else { "J_O" }.to_string(),
            fmt_f64(r.outlyingness),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
