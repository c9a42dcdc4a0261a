use std::io::Write;
use std::path::Path;

use crate::approx::ApproximationCurve;
use crate::error::Result;
use crate::gennorms::SeminormCurve;
use crate::periods::PeriodScanReport;

/// A rectangular numeric table with a fixed column order.
pub trait CsvTable {
    fn header(&self) -> Vec<String>;
    /// Rows of the same width as the header; `None` renders as an empty field.
    fn rows(&self) -> Vec<Vec<Option<f64>>>;
}

/// Free-form table used by commands without a dedicated curve type.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable for Table {
    fn header(&self) -> Vec<String> {
        self.columns.clone()
    }
    fn rows(&self) -> Vec<Vec<Option<f64>>> {
        self.rows.iter().map(|r| r.iter().map(|x| Some(*x)).collect()).collect()
    }
}

impl CsvTable for SeminormCurve {
    fn header(&self) -> Vec<String> {
        vec!["t".into(), "value".into()]
    }
    fn rows(&self) -> Vec<Vec<Option<f64>>> {
        self.abscissae.iter().zip(&self.values).map(|(t, v)| vec![Some(*t), Some(*v)]).collect()
    }
}

impl CsvTable for ApproximationCurve {
    fn header(&self) -> Vec<String> {
        vec!["index".into(), "error".into(), "bound".into()]
    }
    fn rows(&self) -> Vec<Vec<Option<f64>>> {
        self.indices
            .iter()
            .zip(&self.errors)
            .zip(&self.bounds)
            .map(|((k, e), b)| vec![Some(*k as f64), Some(*e), *b])
            .collect()
    }
}

/// One row per detected period, ascending in `tau`.
impl CsvTable for PeriodScanReport {
    fn header(&self) -> Vec<String> {
        vec!["tau".into(), "residual".into()]
    }
    fn rows(&self) -> Vec<Vec<Option<f64>>> {
        let mut out = Vec::with_capacity(self.periods.len());
        let mut j = 0;
        for &p in &self.periods {
            while j < self.taus.len() && self.taus[j] < p {
                j += 1;
            }
            let r = self.taus.get(j).filter(|t| **t == p).map(|_| self.residuals[j]);
            out.push(vec![Some(p), r]);
        }
        out
    }
}

/// 17 significant digits, exponent form.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn csv_string(table: &dyn CsvTable) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(table.header())?;
    for row in table.rows() {
        w.write_record(row.iter().map(|x| x.map(format_number).unwrap_or_default()))?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn emit_csv(table: &dyn CsvTable, path: &Path) -> Result<()> {
    let text = csv_string(table)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
