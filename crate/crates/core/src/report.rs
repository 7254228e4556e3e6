//! Output artifacts: per-prediction records CSV, structured run summaries,
//! and sweep tables. Every file is written once through a temporary file
//! in the destination directory and renamed into place.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::harness::{ModelKind, PredictionRecord, RunSummary, SweepCell, UpdateMode};

/// Writes `path` by filling a sibling temporary file and renaming it.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&File>) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Columns of a sweep summary table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryTable {
    /// model, window, rmsep, n, flagged
    Window,
    /// model, delay, rmsep, n, flagged
    Delay,
    /// model, rmsep, n, flagged
    OneStep,
}

impl SummaryTable {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            SummaryTable::Window => &["model", "window", "rmsep", "n", "flagged"],
            SummaryTable::Delay => &["model", "delay", "rmsep", "n", "flagged"],
            SummaryTable::OneStep => &["model", "rmsep", "n", "flagged"],
        }
    }

    fn row(self, cell: &SweepCell) -> Vec<String> {
        let (rmsep, n, flagged) = match &cell.outcome {
            Ok(r) => (r.rmsep.to_string(), r.n_predictions, r.n_flagged),
            Err(_) => (String::new(), 0, 0),
        };
        let mut row = vec![cell.spec.kind.name().to_string()];
        match self {
            SummaryTable::Window => row.push(cell.spec.window.to_string()),
            SummaryTable::Delay => row.push(cell.policy.delay.to_string()),
            SummaryTable::OneStep => {}
        }
        row.extend([rmsep, n.to_string(), flagged.to_string()]);
        row
    }
}

pub const RECORD_HEADER: [&str; 7] = [
    "t",
    "truth",
    "prediction",
    "lag",
    "window_end",
    "model",
    "flags",
];

/// Writes records as CSV; multiple flags are joined with `;`.
pub fn write_records_to<W: Write>(out: W, records: &[PredictionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.t.to_string(),
            r.truth.to_string(),
            r.prediction.to_string(),
            r.lag.to_string(),
            r.window_end.to_string(),
            r.model.name().to_string(),
            r.flags.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records(path: &Path, records: &[PredictionRecord]) -> Result<()> {
    write_atomic(path, |w| write_records_to(w, records))
}

/// Writes one summary row per cell. A failed cell keeps its row with an
/// empty RMSEP and zero counts.
pub fn write_summary_to<W: Write>(out: W, table: SummaryTable, cells: &[SweepCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table.header())?;
    for cell in cells {
        w.write_record(table.row(cell))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, table: SummaryTable, cells: &[SweepCell]) -> Result<()> {
    write_atomic(path, |w| write_summary_to(w, table, cells))
}

/// Structured report entry for one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub dataset: String,
    pub model: ModelKind,
    pub mode: UpdateMode,
    pub delay: usize,
    pub window: usize,
    pub rmsep: Option<f64>,
    pub n: usize,
    pub flagged: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CellSummary {
    pub fn from_cell(dataset: &str, cell: &SweepCell) -> Self {
        match &cell.outcome {
            Ok(r) => {
                let s: RunSummary = r.summary();
                Self {
                    dataset: s.dataset,
                    model: s.model,
                    mode: s.mode,
                    delay: s.delay,
                    window: s.window,
                    rmsep: Some(s.rmsep),
                    n: s.n,
                    flagged: s.flagged,
                    error: None,
                }
            }
            Err(e) => Self {
                dataset: dataset.to_string(),
                model: cell.spec.kind,
                mode: cell.policy.mode,
                delay: cell.policy.delay,
                window: cell.spec.window,
                rmsep: None,
                n: 0,
                flagged: 0,
                error: Some(e.clone()),
            },
        }
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

/// File name for one run's records, e.g. `pls_w4_continuous_d1.csv`.
pub fn records_file_name(cell: &SweepCell) -> String {
    format!(
        "{}_w{}_{}_d{}.csv",
        cell.spec.kind.name(),
        cell.spec.window,
        cell.policy.mode.name(),
        cell.policy.delay
    )
}

/// Writes `summary.csv`, `summary.json` and `records/<run>.csv` under `dir`.
pub fn write_sweep(
    dir: &Path,
    dataset: &str,
    table: SummaryTable,
    cells: &[SweepCell],
) -> Result<()> {
    let records = dir.join("records");
    std::fs::create_dir_all(&records)?;
    write_summary(&dir.join("summary.csv"), table, cells)?;
    let structured: Vec<CellSummary> = cells
        .iter()
        .map(|c| CellSummary::from_cell(dataset, c))
        .collect();
    write_json(&dir.join("summary.json"), &structured)?;
    for cell in cells {
        if let Some(r) = cell.report() {
            write_records(&records.join(records_file_name(cell)), &r.records)?;
        }
    }
    Ok(())
}
