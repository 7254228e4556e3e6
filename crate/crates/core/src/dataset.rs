//! Time-ordered process data: a sensor matrix `X` whose rows are samples in
//! time order, and the property series `y` measured on the same samples.
//!
//! CSV is the only on-disk format. The first row is a header of unique
//! names, every cell is a plain decimal number, and floats are written
//! with Rust's shortest round-trip formatting so that a load/write cycle is
//! bit-exact.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::time::Duration;

use crate::error::{ensure, Error, Result};
use crate::numeric::{Matrix, Vector};

/// Which CSV column holds the property values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum YColumn {
    Name(String),
    Index(usize),
}

impl From<&str> for YColumn {
    fn from(s: &str) -> Self {
        YColumn::Name(s.to_string())
    }
}

impl From<usize> for YColumn {
    fn from(i: usize) -> Self {
        YColumn::Index(i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    x: Matrix,
    y: Vector,
    column_names: Vec<String>,
    y_name: String,
    pub sample_interval: Option<Duration>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        x: Matrix,
        y: Vector,
        column_names: Vec<String>,
        y_name: impl Into<String>,
    ) -> Result<Self> {
        ensure!(
            x.rows() == y.len(),
            "sensor matrix has {} rows but the property series has {} values",
            x.rows(),
            y.len()
        );
        ensure!(
            y.len() >= 2,
            "a dataset needs at least 2 samples, got {}",
            y.len()
        );
        ensure!(
            column_names.len() == x.cols(),
            "{} column names for {} sensor columns",
            column_names.len(),
            x.cols()
        );
        Ok(Self {
            name: name.into(),
            x,
            y,
            column_names,
            y_name: y_name.into(),
            sample_interval: None,
        })
    }

    /// Dataset with generated column names `x1..xc` and property column `y`.
    pub fn unnamed(name: impl Into<String>, x: Matrix, y: Vector) -> Result<Self> {
        let names = (1..=x.cols()).map(|j| format!("x{j}")).collect();
        Self::new(name, x, y, names, "y")
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn y_name(&self) -> &str {
        &self.y_name
    }

    pub fn n_samples(&self) -> usize {
        self.y.len()
    }

    pub fn n_variables(&self) -> usize {
        self.x.cols()
    }

    fn with_parts(&self, x: Matrix, y: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(
            self.name.clone(),
            x,
            Vector::from_raw(y),
            self.column_names.clone(),
            self.y_name.clone(),
        )?;
        out.sample_interval = self.sample_interval;
        Ok(out)
    }

    /// Pairs `y[t + lag]` with sensor row `t`, dropping the trailing sensor
    /// rows that have no aligned property value.
    pub fn lag_align(&self, y_lag: usize) -> Result<Self> {
        let n = self.n_samples();
        ensure!(
            y_lag < n,
            "property lag {y_lag} must be smaller than the sample count {n}"
        );
        let len = n - y_lag;
        self.with_parts(self.x.row_range(0, len), self.y[y_lag..].to_vec())
    }

    /// Breaks runs of exactly repeated property values with a cumulative
    /// offset: a run of k repeats becomes `v, v + e, v + 2e, ...`.
    ///
    /// A sample is bumped when it repeats its raw predecessor, or when it
    /// collides with the already-adjusted predecessor, so the output never
    /// has two consecutive identical values.
    pub fn jitter_duplicate_y(&self, epsilon: f64) -> Result<Self> {
        ensure!(
            epsilon > 0.0 && epsilon.is_finite(),
            "jitter offset must be positive, got {epsilon}"
        );
        let raw = self.y.as_slice();
        let mut out = Vec::with_capacity(raw.len());
        out.push(raw[0]);
        for t in 1..raw.len() {
            let prev = out[t - 1];
            if raw[t] == raw[t - 1] || raw[t] == prev {
                out.push(prev + epsilon);
            } else {
                out.push(raw[t]);
            }
        }
        self.with_parts(self.x.clone(), out)
    }

    /// Splits off the first `ceil(fraction * n)` samples, in time order.
    pub fn split_prefix(&self, spec: SplitSpec) -> Result<(Self, Self)> {
        let n = self.n_samples();
        let head = spec.prefix_len(n)?;
        ensure!(
            head >= 2 && n - head >= 2,
            "split of {n} samples at fraction {} leaves {head}/{} samples; both sides need at least 2",
            spec.validation_fraction,
            n - head
        );
        let validation = self.with_parts(self.x.row_range(0, head), self.y[..head].to_vec())?;
        let remainder = self.with_parts(self.x.row_range(head, n), self.y[head..].to_vec())?;
        Ok((validation, remainder))
    }

    pub fn load_csv(path: impl AsRef<Path>, y_column: impl Into<YColumn>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::Load {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::read_csv(file, name, y_column.into()).map_err(|e| match e {
            Error::Contract(message) => Error::Load {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Parses the CSV contract from any reader. Load problems come back as
    /// [`Error::Contract`] with row/column context.
    pub fn read_csv<R: Read>(
        reader: R,
        name: impl Into<String>,
        y_column: YColumn,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        for (i, h) in header.iter().enumerate() {
            ensure!(!header[..i].contains(h), "duplicate header name {h:?}");
        }
        let y_idx = match &y_column {
            YColumn::Name(n) => header.iter().position(|h| h == n).ok_or_else(|| {
                crate::error::contract(format!(
                    "property column {n:?} not found in header {header:?}"
                ))
            })?,
            YColumn::Index(i) => {
                ensure!(
                    *i < header.len(),
                    "property column index {i} out of range for {} columns",
                    header.len()
                );
                *i
            }
        };

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut rows = 0usize;
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            // header is line 1
            let line = r + 2;
            ensure!(
                record.len() == header.len(),
                "line {line}: expected {} fields, found {}",
                header.len(),
                record.len()
            );
            for (j, cell) in record.iter().enumerate() {
                let cell = cell.trim();
                let value: f64 = cell.parse().map_err(|_| {
                    crate::error::contract(format!(
                        "line {line}, column {:?}: {} is not a number",
                        header[j],
                        if cell.is_empty() {
                            "blank cell".to_string()
                        } else {
                            format!("{cell:?}")
                        }
                    ))
                })?;
                ensure!(
                    value.is_finite(),
                    "line {line}, column {:?}: non-finite value",
                    header[j]
                );
                if j == y_idx {
                    ys.push(value);
                } else {
                    xs.push(value);
                }
            }
            rows += 1;
        }
        ensure!(rows >= 2, "need at least 2 data rows, found {rows}");
        let names: Vec<String> = header
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != y_idx)
            .map(|(_, h)| h.clone())
            .collect();
        let x = Matrix::new(rows, names.len(), xs)?;
        Self::new(name, x, Vector::new(ys)?, names, header[y_idx].clone())
    }

    /// Writes sensor columns followed by the property column.
    pub fn write_csv_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.column_names.iter().map(String::as_str).collect();
        header.push(&self.y_name);
        w.write_record(&header)?;
        let mut fields = Vec::with_capacity(header.len());
        for (row, y) in self.x.row_iter().zip(self.y.iter()) {
            fields.clear();
            fields.extend(row.iter().map(|v| v.to_string()));
            fields.push(y.to_string());
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::report::write_atomic(path.as_ref(), |f| self.write_csv_to(f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub validation_fraction: f64,
}

impl SplitSpec {
    pub fn new(validation_fraction: f64) -> Result<Self> {
        ensure!(
            validation_fraction > 0.0 && validation_fraction < 1.0,
            "validation fraction must lie in (0, 1), got {validation_fraction}"
        );
        Ok(Self {
            validation_fraction,
        })
    }

    /// `ceil(fraction * n)`, ignoring representation error below 1e-9.
    pub fn prefix_len(&self, n: usize) -> Result<usize> {
        ensure!(
            self.validation_fraction > 0.0 && self.validation_fraction < 1.0,
            "validation fraction must lie in (0, 1), got {}",
            self.validation_fraction
        );
        let raw = self.validation_fraction * n as f64;
        Ok((raw - 1e-9).ceil().max(0.0) as usize)
    }
}

/// Benchmark preprocessing applied before a run, in order: lag alignment,
/// duplicate jitter, then the validation prefix that is excluded from scoring.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct Preprocessing {
    pub y_lag: usize,
    pub jitter: Option<f64>,
    pub validation_fraction: Option<f64>,
}

impl Preprocessing {
    /// Property lagged 8 samples; first 4.0% held for validation.
    pub const DEBUTANIZER: Self = Self {
        y_lag: 8,
        jitter: None,
        validation_fraction: Some(0.04),
    };

    /// Repeated readings jittered by 1e-6; first 4.6% held for validation.
    pub const SRU: Self = Self {
        y_lag: 0,
        jitter: Some(1e-6),
        validation_fraction: Some(0.046),
    };

    /// First 14.1% held for validation.
    pub const MONOTONIC: Self = Self {
        y_lag: 0,
        jitter: None,
        validation_fraction: Some(0.141),
    };

    /// Returns the processed dataset and the index of the first scored sample.
    pub fn apply(&self, data: &Dataset) -> Result<(Dataset, usize)> {
        let mut out = if self.y_lag > 0 {
            data.lag_align(self.y_lag)?
        } else {
            data.clone()
        };
        if let Some(eps) = self.jitter {
            out = out.jitter_duplicate_y(eps)?;
        }
        let start = match self.validation_fraction {
            Some(f) => SplitSpec::new(f)?.prefix_len(out.n_samples())?,
            None => 0,
        };
        Ok((out, start))
    }
}
