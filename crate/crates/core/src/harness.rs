//! Moving-window evaluation.
//!
//! A run walks a series in time order. At each refit the model is trained on
//! the `w` labeled samples ending at `window_end` and predicts samples after
//! it. Two update protocols decide which samples each window serves:
//!
//! * continuous, delay `d`: sample `t` is predicted from the window ending at
//!   `t - d`, and the window advances one step per prediction;
//! * delayed, delay `d`: windows end at `w - 1, w - 1 + d, ...` and each one
//!   predicts the next `d` samples (lags `1..=d`); a final short block at the
//!   end of the series is still predicted.
//!
//! With `d = 1` both protocols emit identical records.
//!
//! Predictions start at the first sample that has a full window of labeled
//! history. A window the model cannot be fitted on (every sensor constant)
//! falls back to the window mean and is flagged, so long sweeps keep going.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::ensemble::{Forest, ForestConfig};
use crate::error::{ensure, Error, Result};
use crate::numeric::Matrix;
use crate::pls;
use crate::rfpls::{self, RfPlsConfig};
use crate::rpls::RplsState;

pub const FLAG_MMW_FALLBACK: &str = "mmw_fallback";
pub const FLAG_INNER_PLS_FALLBACK: &str = "inner_pls_fallback";

/// The window grid of the window-size sweep: 2-10, 15, 20 and 25 samples.
pub const WINDOW_GRID: [usize; 12] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25];

/// Delays 1 through 9.
pub const DELAY_GRID: [usize; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

/// Read access to a time-ordered series.
///
/// Calibration code reads property values through [`Series::y`]; the value
/// a prediction is scored against is read through [`Series::truth`] only
/// after the prediction exists.
pub trait Series {
    fn len(&self) -> usize;
    fn n_variables(&self) -> usize;
    fn x_row(&self, t: usize) -> &[f64];
    fn y(&self, t: usize) -> f64;
    fn truth(&self, t: usize) -> f64 {
        self.y(t)
    }
    fn name(&self) -> &str {
        ""
    }
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Series for Dataset {
    fn len(&self) -> usize {
        self.n_samples()
    }

    fn n_variables(&self) -> usize {
        Dataset::n_variables(self)
    }

    fn x_row(&self, t: usize) -> &[f64] {
        self.x().row(t)
    }

    fn y(&self, t: usize) -> f64 {
        Dataset::y(self)[t]
    }

    fn name(&self) -> &str {
        &self.name
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mmw,
    Pls,
    Rpls,
    Rf,
    RfPls,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Mmw,
        ModelKind::Pls,
        ModelKind::Rpls,
        ModelKind::Rf,
        ModelKind::RfPls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Mmw => "mmw",
            ModelKind::Pls => "pls",
            ModelKind::Rpls => "rpls",
            ModelKind::Rf => "rf",
            ModelKind::RfPls => "rfpls",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
    }

    pub fn is_stateful(self) -> bool {
        self == ModelKind::Rpls
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

/// A model kind with its window and configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub window: usize,
    /// Forgetting factor for recursive PLS.
    pub lambda: f64,
    pub forest: ForestConfig,
    /// Inner PLS window of the hybrid; `None` means `window - 1`.
    pub inner_pls_window: Option<usize>,
    pub pseudo_rows: usize,
    /// Base seed; each window's forest is seeded with `seed ^ window_end`.
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, window: usize) -> Self {
        Self {
            kind,
            window,
            lambda: 0.05,
            forest: ForestConfig::default(),
            inner_pls_window: None,
            pseudo_rows: 1,
            seed: 0,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trees(mut self, n_trees: usize) -> Self {
        self.forest.n_trees = n_trees;
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn rfpls_config(&self) -> RfPlsConfig {
        RfPlsConfig {
            rf_window: self.window,
            inner_pls_window: self
                .inner_pls_window
                .unwrap_or(self.window.saturating_sub(1)),
            pseudo_rows: self.pseudo_rows,
            forest: self.forest,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.window >= 2,
            "window of {} samples is too small; at least 2 are needed",
            self.window
        );
        match self.kind {
            ModelKind::Rpls => ensure!(
                (0.0..=1.0).contains(&self.lambda),
                "forgetting factor must lie in [0, 1], got {}",
                self.lambda
            ),
            ModelKind::Rf => ensure!(self.forest.n_trees >= 1, "a forest needs at least one tree"),
            ModelKind::RfPls => self.rfpls_config().validate()?,
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMode {
    Continuous,
    Delayed,
}

impl UpdateMode {
    pub fn name(self) -> &'static str {
        match self {
            UpdateMode::Continuous => "continuous",
            UpdateMode::Delayed => "delayed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UpdatePolicy {
    pub mode: UpdateMode,
    pub delay: usize,
}

impl UpdatePolicy {
    pub fn continuous(delay: usize) -> Self {
        Self {
            mode: UpdateMode::Continuous,
            delay,
        }
    }

    pub fn delayed(delay: usize) -> Self {
        Self {
            mode: UpdateMode::Delayed,
            delay,
        }
    }

    pub fn one_step() -> Self {
        Self::continuous(1)
    }

    /// Refit points `(window_end, predicted samples)` for a series of `n`
    /// samples and window `w`, in time order.
    pub fn blocks(&self, n: usize, w: usize) -> Vec<(usize, Vec<usize>)> {
        let d = self.delay;
        let mut out = Vec::new();
        if d == 0 || w == 0 {
            return out;
        }
        match self.mode {
            UpdateMode::Continuous => {
                for t in (w - 1 + d)..n {
                    out.push((t - d, vec![t]));
                }
            }
            UpdateMode::Delayed => {
                let mut end = w - 1;
                while end + 1 < n {
                    out.push((end, ((end + 1)..=(end + d).min(n - 1)).collect()));
                    end += d;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRecord {
    pub t: usize,
    pub truth: f64,
    pub prediction: f64,
    pub lag: usize,
    pub window_end: usize,
    pub model: ModelKind,
    pub flags: Vec<&'static str>,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub dataset: String,
    pub spec: ModelSpec,
    pub policy: UpdatePolicy,
    /// First sample index that is scored.
    pub eval_start: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub records: Vec<PredictionRecord>,
    pub rmsep: f64,
    pub n_predictions: usize,
    pub n_flagged: usize,
    pub config: RunConfig,
}

impl RunReport {
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            dataset: self.config.dataset.clone(),
            model: self.config.spec.kind,
            mode: self.config.policy.mode,
            delay: self.config.policy.delay,
            window: self.config.spec.window,
            rmsep: self.rmsep,
            n: self.n_predictions,
            flagged: self.n_flagged,
        }
    }

    /// Mean of `prediction - truth`.
    pub fn mean_signed_error(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.prediction - r.truth)
            .sum::<f64>()
            / self.records.len() as f64
    }
}

/// The structured per-run report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub dataset: String,
    pub model: ModelKind,
    pub mode: UpdateMode,
    pub delay: usize,
    pub window: usize,
    pub rmsep: f64,
    pub n: usize,
    pub flagged: usize,
}

/// Mean of the window's property values.
pub fn predict_mmw(window_y: &[f64]) -> Result<f64> {
    ensure!(!window_y.is_empty(), "mean of an empty window");
    Ok(window_y.iter().sum::<f64>() / window_y.len() as f64)
}

pub fn rmsep(records: &[PredictionRecord]) -> Result<f64> {
    ensure!(!records.is_empty(), "RMSEP of no predictions");
    let sse: f64 = records
        .iter()
        .map(|r| (r.prediction - r.truth).powi(2))
        .sum();
    Ok((sse / records.len() as f64).sqrt())
}

pub fn run_series<S: Series + ?Sized>(
    series: &S,
    spec: &ModelSpec,
    policy: UpdatePolicy,
) -> Result<RunReport> {
    run_series_from(series, spec, policy, 0)
}

/// Like [`run_series`], scoring only samples `t >= eval_start`. Windows may
/// reach back before `eval_start`.
pub fn run_series_from<S: Series + ?Sized>(
    series: &S,
    spec: &ModelSpec,
    policy: UpdatePolicy,
    eval_start: usize,
) -> Result<RunReport> {
    spec.validate()?;
    ensure!(policy.delay >= 1, "delay must be at least 1");
    let n = series.len();
    let w = spec.window;
    let blocks = policy.blocks(n, w);
    ensure!(
        blocks.iter().flat_map(|b| &b.1).any(|&t| t >= eval_start),
        "series of {n} samples is too short for a window of {w} with delay {} scored from sample {eval_start}",
        policy.delay
    );

    let mut records = Vec::new();
    let mut rpls: Option<RplsState> = None;
    for (end, targets) in blocks {
        let scored: Vec<usize> = targets.into_iter().filter(|&t| t >= eval_start).collect();
        if scored.is_empty() && !spec.kind.is_stateful() {
            continue;
        }
        let start = end + 1 - w;
        let mut rows = Vec::with_capacity(w * series.n_variables());
        let mut wy = Vec::with_capacity(w);
        for i in start..=end {
            if spec.kind != ModelKind::Mmw {
                rows.extend_from_slice(series.x_row(i));
            }
            wy.push(series.y(i));
        }
        let wx = if spec.kind == ModelKind::Mmw {
            Matrix::zeros(w, 0)
        } else {
            Matrix::new(w, series.n_variables(), rows)?
        };
        let seed = spec.seed ^ end as u64;

        let mut preds: Vec<(usize, f64, Vec<&'static str>)> = Vec::with_capacity(scored.len());
        match spec.kind {
            ModelKind::Mmw => {
                let m = predict_mmw(&wy)?;
                preds.extend(scored.iter().map(|&t| (t, m, vec![])));
            }
            ModelKind::Pls => match pls::fit_pls_auto(&wx, &wy) {
                Ok(model) => {
                    for &t in &scored {
                        preds.push((t, model.predict(series.x_row(t))?, vec![]));
                    }
                }
                Err(Error::DegenerateWindow(_)) => {
                    let m = predict_mmw(&wy)?;
                    preds.extend(scored.iter().map(|&t| (t, m, vec![FLAG_MMW_FALLBACK])));
                }
                Err(e) => return Err(e),
            },
            ModelKind::Rpls => {
                let next = match &rpls {
                    None => RplsState::init(&wx, &wy, spec.lambda),
                    Some(state) => state.update(&wx, &wy),
                };
                match next {
                    Ok(state) => {
                        for &t in &scored {
                            preds.push((t, state.predict(series.x_row(t))?, vec![]));
                        }
                        rpls = Some(state);
                    }
                    Err(Error::DegenerateWindow(_)) => {
                        let m = predict_mmw(&wy)?;
                        preds.extend(scored.iter().map(|&t| (t, m, vec![FLAG_MMW_FALLBACK])));
                    }
                    Err(e) => return Err(e),
                }
            }
            ModelKind::Rf => {
                if !scored.is_empty() {
                    let forest = Forest::fit(&wx, &wy, &spec.forest, seed)?;
                    for &t in &scored {
                        preds.push((t, forest.predict(series.x_row(t))?, vec![]));
                    }
                }
            }
            ModelKind::RfPls => {
                let cfg = spec.rfpls_config();
                for &t in &scored {
                    let out = rfpls::fit_predict_rfpls(&wx, &wy, series.x_row(t), &cfg, seed)?;
                    let flags = if out.inner_fallback() {
                        vec![FLAG_INNER_PLS_FALLBACK]
                    } else {
                        vec![]
                    };
                    preds.push((t, out.prediction, flags));
                }
            }
        }

        for (t, prediction, flags) in preds {
            records.push(PredictionRecord {
                t,
                truth: series.truth(t),
                prediction,
                lag: t - end,
                window_end: end,
                model: spec.kind,
                flags,
            });
        }
    }

    let n_flagged = records.iter().filter(|r| !r.flags.is_empty()).count();
    Ok(RunReport {
        rmsep: rmsep(&records)?,
        n_predictions: records.len(),
        n_flagged,
        records,
        config: RunConfig {
            dataset: series.name().to_string(),
            spec: *spec,
            policy,
            eval_start,
        },
    })
}

/// One cell of a sweep: the configuration and its run, or the reason it
/// could not run.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub spec: ModelSpec,
    pub policy: UpdatePolicy,
    pub outcome: std::result::Result<RunReport, String>,
}

impl SweepCell {
    pub fn rmsep(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.rmsep)
    }

    pub fn report(&self) -> Option<&RunReport> {
        self.outcome.as_ref().ok()
    }
}

fn run_cells<S: Series + Sync + ?Sized>(
    series: &S,
    cells: Vec<(ModelSpec, UpdatePolicy)>,
    eval_start: usize,
) -> Vec<SweepCell> {
    cells
        .into_par_iter()
        .map(|(spec, policy)| SweepCell {
            spec,
            policy,
            outcome: run_series_from(series, &spec, policy, eval_start).map_err(|e| e.to_string()),
        })
        .collect()
}

/// Runs every model template at every window size, model-major.
pub fn sweep_window_size<S: Series + Sync + ?Sized>(
    series: &S,
    models: &[ModelSpec],
    sizes: &[usize],
    policy: UpdatePolicy,
    eval_start: usize,
) -> Vec<SweepCell> {
    let cells = models
        .iter()
        .flat_map(|m| sizes.iter().map(move |&w| (m.with_window(w), policy)))
        .collect();
    run_cells(series, cells, eval_start)
}

/// Runs every model template at every delay, model-major.
pub fn sweep_delay<S: Series + Sync + ?Sized>(
    series: &S,
    models: &[ModelSpec],
    delays: &[usize],
    mode: UpdateMode,
    eval_start: usize,
) -> Vec<SweepCell> {
    let cells = models
        .iter()
        .flat_map(|m| {
            delays
                .iter()
                .map(move |&d| (*m, UpdatePolicy { mode, delay: d }))
        })
        .collect();
    run_cells(series, cells, eval_start)
}

/// Spearman rank correlation, average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
