//! Random forest with an inner PLS pseudo-sample.
//!
//! A forest grown on a window of labeled samples can only return values
//! inside the window's property range. Here a PLS model fitted on the most
//! recent rows of the window predicts the unknown sample, and that
//! prediction is added to the forest's training set as one more row paired
//! with the unknown's own sensor vector. The pseudo-row enters the bootstrap
//! like any other row, so trees that draw it can route the unknown to a leaf
//! holding the PLS estimate, which lets the ensemble leave the window range.
//!
//! The true property value of the unknown is never an input.

use crate::ensemble::{Forest, ForestConfig};
use crate::error::{ensure, Error, Result};
use crate::numeric::{Matrix, Vector};
use crate::pls;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RfPlsConfig {
    /// Labeled samples in the outer forest window.
    pub rf_window: usize,
    /// Most recent labeled samples used by the inner PLS model.
    pub inner_pls_window: usize,
    /// Copies of the pseudo-row added to the forest's training set; 0
    /// disables it and gives a plain moving-window forest.
    pub pseudo_rows: usize,
    pub forest: ForestConfig,
}

impl Default for RfPlsConfig {
    fn default() -> Self {
        Self::for_window(4)
    }
}

impl RfPlsConfig {
    /// Inner window one sample shorter than the forest window.
    pub fn for_window(rf_window: usize) -> Self {
        Self {
            rf_window,
            inner_pls_window: rf_window.saturating_sub(1),
            pseudo_rows: 1,
            forest: ForestConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.inner_pls_window >= 2 && self.inner_pls_window < self.rf_window,
            "inner PLS window {} must satisfy 2 <= inner < forest window {}",
            self.inner_pls_window,
            self.rf_window
        );
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfPlsPrediction {
    pub prediction: f64,
    /// Inner PLS estimate of the unknown; `None` when the inner window was
    /// degenerate and the forest ran without a pseudo-row.
    pub pls_inner: Option<f64>,
}

impl RfPlsPrediction {
    pub fn inner_fallback(&self) -> bool {
        self.pls_inner.is_none()
    }
}

/// Fits the hybrid on a window ordered oldest to newest and predicts the
/// property of `x_unknown`.
pub fn fit_predict_rfpls(
    window_x: &Matrix,
    window_y: &[f64],
    x_unknown: &[f64],
    cfg: &RfPlsConfig,
    seed: u64,
) -> Result<RfPlsPrediction> {
    cfg.validate()?;
    ensure!(
        window_x.rows() == cfg.rf_window && window_y.len() == cfg.rf_window,
        "window has {} sensor rows and {} property values, expected {}",
        window_x.rows(),
        window_y.len(),
        cfg.rf_window
    );
    ensure!(
        x_unknown.len() == window_x.cols(),
        "unknown sample has {} values, window has {} columns",
        x_unknown.len(),
        window_x.cols()
    );

    let start = cfg.rf_window - cfg.inner_pls_window;
    let inner_x = window_x.row_range(start, cfg.rf_window);
    let inner_y = &window_y[start..];
    let pls_inner = match pls::fit_pls_auto(&inner_x, inner_y) {
        Ok(m) => Some(m.predict(x_unknown)?),
        Err(Error::DegenerateWindow(_)) => None,
        Err(e) => return Err(e),
    };

    let prediction = match pls_inner {
        Some(p) if cfg.pseudo_rows > 0 => {
            let unknown = Matrix::new(1, x_unknown.len(), x_unknown.to_vec())?;
            let mut train_x = window_x.clone();
            let mut train_y = window_y.to_vec();
            for _ in 0..cfg.pseudo_rows {
                train_x = train_x.vstack(&unknown)?;
                train_y.push(p);
            }
            let train_y = Vector::new(train_y)?;
            Forest::fit(&train_x, &train_y, &cfg.forest, seed)?.predict(x_unknown)?
        }
        _ => Forest::fit(window_x, window_y, &cfg.forest, seed)?.predict(x_unknown)?,
    };
    Ok(RfPlsPrediction {
        prediction,
        pls_inner,
    })
}
