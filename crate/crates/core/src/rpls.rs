//! Recursive PLS with a forgetting factor.
//!
//! Each update refits PLS on the current window stacked under rows that
//! summarize the previous model:
//!
//! ```text
//!     X_aug = [ lambda * P_old'          ]      y_aug = [ lambda * diag(b_old) q_old ]
//!             [ X_new - mean(X_new)      ]              [ y_new - mean(y_new)        ]
//! ```
//!
//! The prior rows already live in a centered space and are not re-centered.
//! New rows are centered by their own means, which become the means of the
//! updated model. With `lambda = 0` the prior rows are zero and the update
//! reduces exactly to plain PLS on the new window.

use crate::error::{ensure, Result};
use crate::numeric::{Matrix, Vector};
use crate::pls::{self, PlsModel, PriorRows};

#[derive(Debug, Clone, PartialEq)]
pub struct RplsState {
    lambda: f64,
    p_old: Matrix,
    q_old: Vector,
    b_old: Vector,
    model: PlsModel,
}

impl RplsState {
    /// Plain PLS on the first window, with a leave-one-out component count.
    pub fn init(x: &Matrix, y: &[f64], lambda: f64) -> Result<Self> {
        ensure!(
            (0.0..=1.0).contains(&lambda),
            "forgetting factor must lie in [0, 1], got {lambda}"
        );
        let model = pls::fit_pls_auto(x, y)?;
        Ok(Self::from_model(lambda, model))
    }

    fn from_model(lambda: f64, model: PlsModel) -> Self {
        Self {
            lambda,
            p_old: model.x_loadings().clone(),
            q_old: model.y_loadings().clone(),
            b_old: model.inner_coefficients().clone(),
            model,
        }
    }

    /// Refits on `lambda`-weighted prior loadings stacked over the new data.
    pub fn update(&self, x_new: &Matrix, y_new: &[f64]) -> Result<Self> {
        let c = self.model.n_variables();
        ensure!(
            x_new.cols() == c,
            "new data has {} columns, model has {c}",
            x_new.cols()
        );
        ensure!(
            x_new.rows() == y_new.len() && !y_new.is_empty(),
            "{} new sensor rows but {} new property values",
            x_new.rows(),
            y_new.len()
        );

        let prior_x = self.p_old.transpose().scale(self.lambda);
        let prior_y: Vec<f64> = self
            .b_old
            .iter()
            .zip(self.q_old.iter())
            .map(|(b, q)| self.lambda * b * q)
            .collect();
        let prior = PriorRows {
            x: &prior_x,
            y: &prior_y,
        };

        let k = if x_new.rows() >= 3 {
            pls::loo_with_prior(Some(prior), x_new, y_new)?.chosen_latent
        } else {
            1
        };
        let model = pls::fit_with_prior(Some(prior), x_new, y_new, k)?;
        Ok(Self::from_model(self.lambda, model))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.model.predict(x)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn k(&self) -> usize {
        self.model.n_latent()
    }

    pub fn model(&self) -> &PlsModel {
        &self.model
    }

    pub fn prior_loadings(&self) -> &Matrix {
        &self.p_old
    }

    pub fn prior_y_loadings(&self) -> &Vector {
        &self.q_old
    }

    pub fn prior_inner(&self) -> &Vector {
        &self.b_old
    }
}

pub fn rpls_init(x: &Matrix, y: &[f64], lambda: f64) -> Result<RplsState> {
    RplsState::init(x, y, lambda)
}

pub fn rpls_update(state: &RplsState, x_new: &Matrix, y_new: &[f64]) -> Result<RplsState> {
    state.update(x_new, y_new)
}

pub fn rpls_predict(state: &RplsState, x: &[f64]) -> Result<f64> {
    state.predict(x)
}
