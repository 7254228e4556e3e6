//! Single-response partial least squares on small calibration windows.
//!
//! Components are extracted by NIPALS on mean-centered data. Score vectors
//! `t` are scaled to unit length (weights and loadings are not), which is
//! the convention the recursive variant in [`crate::rpls`] relies on: with
//! orthonormal scores, `X'X ~ P P'` and `X'y ~ P diag(b) q`, so a fitted
//! model can stand in for the data that produced it.
//!
//! Centering only, no scaling. Constant columns stay in the model with zero
//! weight, so coefficient vectors always have one entry per sensor.

use crate::error::{ensure, Error, Result};
use crate::numeric::{dot, mean, norm, Matrix, Vector};

const MAX_ITER: usize = 500;
const SCORE_TOL: f64 = 1e-12;
/// Residual X below this fraction of the centered X norm counts as exhausted.
const EXHAUSTED: f64 = 1e-9;
/// Relative RMSEP margin a larger component count must win by.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PlsModel {
    n_latent: usize,
    weights: Matrix,
    x_loadings: Matrix,
    y_loadings: Vector,
    inner: Vector,
    rotations: Matrix,
    coefficients: Vector,
    x_means: Vector,
    y_mean: f64,
}

impl PlsModel {
    pub fn n_latent(&self) -> usize {
        self.n_latent
    }

    /// `W`, c x k. Each column is unit length in its deflated space.
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// `P`, c x k.
    pub fn x_loadings(&self) -> &Matrix {
        &self.x_loadings
    }

    /// `q`, one unit-magnitude y loading per component.
    pub fn y_loadings(&self) -> &Vector {
        &self.y_loadings
    }

    /// Inner coefficients `b_a = u_a' t_a`.
    pub fn inner_coefficients(&self) -> &Vector {
        &self.inner
    }

    /// `R` with `T = (X - means) R`; columns of degenerate components are zero.
    pub fn rotations(&self) -> &Matrix {
        &self.rotations
    }

    /// Unit-length scores of the rows of `x`.
    pub fn scores(&self, x: &Matrix) -> Result<Matrix> {
        let xc = crate::numeric::center_columns(x, &self.x_means)?;
        crate::numeric::mat_mul(&xc, &self.rotations)
    }

    pub fn coefficients(&self) -> &Vector {
        &self.coefficients
    }

    pub fn x_means(&self) -> &Vector {
        &self.x_means
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn n_variables(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        ensure!(
            x.len() == self.coefficients.len(),
            "sample has {} values, model expects {}",
            x.len(),
            self.coefficients.len()
        );
        Ok(self.predict_unchecked(x))
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.y_mean
            + x.iter()
                .zip(self.x_means.iter())
                .zip(self.coefficients.iter())
                .map(|((xi, mi), bi)| (xi - mi) * bi)
                .sum::<f64>()
    }

    /// Predictions using the first 1, 2, ..., n_latent components.
    fn predict_each_count(&self, x: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = x
            .iter()
            .zip(self.x_means.iter())
            .map(|(xi, mi)| xi - mi)
            .collect();
        let mut acc = self.y_mean;
        (0..self.n_latent)
            .map(|a| {
                let score: f64 = centered
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * self.rotations.get(j, a))
                    .sum();
                acc += score * self.inner[a] * self.y_loadings[a];
                acc
            })
            .collect()
    }
}

/// Model-space rows carried into a fit in addition to the observed samples.
///
/// The rows are already in the centered space and are stacked above the
/// centered observations without further centering.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PriorRows<'a> {
    pub x: &'a Matrix,
    pub y: &'a [f64],
}

pub fn fit_pls(x: &Matrix, y: &[f64], n_latent: usize) -> Result<PlsModel> {
    ensure!(
        x.rows() == y.len(),
        "{} sensor rows but {} property values",
        x.rows(),
        y.len()
    );
    ensure!(
        x.rows() >= 2,
        "PLS needs at least 2 samples, got {}",
        x.rows()
    );
    let max = (x.rows() - 1).min(x.cols());
    ensure!(
        (1..=max).contains(&n_latent),
        "latent variable count {n_latent} outside 1..={max} for a {}x{} window",
        x.rows(),
        x.cols()
    );
    fit_with_prior(None, x, y, n_latent)
}

pub fn predict_pls(model: &PlsModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Centers the observations by their own means, stacks them under the
/// prior rows and extracts `n_latent` components.
pub(crate) fn fit_with_prior(
    prior: Option<PriorRows<'_>>,
    x: &Matrix,
    y: &[f64],
    n_latent: usize,
) -> Result<PlsModel> {
    let c = x.cols();
    let x_means = crate::numeric::column_mean(x)?.into_inner();
    let y_mean = mean(y);
    let xc = crate::numeric::center_columns(x, &x_means)?;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    let (xa, ya) = match prior {
        Some(p) => {
            let mut ys = p.y.to_vec();
            ys.extend_from_slice(&yc);
            (p.x.vstack(&xc)?, ys)
        }
        None => (xc, yc),
    };
    if xa.frobenius_norm() == 0.0 {
        return Err(Error::DegenerateWindow(
            "every sensor column is constant across the window".into(),
        ));
    }
    ensure!(
        n_latent >= 1 && n_latent <= c,
        "latent variable count {n_latent} outside 1..={c}"
    );
    let fit = nipals(xa, ya, n_latent);
    Ok(PlsModel {
        n_latent,
        weights: fit.weights,
        x_loadings: fit.loadings,
        y_loadings: Vector::from_raw(fit.q),
        inner: Vector::from_raw(fit.b),
        rotations: fit.rotations,
        coefficients: Vector::from_raw(fit.coefficients),
        x_means: Vector::from_raw(x_means),
        y_mean,
    })
}

struct Nipals {
    weights: Matrix,
    loadings: Matrix,
    q: Vec<f64>,
    b: Vec<f64>,
    rotations: Matrix,
    coefficients: Vec<f64>,
}

fn nipals(mut xa: Matrix, mut ya: Vec<f64>, k: usize) -> Nipals {
    let (n, c) = (xa.rows(), xa.cols());
    let x0 = xa.frobenius_norm();
    let y0 = norm(&ya);
    let mut weights = Matrix::zeros(c, k);
    let mut loadings = Matrix::zeros(c, k);
    let mut q = vec![1.0; k];
    let mut b = vec![0.0; k];
    // rotations: t_a = X0 r_a
    let mut rot: Vec<Vec<f64>> = Vec::with_capacity(k);

    for a in 0..k {
        if xa.frobenius_norm() <= EXHAUSTED * x0 {
            rot.push(vec![0.0; c]);
            continue;
        }
        let cov = xa.tmul_vec(&ya).expect("shape");
        let informative = norm(&cov) > 1e-12 * x0 * y0;

        let mut u = if informative {
            ya.clone()
        } else {
            // no covariance left: fall back to the dominant X direction
            let j = (0..c)
                .max_by(|&i, &j| {
                    let ni = xa.column(i).iter().map(|v| v * v).sum::<f64>();
                    let nj = xa.column(j).iter().map(|v| v * v).sum::<f64>();
                    ni.total_cmp(&nj)
                })
                .unwrap_or(0);
            xa.column(j)
        };
        let mut w = vec![0.0; c];
        let mut t = vec![0.0; n];
        let mut scale = 0.0;
        let mut q_a = 1.0;
        let mut t_prev: Option<Vec<f64>> = None;
        for _ in 0..MAX_ITER {
            w = xa.tmul_vec(&u).expect("shape");
            let wn = norm(&w);
            if wn == 0.0 {
                break;
            }
            w.iter_mut().for_each(|v| *v /= wn);
            t = xa.mul_vec(&w).expect("shape");
            scale = norm(&t);
            if scale == 0.0 {
                break;
            }
            t.iter_mut().for_each(|v| *v /= scale);
            if informative {
                let qy = dot(&ya, &t);
                q_a = if qy < 0.0 { -1.0 } else { 1.0 };
                u = ya.iter().map(|v| v * q_a).collect();
            } else {
                u = t.clone();
            }
            let converged = t_prev.as_ref().is_some_and(|p| {
                p.iter()
                    .zip(&t)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    < SCORE_TOL
            });
            if converged {
                break;
            }
            t_prev = Some(t.clone());
        }
        if scale == 0.0 {
            rot.push(vec![0.0; c]);
            continue;
        }

        let p = xa.tmul_vec(&t).expect("shape");
        let b_a = if informative {
            dot(&u, &t)
        } else {
            dot(&ya, &t)
        };

        // deflate
        for i in 0..n {
            for (j, pj) in p.iter().enumerate() {
                let v = xa.get(i, j) - t[i] * pj;
                xa.set(i, j, v);
            }
            ya[i] -= b_a * q_a * t[i];
        }

        let mut r = w.clone();
        for (j, rj) in rot.iter().enumerate() {
            let pw = dot(&loadings.column(j), &w);
            for (ri, rji) in r.iter_mut().zip(rj) {
                *ri -= rji * pw;
            }
        }
        r.iter_mut().for_each(|v| *v /= scale);
        rot.push(r);

        for j in 0..c {
            weights.set(j, a, w[j]);
            loadings.set(j, a, p[j]);
        }
        q[a] = q_a;
        b[a] = b_a;
    }

    let mut coefficients = vec![0.0; c];
    let mut rotations = Matrix::zeros(c, k);
    for (a, r) in rot.iter().enumerate() {
        let f = b[a] * q[a];
        for (j, (ci, ri)) in coefficients.iter_mut().zip(r).enumerate() {
            *ci += ri * f;
            rotations.set(j, a, *ri);
        }
    }
    Nipals {
        weights,
        loadings,
        q,
        b,
        rotations,
        coefficients,
    }
}

/// Leave-one-out choice of the component count.
#[derive(Debug, Clone, PartialEq)]
pub struct CvChoice {
    pub chosen_latent: usize,
    pub per_k_rmsep: Vec<(usize, f64)>,
}

/// Cross-validates k in `1..=min(rows - 2, cols)` by leave-one-out and picks
/// the smallest k whose RMSEP is not beaten.
pub fn select_latent_loo(x: &Matrix, y: &[f64]) -> Result<CvChoice> {
    ensure!(
        x.rows() == y.len(),
        "{} sensor rows but {} property values",
        x.rows(),
        y.len()
    );
    ensure!(
        x.rows() >= 3,
        "leave-one-out needs at least 3 samples, got {}",
        x.rows()
    );
    loo_with_prior(None, x, y)
}

/// Component count for a window of any size: leave-one-out when the window
/// has at least 3 rows, otherwise the single feasible component.
pub fn choose_latent(x: &Matrix, y: &[f64]) -> Result<usize> {
    if x.rows() < 3 {
        ensure!(x.rows() == 2, "PLS needs at least 2 samples");
        return Ok(1);
    }
    Ok(select_latent_loo(x, y)?.chosen_latent)
}

/// Leave-one-out over the observed rows only; prior rows stay in every fold.
pub(crate) fn loo_with_prior(
    prior: Option<PriorRows<'_>>,
    x: &Matrix,
    y: &[f64],
) -> Result<CvChoice> {
    let n = x.rows();
    ensure!(n >= 3, "leave-one-out needs at least 3 observed samples");
    let extra = prior.map_or(0, |p| p.x.rows());
    let k_max = (extra + n - 2).min(x.cols());
    ensure!(k_max >= 1, "no feasible component count");

    let folds: Vec<(Matrix, Vec<f64>)> = (0..n)
        .map(|i| {
            let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let fy = keep.iter().map(|&j| y[j]).collect();
            (x.select_rows(&keep), fy)
        })
        .collect();

    // components are nested, so one fit per fold serves every count
    let mut sse = vec![0.0; k_max];
    for (i, (fx, fy)) in folds.iter().enumerate() {
        let preds = match fit_with_prior(prior, fx, fy, k_max) {
            Ok(m) => m.predict_each_count(x.row(i)),
            Err(Error::DegenerateWindow(_)) => vec![mean(fy); k_max],
            Err(e) => return Err(e),
        };
        for (s, p) in sse.iter_mut().zip(preds) {
            *s += (p - y[i]).powi(2);
        }
    }
    let per_k: Vec<(usize, f64)> = sse
        .iter()
        .enumerate()
        .map(|(a, s)| (a + 1, (s / n as f64).sqrt()))
        .collect();

    let mut best = per_k[0];
    for &(k, r) in &per_k[1..] {
        if r < best.1 * (1.0 - TIE_TOL) {
            best = (k, r);
        }
    }
    Ok(CvChoice {
        chosen_latent: best.0,
        per_k_rmsep: per_k,
    })
}

/// Fits with the LOO-selected component count; windows of 2 rows use one.
pub fn fit_pls_auto(x: &Matrix, y: &[f64]) -> Result<PlsModel> {
    let k = choose_latent(x, y)?;
    fit_pls(x, y, k)
}
