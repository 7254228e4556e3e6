//! Synthetic process data.
//!
//! Two regimes:
//!
//! * monotonic: the property follows a logistic growth curve and never
//!   decreases, like a product concentration in a fed-batch fermentation.
//!   Sensors are smooth nonlinear functions of the growth state plus noise;
//!   the property itself is noise free.
//! * drifting: the property mixes slow sinusoidal latent factors whose
//!   weights rotate over `drift_period` samples, so a linear model fitted on
//!   a window goes stale as the window gets longer. Sensors mix the same
//!   factors through a fixed random matrix.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{ensure, Result};
use crate::numeric::{Matrix, RngState, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Monotonic,
    Drifting,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Monotonic => "monotonic",
            Regime::Drifting => "drifting",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "monotonic" => Some(Regime::Monotonic),
            "drifting" => Some(Regime::Drifting),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub regime: Regime,
    pub n_samples: usize,
    pub n_variables: usize,
    /// Standard deviation of the sensor noise.
    pub noise_sd: f64,
    pub seed: u64,
    /// Samples per full turn of the drifting coefficient structure.
    pub drift_period: usize,
}

impl SimConfig {
    /// 318 samples of 15 sensors.
    pub fn monotonic(seed: u64) -> Self {
        Self {
            regime: Regime::Monotonic,
            n_samples: 318,
            n_variables: 15,
            noise_sd: 0.002,
            seed,
            drift_period: 0,
        }
    }

    /// 2394 samples of 7 sensors.
    pub fn drifting(seed: u64) -> Self {
        Self {
            regime: Regime::Drifting,
            n_samples: 2394,
            n_variables: 7,
            noise_sd: 0.05,
            seed,
            drift_period: 400,
        }
    }

    pub fn for_regime(regime: Regime, seed: u64) -> Self {
        match regime {
            Regime::Monotonic => Self::monotonic(seed),
            Regime::Drifting => Self::drifting(seed),
        }
    }

    pub fn with_samples(mut self, n_samples: usize) -> Self {
        self.n_samples = n_samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.n_samples >= 50,
            "at least 50 samples are required, got {}",
            self.n_samples
        );
        ensure!(
            self.n_variables >= 3,
            "at least 3 sensors are required, got {}",
            self.n_variables
        );
        ensure!(
            self.noise_sd.is_finite() && self.noise_sd >= 0.0,
            "noise standard deviation must be finite and non-negative, got {}",
            self.noise_sd
        );
        if self.regime == Regime::Drifting {
            ensure!(
                self.drift_period >= 1,
                "drift period must be at least one sample"
            );
        }
        Ok(())
    }
}

pub fn generate(cfg: &SimConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = RngState::new(cfg.seed);
    let (x, y) = match cfg.regime {
        Regime::Monotonic => monotonic(cfg, &mut rng),
        Regime::Drifting => drifting(cfg, &mut rng),
    };
    let name = format!("sim-{}-{}", cfg.regime.name(), cfg.seed);
    Dataset::unnamed(
        &name,
        Matrix::new(cfg.n_samples, cfg.n_variables, x)?,
        Vector::new(y)?,
    )
}

fn monotonic(cfg: &SimConfig, rng: &mut RngState) -> (Vec<f64>, Vec<f64>) {
    let (n, c) = (cfg.n_samples, cfg.n_variables);
    // per-sensor shape: gain, curvature, offset, phase of a slow oscillation
    let shapes: Vec<[f64; 4]> = (0..c)
        .map(|_| {
            [
                0.5 + rng.uniform(),
                rng.uniform() - 0.5,
                rng.standard_normal(),
                TAU * rng.uniform(),
            ]
        })
        .collect();

    let mut x = Vec::with_capacity(n * c);
    let mut y = Vec::with_capacity(n);
    for t in 0..n {
        // logistic state from 0.0025 to 0.9975 over the run
        let z = -6.0 + 12.0 * t as f64 / (n - 1) as f64;
        let s = 1.0 / (1.0 + (-z).exp());
        let rate = s * (1.0 - s);
        y.push(s);
        for &[gain, curve, offset, phase] in &shapes {
            let clean = offset
                + gain * s
                + curve * s * s
                + 0.3 * gain * rate
                + 0.05 * (TAU * s + phase).sin();
            x.push(clean + cfg.noise_sd * rng.standard_normal());
        }
    }
    (x, y)
}

fn drifting(cfg: &SimConfig, rng: &mut RngState) -> (Vec<f64>, Vec<f64>) {
    const FACTORS: usize = 3;
    const PERIODS: [f64; FACTORS] = [97.0, 173.0, 311.0];
    let (n, c) = (cfg.n_samples, cfg.n_variables);
    let mixing: Vec<f64> = (0..c * FACTORS).map(|_| rng.standard_normal()).collect();
    let phases: Vec<f64> = (0..FACTORS).map(|_| TAU * rng.uniform()).collect();

    let mut x = Vec::with_capacity(n * c);
    let mut y = Vec::with_capacity(n);
    for t in 0..n {
        let tf = t as f64;
        let f: Vec<f64> = (0..FACTORS)
            .map(|k| (TAU * tf / PERIODS[k] + phases[k]).sin())
            .collect();
        // the property weights turn through a full circle every drift period
        let angle = TAU * tf / cfg.drift_period as f64;
        let weights = [2.0 * angle.cos(), 2.0 * angle.sin(), 1.0];
        y.push(weights.iter().zip(&f).map(|(w, v)| w * v).sum());
        for j in 0..c {
            let row = &mixing[j * FACTORS..(j + 1) * FACTORS];
            let clean: f64 = row.iter().zip(&f).map(|(m, v)| m * v).sum();
            x.push(clean + cfg.noise_sd * rng.standard_normal());
        }
    }
    (x, y)
}
