//! Soft sensors calibrated on small moving windows of process data.
//!
//! Five models predict a lab-measured property from online sensor rows: the
//! window mean, PLS, recursive PLS, a random forest, and a forest whose
//! training set includes a PLS estimate of the unknown sample. [`harness`]
//! walks a series under continuous or delayed window updates and scores
//! each model by RMSEP.
//!
//! ```
//! use softsense::harness::{run_series, ModelKind, ModelSpec, UpdatePolicy};
//! use softsense::simulator::{generate, SimConfig};
//!
//! let data = generate(&SimConfig::drifting(0).with_samples(200)).unwrap();
//! let pls = run_series(&data, &ModelSpec::new(ModelKind::Pls, 4), UpdatePolicy::one_step()).unwrap();
//! let mmw = run_series(&data, &ModelSpec::new(ModelKind::Mmw, 4), UpdatePolicy::one_step()).unwrap();
//! assert!(pls.rmsep < mmw.rmsep);
//! ```

pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod pls;
pub mod report;
pub mod rfpls;
pub mod rpls;
pub mod simulator;

pub use dataset::{Dataset, Preprocessing, SplitSpec, YColumn};
pub use error::{Error, Result};
pub use numeric::{Matrix, RngState, Vector};
