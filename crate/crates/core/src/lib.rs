//! Nearest-neighbour toolkit.
//!
//! The crate covers the whole k-NN pipeline: dataset ingestion and
//! normalisation ([`data`]), (dis)similarity measures ([`metrics`],
//! [`xmetrics`]), exact and approximate neighbour indexes ([`index`]),
//! voting, regression and cross-validation ([`learner`]), feature scoring,
//! wrapper search and PCA intrinsic dimension ([`dimreduce`]), and
//! training-set editing ([`instsel`]). [`synth`] generates the synthetic
//! fixtures used by the experiments.

pub mod data;
pub mod dimreduce;
pub mod error;
pub mod index;
pub mod instsel;
pub mod learner;
pub mod metrics;
pub mod synth;
pub mod xmetrics;

pub use error::{Error, Result};
