//! Dataset model: schema, CSV ingestion, min–max normalisation and
//! stratified fold planning.

mod dataset;
mod folds;
mod matrix;
mod normalize;
mod schema;

pub use dataset::Dataset;
pub use folds::FoldPlan;
pub use matrix::Matrix;
pub use normalize::Normalizer;
pub use schema::{Feature, FeatureKind, FeatureSchema, Task};
