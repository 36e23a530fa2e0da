//! Turning neighbour lists into decisions: voting, weighted regression, a
//! fitted k-NN model, cross-validation and index timing.

mod eval;
mod voting;

pub use eval::{compare_indexes, evaluate_cv, mean_recall, EvalReport, FoldReport, IndexTiming, KnnConfig, KnnModel};
pub use voting::{classify, regress, Prediction, RegressionMode, RegressionWeighting, VotingScheme, MIN_DISTANCE};
