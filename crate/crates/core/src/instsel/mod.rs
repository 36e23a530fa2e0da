//! Training-set editing: a leave-one-out competence model, the incremental
//! condensers CNN and CRR, and the decremental noise filters ENN and RENN.

mod competence;
mod editing;

pub use competence::CompetenceModel;
pub use editing::{cnn, crr, crr_ordered, enn, is_consistent, renn, CoverageOrder, EditedSet, Removal};
