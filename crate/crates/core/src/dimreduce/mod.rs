//! Dimension reduction: per-feature filter scores, wrapper subset search,
//! and PCA-based intrinsic dimension.

mod pca;
mod scoring;
mod wrapper;

pub use pca::{intrinsic_dimension, pca_spectrum, PrincipalSpectrum};
pub use scoring::{
    best_threshold, contingency, entropy, information_gain, odds_ratio, rank_features, score_feature,
    zero_coverage, Contingency, Criterion, FeatureScore,
};
pub use wrapper::{cv_accuracy, wrapper_cv, wrapper_search, Direction, Evaluation, SubsetSearch, MIN_IMPROVEMENT};
