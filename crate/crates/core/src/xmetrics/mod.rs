//! Distances over structured objects: dynamic time warping for sequences and
//! the earth mover's distance for weighted signatures.

mod dtw;
mod emd;

pub use dtw::{dtw, dtw_distance, Dtw, TimeSeries, WarpPath};
pub use emd::{emd, emd_euclidean, euclidean, transport, FlowMatrix, Signature};
