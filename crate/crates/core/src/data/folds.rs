use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};

/// Stratified assignment of samples to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    k_folds: usize,
    assignments: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    /// Shuffles each class with a seeded RNG and deals its members round-robin
    /// across folds. The dealing offset carries over between classes so fold
    /// sizes stay balanced overall.
    pub fn stratified(data: &Dataset, k_folds: usize, seed: u64) -> Result<FoldPlan> {
        if k_folds < 2 {
            return Err(Error::param("k_folds", format!("{k_folds} < 2")));
        }
        let counts = data.class_counts();
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 && count < k_folds {
                return Err(Error::ClassTooRare {
                    class: data.classes()[c].clone(),
                    count,
                    folds: k_folds,
                });
            }
        }
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); counts.len()];
        for (i, &l) in data.labels().iter().enumerate() {
            by_class[l].push(i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut assignments = vec![0; data.len()];
        let mut offset = 0;
        for members in &mut by_class {
            members.shuffle(&mut rng);
            for (j, &i) in members.iter().enumerate() {
                assignments[i] = (offset + j) % k_folds;
            }
            offset += members.len();
        }
        Ok(FoldPlan {
            k_folds,
            assignments,
            seed,
        })
    }

    pub fn k_folds(&self) -> usize {
        self.k_folds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignments[i] != fold).collect()
    }
}
