use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    #[default]
    Classification,
    Regression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
}

impl Feature {
    pub fn numeric(name: impl Into<String>) -> Self {
        Feature {
            name: name.into(),
            kind: FeatureKind::Numeric,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Feature {
            name: name.into(),
            kind: FeatureKind::Categorical,
        }
    }
}

/// On-disk sidecar manifest describing a CSV file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SchemaManifest {
    features: Vec<Feature>,
    label: String,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    task: Task,
}

/// Ordered feature list, label column and per-feature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    features: Vec<Feature>,
    label_column: String,
    weights: Vec<f64>,
    task: Task,
}

impl FeatureSchema {
    pub fn new(features: Vec<Feature>, label_column: impl Into<String>) -> Result<Self> {
        let weights = vec![1.0; features.len()];
        Self::with_weights(features, label_column, weights)
    }

    pub fn with_weights(
        features: Vec<Feature>,
        label_column: impl Into<String>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let label_column = label_column.into();
        if features.is_empty() {
            return Err(Error::Schema("at least one feature is required".into()));
        }
        let mut seen = HashSet::new();
        for f in &features {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature name {:?}", f.name)));
            }
        }
        if seen.contains(label_column.as_str()) {
            return Err(Error::Schema(format!(
                "label column {label_column:?} is also listed as a feature"
            )));
        }
        if weights.len() != features.len() {
            return Err(Error::Schema(format!(
                "{} weights for {} features",
                weights.len(),
                features.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Schema(format!("feature weight {w} must be finite and >= 0")));
        }
        Ok(FeatureSchema {
            features,
            label_column,
            weights,
            task: Task::Classification,
        })
    }

    /// All-numeric schema with generated names `x0..x{dim-1}` and label `class`.
    pub fn numeric(dim: usize) -> Result<Self> {
        Self::new((0..dim).map(|i| Feature::numeric(format!("x{i}"))).collect(), "class")
    }

    pub fn with_task(mut self, task: Task) -> Self {
        self.task = task;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let manifest: SchemaManifest = serde_json::from_str(text)?;
        let weights = manifest
            .weights
            .unwrap_or_else(|| vec![1.0; manifest.features.len()]);
        Ok(Self::with_weights(manifest.features, manifest.label, weights)?.with_task(manifest.task))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        let manifest = SchemaManifest {
            features: self.features.clone(),
            label: self.label_column.clone(),
            weights: Some(self.weights.clone()),
            task: self.task,
        };
        Ok(serde_json::to_string_pretty(&manifest)?)
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn label_column(&self) -> &str {
        &self.label_column
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.features.iter().map(|f| f.kind).collect()
    }

    pub fn is_all_numeric(&self) -> bool {
        self.features.iter().all(|f| f.kind == FeatureKind::Numeric)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Sub-schema keeping the features where `mask` is true.
    pub fn select(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.features.len() {
            return Err(Error::DimensionMismatch {
                expected: self.features.len(),
                found: mask.len(),
            });
        }
        let keep = |i: &usize| mask[*i];
        let features = (0..mask.len()).filter(keep).map(|i| self.features[i].clone()).collect();
        let weights = (0..mask.len()).filter(keep).map(|i| self.weights[i]).collect();
        Ok(Self::with_weights(features, self.label_column.clone(), weights)?.with_task(self.task))
    }
}
