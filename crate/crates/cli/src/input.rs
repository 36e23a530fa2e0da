use std::fs;
use std::path::Path;

use lazynn::data::{Dataset, Feature, FeatureSchema};
use lazynn::xmetrics::{Signature, TimeSeries};

use crate::Failure;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::runtime(format!("cannot read {}: {e}", path.display())))
}

fn header_line(text: &str) -> &str {
    text.lines().next().unwrap_or_default()
}

/// Without a schema file every column is numeric; the label column is the one
/// named `class` or `label`, else the last.
pub fn infer_schema(header: &str) -> Result<FeatureSchema, Failure> {
    let cols: Vec<String> = header.split(',').map(|c| c.trim().to_owned()).collect();
    if cols.len() < 2 {
        return Err(Failure::runtime("the CSV needs at least one feature column and a label column"));
    }
    let label = cols
        .iter()
        .position(|c| c == "class")
        .or_else(|| cols.iter().position(|c| c == "label"))
        .unwrap_or(cols.len() - 1);
    let features = cols
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label)
        .map(|(_, c)| Feature::numeric(c.clone()))
        .collect();
    Ok(FeatureSchema::new(features, cols[label].clone())?)
}

fn schema_for(text: &str, schema: Option<&Path>) -> Result<FeatureSchema, Failure> {
    match schema {
        Some(p) => Ok(FeatureSchema::load(p)?),
        None => infer_schema(header_line(text)),
    }
}

pub fn load(data: &Path, schema: Option<&Path>) -> Result<Dataset, Failure> {
    let text = read_text(data)?;
    let schema = schema_for(&text, schema)?;
    Ok(Dataset::read_csv(text.as_bytes(), &schema)?)
}

/// Loads training and hold-out files as one table so class names and
/// categorical levels share ids, then splits them again.
pub fn load_pair(data: &Path, test: &Path, schema: Option<&Path>) -> Result<(Dataset, Dataset), Failure> {
    let train_text = read_text(data)?;
    let test_text = read_text(test)?;
    if header_line(&train_text).trim() != header_line(&test_text).trim() {
        return Err(Failure::runtime(format!(
            "{} and {} have different header rows",
            data.display(),
            test.display()
        )));
    }
    let schema = schema_for(&train_text, schema)?;
    let n_train = Dataset::read_csv(train_text.as_bytes(), &schema)?.len();
    let mut joined = train_text;
    if !joined.ends_with('\n') {
        joined.push('\n');
    }
    joined.extend(test_text.lines().skip(1).map(|l| format!("{l}\n")));
    let all = Dataset::read_csv(joined.as_bytes(), &schema)?;
    let train: Vec<usize> = (0..n_train).collect();
    let held: Vec<usize> = (n_train..all.len()).collect();
    if held.is_empty() {
        return Err(Failure::runtime(format!("{} has no rows", test.display())));
    }
    Ok((all.subset(&train), all.subset(&held)))
}

/// One value per line (single-column CSV, optional header) or whitespace
/// separated values.
pub fn read_series(path: &Path) -> Result<TimeSeries, Failure> {
    let text = read_text(path)?;
    let mut values = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        for token in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            match token.parse::<f64>() {
                Ok(x) => values.push(x),
                Err(_) if line_no == 0 && values.is_empty() => break,
                Err(_) => {
                    return Err(Failure::runtime(format!(
                        "{} line {}: cannot parse {token:?} as a number",
                        path.display(),
                        line_no + 1
                    )))
                }
            }
        }
    }
    Ok(TimeSeries::new(values)?)
}

/// JSON list of `[mode, weight]` pairs, e.g. `[[[0, 0], 0.4], [[1, 2], 0.6]]`.
pub fn read_signature(path: &Path) -> Result<Signature, Failure> {
    let text = read_text(path)?;
    let clusters: Vec<(Vec<f64>, f64)> = serde_json::from_str(&text)
        .map_err(|e| Failure::runtime(format!("{}: expected a JSON list of [mode, weight] pairs: {e}", path.display())))?;
    Ok(Signature::new(clusters)?)
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::runtime(format!("cannot read {}: {e}", path.display())))
}
