use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::params::Plan;
use crate::Failure;

/// Everything that determines a run, echoed into its report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub version: &'static str,
    pub parameters: Plan,
}

/// One row per configuration or item. The CSV holds the same rows, one
/// column per key.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub description: &'static str,
    pub manifest: RunManifest,
    /// Row and summary keys holding wall-clock measurements; everything else
    /// repeats exactly for the same manifest.
    pub timing_fields: Vec<&'static str>,
    pub summary: Value,
    pub rows: Vec<Map<String, Value>>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is plain data");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, Failure> {
        let columns: BTreeSet<&String> = self.rows.iter().flat_map(|r| r.keys()).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Failure::runtime(format!("csv: {e}"));
        w.write_record(&columns).map_err(io)?;
        for row in &self.rows {
            let rec: Vec<String> = columns
                .iter()
                .map(|c| match row.get(*c) {
                    None | Some(Value::Null) => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(other) => other.to_string(),
                })
                .collect();
            w.write_record(&rec).map_err(io)?;
        }
        w.into_inner().map_err(|e| Failure::runtime(format!("csv: {e}")))
    }

    /// Writes `report.json` and `report.csv` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), Failure> {
        let json = dir.join("report.json");
        let csv = dir.join("report.csv");
        write_atomic(&json, self.to_json().as_bytes())?;
        write_atomic(&csv, &self.to_csv()?)?;
        Ok((json, csv))
    }
}

/// Temp file in the target directory, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::runtime(format!("cannot create {}: {e}", dir.display())))?;
    let fail = |e: std::io::Error| Failure::runtime(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// Builds a row from `(key, value)` pairs.
#[macro_export]
macro_rules! row {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = serde_json::Map::new();
        $( m.insert($k.to_string(), serde_json::json!($v)); )*
        m
    }};
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{DimParams, Plan};

    fn report() -> Report {
        Report {
            description: "test",
            manifest: RunManifest {
                command: "dim",
                version: "0",
                parameters: Plan::Dim(DimParams {
                    data: "d.csv".into(),
                    schema: None,
                    epsilon: 0.05,
                }),
            },
            timing_fields: vec![],
            summary: serde_json::json!({}),
            rows: vec![row!("b" => 1, "a" => "x,y"), row!("a" => "z", "c" => 2.5)],
        }
    }

    #[test]
    fn csv_columns_are_the_union_of_keys() {
        let csv = String::from_utf8(report().to_csv().unwrap()).unwrap();
        assert_eq!(csv, "a,b,c\n\"x,y\",1,\nz,,2.5\n");
    }

    #[test]
    fn writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let (j, c) = report().write(&dir.path().join("nested")).unwrap();
        let v: Value = serde_json::from_str(&std::fs::read_to_string(j).unwrap()).unwrap();
        assert_eq!(v["manifest"]["parameters"]["epsilon"], 0.05);
        assert!(c.exists());
    }
}
