//! The flat CSV result table shared by `run` and `compare`.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// One measurement: a (policy, strategy, capacity, engine) point.
///
/// List-valued columns (`per_node_hits`, `tc_values`) hold `;`-separated
/// numbers; k-LRU stage times within a node are joined with `/`. Columns
/// that do not apply are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub policy: String,
    pub strategy: String,
    #[serde(rename = "C")]
    pub capacity: usize,
    pub engine: String,
    pub hit_total: f64,
    pub hit_ci: Option<f64>,
    pub per_node_hits: String,
    pub tc_values: String,
    pub runtime_s: f64,
    pub seed: Option<u64>,
}

/// Identifies a row across files.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub policy: String,
    pub strategy: String,
    pub capacity: usize,
    pub engine: String,
}

impl Row {
    pub fn key(&self) -> Key {
        Key {
            policy: self.policy.clone(),
            strategy: self.strategy.clone(),
            capacity: self.capacity,
            engine: self.engine.clone(),
        }
    }

    pub fn node_hits(&self) -> Result<Vec<f64>> {
        parse_list(&self.per_node_hits)
    }
}

/// Deterministic output order: by policy, strategy, capacity, engine.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
}

pub fn join_list(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|v| v.parse::<f64>().with_context(|| format!("invalid number {v:?} in list {text:?}")))
        .collect()
}

pub fn write_rows<W: Write>(out: W, rows: &[Row]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut reader = csv::Reader::from_reader(input);
    let rows = reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("row {}", i + 1)))
        .collect::<Result<Vec<Row>>>()?;
    if rows.is_empty() {
        bail!("no rows");
    }
    Ok(rows)
}
