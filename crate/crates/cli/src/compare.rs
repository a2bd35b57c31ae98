//! Tolerance check between two result tables.

use std::collections::BTreeMap;

use anyhow::{bail, Result};

use crate::table::{Key, Row};

/// Per-key outcome of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyDiff {
    pub label: String,
    /// Largest absolute difference over the total and per-node hit ratios.
    pub max_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub diffs: Vec<KeyDiff>,
    pub tolerance: f64,
}

impl Comparison {
    pub fn max_diff(&self) -> f64 {
        self.diffs.iter().map(|d| d.max_diff).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.diffs.iter().all(|d| d.max_diff <= self.tolerance)
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        for d in &self.diffs {
            let verdict = if d.max_diff <= self.tolerance { "ok" } else { "FAIL" };
            out.push_str(&format!("{verdict:4} {:<40} max |diff| = {:.6e}\n", d.label, d.max_diff));
        }
        out.push_str(&format!(
            "{} keys, max |diff| = {:.6e}, tolerance {:e}: {}\n",
            self.diffs.len(),
            self.max_diff(),
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        ));
        out
    }
}

/// Rows are matched on (policy, strategy, C). When a table holds several
/// engines for the same point, the engine becomes part of the key too, so
/// an analytic-only table can be checked against a simulation-only one.
fn index(rows: &[Row]) -> Result<BTreeMap<Key, &Row>> {
    let ambiguous = {
        let mut seen = std::collections::BTreeSet::new();
        rows.iter()
            .any(|r| !seen.insert((r.policy.clone(), r.strategy.clone(), r.capacity)))
    };
    let mut map = BTreeMap::new();
    for r in rows {
        let mut key = r.key();
        if !ambiguous {
            key.engine.clear();
        }
        if map.insert(key, r).is_some() {
            bail!("duplicate row for {}", label(r));
        }
    }
    Ok(map)
}

fn label(r: &Row) -> String {
    let mut s = r.policy.clone();
    if !r.strategy.is_empty() {
        s.push('/');
        s.push_str(&r.strategy);
    }
    s.push_str(&format!(" C={}", r.capacity));
    s
}

pub fn compare(a: &[Row], b: &[Row], tolerance: f64) -> Result<Comparison> {
    if !(tolerance >= 0.0) {
        bail!("tolerance must be >= 0, got {tolerance}");
    }
    let (ia, ib) = (index(a)?, index(b)?);
    let only_a: Vec<String> = ia.iter().filter(|(k, _)| !ib.contains_key(*k)).map(|(_, r)| label(r)).collect();
    let only_b: Vec<String> = ib.iter().filter(|(k, _)| !ia.contains_key(*k)).map(|(_, r)| label(r)).collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        bail!("row keys differ; only in the first file: {only_a:?}; only in the second: {only_b:?}");
    }
    let mut diffs = Vec::new();
    for (key, ra) in &ia {
        let rb = ib[key];
        let (na, nb) = (ra.node_hits()?, rb.node_hits()?);
        if na.len() != nb.len() {
            bail!("{}: {} vs {} per-node hit ratios", label(ra), na.len(), nb.len());
        }
        let max_diff = std::iter::once((ra.hit_total, rb.hit_total))
            .chain(na.into_iter().zip(nb))
            .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
            .fold(0.0, |m: f64, d| if d.is_nan() { f64::INFINITY } else { m.max(d) });
        let mut text = label(ra);
        if !key.engine.is_empty() {
            text.push_str(&format!(" [{}]", key.engine));
        }
        diffs.push(KeyDiff { label: text, max_diff });
    }
    Ok(Comparison { diffs, tolerance })
}
