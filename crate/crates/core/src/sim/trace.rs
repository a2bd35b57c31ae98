//! Request traces: one `timestamp<TAB>object_id` record per line.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use super::Request;
use crate::error::{Error, Result};

/// A time-ordered request trace with object ids mapped to dense indices in
/// order of first appearance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    times: Vec<f64>,
    objects: Vec<u32>,
    ids: Vec<String>,
}

impl Trace {
    /// Parses a trace. Blank lines and lines starting with `#` are skipped;
    /// timestamps must be finite, non-negative and non-decreasing.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut trace = Trace::default();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut last = 0.0_f64;
        for (n, line) in reader.lines().enumerate() {
            let line_no = n + 1;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Trace {
                line: line_no,
                message,
            };
            let (ts, id) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `timestamp<TAB>object_id`".into()))?;
            let id = id.trim();
            if id.is_empty() || id.contains('\t') {
                return Err(err(format!("malformed object id {id:?}")));
            }
            let time: f64 = ts
                .trim()
                .parse()
                .map_err(|_| err(format!("invalid timestamp {ts:?}")))?;
            if !time.is_finite() || time < 0.0 {
                return Err(err(format!("timestamp must be finite and >= 0, got {time}")));
            }
            if time < last {
                return Err(err(format!("timestamp {time} precedes {last}")));
            }
            last = time;
            let next = trace.ids.len() as u32;
            let object = *index.entry(id.to_string()).or_insert_with(|| {
                trace.ids.push(id.to_string());
                next
            });
            trace.times.push(time);
            trace.objects.push(object);
        }
        Ok(trace)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::parse(std::io::BufReader::new(file))
    }

    /// Builds a trace from generated requests, naming objects by index.
    pub fn from_requests(requests: impl IntoIterator<Item = Request>) -> Result<Self> {
        let mut text = Vec::new();
        for r in requests {
            writeln!(text, "{}\t{}", r.time, r.object)?;
        }
        Self::parse(text.as_slice())
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for r in self.requests() {
            writeln!(out, "{}\t{}", r.time, self.ids[r.object])?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of distinct objects.
    pub fn object_count(&self) -> usize {
        self.ids.len()
    }

    /// Original id of dense object `m`.
    pub fn id(&self, m: usize) -> &str {
        &self.ids[m]
    }

    pub fn requests(&self) -> impl Iterator<Item = Request> + '_ {
        self.times.iter().zip(&self.objects).map(|(t, m)| Request {
            time: *t,
            object: *m as usize,
        })
    }

    /// The `count` most requested objects; ties go to the earlier-seen id.
    pub fn most_frequent(&self, count: usize) -> Vec<usize> {
        let mut freq = vec![0_u64; self.ids.len()];
        for m in &self.objects {
            freq[*m as usize] += 1;
        }
        let mut order: Vec<usize> = (0..freq.len()).collect();
        order.sort_by(|a, b| freq[*b].cmp(&freq[*a]).then(a.cmp(b)));
        order.truncate(count);
        order
    }
}
