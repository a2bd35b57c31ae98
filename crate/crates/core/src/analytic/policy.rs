use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// A single-cache replacement algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Static placement of the `C` most popular objects.
    Lfu,
    Lru,
    /// LRU that inserts a missed object only with probability `q`.
    QLru { q: f64 },
    /// Evicts in insertion order; hits do not refresh an object.
    Fifo,
    /// Evicts a uniformly chosen resident object.
    Random,
    /// `k - 1` LRU meta-caches of object identifiers in front of an LRU
    /// cache; an object enters stage `i` only if stage `i - 1` held it when
    /// the request arrived.
    KLru { k: usize },
}

impl Policy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Policy::QLru { q } if !(q > 0.0 && q <= 1.0) => {
                Err(invalid(format!("q-LRU insertion probability must be in (0, 1], got {q}")))
            }
            Policy::KLru { k } if k == 0 => Err(invalid("k-LRU needs at least one stage")),
            _ => Ok(()),
        }
    }

    /// Number of characteristic times the policy needs.
    pub fn stages(&self) -> usize {
        match *self {
            Policy::Lfu => 0,
            Policy::KLru { k } => k,
            _ => 1,
        }
    }

    pub(crate) fn time_kind(&self) -> TimeKind {
        match self {
            Policy::Random => TimeKind::MeanOfExponential,
            _ => TimeKind::Deterministic,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Lfu => f.write_str("lfu"),
            Policy::Lru => f.write_str("lru"),
            Policy::QLru { q } => write!(f, "qlru({q})"),
            Policy::Fifo => f.write_str("fifo"),
            Policy::Random => f.write_str("random"),
            Policy::KLru { k } => write!(f, "{k}lru"),
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    /// Accepts `lru`, `fifo`, `random`, `lfu`, `qlru(0.1)`, `qlru:0.1`,
    /// `q-lru(0.1)`, `2lru`, `2-lru`, `klru(3)` and `klru:3`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase().replace(['-', '_', ' '], "");
        let arg = |prefix: &str| -> Option<&str> {
            let rest = lower.strip_prefix(prefix)?;
            rest.strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .or_else(|| rest.strip_prefix(':'))
        };
        let policy = match lower.as_str() {
            "lfu" => Policy::Lfu,
            "lru" => Policy::Lru,
            "fifo" => Policy::Fifo,
            "random" | "rand" => Policy::Random,
            _ => {
                if let Some(q) = arg("qlru") {
                    let q = q.parse().map_err(|_| invalid(format!("bad q in policy {s:?}")))?;
                    Policy::QLru { q }
                } else if let Some(k) = arg("klru") {
                    let k = k.parse().map_err(|_| invalid(format!("bad k in policy {s:?}")))?;
                    Policy::KLru { k }
                } else if let Some(k) = lower.strip_suffix("lru").filter(|k| !k.is_empty()) {
                    let k = k.parse().map_err(|_| invalid(format!("unknown policy {s:?}")))?;
                    Policy::KLru { k }
                } else {
                    return Err(invalid(format!("unknown policy {s:?}")));
                }
            }
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// A policy together with the cache capacity (in objects).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySpec {
    pub policy: Policy,
    pub capacity: usize,
}

impl PolicySpec {
    pub fn new(policy: Policy, capacity: usize) -> Result<Self> {
        policy.validate()?;
        if capacity == 0 {
            return Err(invalid("cache capacity must be at least 1"));
        }
        Ok(Self { policy, capacity })
    }
}

/// How a stored characteristic time is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeKind {
    /// A constant eviction time (LRU, q-LRU, FIFO, k-LRU stages).
    Deterministic,
    /// The mean of an exponentially distributed sojourn time (RANDOM).
    MeanOfExponential,
}

/// Eviction times of each stage of a cache, first stage first.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicTimes {
    pub stages: Vec<f64>,
    pub kind: TimeKind,
}

impl CharacteristicTimes {
    pub fn single(t: f64, kind: TimeKind) -> Self {
        Self {
            stages: vec![t],
            kind,
        }
    }

    pub fn deterministic(stages: Vec<f64>) -> Self {
        Self {
            stages,
            kind: TimeKind::Deterministic,
        }
    }

    /// Time of the last (physical) stage.
    pub fn last(&self) -> Option<f64> {
        self.stages.last().copied()
    }
}
