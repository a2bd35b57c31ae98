//! Request-stream generation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, WeightedAliasIndex};

use crate::error::{invalid, Result};
use crate::traffic::{Popularity, RequestProcess, Traffic};

/// One request: an arrival time and the requested object (by rank).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub time: f64,
    pub object: usize,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    time: f64,
    object: u32,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // Reversed so that `BinaryHeap` pops the earliest arrival.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.object.cmp(&self.object))
    }
}

#[derive(Debug, Clone)]
enum Source {
    /// Superposition of Poisson streams: exponential gaps at the total rate,
    /// objects drawn independently from the popularity.
    Poisson {
        alias: WeightedAliasIndex<f64>,
        total_rate: f64,
    },
    /// Independent renewal streams merged through a priority queue.
    Renewal {
        pending: BinaryHeap<Pending>,
        processes: Vec<RequestProcess>,
    },
}

/// An endless, time-ordered stream of requests drawn from a traffic model.
///
/// Renewal streams start in equilibrium: each object's first request comes
/// after a stationary residual time, so no warm-up is needed for the
/// arrival process itself.
#[derive(Debug, Clone)]
pub struct ArrivalStream {
    source: Source,
    rng: ChaCha8Rng,
    now: f64,
}

impl ArrivalStream {
    pub fn new(traffic: &Traffic, popularity: &Popularity, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let source = if traffic.is_poisson() {
            let alias = WeightedAliasIndex::new(popularity.probabilities().to_vec())
                .map_err(|e| invalid(format!("cannot sample popularity: {e}")))?;
            Source::Poisson {
                alias,
                total_rate: traffic.total_rate,
            }
        } else {
            let processes = traffic.processes(popularity);
            let pending = processes
                .iter()
                .enumerate()
                .filter(|(_, p)| p.rate() > 0.0)
                .map(|(m, p)| Pending {
                    time: p.sample_residual(&mut rng),
                    object: m as u32,
                })
                .collect();
            Source::Renewal { pending, processes }
        };
        Ok(Self {
            source,
            rng,
            now: 0.0,
        })
    }

    /// Time of the most recent request.
    pub fn now(&self) -> f64 {
        self.now
    }
}

impl Iterator for ArrivalStream {
    type Item = Request;

    fn next(&mut self) -> Option<Request> {
        match &mut self.source {
            Source::Poisson { alias, total_rate } => {
                let gap: f64 = Exp1.sample(&mut self.rng);
                self.now += gap / *total_rate;
                let object = alias.sample(&mut self.rng);
                Some(Request {
                    time: self.now,
                    object,
                })
            }
            Source::Renewal { pending, processes } => {
                let mut head = pending.peek_mut()?;
                let request = Request {
                    time: head.time,
                    object: head.object as usize,
                };
                head.time += processes[request.object].sample(&mut self.rng);
                drop(head);
                self.now = request.time;
                Some(request)
            }
        }
    }
}
