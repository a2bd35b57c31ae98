//! Discrete-event simulation of single caches.
//!
//! The simulators serve as ground truth for the analytic models. Per-object
//! hit ratios are measured over post-warm-up requests, while occupancies are
//! integrated exactly over time rather than sampled at request instants,
//! which keeps them unbiased under non-Poisson traffic.

mod arrivals;
pub(crate) mod cache;
mod record;
mod trace;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use arrivals::{ArrivalStream, Request};
pub use cache::{AccessOutcome, CacheState};
pub use trace::Trace;

pub(crate) use record::{Recorder, Schedule};

use crate::analytic::{Policy, PolicySpec};
use crate::error::{invalid, Error, Result};
use crate::stats::BatchEstimate;
use crate::traffic::{Popularity, Traffic};

/// Largest catalog the simulators accept by default; per-object state is a
/// handful of words, so this bounds memory to a few hundred megabytes.
pub const DEFAULT_MAX_CATALOG: usize = 10_000_000;

/// Run-length and measurement settings for a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Total number of requests generated, warm-up included.
    pub requests: u64,
    /// Fraction of `requests` discarded before measuring.
    pub warmup_fraction: f64,
    pub seed: u64,
    /// Number of equal-length batches used for confidence intervals.
    pub batches: usize,
    /// Objects `0..tracked_objects` also get per-batch statistics.
    pub tracked_objects: usize,
    pub max_catalog: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            requests: 1_000_000,
            warmup_fraction: 0.25,
            seed: 1,
            batches: 20,
            tracked_objects: 0,
            max_catalog: DEFAULT_MAX_CATALOG,
        }
    }
}

impl SimConfig {
    pub fn new(requests: u64, seed: u64) -> Self {
        Self {
            requests,
            seed,
            ..Self::default()
        }
    }

    /// Chooses the total length so that exactly `measured` requests follow
    /// the warm-up.
    pub fn with_measured_requests(mut self, measured: u64) -> Self {
        // The measured count grows by zero or one per extra request, so the
        // smallest length reaching `measured` hits it exactly.
        self.requests = measured + (measured as f64 * self.warmup_fraction / (1.0 - self.warmup_fraction)).floor() as u64;
        self.requests = self.requests.saturating_sub(2).max(measured);
        while self.measured_requests() < measured {
            self.requests += 1;
        }
        self
    }

    pub fn warmup_requests(&self) -> u64 {
        (self.requests as f64 * self.warmup_fraction).floor() as u64
    }

    pub fn measured_requests(&self) -> u64 {
        self.requests - self.warmup_requests()
    }

    pub(crate) fn validate(&self, catalog: usize) -> Result<()> {
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(invalid(format!(
                "warm-up fraction must be in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        if self.batches == 0 {
            return Err(invalid("at least one batch is required"));
        }
        if self.measured_requests() > 0 && self.measured_requests() < self.batches as u64 {
            return Err(invalid(format!(
                "{} measured requests cannot fill {} batches",
                self.measured_requests(),
                self.batches
            )));
        }
        if catalog > self.max_catalog {
            return Err(Error::CatalogTooLarge {
                requested: catalog,
                bound: self.max_catalog,
            });
        }
        Ok(())
    }
}

/// Aggregate counts of one batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchCounts {
    pub requests: u64,
    pub hits: u64,
    pub duration: f64,
}

/// Counts of one tracked object in one batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectBatch {
    pub requests: u64,
    pub hits: u64,
    /// Time spent in the cache during the batch.
    pub resident_time: f64,
}

/// Measurements from one simulated cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub policy: String,
    pub capacity: usize,
    pub seed: u64,
    pub warmup_requests: u64,
    pub measured_requests: u64,
    /// Per-object post-warm-up request counts.
    pub requests: Vec<u64>,
    /// Per-object post-warm-up hit counts.
    pub hits: Vec<u64>,
    /// Per-object time spent in the cache during the measurement window.
    pub resident_time: Vec<f64>,
    /// Length of the measurement window.
    pub window: f64,
    pub batches: Vec<BatchCounts>,
    /// `tracked[m][b]`: per-batch counts of object `m`.
    pub tracked: Vec<Vec<ObjectBatch>>,
}

impl SimReport {
    pub fn total_hits(&self) -> u64 {
        self.hits.iter().sum()
    }

    /// Fraction of measured requests that hit.
    pub fn aggregate_hit(&self) -> f64 {
        self.total_hits() as f64 / self.measured_requests as f64
    }

    /// Batch-means estimate of the aggregate hit ratio.
    pub fn hit_estimate(&self) -> BatchEstimate {
        let ratios: Vec<f64> = self
            .batches
            .iter()
            .map(|b| b.hits as f64 / b.requests as f64)
            .collect();
        BatchEstimate::from_batches(&ratios)
    }

    /// Empirical hit ratio of object `m` (`NaN` if it was never requested).
    pub fn object_hit(&self, m: usize) -> f64 {
        self.hits[m] as f64 / self.requests[m] as f64
    }

    /// Time-average probability that object `m` is cached.
    pub fn object_occupancy(&self, m: usize) -> f64 {
        self.resident_time[m] / self.window
    }

    /// Batch-means estimate of a tracked object's hit ratio; batches
    /// without requests for the object are skipped.
    pub fn object_hit_estimate(&self, m: usize) -> BatchEstimate {
        let ratios: Vec<f64> = self.tracked[m]
            .iter()
            .filter(|b| b.requests > 0)
            .map(|b| b.hits as f64 / b.requests as f64)
            .collect();
        BatchEstimate::from_batches(&ratios)
    }

    /// Batch-means estimate of a tracked object's occupancy.
    pub fn object_occupancy_estimate(&self, m: usize) -> BatchEstimate {
        let ratios: Vec<f64> = self.tracked[m]
            .iter()
            .zip(&self.batches)
            .map(|(o, b)| o.resident_time / b.duration)
            .collect();
        BatchEstimate::from_batches(&ratios)
    }

    /// Mean number of cached objects over the window.
    pub fn mean_occupancy(&self) -> f64 {
        self.resident_time.iter().sum::<f64>() / self.window
    }

    /// Pools independent replications of the same configuration: counts
    /// and resident times are summed, batches are concatenated.
    pub fn pool(reports: &[SimReport]) -> Result<SimReport> {
        let first = reports
            .first()
            .ok_or_else(|| invalid("cannot pool zero reports"))?;
        let mut pooled = first.clone();
        for r in &reports[1..] {
            if r.requests.len() != pooled.requests.len() {
                return Err(Error::LengthMismatch {
                    expected: pooled.requests.len(),
                    actual: r.requests.len(),
                });
            }
            pooled.warmup_requests += r.warmup_requests;
            pooled.measured_requests += r.measured_requests;
            pooled.window += r.window;
            for (a, b) in pooled.requests.iter_mut().zip(&r.requests) {
                *a += b;
            }
            for (a, b) in pooled.hits.iter_mut().zip(&r.hits) {
                *a += b;
            }
            for (a, b) in pooled.resident_time.iter_mut().zip(&r.resident_time) {
                *a += b;
            }
            pooled.batches.extend_from_slice(&r.batches);
            for (a, b) in pooled.tracked.iter_mut().zip(&r.tracked) {
                a.extend_from_slice(b);
            }
        }
        Ok(pooled)
    }
}

/// RNG used by a cache's own random decisions (q-LRU admission, RANDOM
/// eviction). It is independent of the arrival stream and depends only on
/// the seed, so a cache behaves identically whether simulated alone or
/// alongside others on a shared stream.
pub(crate) fn policy_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Simulates one cache fed by `traffic` over `popularity`.
pub fn run_single_cache(
    spec: &PolicySpec,
    traffic: &Traffic,
    popularity: &Popularity,
    config: &SimConfig,
) -> Result<SimReport> {
    Ok(run_shared_stream(std::slice::from_ref(spec), traffic, popularity, config)?
        .pop()
        .expect("one report per spec"))
}

/// Simulates several independent caches fed by the same request stream.
///
/// Each report equals what [`run_single_cache`] returns for that spec with
/// the same configuration; sharing the stream only saves generation time.
pub fn run_shared_stream(
    specs: &[PolicySpec],
    traffic: &Traffic,
    popularity: &Popularity,
    config: &SimConfig,
) -> Result<Vec<SimReport>> {
    let catalog = popularity.catalog_size();
    config.validate(catalog)?;
    if config.requests == 0 {
        return Err(invalid("a simulation needs at least one request"));
    }
    for spec in specs {
        PolicySpec::new(spec.policy, spec.capacity)?;
    }
    let mut caches: Vec<(CacheState, ChaCha8Rng, Recorder)> = specs
        .iter()
        .map(|spec| {
            let state = CacheState::new(spec, catalog);
            let recorder = Recorder::new(catalog, config, state.residents());
            (state, policy_rng(config.seed), recorder)
        })
        .collect();
    let schedule = Schedule::new(config);
    let mut stream = ArrivalStream::new(traffic, popularity, config.seed)?;
    let mut end = 0.0;
    for index in 0..config.requests {
        let request = stream.next().expect("arrival streams are endless");
        end = request.time;
        let opens = schedule.opens_batch(index);
        for (state, rng, recorder) in &mut caches {
            if opens {
                recorder.open_batch(request.time);
            }
            let outcome = state.access(request.object, rng);
            recorder.apply(request.object, request.time, outcome);
        }
    }
    Ok(caches
        .into_iter()
        .zip(specs)
        .map(|((state, _, recorder), spec)| {
            recorder.finish(
                end,
                state.residents(),
                &spec.policy.to_string(),
                spec.capacity,
                config.seed,
                schedule.warmup(),
            )
        })
        .collect())
}

/// Runs `replications` independent copies of a single-cache simulation in
/// parallel, with seeds `config.seed, config.seed + 1, ...`.
pub fn run_replications(
    spec: &PolicySpec,
    traffic: &Traffic,
    popularity: &Popularity,
    config: &SimConfig,
    replications: usize,
) -> Result<Vec<SimReport>> {
    (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let config = SimConfig {
                seed: config.seed.wrapping_add(r),
                ..config.clone()
            };
            run_single_cache(spec, traffic, popularity, &config)
        })
        .collect()
}

/// Replays a recorded trace through one cache. All requests of the trace
/// are served; `config.requests` is ignored and the warm-up fraction
/// applies to the trace length. LFU keeps the `capacity` objects that are
/// most frequent in the whole trace.
pub fn replay_trace(spec: &PolicySpec, trace: &Trace, config: &SimConfig) -> Result<SimReport> {
    PolicySpec::new(spec.policy, spec.capacity)?;
    let catalog = trace.object_count();
    let mut config = SimConfig {
        requests: trace.len() as u64,
        ..config.clone()
    };
    // Short traces get fewer batches rather than an error.
    config.batches = config.batches.min(config.measured_requests().max(1) as usize);
    config.validate(catalog)?;
    let mut state = match spec.policy {
        Policy::Lfu => CacheState::fixed(trace.most_frequent(spec.capacity), catalog),
        _ => CacheState::new(spec, catalog),
    };
    let mut rng = policy_rng(config.seed);
    let mut recorder = Recorder::new(catalog, &config, state.residents());
    let schedule = Schedule::new(&config);
    let mut end = 0.0;
    for (index, request) in trace.requests().enumerate() {
        if schedule.opens_batch(index as u64) {
            recorder.open_batch(request.time);
        }
        end = request.time;
        let outcome = state.access(request.object, &mut rng);
        recorder.apply(request.object, request.time, outcome);
    }
    Ok(recorder.finish(
        end,
        state.residents(),
        &spec.policy.to_string(),
        spec.capacity,
        config.seed,
        schedule.warmup(),
    ))
}
