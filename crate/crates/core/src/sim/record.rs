//! Measurement bookkeeping shared by the single-cache and network
//! simulators.

use super::{AccessOutcome, BatchCounts, ObjectBatch, SimConfig, SimReport};

/// Splits a run of requests (indexed globally from zero) into a warm-up
/// prefix and equal batches.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Schedule {
    warmup: u64,
    measured: u64,
    batches: u64,
}

impl Schedule {
    pub(crate) fn new(config: &SimConfig) -> Self {
        Self {
            warmup: config.warmup_requests(),
            measured: config.measured_requests(),
            batches: config.batches as u64,
        }
    }

    pub(crate) fn warmup(&self) -> u64 {
        self.warmup
    }

    pub(crate) fn measuring(&self, index: u64) -> bool {
        index >= self.warmup
    }

    fn batch(&self, k: u64) -> u64 {
        (k as u128 * self.batches as u128 / self.measured as u128) as u64
    }

    /// Whether request `index` opens a new batch.
    pub(crate) fn opens_batch(&self, index: u64) -> bool {
        match index.checked_sub(self.warmup) {
            None => false,
            Some(0) => true,
            Some(k) => self.batch(k) != self.batch(k - 1),
        }
    }
}

/// Accumulates per-object and per-batch statistics for one cache.
#[derive(Debug, Clone)]
pub(crate) struct Recorder {
    requests: Vec<u64>,
    hits: Vec<u64>,
    resident_time: Vec<f64>,
    /// Insertion time of each cached object, `NaN` when not cached.
    in_since: Vec<f64>,
    window_start: f64,
    batches: Vec<BatchCounts>,
    batch_starts: Vec<f64>,
    tracked: Vec<Vec<ObjectBatch>>,
}

impl Recorder {
    /// Starts recording for a cache whose initial contents are
    /// `residents`; they count as cached from time zero.
    pub(crate) fn new(objects: usize, config: &SimConfig, residents: impl IntoIterator<Item = usize>) -> Self {
        let mut recorder = Self {
            requests: vec![0; objects],
            hits: vec![0; objects],
            resident_time: vec![0.0; objects],
            in_since: vec![f64::NAN; objects],
            window_start: f64::NAN,
            batches: Vec::with_capacity(config.batches),
            batch_starts: Vec::with_capacity(config.batches),
            tracked: vec![Vec::with_capacity(config.batches); config.tracked_objects.min(objects)],
        };
        for m in residents {
            recorder.insert(m, 0.0);
        }
        recorder
    }

    fn measuring(&self) -> bool {
        !self.window_start.is_nan()
    }

    fn ensure(&mut self, m: usize) {
        if m >= self.requests.len() {
            self.requests.resize(m + 1, 0);
            self.hits.resize(m + 1, 0);
            self.resident_time.resize(m + 1, 0.0);
            self.in_since.resize(m + 1, f64::NAN);
        }
    }

    /// Closes the current batch (if any) and opens a new one at `time`; the
    /// first call also opens the measurement window.
    pub(crate) fn open_batch(&mut self, time: f64) {
        if !self.measuring() {
            self.window_start = time;
        }
        if let (Some(last), Some(&start)) = (self.batches.last_mut(), self.batch_starts.last()) {
            last.duration = time - start;
            let b = self.batches.len() - 1;
            for (m, per) in self.tracked.iter_mut().enumerate() {
                let since = self.in_since[m];
                if !since.is_nan() {
                    per[b].resident_time += time - since.max(start);
                }
            }
        }
        self.batches.push(BatchCounts {
            requests: 0,
            hits: 0,
            duration: 0.0,
        });
        self.batch_starts.push(time);
        for per in &mut self.tracked {
            per.push(ObjectBatch::default());
        }
    }

    /// Counts a request for `m` (only inside the measurement window).
    pub(crate) fn request(&mut self, m: usize, hit: bool) {
        if !self.measuring() {
            return;
        }
        self.ensure(m);
        let b = self.batches.len() - 1;
        self.requests[m] += 1;
        self.batches[b].requests += 1;
        if hit {
            self.hits[m] += 1;
            self.batches[b].hits += 1;
        }
        if let Some(per) = self.tracked.get_mut(m) {
            per[b].requests += 1;
            if hit {
                per[b].hits += 1;
            }
        }
    }

    pub(crate) fn insert(&mut self, m: usize, time: f64) {
        self.ensure(m);
        self.in_since[m] = time;
    }

    pub(crate) fn evict(&mut self, m: usize, time: f64) {
        self.ensure(m);
        let since = std::mem::replace(&mut self.in_since[m], f64::NAN);
        if self.measuring() && !since.is_nan() {
            self.resident_time[m] += time - since.max(self.window_start);
            if let Some(per) = self.tracked.get_mut(m) {
                let b = self.batches.len() - 1;
                per[b].resident_time += time - since.max(self.batch_starts[b]);
            }
        }
    }

    /// Records a request served by a single cache and its side effects.
    pub(crate) fn apply(&mut self, m: usize, time: f64, outcome: AccessOutcome) {
        self.request(m, outcome.hit);
        if let Some(e) = outcome.evicted {
            self.evict(e, time);
        }
        if outcome.inserted {
            self.insert(m, time);
        }
    }

    /// Closes the window at `end` and produces the report. `residents` are
    /// the objects still cached.
    pub(crate) fn finish(
        mut self,
        end: f64,
        residents: impl IntoIterator<Item = usize>,
        policy: &str,
        capacity: usize,
        seed: u64,
        warmup_requests: u64,
    ) -> SimReport {
        for m in residents {
            self.evict(m, end);
        }
        if let (Some(last), Some(start)) = (self.batches.last_mut(), self.batch_starts.last()) {
            last.duration = end - start;
        }
        let window = if self.measuring() { end - self.window_start } else { 0.0 };
        SimReport {
            policy: policy.to_string(),
            capacity,
            seed,
            warmup_requests,
            measured_requests: self.requests.iter().sum(),
            requests: self.requests,
            hits: self.hits,
            resident_time: self.resident_time,
            window,
            batches: self.batches,
            tracked: self.tracked,
        }
    }
}
