//! Single-cache models built on a shared characteristic time.
//!
//! For an object with inter-request cdf `F` and age cdf `F̂`, a cache whose
//! characteristic time is `T` holds the object with time-average probability
//! `p_in` and serves its requests with probability `p_hit`:
//!
//! | policy | `p_hit` | `p_in` |
//! |---|---|---|
//! | LRU | `F(T)` | `F̂(T)` |
//! | q-LRU | `qF/(1-(1-q)F)` | `qF̂/(1-(1-q)F)` |
//! | FIFO (Poisson only) | `λT/(1+λT)` | same |
//! | RANDOM | `M_R(-1/T)` | `λT(1-M_R(-1/T))` |
//! | LFU | `1{rank < C}` | same |
//!
//! k-LRU chains these per stage; see [`stage_probabilities`]. Under Poisson
//! traffic `F = F̂`, and every policy returns `p_hit == p_in` exactly.

mod policy;
mod root;
mod solve;

pub use policy::{CharacteristicTimes, Policy, PolicySpec, TimeKind};
pub(crate) use root::solve_increasing;
pub use solve::{solve_characteristic_time, solve_with, SingleCacheSolution, SolverOptions};

use crate::error::{invalid, Error, Result};
use crate::stats::neumaier_sum;
use crate::traffic::{Popularity, RequestProcess};

/// Occupancy and hit probability of one object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectProbabilities {
    pub p_in: f64,
    pub p_hit: f64,
}

/// Probabilities of an object in stage `stage` (0-based) of a cache.
///
/// `times` holds the eviction times of stages `0..=stage`, and `prev_hit`
/// the probability that the object sat in stage `stage - 1` when a request
/// arrived (ignored for the first stage). For k-LRU with `k = 2` the second
/// stage uses the exact two-stage chain; for `k >= 3` every later stage uses
/// the recursion that treats neighbouring stages as independent.
pub fn stage_probabilities(
    policy: &Policy,
    process: &RequestProcess,
    stage: usize,
    times: &[f64],
    prev_hit: f64,
) -> Result<ObjectProbabilities> {
    let t = times[stage];
    let p = match *policy {
        Policy::Lfu => return Err(invalid("LFU has no eviction stages")),
        Policy::Lru => lru(process, t),
        Policy::KLru { .. } if stage == 0 => lru(process, t),
        Policy::QLru { q } => q_lru(process, t, q),
        Policy::Fifo => {
            if !process.is_poisson() {
                return Err(Error::UnsupportedCombination {
                    policy: "fifo".into(),
                    traffic: "renewal".into(),
                });
            }
            erlang_b(process.rate() * t)
        }
        Policy::Random => {
            if process.is_poisson() {
                erlang_b(process.rate() * t)
            } else {
                random_renewal(process, t)?
            }
        }
        Policy::KLru { k: 2 } => two_lru_refined(process, times[0], t, prev_hit),
        Policy::KLru { .. } => staged_lru(process, t, prev_hit),
    };
    // The closed forms can overshoot 1 by an ulp for very popular objects.
    Ok(ObjectProbabilities {
        p_in: p.p_in.clamp(0.0, 1.0),
        p_hit: p.p_hit.clamp(0.0, 1.0),
    })
}

fn lru(process: &RequestProcess, t: f64) -> ObjectProbabilities {
    let (f, age) = process.cdf_and_age(t);
    ObjectProbabilities { p_in: age, p_hit: f }
}

fn q_lru(process: &RequestProcess, t: f64, q: f64) -> ObjectProbabilities {
    let (f, age) = process.cdf_and_age(t);
    let denom = 1.0 - (1.0 - q) * f;
    ObjectProbabilities {
        p_in: q * age / denom,
        p_hit: q * f / denom,
    }
}

fn erlang_b(load: f64) -> ObjectProbabilities {
    let p = load / (1.0 + load);
    ObjectProbabilities { p_in: p, p_hit: p }
}

/// RANDOM under renewal traffic: the object behaves as a G/M/1/0 queue with
/// exponential service of mean `mean_time`.
pub(crate) fn random_renewal(process: &RequestProcess, mean_time: f64) -> Result<ObjectProbabilities> {
    if mean_time <= 0.0 {
        return Ok(ObjectProbabilities { p_in: 0.0, p_hit: 0.0 });
    }
    let m = process.mgf(-1.0 / mean_time)?;
    Ok(ObjectProbabilities {
        p_in: process.rate() * mean_time * (1.0 - m),
        p_hit: m,
    })
}

/// Later k-LRU stage with the independence approximation: solves
/// `h = F (h + h_prev (1 - h))` for `h` and weights by the age cdf.
fn staged_lru(process: &RequestProcess, t: f64, prev_hit: f64) -> ObjectProbabilities {
    let (f, age) = process.cdf_and_age(t);
    let denom = 1.0 - f + f * prev_hit;
    if denom <= 0.0 {
        return ObjectProbabilities { p_in: 0.0, p_hit: 0.0 };
    }
    let hit = f * prev_hit / denom;
    if process.is_poisson() {
        return ObjectProbabilities { p_in: hit, p_hit: hit };
    }
    ObjectProbabilities {
        p_in: age * (hit + prev_hit * (1.0 - hit)),
        p_hit: hit,
    }
}

/// Second stage of 2-LRU from the four-state chain sampled at requests.
///
/// With `p1 = P(R <= T1)` (the meta-cache hit probability) and
/// `g = P(R > max(T1, T2))`, the object is in the physical cache after a
/// request with probability `p1 / (p1 + g)`; the next request hits with
/// probability `F(T2)`, and the time-average follows from the same cycle
/// with `F̂(T2)` in place of `F(T2)`.
fn two_lru_refined(process: &RequestProcess, t1: f64, t2: f64, meta_hit: f64) -> ObjectProbabilities {
    if meta_hit <= 0.0 {
        return ObjectProbabilities { p_in: 0.0, p_hit: 0.0 };
    }
    let g = process.survival(t1.max(t2));
    let after_request = meta_hit / (meta_hit + g);
    let (f, age) = process.cdf_and_age(t2);
    ObjectProbabilities {
        p_in: age * after_request,
        p_hit: f * after_request,
    }
}

/// Closed-form hit probability of the 2-LRU chain,
/// `1 - (1 + q_a) q_b / (q_a + q_b)`, where `q_a` is the probability the
/// next request comes within the meta-cache time and `q_b` the probability
/// it comes after the cache time. Requires `q_a + q_b <= 1`.
pub fn two_lru_refined_hit(q_a: f64, q_b: f64) -> f64 {
    if q_a + q_b <= 0.0 {
        return 0.0;
    }
    1.0 - (1.0 + q_a) * q_b / (q_a + q_b)
}

fn check_times(spec: &PolicySpec, times: &CharacteristicTimes) -> Result<()> {
    let stages = spec.policy.stages();
    if stages == 0 {
        return Ok(());
    }
    if times.stages.len() != stages {
        return Err(invalid(format!(
            "{} needs {stages} characteristic time(s), got {}",
            spec.policy,
            times.stages.len()
        )));
    }
    if times.kind != spec.policy.time_kind() {
        return Err(invalid(format!(
            "{} expects {:?} characteristic times, got {:?}",
            spec.policy,
            spec.policy.time_kind(),
            times.kind
        )));
    }
    if let Some(t) = times.stages.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(invalid(format!("characteristic time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Occupancy and hit probability of the object ranked `rank` (0-based).
pub fn object_probabilities(
    spec: &PolicySpec,
    rank: usize,
    process: &RequestProcess,
    times: &CharacteristicTimes,
) -> Result<ObjectProbabilities> {
    check_times(spec, times)?;
    if let Policy::Lfu = spec.policy {
        let p = if rank < spec.capacity { 1.0 } else { 0.0 };
        return Ok(ObjectProbabilities { p_in: p, p_hit: p });
    }
    let mut prev_hit = 1.0;
    let mut out = ObjectProbabilities { p_in: 0.0, p_hit: 0.0 };
    for stage in 0..times.stages.len() {
        out = stage_probabilities(&spec.policy, process, stage, &times.stages, prev_hit)?;
        prev_hit = out.p_hit;
    }
    Ok(out)
}

/// Time-average probability that the object is cached.
pub fn occupancy(
    spec: &PolicySpec,
    rank: usize,
    process: &RequestProcess,
    times: &CharacteristicTimes,
) -> Result<f64> {
    object_probabilities(spec, rank, process, times).map(|p| p.p_in)
}

/// Probability that a request for the object finds it cached.
pub fn hit_probability(
    spec: &PolicySpec,
    rank: usize,
    process: &RequestProcess,
    times: &CharacteristicTimes,
) -> Result<f64> {
    object_probabilities(spec, rank, process, times).map(|p| p.p_hit)
}

/// Popularity-weighted hit probability `Σ p_m p_hit(m)`.
pub fn aggregate_hit(popularity: &Popularity, p_hit: &[f64]) -> Result<f64> {
    let p = popularity.probabilities();
    if p.len() != p_hit.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            actual: p_hit.len(),
        });
    }
    Ok(neumaier_sum(p.iter().zip(p_hit).map(|(a, b)| a * b)))
}

/// Truncated expansion of the hit probability for small `λT`.
///
/// Returns `None` for LFU, which has no characteristic time. For k-LRU the
/// leading term is `(λT)^k`, whose relative error grows like `kλT/2`.
///
/// The q-LRU quadratic term uses the customary coefficient `q(1 - q)`. The
/// exact second-order Taylor coefficient of the IRM formula is
/// `q(1/2 - q)`, so the two agree to first order only; the difference is
/// below 1% of the value for `λT <= 0.01`.
pub fn small_cache_hit(policy: &Policy, rate: f64, t: f64) -> Option<f64> {
    let x = rate * t;
    match *policy {
        Policy::Lru => Some(x - x * x / 2.0),
        Policy::Fifo | Policy::Random => Some(x - x * x),
        Policy::QLru { q } => Some(q * x + q * (1.0 - q) * x * x),
        Policy::KLru { k } => Some(x.powi(k as i32)),
        Policy::Lfu => None,
    }
}

/// Mean time between successive requests that leave an object in both
/// stages of a 2-LRU cache with meta-cache time `t1` and cache time `t2`.
///
/// The cycle starts with the object in both stages. If the next request
/// comes within `max(t1, t2)` it closes the cycle; otherwise the object is
/// gone from both stages and the cycle lasts until a request follows its
/// predecessor within `t1`, which takes a geometric number of further
/// inter-request times with success probability `p1 = F(t1)`. Hence
/// `E[cycle] = E[R] + P(R > max(t1, t2)) E[R] / p1`.
pub fn two_lru_cycle_length(process: &RequestProcess, t1: f64, t2: f64) -> Result<f64> {
    if !(t1 > 0.0) || !(t2 > 0.0) {
        return Err(invalid(format!("2-LRU times must be > 0, got ({t1}, {t2})")));
    }
    let upper = t1.max(t2);
    let p1 = process.cdf(t1);
    // The three cases of the first inter-request time: R <= t1,
    // t1 < R <= max(t1, t2) and R > max(t1, t2).
    let short = process.partial_mean(t1);
    let middle = process.partial_mean(upper) - short;
    let long = process.mean() - process.partial_mean(upper);
    let restart = process.survival(upper) * process.mean() / p1;
    Ok(short + middle + long + restart)
}
