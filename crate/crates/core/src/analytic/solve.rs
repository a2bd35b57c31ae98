use crate::error::{invalid, Error, Result};
use crate::traffic::{Popularity, RequestProcess, Traffic};

use super::root::solve_increasing;
use super::{aggregate_hit, stage_probabilities, CharacteristicTimes, Policy, PolicySpec};

/// Controls for the characteristic-time fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Accepted `|Σ p_in - C| / C` once the bracket has collapsed.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 500,
        }
    }
}

/// Result of solving one cache.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleCacheSolution {
    pub spec: PolicySpec,
    pub times: CharacteristicTimes,
    /// Time-average occupancy of each object in the physical cache.
    pub p_in: Vec<f64>,
    pub p_hit: Vec<f64>,
    pub aggregate_hit: f64,
    /// Function evaluations spent across all stages.
    pub iterations: usize,
    /// Largest `|Σ p_in - C|` over the stages.
    pub residual: f64,
}

/// Solves `Σ_m p_in(m; T) = C` for every stage of the cache.
pub fn solve_characteristic_time(
    spec: &PolicySpec,
    traffic: &Traffic,
    popularity: &Popularity,
) -> Result<SingleCacheSolution> {
    solve_with(spec, traffic, popularity, &SolverOptions::default())
}

pub fn solve_with(
    spec: &PolicySpec,
    traffic: &Traffic,
    popularity: &Popularity,
    options: &SolverOptions,
) -> Result<SingleCacheSolution> {
    spec.policy.validate()?;
    let m = popularity.catalog_size();
    let capacity = spec.capacity;
    if capacity >= m {
        return Err(invalid(format!(
            "capacity {capacity} must be smaller than the catalog size {m}"
        )));
    }

    if let Policy::Lfu = spec.policy {
        let p: Vec<f64> = (0..m).map(|r| if r < capacity { 1.0 } else { 0.0 }).collect();
        let aggregate = aggregate_hit(popularity, &p)?;
        return Ok(SingleCacheSolution {
            spec: *spec,
            times: CharacteristicTimes::deterministic(vec![]),
            p_in: p.clone(),
            p_hit: p,
            aggregate_hit: aggregate,
            iterations: 0,
            residual: 0.0,
        });
    }

    // Objects that are never requested can never be cached.
    let active: Vec<(usize, RequestProcess)> = popularity
        .probabilities()
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(i, p)| (i, traffic.process(traffic.total_rate * p)))
        .collect();
    if active.len() <= capacity {
        return Err(invalid(format!(
            "only {} objects have positive popularity; capacity {capacity} can hold them all",
            active.len()
        )));
    }

    let target = capacity as f64;
    let stages = spec.policy.stages();
    let mut times: Vec<f64> = Vec::with_capacity(stages);
    let mut prev_hit = vec![1.0; active.len()];
    let mut p_in = vec![0.0; active.len()];
    let mut p_hit = vec![0.0; active.len()];
    let mut iterations = 0;
    let mut residual: f64 = 0.0;

    for stage in 0..stages {
        times.push(0.0);
        let mut failure: Option<Error> = None;
        let initial = target / traffic.total_rate;
        let root = {
            let times_ref = &mut times;
            let prev = &prev_hit;
            let failure = &mut failure;
            solve_increasing(
                "characteristic time",
                |t| {
                    times_ref[stage] = t;
                    let mut sum = 0.0;
                    for (j, (_, process)) in active.iter().enumerate() {
                        match stage_probabilities(&spec.policy, process, stage, times_ref, prev[j]) {
                            Ok(p) => sum += p.p_in,
                            Err(e) => {
                                failure.get_or_insert(e);
                                return f64::INFINITY;
                            }
                        }
                    }
                    sum - target
                },
                initial,
                options.max_iterations,
            )
        };
        if let Some(e) = failure {
            return Err(e);
        }
        let root = root?;
        iterations += root.iterations;
        times[stage] = root.x;
        for (j, (_, process)) in active.iter().enumerate() {
            let p = stage_probabilities(&spec.policy, process, stage, &times, prev_hit[j])?;
            p_in[j] = p.p_in;
            p_hit[j] = p.p_hit;
        }
        let stage_residual = p_in.iter().sum::<f64>() - target;
        debug_assert!((stage_residual - root.residual).abs() <= 1e-9 * target);
        if stage_residual.abs() > options.tolerance * target {
            return Err(Error::NonConvergence {
                what: format!("{} stage {}", spec.policy, stage + 1),
                iterations: root.iterations,
                residual: stage_residual,
            });
        }
        residual = residual.max(stage_residual.abs());
        prev_hit.copy_from_slice(&p_hit);
    }

    let mut full_in = vec![0.0; m];
    let mut full_hit = vec![0.0; m];
    for (j, (i, _)) in active.iter().enumerate() {
        full_in[*i] = p_in[j];
        full_hit[*i] = p_hit[j];
    }
    let aggregate = aggregate_hit(popularity, &full_hit)?;
    Ok(SingleCacheSolution {
        spec: *spec,
        times: CharacteristicTimes {
            stages: times,
            kind: spec.policy.time_kind(),
        },
        p_in: full_in,
        p_hit: full_hit,
        aggregate_hit: aggregate,
        iterations,
        residual,
    })
}
