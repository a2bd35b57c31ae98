//! Executes a scenario: every (system, capacity, engine) point is an
//! independent job in a thread pool.

use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use unicache::analytic::{solve_characteristic_time, Policy, PolicySpec};
use unicache::netsim::run_network_sim;
use unicache::network::{solve_network, CacheNetwork, Strategy};
use unicache::sim::{run_replications, SimConfig, SimReport};
use unicache::stats::BatchEstimate;

use crate::scenario::{Scenario, System};
use crate::table::{join_list, sort_rows, Row};

const CI_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EngineKind {
    Analytic,
    Sim,
}

impl EngineKind {
    fn name(self) -> &'static str {
        match self {
            EngineKind::Analytic => "analytic",
            EngineKind::Sim => "sim",
        }
    }
}

#[derive(Debug, Clone)]
enum Subject {
    Cache(Policy),
    Network(Strategy),
}

#[derive(Debug, Clone)]
struct Job {
    subject: Subject,
    capacity: usize,
    engine: EngineKind,
}

/// Runs every job of the scenario and returns the rows in sorted key
/// order. Fails as a whole if any job fails.
pub fn run_scenario(scenario: &Scenario) -> Result<Vec<Row>> {
    let subjects: Vec<Subject> = match &scenario.system {
        System::Single(policies) => policies.iter().copied().map(Subject::Cache).collect(),
        System::Network { strategies, .. } => strategies.iter().copied().map(Subject::Network).collect(),
    };
    let mut engines = Vec::new();
    if scenario.engine.analytic() {
        engines.push(EngineKind::Analytic);
    }
    if scenario.engine.sim() {
        engines.push(EngineKind::Sim);
    }
    let mut jobs = Vec::new();
    for subject in &subjects {
        for &capacity in &scenario.capacities {
            for &engine in &engines {
                jobs.push(Job {
                    subject: subject.clone(),
                    capacity,
                    engine,
                });
            }
        }
    }
    let mut rows = jobs
        .par_iter()
        .map(|job| run_job(scenario, job))
        .collect::<Result<Vec<Row>>>()?;
    sort_rows(&mut rows);
    Ok(rows)
}

fn sim_config(scenario: &Scenario) -> SimConfig {
    SimConfig {
        requests: scenario.sim.requests,
        warmup_fraction: scenario.sim.warmup_fraction,
        seed: scenario.sim.seed,
        batches: scenario.sim.batches,
        ..SimConfig::default()
    }
}

fn ci(estimate: BatchEstimate) -> Option<f64> {
    Some(estimate.half_width(CI_LEVEL)).filter(|h| h.is_finite())
}

fn run_job(scenario: &Scenario, job: &Job) -> Result<Row> {
    let started = Instant::now();
    let mut row = match &job.subject {
        Subject::Cache(policy) => cache_row(scenario, *policy, job.capacity, job.engine),
        Subject::Network(strategy) => network_row(scenario, *strategy, job.capacity, job.engine),
    }
    .with_context(|| {
        let what = match &job.subject {
            Subject::Cache(p) => p.to_string(),
            Subject::Network(s) => s.to_string(),
        };
        format!("{} engine failed for {what} at C = {}", job.engine.name(), job.capacity)
    })?;
    row.runtime_s = started.elapsed().as_secs_f64();
    Ok(row)
}

fn cache_row(scenario: &Scenario, policy: Policy, capacity: usize, engine: EngineKind) -> Result<Row> {
    let spec = PolicySpec::new(policy, capacity)?;
    let mut row = Row {
        policy: policy.to_string(),
        strategy: String::new(),
        capacity,
        engine: engine.name().into(),
        hit_total: f64::NAN,
        hit_ci: None,
        per_node_hits: String::new(),
        tc_values: String::new(),
        runtime_s: 0.0,
        seed: None,
    };
    match engine {
        EngineKind::Analytic => {
            let solution = solve_characteristic_time(&spec, &scenario.traffic, &scenario.popularity)?;
            row.hit_total = solution.aggregate_hit;
            row.tc_values = stage_list(&solution.times.stages);
        }
        EngineKind::Sim => {
            let reports = run_replications(
                &spec,
                &scenario.traffic,
                &scenario.popularity,
                &sim_config(scenario),
                scenario.sim.replications,
            )?;
            let pooled = SimReport::pool(&reports)?;
            row.hit_total = pooled.aggregate_hit();
            row.hit_ci = ci(pooled.hit_estimate());
            row.seed = Some(scenario.sim.seed);
        }
    }
    row.per_node_hits = join_list([row.hit_total]);
    Ok(row)
}

fn network_row(scenario: &Scenario, strategy: Strategy, capacity: usize, engine: EngineKind) -> Result<Row> {
    let System::Network { network, .. } = &scenario.system else {
        unreachable!("network jobs come from network scenarios");
    };
    let network: CacheNetwork = network.clone().with_uniform_capacity(capacity)?.with_strategy(strategy)?;
    let mut row = Row {
        policy: "lru".into(),
        strategy: strategy.to_string(),
        capacity,
        engine: engine.name().into(),
        hit_total: f64::NAN,
        hit_ci: None,
        per_node_hits: String::new(),
        tc_values: String::new(),
        runtime_s: 0.0,
        seed: None,
    };
    match engine {
        EngineKind::Analytic => {
            let solution = solve_network(&network, &scenario.traffic, &scenario.popularity)?;
            row.hit_total = solution.total_hit;
            row.per_node_hits = join_list(solution.node_hits());
            row.tc_values = join_list(solution.times());
        }
        EngineKind::Sim => {
            let base = sim_config(scenario);
            let reports = (0..scenario.sim.replications as u64)
                .into_par_iter()
                .map(|r| {
                    let config = SimConfig {
                        seed: base.seed.wrapping_add(r),
                        ..base.clone()
                    };
                    run_network_sim(&network, &scenario.traffic, &scenario.popularity, &config)
                })
                .collect::<unicache::Result<Vec<_>>>()?;
            let exogenous: u64 = reports.iter().map(|r| r.exogenous_requests).sum();
            let fetches: u64 = reports.iter().map(|r| r.repository_fetches).sum();
            row.hit_total = 1.0 - fetches as f64 / exogenous as f64;
            let batches: Vec<f64> = reports
                .iter()
                .flat_map(|r| &r.batches)
                .map(|b| 1.0 - b.repository_fetches as f64 / b.exogenous as f64)
                .collect();
            row.hit_ci = ci(BatchEstimate::from_batches(&batches));
            let node_hits = (0..network.len()).map(|j| {
                let hits: u64 = reports.iter().map(|r| r.nodes[j].total_hits()).sum();
                let requests: u64 = reports.iter().map(|r| r.nodes[j].measured_requests).sum();
                hits as f64 / requests as f64
            });
            row.per_node_hits = join_list(node_hits);
            row.seed = Some(scenario.sim.seed);
        }
    }
    Ok(row)
}

fn stage_list(stages: &[f64]) -> String {
    stages.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("/")
}
