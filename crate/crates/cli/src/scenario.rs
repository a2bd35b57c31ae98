//! Scenario files: one JSON document fully describing an experiment.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use unicache::analytic::Policy;
use unicache::network::{CacheNetwork, Strategy};
use unicache::traffic::{Popularity, Traffic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Sim,
    Both,
}

impl Engine {
    pub fn analytic(self) -> bool {
        matches!(self, Engine::Analytic | Engine::Both)
    }

    pub fn sim(self) -> bool {
        matches!(self, Engine::Sim | Engine::Both)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemFile {
    /// Isolated caches, one per policy.
    Single { policies: Vec<String> },
    /// A cache network; `capacities` sets the capacity of every node and
    /// each strategy (default: the topology's own) is evaluated.
    Network {
        topology: PathBuf,
        #[serde(default)]
        strategies: Option<Vec<String>>,
    },
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TrafficFile {
    #[default]
    Irm,
    Hyperexp {
        z: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PopularityFile {
    Zipf { alpha: f64, catalog: usize },
    /// A text file with one non-negative weight per line; blank lines and
    /// lines starting with `#` are ignored.
    File(PathBuf),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimControls {
    #[serde(default = "default_requests")]
    pub requests: u64,
    #[serde(default = "default_warmup")]
    pub warmup_fraction: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_batches")]
    pub batches: usize,
}

fn default_requests() -> u64 {
    1_000_000
}
fn default_warmup() -> f64 {
    0.25
}
fn default_seed() -> u64 {
    1
}
fn default_replications() -> usize {
    1
}
fn default_batches() -> usize {
    20
}

impl Default for SimControls {
    fn default() -> Self {
        Self {
            requests: default_requests(),
            warmup_fraction: default_warmup(),
            seed: default_seed(),
            replications: default_replications(),
            batches: default_batches(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub engine: Engine,
    pub system: SystemFile,
    #[serde(default)]
    pub traffic: TrafficFile,
    pub popularity: PopularityFile,
    pub capacities: Vec<usize>,
    #[serde(default)]
    pub sim: SimControls,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// What a scenario evaluates.
#[derive(Debug, Clone)]
pub enum System {
    Single(Vec<Policy>),
    Network {
        network: CacheNetwork,
        strategies: Vec<Strategy>,
    },
}

/// A parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub engine: Engine,
    pub system: System,
    pub traffic: Traffic,
    pub popularity: Popularity,
    pub capacities: Vec<usize>,
    pub sim: SimControls,
    pub output: Option<PathBuf>,
}

impl Scenario {
    /// Reads and validates a scenario. Relative paths inside it are
    /// resolved against the directory of the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("at `{path}`: {}", e.into_inner())
        })?;
        Self::from_file(file, base)
    }

    fn from_file(file: ScenarioFile, base: &Path) -> Result<Self> {
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let traffic = match file.traffic {
            TrafficFile::Irm => Traffic::irm(),
            TrafficFile::Hyperexp { z } => Traffic::hyperexp(z).context("at `traffic.hyperexp.z`")?,
        };
        let popularity = match &file.popularity {
            PopularityFile::Zipf { alpha, catalog } => {
                Popularity::zipf(*alpha, *catalog).context("at `popularity.zipf`")?
            }
            PopularityFile::File(p) => read_weights(&resolve(p)).context("at `popularity.file`")?,
        };
        let catalog = popularity.catalog_size();
        if file.capacities.is_empty() {
            bail!("at `capacities`: the sweep needs at least one capacity");
        }
        for (i, &c) in file.capacities.iter().enumerate() {
            if c == 0 || c >= catalog {
                bail!("at `capacities[{i}]`: capacity {c} must be in 1..{catalog} (the catalog size)");
            }
        }
        let sim = file.sim;
        if file.engine.sim() {
            if sim.requests == 0 {
                bail!("at `sim.requests`: must be positive");
            }
            if sim.replications == 0 {
                bail!("at `sim.replications`: must be positive");
            }
            if sim.batches == 0 {
                bail!("at `sim.batches`: must be positive");
            }
            if !(0.0..1.0).contains(&sim.warmup_fraction) {
                bail!("at `sim.warmup_fraction`: must be in [0, 1)");
            }
        }
        let system = match file.system {
            SystemFile::Single { policies } => {
                if policies.is_empty() {
                    bail!("at `system.single.policies`: at least one policy is required");
                }
                let policies = policies
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p.parse::<Policy>().with_context(|| format!("at `system.single.policies[{i}]`")))
                    .collect::<Result<Vec<_>>>()?;
                if file.engine.analytic() && !traffic.is_poisson() {
                    if let Some(p) = policies.iter().find(|p| matches!(p, Policy::Fifo)) {
                        bail!("at `system.single.policies`: the analytic engine has no {p} model under renewal traffic");
                    }
                }
                System::Single(policies)
            }
            SystemFile::Network { topology, strategies } => {
                let network = CacheNetwork::from_path(resolve(&topology)).context("at `system.network.topology`")?;
                let strategies = match strategies {
                    None => vec![network.strategy()],
                    Some(list) if list.is_empty() => {
                        bail!("at `system.network.strategies`: at least one strategy is required")
                    }
                    Some(list) => list
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            s.parse::<Strategy>()
                                .with_context(|| format!("at `system.network.strategies[{i}]`"))
                        })
                        .collect::<Result<Vec<_>>>()?,
                };
                if file.engine.analytic() && !traffic.is_poisson() {
                    bail!("at `traffic`: the analytic network engine supports IRM traffic only");
                }
                if file.engine.sim() && !network.is_tree() {
                    bail!("at `system.network.topology`: the simulator supports tree topologies only");
                }
                System::Network { network, strategies }
            }
        };
        Ok(Self {
            engine: file.engine,
            system,
            traffic,
            popularity,
            capacities: file.capacities,
            sim,
            output: file.output.map(|p| resolve(&p)),
        })
    }
}

fn read_weights(path: &Path) -> Result<Popularity> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut weights = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let w: f64 = line
            .parse()
            .with_context(|| format!("{} line {}: invalid weight {line:?}", path.display(), n + 1))?;
        weights.push(w);
    }
    Ok(Popularity::from_weights(weights)?)
}
