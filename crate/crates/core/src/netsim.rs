//! Event-driven simulation of tree-shaped LRU cache networks.
//!
//! Every exogenous request enters the network at a node drawn according to
//! the exogenous shares and climbs the miss path until a cache holds the
//! object (or the repository serves it). The copy then travels back down
//! the path and the replication strategy decides which of the caches that
//! missed keep it:
//!
//! * LCE: all of them;
//! * LCP(q): each independently with probability `q`;
//! * LCD: only the one immediately below the server.
//!
//! A cache that missed and does not store the copy is left untouched: the
//! request passes through without refreshing anything. A hit moves the
//! object to the head of the serving cache's recency list.
//!
//! Caches are plain LRU lists. Warm-up and batches are counted in
//! exogenous requests, so every node shares the same measurement window.
//!
//! ```
//! use unicache::netsim::run_network_sim;
//! use unicache::network::{CacheNetwork, Strategy};
//! use unicache::sim::SimConfig;
//! use unicache::traffic::{Popularity, Traffic};
//!
//! let network = CacheNetwork::chain(2, 10, Strategy::Lcd).unwrap();
//! let pop = Popularity::zipf(0.8, 200).unwrap();
//! let report = run_network_sim(&network, &Traffic::irm(), &pop, &SimConfig::new(20_000, 7)).unwrap();
//! assert_eq!(
//!     report.exogenous_requests,
//!     report.nodes.iter().map(|n| n.total_hits()).sum::<u64>() + report.repository_fetches
//! );
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, WeightedAliasIndex};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::network::{CacheNetwork, Strategy};
use crate::sim::cache::LruList;
use crate::sim::{policy_rng, ArrivalStream, Recorder, Schedule, SimConfig, SimReport};
use crate::stats::BatchEstimate;
use crate::traffic::{Popularity, Traffic};

/// Network-wide counts for one batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkBatch {
    pub exogenous: u64,
    pub repository_fetches: u64,
}

/// Measurements from a network simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSimReport {
    pub strategy: String,
    pub seed: u64,
    /// Per-node measurements, in network order. A node's requests are its
    /// exogenous requests plus the misses forwarded to it.
    pub nodes: Vec<SimReport>,
    /// Measured exogenous requests per node.
    pub exogenous: Vec<u64>,
    /// Measured exogenous requests in total.
    pub exogenous_requests: u64,
    /// Measured requests that no cache could serve.
    pub repository_fetches: u64,
    pub batches: Vec<NetworkBatch>,
}

impl NetworkSimReport {
    /// Fraction of exogenous requests served by some cache.
    pub fn total_hit(&self) -> f64 {
        1.0 - self.repository_fetches as f64 / self.exogenous_requests as f64
    }

    /// Batch-means estimate of [`total_hit`](Self::total_hit).
    pub fn total_hit_estimate(&self) -> BatchEstimate {
        let ratios: Vec<f64> = self
            .batches
            .iter()
            .map(|b| 1.0 - b.repository_fetches as f64 / b.exogenous as f64)
            .collect();
        BatchEstimate::from_batches(&ratios)
    }

    /// Aggregate hit ratio of every node.
    pub fn node_hits(&self) -> Vec<f64> {
        self.nodes.iter().map(SimReport::aggregate_hit).collect()
    }
}

/// Where the misses of a node go: a cache (with probability `fraction`)
/// or else the repository.
#[derive(Debug, Clone, Copy)]
struct Parent {
    node: usize,
    fraction: f64,
}

/// Simulates a tree-shaped network of LRU caches.
///
/// Non-tree topologies are rejected. With renewal traffic each object's
/// stream is split among ingress nodes at random, so per-node streams are
/// thinned renewal processes.
pub fn run_network_sim(
    network: &CacheNetwork,
    traffic: &Traffic,
    popularity: &Popularity,
    config: &SimConfig,
) -> Result<NetworkSimReport> {
    if !network.is_tree() {
        return Err(Error::Topology(
            "the network simulator supports trees only (one parent per node, no cycles)".into(),
        ));
    }
    let catalog = popularity.catalog_size();
    config.validate(catalog)?;
    if config.requests == 0 {
        return Err(invalid("a simulation needs at least one request"));
    }
    let strategy = network.strategy();
    strategy.validate()?;
    let n = network.len();
    let parents: Vec<Option<Parent>> = (0..n)
        .map(|j| {
            network.outbound(j).first().map(|r| Parent {
                node: r.to,
                fraction: r.fraction,
            })
        })
        .collect();
    let ingress = WeightedAliasIndex::new(network.exogenous_shares().to_vec())
        .map_err(|e| invalid(format!("cannot sample exogenous shares: {e}")))?;
    let single_ingress = network.exogenous_shares().iter().filter(|&&s| s > 0.0).count() == 1;
    let first_ingress = network
        .exogenous_shares()
        .iter()
        .position(|&s| s > 0.0)
        .expect("shares sum to one");

    let mut caches: Vec<LruList> = network
        .nodes()
        .iter()
        .map(|node| LruList::new(node.capacity, catalog))
        .collect();
    let mut recorders: Vec<Recorder> = (0..n)
        .map(|_| Recorder::new(catalog, config, std::iter::empty()))
        .collect();
    let schedule = Schedule::new(config);
    let mut stream = ArrivalStream::new(traffic, popularity, config.seed)?;
    // Placement and replication decisions use their own streams, so an
    // ingress-only network consumes randomness exactly like a lone cache.
    let mut policy = policy_rng(config.seed);
    let mut routing = ChaCha8Rng::seed_from_u64(config.seed);
    routing.set_stream(2);

    let mut exogenous = vec![0u64; n];
    let mut batches: Vec<NetworkBatch> = Vec::with_capacity(config.batches);
    let mut repository_fetches = 0u64;
    let mut path: Vec<usize> = Vec::new();
    let mut end = 0.0;

    for index in 0..config.requests {
        let request = stream.next().expect("arrival streams are endless");
        let (m, time) = (request.object, request.time);
        end = time;
        let measuring = schedule.measuring(index);
        if schedule.opens_batch(index) {
            for r in &mut recorders {
                r.open_batch(time);
            }
            batches.push(NetworkBatch::default());
        }
        let start = if single_ingress {
            first_ingress
        } else {
            ingress.sample(&mut routing)
        };
        if measuring {
            exogenous[start] += 1;
            batches.last_mut().expect("batch opened").exogenous += 1;
        }

        // Climb until some cache holds the object.
        path.clear();
        let mut at = Some(start);
        let mut server = None;
        while let Some(j) = at {
            let hit = caches[j].contains(m);
            recorders[j].request(m, hit);
            if hit {
                caches[j].touch(m);
                server = Some(j);
                break;
            }
            path.push(j);
            at = parents[j].and_then(|p| {
                (p.fraction >= 1.0 || routing.gen::<f64>() < p.fraction).then_some(p.node)
            });
        }
        if server.is_none() && measuring {
            repository_fetches += 1;
            batches.last_mut().expect("batch opened").repository_fetches += 1;
        }

        // Replicate on the way back down.
        let store = |j: usize, caches: &mut [LruList], recorders: &mut [Recorder]| {
            if let Some(e) = caches[j].insert(m) {
                recorders[j].evict(e, time);
            }
            recorders[j].insert(m, time);
        };
        match strategy {
            Strategy::Lce => {
                for &j in &path {
                    store(j, &mut caches, &mut recorders);
                }
            }
            Strategy::Lcp { q } => {
                for &j in &path {
                    if q >= 1.0 || policy.gen::<f64>() < q {
                        store(j, &mut caches, &mut recorders);
                    }
                }
            }
            Strategy::Lcd => {
                if let Some(&j) = path.last() {
                    store(j, &mut caches, &mut recorders);
                }
            }
        }
    }

    let nodes = recorders
        .into_iter()
        .zip(&caches)
        .zip(network.nodes())
        .map(|((recorder, cache), node)| {
            recorder.finish(
                end,
                cache.iter().collect::<Vec<_>>(),
                "lru",
                node.capacity,
                config.seed,
                schedule.warmup(),
            )
        })
        .collect();
    Ok(NetworkSimReport {
        strategy: strategy.to_string(),
        seed: config.seed,
        nodes,
        exogenous_requests: exogenous.iter().sum(),
        exogenous,
        repository_fetches,
        batches,
    })
}
