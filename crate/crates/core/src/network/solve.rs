//! Characteristic-time solver for cache networks.
//!
//! Every cache gets one characteristic time, fixed by requiring its
//! expected occupancy to equal its capacity. Request rates into a cache
//! follow from the miss streams of the caches routing to it. The refined
//! approximation additionally conditions the hit probability at a cache on
//! where the request came from: a request forwarded by cache `j` certainly
//! missed there, so nothing arrived at `j` during its last `T_j` time
//! units, which shortens the window in which the object could have been
//! refreshed downstream.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::analytic::{solve_increasing, CharacteristicTimes, SolverOptions};
use crate::error::{invalid, Error, Result};
use crate::stats::neumaier_sum;
use crate::traffic::{Popularity, Traffic};

use super::{CacheNetwork, Strategy};

/// How arrivals at non-ingress caches are modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approximation {
    /// Conditional hit probabilities that account for the upstream cache
    /// having just missed.
    Refined,
    /// Every cache sees Poisson arrivals at its average rate, so its hit
    /// probability equals its occupancy.
    Naive,
}

/// Solution scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// One feed-forward sweep when possible, otherwise the fixed point.
    Auto,
    /// One pass from the ingress caches towards the repository; needs an
    /// acyclic network and a strategy without feedback (LCE or LCP).
    Sweep,
    /// Damped global fixed point over all caches.
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkOptions {
    pub approximation: Approximation,
    pub method: Method,
    /// Solve structurally identical caches once (e.g. all caches of one
    /// tree level) and share the result.
    pub deduplicate: bool,
    /// Weight of the previous iterate in the fixed point.
    pub damping: f64,
    /// Fixed-point stopping rule on the largest change of any probability
    /// or (relative) characteristic time.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Per-cache capacity equation.
    pub solver: SolverOptions,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            approximation: Approximation::Refined,
            method: Method::Auto,
            deduplicate: true,
            damping: 0.5,
            tolerance: 1e-8,
            max_iterations: 10_000,
            solver: SolverOptions::default(),
        }
    }
}

impl NetworkOptions {
    pub fn naive() -> Self {
        Self {
            approximation: Approximation::Naive,
            ..Self::default()
        }
    }
}

/// Model output for one cache.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSolution {
    pub times: CharacteristicTimes,
    /// Total request rate of each object at this cache.
    pub rate: Vec<f64>,
    pub p_in: Vec<f64>,
    /// Hit probability of each object, averaged over all requests reaching
    /// this cache.
    pub p_hit: Vec<f64>,
    /// Fraction of requests reaching this cache that hit.
    pub aggregate_hit: f64,
}

impl NodeSolution {
    pub fn time(&self) -> f64 {
        self.times.stages[0]
    }
}

/// Model output for a whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution {
    pub strategy: Strategy,
    pub approximation: Approximation,
    /// Per-cache results, aligned with the network's nodes. Structurally
    /// identical caches share one allocation.
    pub nodes: Vec<Arc<NodeSolution>>,
    /// Fraction of exogenous requests served by some cache.
    pub total_hit: f64,
    /// Outer iterations (1 for a feed-forward sweep).
    pub iterations: usize,
    /// Final fixed-point change (0 for a sweep).
    pub residual: f64,
    /// Number of caches actually solved after deduplication.
    pub distinct_nodes: usize,
}

impl NetworkSolution {
    pub fn node(&self, i: usize) -> &NodeSolution {
        &self.nodes[i]
    }

    /// Characteristic time of every cache.
    pub fn times(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.time()).collect()
    }

    /// Aggregate hit ratio of every cache.
    pub fn node_hits(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.aggregate_hit).collect()
    }
}

/// Solves a network under IRM exogenous demand with default options.
pub fn solve_network(network: &CacheNetwork, traffic: &Traffic, popularity: &Popularity) -> Result<NetworkSolution> {
    solve_network_with(network, traffic, popularity, &NetworkOptions::default())
}

/// Solves a two-cache tandem: all demand enters cache 1, whose misses go
/// to cache 2, whose misses go to the repository.
pub fn solve_tandem(
    strategy: Strategy,
    traffic: &Traffic,
    popularity: &Popularity,
    c1: usize,
    c2: usize,
    options: &NetworkOptions,
) -> Result<NetworkSolution> {
    let network = CacheNetwork::chain_with_capacities(&[c1, c2], strategy)?;
    solve_network_with(&network, traffic, popularity, options)
}

pub fn solve_network_with(
    network: &CacheNetwork,
    traffic: &Traffic,
    popularity: &Popularity,
    options: &NetworkOptions,
) -> Result<NetworkSolution> {
    if !traffic.is_poisson() {
        return Err(Error::UnsupportedCombination {
            policy: format!("network with {}", network.strategy()),
            traffic: traffic.describe(),
        });
    }
    if !(0.0..1.0).contains(&options.damping) {
        return Err(invalid(format!("damping must be in [0, 1), got {}", options.damping)));
    }
    let strategy = network.strategy();
    if strategy == Strategy::Lcd && !network.is_tree() {
        return Err(Error::Topology(
            "LCD is only modeled on trees (each cache forwards misses to at most one cache)".into(),
        ));
    }
    let graph = ClassGraph::build(network, options.deduplicate);
    let acyclic = graph.order.is_some();
    let sweep = match options.method {
        Method::Auto => acyclic && strategy != Strategy::Lcd,
        Method::Sweep => {
            if !acyclic || strategy == Strategy::Lcd {
                return Err(invalid("a single sweep needs an acyclic network and LCE or LCP"));
            }
            true
        }
        Method::FixedPoint => false,
    };
    let ctx = Context {
        graph: &graph,
        strategy,
        approximation: options.approximation,
        popularity,
        total_rate: traffic.total_rate,
        solver: options.solver,
    };
    let (states, iterations, residual) = if sweep {
        (ctx.sweep()?, 1, 0.0)
    } else {
        ctx.fixed_point(options)?
    };
    Ok(ctx.assemble(network, states, iterations, residual))
}

/// Caches grouped into classes of structurally identical nodes.
#[derive(Debug)]
struct ClassGraph {
    class_of: Vec<usize>,
    capacity: Vec<usize>,
    exogenous: Vec<f64>,
    repository_fraction: Vec<f64>,
    /// One entry per inbound route of the class representative.
    senders: Vec<Vec<(usize, f64)>>,
    /// Class the representative forwards to, with the routed fraction
    /// (trees only; used by LCD).
    parent: Vec<Option<(usize, f64)>>,
    /// Sender-before-receiver order of the classes, if acyclic.
    order: Option<Vec<usize>>,
}

impl ClassGraph {
    fn build(network: &CacheNetwork, deduplicate: bool) -> Self {
        let n = network.len();
        let class_of = if deduplicate {
            Self::symmetry_classes(network)
        } else {
            None
        }
        .unwrap_or_else(|| (0..n).collect());
        let classes = class_of.iter().max().map_or(0, |c| c + 1);
        let mut rep = vec![usize::MAX; classes];
        for (i, c) in class_of.iter().enumerate() {
            if rep[*c] == usize::MAX {
                rep[*c] = i;
            }
        }
        let senders: Vec<Vec<(usize, f64)>> = rep
            .iter()
            .map(|&i| network.inbound(i).iter().map(|r| (class_of[r.from], r.fraction)).collect())
            .collect();
        let parent = rep
            .iter()
            .map(|&i| match network.outbound(i) {
                [r] => Some((class_of[r.to], r.fraction)),
                _ => None,
            })
            .collect();
        let order = Self::class_order(&senders);
        Self {
            capacity: rep.iter().map(|&i| network.nodes()[i].capacity).collect(),
            exogenous: rep.iter().map(|&i| network.exogenous_shares()[i]).collect(),
            repository_fraction: rep.iter().map(|&i| network.repository_fraction(i)).collect(),
            class_of,
            senders,
            parent,
            order,
        }
    }

    /// Classes of nodes with identical upstream subtrees and identical
    /// downstream context. Only defined for trees; other networks return
    /// `None` and every node is its own class.
    fn symmetry_classes(network: &CacheNetwork) -> Option<Vec<usize>> {
        if !network.is_tree() {
            return None;
        }
        let order = network.topological_order()?;
        let n = network.len();
        let mut ids: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut intern = |sig: Vec<u64>| {
            let next = ids.len();
            *ids.entry(sig).or_insert(next)
        };
        // Upward pass: a node is characterized by its own parameters and
        // the multiset of its senders' classes.
        let mut up = vec![0usize; n];
        for &i in &order {
            let mut children: Vec<(u64, u64)> = network
                .inbound(i)
                .iter()
                .map(|r| (up[r.from] as u64, r.fraction.to_bits()))
                .collect();
            children.sort_unstable();
            let mut sig = vec![
                0,
                network.nodes()[i].capacity as u64,
                network.exogenous_shares()[i].to_bits(),
                network.repository_fraction(i).to_bits(),
            ];
            sig.extend(children.into_iter().flat_map(|(c, f)| [c, f]));
            up[i] = intern(sig);
        }
        // Downward pass: refine by the class of the node forwarded to.
        let mut down = vec![0usize; n];
        for &i in order.iter().rev() {
            let parent = match network.outbound(i) {
                [r] => [down[r.to] as u64 + 1, r.fraction.to_bits()],
                _ => [0, 0],
            };
            down[i] = intern(vec![1, up[i] as u64, parent[0], parent[1]]);
        }
        // Renumber densely in node order.
        let mut dense = HashMap::new();
        Some(
            down.iter()
                .map(|c| {
                    let next = dense.len();
                    *dense.entry(*c).or_insert(next)
                })
                .collect(),
        )
    }

    fn class_order(senders: &[Vec<(usize, f64)>]) -> Option<Vec<usize>> {
        let k = senders.len();
        let mut receivers = vec![Vec::new(); k];
        let mut indegree = vec![0usize; k];
        for (c, list) in senders.iter().enumerate() {
            let mut seen: Vec<usize> = list.iter().map(|(s, _)| *s).collect();
            seen.sort_unstable();
            seen.dedup();
            for s in seen {
                receivers[s].push(c);
                indegree[c] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..k).filter(|c| indegree[*c] == 0).collect();
        let mut order = Vec::with_capacity(k);
        while let Some(c) = queue.pop_front() {
            order.push(c);
            for &r in &receivers[c] {
                indegree[r] -= 1;
                if indegree[r] == 0 {
                    queue.push_back(r);
                }
            }
        }
        (order.len() == k).then_some(order)
    }

    fn len(&self) -> usize {
        self.capacity.len()
    }
}

/// Iterate of one class.
#[derive(Debug, Clone)]
struct State {
    time: f64,
    rate: Vec<f64>,
    p_in: Vec<f64>,
    p_hit: Vec<f64>,
    /// Hit probability of requests forwarded by each sender slot.
    conditional: Vec<Vec<f64>>,
}

impl State {
    /// Starting point of the fixed point: empty caches that pass every
    /// request through, and (for LCD) parents that always serve.
    fn initial(senders: usize, objects: usize) -> Self {
        Self {
            time: 0.0,
            rate: vec![0.0; objects],
            p_in: vec![0.0; objects],
            p_hit: vec![0.0; objects],
            conditional: vec![vec![1.0; objects]; senders],
        }
    }

    fn blend(&mut self, new: &State, keep: f64) -> f64 {
        let mut change: f64 = ((new.time - self.time).abs() / new.time.max(f64::MIN_POSITIVE)).min(1.0);
        self.time = keep * self.time + (1.0 - keep) * new.time;
        let mut mix = |old: &mut [f64], new: &[f64]| {
            for (o, n) in old.iter_mut().zip(new) {
                change = change.max((n - *o).abs());
                *o = keep * *o + (1.0 - keep) * n;
            }
        };
        mix(&mut self.p_in, &new.p_in);
        mix(&mut self.p_hit, &new.p_hit);
        for (o, n) in self.conditional.iter_mut().zip(&new.conditional) {
            mix(o, n);
        }
        self.rate.clone_from(&new.rate);
        change
    }
}

struct Context<'a> {
    graph: &'a ClassGraph,
    strategy: Strategy,
    approximation: Approximation,
    popularity: &'a Popularity,
    total_rate: f64,
    solver: SolverOptions,
}

/// `(1 - e^{-x}, e^{-x})` without cancellation for small `x`.
fn split_exp(x: f64) -> (f64, f64) {
    (-(-x).exp_m1(), (-x).exp())
}

impl Context<'_> {
    fn objects(&self) -> usize {
        self.popularity.catalog_size()
    }

    fn sweep(&self) -> Result<Vec<State>> {
        let order = self.graph.order.as_ref().expect("sweep needs an order");
        let mut states: Vec<Option<State>> = vec![None; self.graph.len()];
        for &c in order {
            let view: Vec<&State> = self.graph.senders[c]
                .iter()
                .map(|(s, _)| states[*s].as_ref().expect("sender solved first"))
                .collect();
            let new = self.update(c, &view, None, None)?;
            states[c] = Some(new);
        }
        Ok(states.into_iter().map(|s| s.expect("all classes solved")).collect())
    }

    /// Damped Gauss–Seidel iteration. Sweeps alternate between
    /// sender-first and receiver-first order, so information travels the
    /// whole network in both directions (rates flow towards the
    /// repository, LCD's parent hit probabilities flow away from it) within
    /// two sweeps. Once a sweep changes nothing by more than the tolerance,
    /// one undamped sweep produces the returned state, so every capacity
    /// equation holds at its own solver precision.
    fn fixed_point(&self, options: &NetworkOptions) -> Result<(Vec<State>, usize, f64)> {
        let objects = self.objects();
        let n = self.graph.len();
        let mut states: Vec<State> = (0..n)
            .map(|c| State::initial(self.graph.senders[c].len(), objects))
            .collect();
        self.pass_through_rates(&mut states)?;
        let order = self.graph.order.clone().unwrap_or_else(|| (0..n).collect());
        let mut change = f64::INFINITY;
        for iteration in 1..=options.max_iterations {
            let last = change <= options.tolerance;
            let keep = if last { 0.0 } else { options.damping };
            let mut sweep_change: f64 = 0.0;
            for idx in 0..n {
                let c = if iteration % 2 == 1 { order[idx] } else { order[n - 1 - idx] };
                let new = {
                    let view: Vec<&State> = self.graph.senders[c].iter().map(|(s, _)| &states[*s]).collect();
                    self.update(c, &view, Some(&states[c]), Some(&states))?
                };
                sweep_change = sweep_change.max(states[c].blend(&new, keep));
            }
            if last {
                return Ok((states, iteration, sweep_change));
            }
            change = sweep_change;
        }
        Err(Error::NonConvergence {
            what: format!("{} network fixed point", self.strategy),
            iterations: options.max_iterations,
            residual: change,
        })
    }

    /// Fills in the request rates seen when no cache ever hits, so that the
    /// first fixed-point iteration starts from fully loaded caches.
    fn pass_through_rates(&self, states: &mut [State]) -> Result<()> {
        let probs = self.popularity.probabilities();
        for _ in 0..100_000 {
            let mut change: f64 = 0.0;
            for c in 0..self.graph.len() {
                let exo = self.graph.exogenous[c] * self.total_rate;
                for (m, p) in probs.iter().enumerate() {
                    let inflow: f64 = self.graph.senders[c].iter().map(|(s, f)| f * states[*s].rate[m]).sum();
                    let new = exo * p + inflow;
                    change = change.max((new - states[c].rate[m]).abs() / new.max(f64::MIN_POSITIVE));
                    states[c].rate[m] = new;
                }
            }
            if change <= 1e-12 {
                return Ok(());
            }
        }
        Err(Error::NonConvergence {
            what: "pass-through request rates".into(),
            iterations: 100_000,
            residual: f64::NAN,
        })
    }

    /// LCD: probability that the cache this class forwards to serves a
    /// request it forwarded (the repository always does).
    fn parent_hit(&self, c: usize, states: &[State], m: usize) -> f64 {
        match self.graph.parent[c] {
            None => 1.0,
            Some((p, fraction)) => {
                let slot = self.graph.senders[p]
                    .iter()
                    .position(|(s, _)| *s == c)
                    .expect("child listed among its parent's senders");
                fraction * states[p].conditional[slot][m] + (1.0 - fraction)
            }
        }
    }

    /// One application of the model equations to class `c`, given the
    /// current iterates of its senders (and, for the fixed point, of every
    /// class).
    fn update(&self, c: usize, senders: &[&State], previous: Option<&State>, all: Option<&[State]>) -> Result<State> {
        let g = self.graph;
        let objects = self.objects();
        let probs = self.popularity.probabilities();
        let slots = &g.senders[c];
        let exo_share = g.exogenous[c] * self.total_rate;

        let exo: Vec<f64> = probs.iter().map(|p| exo_share * p).collect();
        let mut rate = exo.clone();
        for ((_, f), s) in slots.iter().zip(senders) {
            for m in 0..objects {
                rate[m] += f * s.rate[m] * (1.0 - s.p_hit[m]);
            }
        }

        // LCD bookkeeping: probability that the last request at this cache
        // left the object here (it hit, or the parent served it).
        let lcd = self.strategy == Strategy::Lcd;
        let parent_hit: Vec<f64> = if lcd {
            let states = all.expect("LCD is solved by fixed point");
            (0..objects).map(|m| self.parent_hit(c, states, m)).collect()
        } else {
            Vec::new()
        };
        let leaf_like = slots.is_empty() || self.approximation == Approximation::Naive;
        let retain: Vec<f64> = if lcd && !leaf_like {
            let prev = previous.expect("LCD is solved by fixed point");
            (0..objects)
                .map(|m| prev.p_hit[m] + (1.0 - prev.p_hit[m]) * parent_hit[m])
                .collect()
        } else {
            Vec::new()
        };

        let occupancy = |m: usize, t: f64| -> f64 {
            let (f, e) = split_exp(rate[m] * t);
            match self.strategy {
                Strategy::Lce => f,
                Strategy::Lcp { q } => q * f / (e + q * f),
                Strategy::Lcd if leaf_like => {
                    let h = parent_hit[m];
                    f * h / (e + f * h)
                }
                Strategy::Lcd => f * retain[m],
            }
        };

        let capacity = g.capacity[c] as f64;
        let reachable: f64 = match self.strategy {
            Strategy::Lcd if !leaf_like => (0..objects).filter(|m| rate[*m] > 0.0).map(|m| retain[m]).sum(),
            Strategy::Lcd => (0..objects).filter(|m| rate[*m] > 0.0 && parent_hit[*m] > 0.0).count() as f64,
            _ => rate.iter().filter(|r| **r > 0.0).count() as f64,
        };
        if reachable <= capacity {
            return Err(invalid(format!(
                "a cache of capacity {} can hold at most {reachable} of the objects reaching it",
                g.capacity[c]
            )));
        }
        let start = previous.map_or(0.0, |p| 2.0 * p.time);
        let initial = if start > 0.0 { start } else { capacity / rate.iter().sum::<f64>().max(f64::MIN_POSITIVE) };
        let root = solve_increasing(
            "network characteristic time",
            |t| neumaier_sum((0..objects).map(|m| occupancy(m, t))) - capacity,
            initial,
            self.solver.max_iterations,
        )?;
        let time = root.x;
        let p_in: Vec<f64> = (0..objects).map(|m| occupancy(m, time)).collect();
        let residual = neumaier_sum(p_in.iter().copied()) - capacity;
        if residual.abs() > self.solver.tolerance * capacity {
            return Err(Error::NonConvergence {
                what: "network characteristic time".into(),
                iterations: root.iterations,
                residual,
            });
        }

        let mut conditional = vec![vec![0.0; objects]; slots.len()];
        let mut p_hit = vec![0.0; objects];
        for m in 0..objects {
            if rate[m] <= 0.0 {
                continue;
            }
            if self.approximation == Approximation::Naive || slots.is_empty() {
                // Poisson arrivals: hits see the time average.
                p_hit[m] = p_in[m];
                for cond in &mut conditional {
                    cond[m] = p_in[m];
                }
                continue;
            }
            // Rate of requests that reach this cache from each sender while
            // the sender does not hold the object.
            let flows: Vec<f64> = slots
                .iter()
                .zip(senders)
                .map(|((_, f), s)| f * s.rate[m] * (1.0 - s.p_in[m]))
                .collect();
            let all_sources = (flows.iter().sum::<f64>() + exo[m]) * time;
            let from_exo = match self.strategy {
                Strategy::Lce => split_exp(all_sources).0,
                Strategy::Lcp { q } => {
                    let b = split_exp(all_sources).0;
                    q * b / (1.0 - b + q * b)
                }
                Strategy::Lcd => split_exp(all_sources).0 * retain[m],
            };
            let mut weighted = exo[m] * from_exo;
            for (k, ((_, f), s)) in slots.iter().zip(senders).enumerate() {
                let others = all_sources - flows[k] * time;
                let gap = (time - s.time).max(0.0);
                let hit = match self.strategy {
                    Strategy::Lce => split_exp(others + flows[k] * gap).0,
                    Strategy::Lcp { q } => {
                        let own = if time > s.time {
                            let (a, stay) = split_exp(s.rate[m] * s.time);
                            (1.0 - q) * a + (stay + q * a) * split_exp(flows[k] * gap).0
                        } else {
                            (1.0 - q) * split_exp(s.rate[m] * time).0
                        };
                        let b = 1.0 - (1.0 - own) * (-others).exp();
                        q * b / (1.0 - b + q * b)
                    }
                    Strategy::Lcd => {
                        let refreshed = split_exp(others + flows[k] * gap).0;
                        let a = split_exp(s.rate[m] * time.min(s.time)).0;
                        let h = parent_hit[m];
                        (refreshed * retain[m] + a * h) / (1.0 + a * h)
                    }
                };
                conditional[k][m] = hit;
                weighted += f * s.rate[m] * (1.0 - s.p_hit[m]) * hit;
            }
            p_hit[m] = (weighted / rate[m]).clamp(0.0, 1.0);
        }
        Ok(State {
            time,
            rate,
            p_in,
            p_hit,
            conditional,
        })
    }

    fn assemble(&self, network: &CacheNetwork, states: Vec<State>, iterations: usize, residual: f64) -> NetworkSolution {
        let g = self.graph;
        let mut misses_to_repository = vec![0.0; g.len()];
        let nodes: Vec<Arc<NodeSolution>> = states
            .into_iter()
            .enumerate()
            .map(|(c, s)| {
                let requests = neumaier_sum(s.rate.iter().copied());
                let hits = neumaier_sum(s.rate.iter().zip(&s.p_hit).map(|(r, h)| r * h));
                misses_to_repository[c] = g.repository_fraction[c] * (requests - hits);
                Arc::new(NodeSolution {
                    times: CharacteristicTimes::deterministic(vec![s.time]),
                    aggregate_hit: if requests > 0.0 { hits / requests } else { 0.0 },
                    rate: s.rate,
                    p_in: s.p_in,
                    p_hit: s.p_hit,
                })
            })
            .collect();
        let repository = neumaier_sum(g.class_of.iter().map(|c| misses_to_repository[*c]));
        NetworkSolution {
            strategy: network.strategy(),
            approximation: self.approximation,
            nodes: g.class_of.iter().map(|c| Arc::clone(&nodes[*c])).collect(),
            total_hit: 1.0 - repository / self.total_rate,
            iterations,
            residual,
            distinct_nodes: g.len(),
        }
    }
}
