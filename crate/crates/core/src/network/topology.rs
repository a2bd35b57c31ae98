//! Cache-network description: nodes, routing of miss streams, exogenous
//! demand and the replication strategy.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::Policy;
use crate::error::{invalid, Error, Result};

/// What happens on the backward path after a request is served.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Leave a copy everywhere: every cache on the path stores the object.
    Lce,
    /// Leave a copy probabilistically: each cache on the path stores the
    /// object independently with probability `q`.
    Lcp { q: f64 },
    /// Leave a copy down: only the cache just below the one that served the
    /// request stores the object.
    Lcd,
}

impl Strategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Strategy::Lcp { q } if !(q > 0.0 && q <= 1.0) => {
                Err(invalid(format!("LCP probability must be in (0, 1], got {q}")))
            }
            _ => Ok(()),
        }
    }

    /// The single-cache policy every node runs under this strategy: LCP
    /// with LRU caches behaves as LCE with q-LRU caches.
    pub fn node_policy(&self) -> Policy {
        match *self {
            Strategy::Lcp { q } => Policy::QLru { q },
            Strategy::Lce | Strategy::Lcd => Policy::Lru,
        }
    }

    /// Short name without parameters.
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Lce => "lce",
            Strategy::Lcp { .. } => "lcp",
            Strategy::Lcd => "lcd",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Lcp { q } => write!(f, "lcp({q})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// Accepts `lce`, `lcd`, `lcp(0.3)` and `lcp:0.3`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let strategy = match lower.as_str() {
            "lce" => Strategy::Lce,
            "lcd" => Strategy::Lcd,
            _ => {
                let q = lower
                    .strip_prefix("lcp")
                    .and_then(|r| {
                        r.strip_prefix('(')
                            .and_then(|r| r.strip_suffix(')'))
                            .or_else(|| r.strip_prefix(':'))
                    })
                    .ok_or_else(|| invalid(format!("unknown strategy {s:?}")))?;
                let q = q
                    .trim()
                    .parse()
                    .map_err(|_| invalid(format!("bad q in strategy {s:?}")))?;
                Strategy::Lcp { q }
            }
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

/// One cache of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub capacity: usize,
}

/// Miss-stream routing: a fraction of the misses at `from` is forwarded to
/// `to`. The remaining mass of every node goes to the repository.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Route {
    pub from: usize,
    pub to: usize,
    pub fraction: f64,
}

/// A network of caches in front of a repository that holds every object.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheNetwork {
    nodes: Vec<Node>,
    routes: Vec<Route>,
    /// Share of the total exogenous request rate arriving at each node.
    exogenous: Vec<f64>,
    strategy: Strategy,
    repository: String,
    /// `inbound[i]`: routes ending at `i`.
    inbound: Vec<Vec<Route>>,
    /// `outbound[j]`: routes leaving `j`.
    outbound: Vec<Vec<Route>>,
}

impl CacheNetwork {
    /// Builds and validates a network. `exogenous` holds one share per node
    /// and must sum to one.
    pub fn new(
        nodes: Vec<Node>,
        routes: Vec<Route>,
        exogenous: Vec<f64>,
        strategy: Strategy,
        repository: impl Into<String>,
    ) -> Result<Self> {
        strategy.validate()?;
        let n = nodes.len();
        if n == 0 {
            return Err(Error::Topology("a network needs at least one cache".into()));
        }
        let repository = repository.into();
        let mut ids = HashMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if node.capacity == 0 {
                return Err(Error::Topology(format!("node {:?} has zero capacity", node.id)));
            }
            if node.id == repository {
                return Err(Error::Topology(format!("node id {:?} clashes with the repository", node.id)));
            }
            if ids.insert(node.id.as_str(), i).is_some() {
                return Err(Error::Topology(format!("duplicate node id {:?}", node.id)));
            }
        }
        if exogenous.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: exogenous.len(),
            });
        }
        if exogenous.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::Topology("exogenous shares must be finite and >= 0".into()));
        }
        let total: f64 = exogenous.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Topology(format!("exogenous shares sum to {total}, expected 1")));
        }
        let mut inbound = vec![Vec::new(); n];
        let mut outbound = vec![Vec::new(); n];
        for r in &routes {
            if r.from >= n || r.to >= n {
                return Err(Error::Topology(format!("route {} -> {} names an unknown node", r.from, r.to)));
            }
            if r.from == r.to {
                return Err(Error::Topology(format!("node {:?} routes to itself", nodes[r.from].id)));
            }
            if !(r.fraction > 0.0 && r.fraction <= 1.0) {
                return Err(Error::Topology(format!(
                    "route {:?} -> {:?} has fraction {}, expected (0, 1]",
                    nodes[r.from].id, nodes[r.to].id, r.fraction
                )));
            }
            if outbound[r.from].iter().any(|o: &Route| o.to == r.to) {
                return Err(Error::Topology(format!(
                    "duplicate route {:?} -> {:?}",
                    nodes[r.from].id, nodes[r.to].id
                )));
            }
            inbound[r.to].push(*r);
            outbound[r.from].push(*r);
        }
        for (j, out) in outbound.iter().enumerate() {
            let mass: f64 = out.iter().map(|r| r.fraction).sum();
            if mass > 1.0 + 1e-12 {
                return Err(Error::Topology(format!(
                    "routing fractions out of {:?} sum to {mass} > 1",
                    nodes[j].id
                )));
            }
        }
        let network = Self {
            nodes,
            routes,
            exogenous,
            strategy,
            repository,
            inbound,
            outbound,
        };
        network.check_repository_reachable()?;
        Ok(network)
    }

    /// A chain `0 -> 1 -> ... -> n-1 -> repository` with all demand at
    /// node 0.
    pub fn chain(length: usize, capacity: usize, strategy: Strategy) -> Result<Self> {
        Self::chain_with_capacities(&vec![capacity; length], strategy)
    }

    /// A chain with per-node capacities, first (ingress) node first.
    pub fn chain_with_capacities(capacities: &[usize], strategy: Strategy) -> Result<Self> {
        let n = capacities.len();
        let nodes = capacities
            .iter()
            .enumerate()
            .map(|(i, c)| Node {
                id: format!("c{}", i + 1),
                capacity: *c,
            })
            .collect();
        let routes = (1..n)
            .map(|i| Route {
                from: i - 1,
                to: i,
                fraction: 1.0,
            })
            .collect();
        let mut exogenous = vec![0.0; n];
        if let Some(first) = exogenous.first_mut() {
            *first = 1.0;
        }
        Self::new(nodes, routes, exogenous, strategy, "repository")
    }

    /// A complete `arity`-ary tree with `levels` levels (the root is level
    /// 1). Leaves forward misses to their parent, the root to the
    /// repository, and demand is spread evenly over the leaves. Node 0 is
    /// the root; children of node `i` are `arity*i + 1 ..= arity*i + arity`.
    pub fn tree(arity: usize, levels: usize, capacity: usize, strategy: Strategy) -> Result<Self> {
        if arity == 0 || levels == 0 {
            return Err(invalid("a tree needs arity >= 1 and at least one level"));
        }
        let mut count = 0usize;
        let mut width = 1usize;
        let mut first_leaf = 0usize;
        for level in 0..levels {
            if level == levels - 1 {
                first_leaf = count;
            }
            count = count
                .checked_add(width)
                .ok_or_else(|| invalid("tree too large"))?;
            width = width.checked_mul(arity).ok_or_else(|| invalid("tree too large"))?;
        }
        let nodes = (0..count)
            .map(|i| Node {
                id: format!("n{i}"),
                capacity,
            })
            .collect();
        let routes = (1..count)
            .map(|i| Route {
                from: i,
                to: (i - 1) / arity,
                fraction: 1.0,
            })
            .collect();
        let leaves = count - first_leaf;
        let exogenous = (0..count)
            .map(|i| if i >= first_leaf { 1.0 / leaves as f64 } else { 0.0 })
            .collect();
        Self::new(nodes, routes, exogenous, strategy, "repository")
    }

    /// Same network with every cache resized to `capacity`.
    pub fn with_uniform_capacity(mut self, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Topology("capacity must be at least 1".into()));
        }
        for node in &mut self.nodes {
            node.capacity = capacity;
        }
        Ok(self)
    }

    /// Same network under another replication strategy.
    pub fn with_strategy(mut self, strategy: Strategy) -> Result<Self> {
        strategy.validate()?;
        self.strategy = strategy;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn exogenous_shares(&self) -> &[f64] {
        &self.exogenous
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn repository(&self) -> &str {
        &self.repository
    }

    /// Routes ending at node `i`.
    pub fn inbound(&self, i: usize) -> &[Route] {
        &self.inbound[i]
    }

    /// Routes leaving node `j`.
    pub fn outbound(&self, j: usize) -> &[Route] {
        &self.outbound[j]
    }

    /// Fraction of node `j`'s misses sent straight to the repository.
    pub fn repository_fraction(&self, j: usize) -> f64 {
        (1.0 - self.outbound[j].iter().map(|r| r.fraction).sum::<f64>()).max(0.0)
    }

    /// Index of the node with the given id.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// A topological order (senders before receivers), or `None` if the
    /// routing graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indegree: Vec<usize> = self.inbound.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|i| indegree[*i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(j) = queue.pop_front() {
            order.push(j);
            for r in &self.outbound[j] {
                indegree[r.to] -= 1;
                if indegree[r.to] == 0 {
                    queue.push_back(r.to);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Whether every node forwards its misses to at most one cache, i.e.
    /// the routing graph is a forest of trees rooted at the repository.
    pub fn is_tree(&self) -> bool {
        self.outbound.iter().all(|o| o.len() <= 1) && self.topological_order().is_some()
    }

    /// Every node must have a miss path that ends at the repository;
    /// otherwise misses circulate forever and the rate equations are
    /// singular.
    fn check_repository_reachable(&self) -> Result<()> {
        let n = self.len();
        let mut escapes: Vec<bool> = (0..n).map(|j| self.repository_fraction(j) > 1e-12).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|j| escapes[*j]).collect();
        while let Some(i) = queue.pop_front() {
            for r in &self.inbound[i] {
                if !escapes[r.from] {
                    escapes[r.from] = true;
                    queue.push_back(r.from);
                }
            }
        }
        let trapped: Vec<&str> = (0..n)
            .filter(|j| !escapes[*j])
            .map(|j| self.nodes[j].id.as_str())
            .collect();
        if trapped.is_empty() {
            Ok(())
        } else {
            Err(Error::SingularRouting(format!(
                "misses from {trapped:?} can never reach the repository"
            )))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TopologyFile = serde_json::from_str(text)?;
        file.into_network()
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TopologyFile::from_network(self))?)
    }
}

/// On-disk topology format.
///
/// ```json
/// {
///   "nodes": [{"id": "edge", "capacity": 100}, {"id": "core", "capacity": 100}],
///   "edges": [{"from": "edge", "to": "core", "fraction": 1.0}],
///   "exogenous": [{"node": "edge", "share_of_total_rate": 1.0}],
///   "strategy": "lcp(0.3)",
///   "repository": "origin"
/// }
/// ```
///
/// Node entries may also carry `policy` (and `q`); it must match the policy
/// implied by the strategy. Edges may point at the repository id, which is
/// the same as leaving that mass unrouted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    pub nodes: Vec<NodeEntry>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
    pub exogenous: Vec<ExogenousEntry>,
    pub strategy: String,
    #[serde(default = "default_repository")]
    pub repository: String,
}

fn default_repository() -> String {
    "repository".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: String,
    pub capacity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: String,
    pub to: String,
    #[serde(default = "one")]
    pub fraction: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExogenousEntry {
    pub node: String,
    pub share_of_total_rate: f64,
}

impl TopologyFile {
    pub fn into_network(self) -> Result<CacheNetwork> {
        let strategy: Strategy = self.strategy.parse()?;
        let expected = strategy.node_policy();
        let index: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        for node in &self.nodes {
            let declared = match (&node.policy, node.q) {
                (None, None) => continue,
                (Some(p), None) => p.parse::<Policy>()?,
                (Some(p), Some(q)) => {
                    let base = p.to_ascii_lowercase().replace(['-', '_'], "");
                    if base != "qlru" {
                        return Err(Error::Topology(format!("node {:?}: q given for policy {p:?}", node.id)));
                    }
                    Policy::QLru { q }
                }
                (None, Some(q)) => Policy::QLru { q },
            };
            if declared != expected {
                return Err(Error::Topology(format!(
                    "node {:?} runs {declared} but strategy {strategy} requires {expected}",
                    node.id
                )));
            }
        }
        let lookup = |id: &str, what: &str| -> Result<usize> {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::Topology(format!("{what} refers to unknown node {id:?}")))
        };
        let mut routes = Vec::new();
        for e in &self.edges {
            let from = lookup(&e.from, "edge")?;
            if e.to == self.repository {
                continue;
            }
            routes.push(Route {
                from,
                to: lookup(&e.to, "edge")?,
                fraction: e.fraction,
            });
        }
        let mut exogenous = vec![0.0; self.nodes.len()];
        for x in &self.exogenous {
            exogenous[lookup(&x.node, "exogenous demand")?] += x.share_of_total_rate;
        }
        let nodes = self
            .nodes
            .into_iter()
            .map(|n| Node {
                id: n.id,
                capacity: n.capacity,
            })
            .collect();
        CacheNetwork::new(nodes, routes, exogenous, strategy, self.repository)
    }

    pub fn from_network(network: &CacheNetwork) -> Self {
        let id = |i: usize| network.nodes[i].id.clone();
        let policy = network.strategy.node_policy();
        Self {
            nodes: network
                .nodes
                .iter()
                .map(|n| NodeEntry {
                    id: n.id.clone(),
                    capacity: n.capacity,
                    policy: Some(match policy {
                        Policy::QLru { .. } => "qlru".to_string(),
                        other => other.to_string(),
                    }),
                    q: match policy {
                        Policy::QLru { q } => Some(q),
                        _ => None,
                    },
                })
                .collect(),
            edges: network
                .routes
                .iter()
                .map(|r| EdgeEntry {
                    from: id(r.from),
                    to: id(r.to),
                    fraction: r.fraction,
                })
                .collect(),
            exogenous: network
                .exogenous
                .iter()
                .enumerate()
                .filter(|(_, s)| **s > 0.0)
                .map(|(i, s)| ExogenousEntry {
                    node: id(i),
                    share_of_total_rate: *s,
                })
                .collect(),
            strategy: network.strategy.to_string(),
            repository: network.repository.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_level_quaternary_tree_has_1365_nodes() {
        let t = CacheNetwork::tree(4, 6, 10, Strategy::Lce).unwrap();
        assert_eq!(t.len(), 1 + 4 + 16 + 64 + 256 + 1024);
        assert_eq!(t.exogenous_shares().iter().filter(|s| **s > 0.0).count(), 1024);
        assert!(t.is_tree());
        assert_eq!(t.repository_fraction(0), 1.0);
        assert_eq!(t.inbound(0).len(), 4);
    }

    #[test]
    fn chain_is_a_tree_in_order() {
        let c = CacheNetwork::chain(6, 5, Strategy::Lcd).unwrap();
        assert_eq!(c.topological_order().unwrap(), (0..6).collect::<Vec<_>>());
        assert_eq!(c.exogenous_shares()[0], 1.0);
    }

    #[test]
    fn strategies_parse() {
        assert_eq!("LCE".parse::<Strategy>().unwrap(), Strategy::Lce);
        assert_eq!("lcp(0.3)".parse::<Strategy>().unwrap(), Strategy::Lcp { q: 0.3 });
        assert_eq!("lcp:1".parse::<Strategy>().unwrap(), Strategy::Lcp { q: 1.0 });
        assert!("lcp(0)".parse::<Strategy>().is_err());
        assert!("lcx".parse::<Strategy>().is_err());
        for s in [Strategy::Lce, Strategy::Lcd, Strategy::Lcp { q: 0.25 }] {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
    }

    #[test]
    fn json_round_trip_and_repository_edges() {
        let text = r#"{
            "nodes": [{"id": "a", "capacity": 3}, {"id": "b", "capacity": 4, "policy": "qlru", "q": 0.5}],
            "edges": [{"from": "a", "to": "b", "fraction": 0.5}, {"from": "b", "to": "origin"}],
            "exogenous": [{"node": "a", "share_of_total_rate": 0.75}, {"node": "b", "share_of_total_rate": 0.25}],
            "strategy": "lcp(0.5)",
            "repository": "origin"
        }"#;
        let net = CacheNetwork::from_json(text).unwrap();
        assert_eq!(net.routes().len(), 1);
        assert_eq!(net.repository_fraction(0), 0.5);
        assert_eq!(CacheNetwork::from_json(&net.to_json().unwrap()).unwrap(), net);
    }

    #[test]
    fn rejects_invalid_topologies() {
        let node = |id: &str| Node {
            id: id.into(),
            capacity: 1,
        };
        // Closed cycle: misses never leave.
        let cyc = CacheNetwork::new(
            vec![node("a"), node("b")],
            vec![
                Route { from: 0, to: 1, fraction: 1.0 },
                Route { from: 1, to: 0, fraction: 1.0 },
            ],
            vec![1.0, 0.0],
            Strategy::Lce,
            "r",
        );
        assert!(matches!(cyc, Err(Error::SingularRouting(_))));
        // A leaky cycle is fine.
        let leaky = CacheNetwork::new(
            vec![node("a"), node("b")],
            vec![
                Route { from: 0, to: 1, fraction: 1.0 },
                Route { from: 1, to: 0, fraction: 0.5 },
            ],
            vec![1.0, 0.0],
            Strategy::Lce,
            "r",
        )
        .unwrap();
        assert!(leaky.topological_order().is_none());
        assert!(!leaky.is_tree());
        let bad_mass = CacheNetwork::new(
            vec![node("a"), node("b"), node("c")],
            vec![
                Route { from: 0, to: 1, fraction: 0.7 },
                Route { from: 0, to: 2, fraction: 0.7 },
            ],
            vec![1.0, 0.0, 0.0],
            Strategy::Lce,
            "r",
        );
        assert!(bad_mass.is_err());
        assert!(CacheNetwork::new(vec![node("a")], vec![], vec![0.5], Strategy::Lce, "r").is_err());
        assert!(CacheNetwork::new(vec![node("a"), node("a")], vec![], vec![1.0, 0.0], Strategy::Lce, "r").is_err());
        let mismatched = r#"{"nodes": [{"id": "a", "capacity": 3, "policy": "lru"}],
            "exogenous": [{"node": "a", "share_of_total_rate": 1.0}], "strategy": "lcp(0.3)"}"#;
        assert!(CacheNetwork::from_json(mismatched).is_err());
        let unknown = r#"{"nodes": [{"id": "a", "capacity": 3}],
            "exogenous": [{"node": "z", "share_of_total_rate": 1.0}], "strategy": "lce"}"#;
        assert!(matches!(CacheNetwork::from_json(unknown), Err(Error::Topology(_))));
    }
}
