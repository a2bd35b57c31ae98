//! Models of cache networks.
//!
//! Caches forward their misses along routes towards a repository that
//! holds every object. After a request is served, copies are left on the
//! way back according to the replication [`Strategy`]. The solver assigns
//! one characteristic time to every cache and supports two treatments of
//! the non-Poisson miss streams: a naive one that treats them as Poisson,
//! and a refined one that conditions on the upstream cache having missed.

mod rates;
mod solve;
mod topology;

pub use rates::{exogenous_rate, miss_stream_rates, network_total_hit};
pub use solve::{
    solve_network, solve_network_with, solve_tandem, Approximation, Method, NetworkOptions, NetworkSolution,
    NodeSolution,
};
pub use topology::{CacheNetwork, EdgeEntry, ExogenousEntry, Node, NodeEntry, Route, Strategy, TopologyFile};
