//! Analytical models and simulators for the hit ratio of caches and cache
//! networks.
//!
//! Every model in this crate rests on one decoupling idea: a cache of `C`
//! objects is summarized by a *characteristic time* `T_C`, the time an object
//! survives in the cache after its last request. Once `T_C` is known the
//! objects no longer interact, so per-object hit and occupancy probabilities
//! follow from the request process alone, and `T_C` itself is pinned down by
//! requiring the expected number of cached objects to equal `C`.
//!
//! The crate is organized as:
//!
//! - [`traffic`]: popularity laws and per-object request processes.
//! - [`analytic`]: single-cache models for LRU, q-LRU, FIFO, RANDOM, k-LRU
//!   and LFU under Poisson and renewal traffic.
//! - [`sim`]: a discrete-event simulator for one cache, used to validate the
//!   models, plus trace replay.
//! - [`network`]: models for cache networks with LCE, LCP and LCD replication.
//! - [`netsim`]: a simulator for chains and trees of caches.
//!
//! ```
//! use unicache::analytic::{solve_characteristic_time, Policy, PolicySpec};
//! use unicache::traffic::{Popularity, Traffic};
//!
//! let popularity = Popularity::zipf(0.8, 10_000)?;
//! let spec = PolicySpec::new(Policy::Lru, 100)?;
//! let solution = solve_characteristic_time(&spec, &Traffic::irm(), &popularity)?;
//! assert!(solution.aggregate_hit > 0.1 && solution.aggregate_hit < 0.5);
//! # Ok::<(), unicache::Error>(())
//! ```

pub mod analytic;
mod error;
pub mod netsim;
pub mod network;
pub mod sim;
pub mod stats;
pub mod traffic;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/traffic.md")]
    mod traffic {}
    #[doc = include_str!("../../../book/src/characteristic-time.md")]
    mod characteristic_time {}
    #[doc = include_str!("../../../book/src/policies.md")]
    mod policies {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
