//! Request-rate bookkeeping: how miss streams propagate through the
//! routing graph and how much demand reaches the repository.

use crate::error::{Error, Result};
use crate::stats::neumaier_sum;
use crate::traffic::{Popularity, Traffic};

use super::CacheNetwork;

const MAX_SWEEPS: usize = 100_000;

/// Exogenous request rate of object `m` at node `i`.
pub fn exogenous_rate(network: &CacheNetwork, traffic: &Traffic, popularity: &Popularity, i: usize, m: usize) -> f64 {
    traffic.total_rate * network.exogenous_shares()[i] * popularity.probability(m)
}

/// Total request rate of every object at every node, given per-node hit
/// probabilities: exogenous demand plus the routed share of every miss
/// stream. `p_hit[i][m]` is the hit probability of object `m` at node `i`.
///
/// Acyclic networks are solved in one topological pass; networks with
/// cycles by Gauss–Seidel sweeps, which converge because every node can
/// reach the repository.
pub fn miss_stream_rates<V: AsRef<[f64]>>(
    network: &CacheNetwork,
    traffic: &Traffic,
    popularity: &Popularity,
    p_hit: &[V],
) -> Result<Vec<Vec<f64>>> {
    let n = network.len();
    let objects = popularity.catalog_size();
    if p_hit.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: p_hit.len(),
        });
    }
    for row in p_hit {
        if row.as_ref().len() != objects {
            return Err(Error::LengthMismatch {
                expected: objects,
                actual: row.as_ref().len(),
            });
        }
    }
    let exo = |i: usize, m: usize| exogenous_rate(network, traffic, popularity, i, m);
    let mut rates: Vec<Vec<f64>> = (0..n).map(|i| (0..objects).map(|m| exo(i, m)).collect()).collect();
    let inflow = |rates: &Vec<Vec<f64>>, i: usize, m: usize| -> f64 {
        exo(i, m)
            + network
                .inbound(i)
                .iter()
                .map(|r| r.fraction * rates[r.from][m] * (1.0 - p_hit[r.from].as_ref()[m]))
                .sum::<f64>()
    };
    if let Some(order) = network.topological_order() {
        for i in order {
            for m in 0..objects {
                rates[i][m] = inflow(&rates, i, m);
            }
        }
        return Ok(rates);
    }
    for sweep in 0..MAX_SWEEPS {
        let mut change: f64 = 0.0;
        for i in 0..n {
            for m in 0..objects {
                let new = inflow(&rates, i, m);
                change = change.max((new - rates[i][m]).abs() / new.max(f64::MIN_POSITIVE));
                rates[i][m] = new;
            }
        }
        if change <= 1e-14 {
            return Ok(rates);
        }
        if sweep + 1 == MAX_SWEEPS {
            return Err(Error::NonConvergence {
                what: "miss-stream rates".into(),
                iterations: MAX_SWEEPS,
                residual: change,
            });
        }
    }
    unreachable!("loop returns")
}

/// Fraction of exogenous demand served by some cache:
/// `1 - (rate reaching the repository) / (exogenous rate)`.
pub fn network_total_hit<V: AsRef<[f64]>, W: AsRef<[f64]>>(
    network: &CacheNetwork,
    traffic: &Traffic,
    popularity: &Popularity,
    rates: &[V],
    p_hit: &[W],
) -> f64 {
    let repository = neumaier_sum((0..network.len()).flat_map(|j| {
        let out = network.repository_fraction(j);
        let rates = rates[j].as_ref();
        let hits = p_hit[j].as_ref();
        (0..rates.len()).map(move |m| out * rates[m] * (1.0 - hits[m]))
    }));
    let exogenous = neumaier_sum(
        (0..network.len())
            .flat_map(|i| (0..popularity.catalog_size()).map(move |m| (i, m)))
            .map(|(i, m)| exogenous_rate(network, traffic, popularity, i, m)),
    );
    1.0 - repository / exogenous
}
