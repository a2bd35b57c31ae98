//! Invariants that must hold for every valid input, checked on random
//! catalogs, capacities, policies and topologies.

use proptest::prelude::*;
use unicache::analytic::{
    occupancy, solve_characteristic_time, two_lru_refined_hit, CharacteristicTimes, Policy, PolicySpec, TimeKind,
};
use unicache::netsim::run_network_sim;
use unicache::network::{solve_network, CacheNetwork, Strategy as Replication};
use unicache::sim::{run_single_cache, SimConfig};
use unicache::traffic::{Popularity, RequestProcess, Traffic};

fn policy() -> impl Strategy<Value = Policy> {
    prop_oneof![
        Just(Policy::Lru),
        Just(Policy::Fifo),
        Just(Policy::Random),
        (0.05f64..=1.0).prop_map(|q| Policy::QLru { q }),
        (2usize..=3).prop_map(|k| Policy::KLru { k }),
        Just(Policy::Lfu),
    ]
}

fn traffic() -> impl Strategy<Value = Traffic> {
    prop_oneof![Just(Traffic::irm()), (1.0f64..12.0).prop_map(|z| Traffic::hyperexp(z).unwrap())]
}

fn replication() -> impl Strategy<Value = Replication> {
    prop_oneof![
        Just(Replication::Lce),
        Just(Replication::Lcd),
        (0.05f64..=1.0).prop_map(|q| Replication::Lcp { q }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn solutions_fill_the_cache_with_valid_probabilities(
        policy in policy(),
        traffic in traffic(),
        alpha in 0.3f64..1.3,
        catalog in 20usize..400,
        fill in 0.01f64..0.95,
    ) {
        prop_assume!(traffic.is_poisson() || !matches!(policy, Policy::Fifo | Policy::Random));
        let capacity = ((catalog as f64 * fill) as usize).max(1);
        let pop = Popularity::zipf(alpha, catalog).unwrap();
        let spec = PolicySpec::new(policy, capacity).unwrap();
        let s = solve_characteristic_time(&spec, &traffic, &pop).unwrap();
        for (&p_in, &p_hit) in s.p_in.iter().zip(&s.p_hit) {
            prop_assert!((0.0..=1.0).contains(&p_in), "p_in {p_in}");
            prop_assert!((0.0..=1.0).contains(&p_hit), "p_hit {p_hit}");
        }
        let filled: f64 = s.p_in.iter().sum();
        prop_assert!((filled - capacity as f64).abs() <= 1e-5 * capacity as f64, "Σ p_in = {filled}, C = {capacity}");
        prop_assert!((0.0..=1.0).contains(&s.aggregate_hit));
    }

    #[test]
    fn lru_occupancy_grows_with_the_characteristic_time(
        z in 1.0f64..12.0,
        rate in 1e-4f64..10.0,
        t in 0.0f64..1e3,
        dt in 0.0f64..1e3,
    ) {
        let spec = PolicySpec::new(Policy::Lru, 1).unwrap();
        let process = RequestProcess::hyperexp2(rate, z).unwrap();
        let at = |t: f64| occupancy(&spec, 0, &process, &CharacteristicTimes::single(t, TimeKind::Deterministic)).unwrap();
        prop_assert!(at(t) <= at(t + dt) + 1e-12);
    }

    #[test]
    fn fifo_and_random_agree_under_poisson_requests(
        alpha in 0.3f64..1.3,
        catalog in 20usize..400,
        fill in 0.01f64..0.95,
    ) {
        let capacity = ((catalog as f64 * fill) as usize).max(1);
        let pop = Popularity::zipf(alpha, catalog).unwrap();
        let solve = |p| solve_characteristic_time(&PolicySpec::new(p, capacity).unwrap(), &Traffic::irm(), &pop).unwrap();
        let (fifo, random) = (solve(Policy::Fifo), solve(Policy::Random));
        prop_assert!((fifo.aggregate_hit - random.aggregate_hit).abs() <= 1e-12);
    }

    #[test]
    fn two_lru_closed_form_is_a_probability_ordered_in_its_arguments(
        qa in 0.0f64..1.0,
        qb_share in 0.0f64..1.0,
        bump in 0.0f64..0.1,
    ) {
        let qb = (1.0 - qa) * qb_share;
        let h = two_lru_refined_hit(qa, qb);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&h), "{h}");
        // Losing cached objects more often cannot raise the hit ratio.
        let qb_more = (qb + bump).min(1.0 - qa);
        prop_assert!(two_lru_refined_hit(qa, qb_more) <= h + 1e-12);
    }

    #[test]
    fn simulated_caches_never_exceed_their_capacity(
        policy in policy(),
        catalog in 5usize..60,
        fill in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let capacity = ((catalog as f64 * fill) as usize).max(1);
        let pop = Popularity::zipf(0.9, catalog).unwrap();
        let spec = PolicySpec::new(policy, capacity).unwrap();
        let config = SimConfig { batches: 4, ..SimConfig::new(4_000, seed) };
        let r = run_single_cache(&spec, &Traffic::irm(), &pop, &config).unwrap();
        prop_assert_eq!(r.measured_requests, config.measured_requests());
        prop_assert!(r.total_hits() <= r.measured_requests);
        let occupied: f64 = (0..catalog).map(|m| r.object_occupancy(m)).sum();
        prop_assert!(occupied <= capacity as f64 + 1e-9, "{occupied} > {capacity}");
    }

    #[test]
    fn network_simulation_conserves_requests(
        strategy in replication(),
        arity in 1usize..4,
        levels in 1usize..4,
        capacity in 1usize..20,
        seed in any::<u64>(),
    ) {
        let network = CacheNetwork::tree(arity, levels, capacity, strategy).unwrap();
        let pop = Popularity::zipf(0.8, 50).unwrap();
        let config = SimConfig { batches: 4, ..SimConfig::new(3_000, seed) };
        let r = run_network_sim(&network, &Traffic::irm(), &pop, &config).unwrap();
        let hits: u64 = r.nodes.iter().map(|n| n.total_hits()).sum();
        prop_assert_eq!(r.exogenous_requests, hits + r.repository_fetches);
        prop_assert_eq!(r.exogenous.iter().sum::<u64>(), r.exogenous_requests);
        for (j, node) in r.nodes.iter().enumerate() {
            let forwarded: u64 = network
                .inbound(j)
                .iter()
                .map(|route| r.nodes[route.from].measured_requests - r.nodes[route.from].total_hits())
                .sum();
            prop_assert_eq!(node.measured_requests, r.exogenous[j] + forwarded);
        }
    }

    #[test]
    fn network_model_fills_every_cache(
        strategy in replication(),
        length in 1usize..5,
        capacity in 1usize..40,
    ) {
        let network = CacheNetwork::chain(length, capacity, strategy).unwrap();
        let pop = Popularity::zipf(0.8, 200).unwrap();
        let s = solve_network(&network, &Traffic::irm(), &pop).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.total_hit));
        for node in &s.nodes {
            let filled: f64 = node.p_in.iter().sum();
            prop_assert!((filled - capacity as f64).abs() <= 1e-4 * capacity as f64, "Σ p_in = {filled}");
            prop_assert!(node.p_hit.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }
}
