mod support;

use support::abm_oracle::*;

use smir_core::abm::{AbmConfig, AbmState, Compartment, Simulation};
use smir_core::rng::CounterRng;
use smir_core::Label;

#[test]
fn graph_enumeration_counts() {
    let counts: Vec<usize> = (1..=4).map(|n| graphs(n).len()).collect();
    assert_eq!(counts, vec![1, 2, 4, 11]);
}

#[test]
fn oracle_probabilities_sum_to_one() {
    for case in cases(3, &[0.0, 0.2]) {
        let p = exact_paths(&case, 0.5, 1.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn binomial_tail_matches_normal_for_large_counts() {
    // two-sided 3 sd tail of a normal is 0.0027
    let t = binomial_beyond(100_000, 0.5, 3.0);
    assert!((t - 0.0027).abs() < 0.0003, "{t}");
    assert_eq!(poisson_quantile(0.0, 0.9999), 0);
    assert_eq!(poisson_quantile(1.0, 0.5), 1);
}

#[test]
fn small_graphs_match_exact_enumeration() {
    let runs = 20_000;
    let mut tally = Tally::default();
    for (i, case) in cases(3, &[0.0, 0.2]).iter().enumerate() {
        let exact = exact_paths(case, 0.5, 1.0);
        let counts = simulate_paths(case, 0.5, 1.0, runs, 1000 + i as u64);
        tally.add(&exact, &counts, runs);
    }
    assert!(tally.passes(), "{}", tally.describe());
}

fn ring(n: u32) -> Vec<(u32, u32)> {
    (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n))).collect()
}

#[test]
fn infection_travels_at_most_one_hop_per_day() {
    let n = 40;
    let labels = vec![Label::Misinformed; n as usize];
    let cfg = AbmConfig {
        p_o: 1.0,
        p_m: 1.0,
        gamma: 0.0,
        initial_infected: 1,
        steps: 5,
        repetitions: 1,
    };
    let sim = Simulation::from_edges(&labels, &ring(n), cfg).unwrap();
    let mut state = AbmState::susceptible(n as usize);
    state.compartments[0] = Compartment::I;
    let rng = CounterRng::new(1);
    for day in 1..=5u32 {
        state = sim.step(&state, &rng).0;
        for (i, c) in state.compartments.iter().enumerate() {
            let dist = (i as u32).min(n - i as u32);
            assert_eq!(*c == Compartment::I, dist <= day, "day {day} node {i}");
        }
    }
}

#[test]
fn runs_are_reproducible_and_thread_independent() {
    let n = 30_000u32;
    let labels: Vec<Label> = (0..n)
        .map(|i| if i % 3 == 0 { Label::Misinformed } else { Label::Ordinary })
        .collect();
    let mut edges: Vec<(u32, u32)> = ring(n);
    edges.extend((0..n).map(|i| (i, (i * 7919 + 13) % n)).filter(|(a, b)| a != b).map(|(a, b)| (a.min(b), a.max(b))));
    edges.sort();
    edges.dedup();
    let cfg = AbmConfig {
        p_o: 0.05,
        p_m: 0.6,
        gamma: 0.2,
        initial_infected: 50,
        steps: 30,
        repetitions: 3,
    };
    let sim = Simulation::from_edges(&labels, &edges, cfg).unwrap();
    let a = sim.run(5).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| sim.run(5).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, sim.run(6).unwrap());
    assert!(a.mean_final_cumulative() > 50.0);
}

#[test]
fn higher_misinformed_transmissibility_spreads_further() {
    let n = 2_000u32;
    let labels: Vec<Label> = (0..n)
        .map(|i| if i % 2 == 0 { Label::Misinformed } else { Label::Ordinary })
        .collect();
    let edges: Vec<(u32, u32)> = (0..n)
        .flat_map(|i| [1u32, 2, 5].into_iter().map(move |d| (i, (i + d) % n)))
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    let base = AbmConfig {
        p_o: 0.05,
        p_m: 0.1,
        gamma: 0.2,
        initial_infected: 10,
        steps: 60,
        repetitions: 10,
    };
    let low = Simulation::from_edges(&labels, &edges, base).unwrap().run(3).unwrap();
    let high = Simulation::from_edges(&labels, &edges, AbmConfig { p_m: 0.6, ..base }).unwrap().run(3).unwrap();
    assert!(high.mean_final_cumulative() > low.mean_final_cumulative());
}
