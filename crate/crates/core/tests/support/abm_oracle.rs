//! Exact two-step outcome distributions of the network SMIR step on tiny
//! graphs, and the bookkeeping to compare them with simulated frequencies.
#![allow(dead_code)]

use smir_core::abm::{AbmConfig, AbmState, Compartment, Simulation};
use smir_core::rng::{derive_seed, CounterRng};
use smir_core::Label;

/// All graphs on `n` nodes up to isomorphism, as sorted edge lists.
pub fn graphs(n: usize) -> Vec<Vec<(u32, u32)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let perms = permutations(n);
    let mut canon = std::collections::BTreeSet::new();
    for mask in 0u32..(1 << pairs.len()) {
        let best = perms
            .iter()
            .map(|perm| {
                let mut m = 0u32;
                for (k, &(a, b)) in pairs.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        let (x, y) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
                        let idx = pairs.iter().position(|&p| p == (x, y)).unwrap();
                        m |= 1 << idx;
                    }
                }
                m
            })
            .min()
            .unwrap();
        canon.insert(best);
    }
    canon
        .into_iter()
        .map(|m| {
            pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| m >> k & 1 == 1)
                .map(|(_, &(a, b))| (a as u32, b as u32))
                .collect()
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Case {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
    pub labels: Vec<Label>,
    /// 0 susceptible, 1 infected, 2 recovered.
    pub start: Vec<u8>,
    pub gamma: f64,
}

/// Every graph with up to `max_n` nodes, every labelling and every nonempty
/// initially infected set, for each recovery probability.
pub fn cases(max_n: usize, gammas: &[f64]) -> Vec<Case> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        for edges in graphs(n) {
            for lab in 0u32..(1 << n) {
                let labels: Vec<Label> = (0..n)
                    .map(|i| if lab >> i & 1 == 1 { Label::Misinformed } else { Label::Ordinary })
                    .collect();
                for inf in 1u32..(1 << n) {
                    let start: Vec<u8> = (0..n).map(|i| (inf >> i & 1) as u8).collect();
                    for &gamma in gammas {
                        out.push(Case {
                            n,
                            edges: edges.clone(),
                            labels: labels.clone(),
                            start: start.clone(),
                            gamma,
                        });
                    }
                }
            }
        }
    }
    out
}

fn encode(states: &[u8]) -> usize {
    states.iter().rev().fold(0, |acc, &s| acc * 3 + s as usize)
}

/// Distribution of the next state, by explicit product over nodes.
fn transition(case: &Case, state: &[u8], p_o: f64, p_m: f64) -> Vec<(Vec<u8>, f64)> {
    let n = case.n;
    let mut options: Vec<Vec<(u8, f64)>> = Vec::with_capacity(n);
    for j in 0..n {
        options.push(match state[j] {
            0 => {
                let m = case
                    .edges
                    .iter()
                    .filter(|&&(a, b)| {
                        (a as usize == j && state[b as usize] == 1) || (b as usize == j && state[a as usize] == 1)
                    })
                    .count() as i32;
                let p = if case.labels[j] == Label::Misinformed { p_m } else { p_o };
                let q = 1.0 - (1.0 - p).powi(m);
                vec![(0, 1.0 - q), (1, q)]
            }
            1 => vec![(1, 1.0 - case.gamma), (2, case.gamma)],
            _ => vec![(2, 1.0)],
        });
    }
    let mut out = vec![(Vec::with_capacity(n), 1.0)];
    for opts in &options {
        let mut next = Vec::new();
        for (prefix, p) in &out {
            for &(s, q) in opts {
                if q > 0.0 {
                    let mut v: Vec<u8> = prefix.clone();
                    v.push(s);
                    next.push((v, p * q));
                }
            }
        }
        out = next;
    }
    out
}

pub fn path_cells(n: usize) -> usize {
    3usize.pow(n as u32).pow(2)
}

/// Exact probability of every two-day path, indexed `day1 * 3^n + day2`.
pub fn exact_paths(case: &Case, p_o: f64, p_m: f64) -> Vec<f64> {
    let width = 3usize.pow(case.n as u32);
    let mut probs = vec![0.0; width * width];
    for (s1, p1) in transition(case, &case.start, p_o, p_m) {
        for (s2, p2) in transition(case, &s1, p_o, p_m) {
            probs[encode(&s1) * width + encode(&s2)] += p1 * p2;
        }
    }
    probs
}

/// Simulated path counts from `runs` independent keyed runs.
pub fn simulate_paths(case: &Case, p_o: f64, p_m: f64, runs: u64, seed: u64) -> Vec<u64> {
    let cfg = AbmConfig {
        p_o,
        p_m,
        gamma: case.gamma,
        initial_infected: 0,
        steps: 2,
        repetitions: 1,
    };
    let sim = Simulation::from_edges(&case.labels, &case.edges, cfg).unwrap();
    let to_c = |s: u8| match s {
        0 => Compartment::S,
        1 => Compartment::I,
        _ => Compartment::R,
    };
    let from_c = |c: &Compartment| match c {
        Compartment::S => 0u8,
        Compartment::I => 1,
        Compartment::R => 2,
    };
    let start = AbmState {
        compartments: case.start.iter().map(|&s| to_c(s)).collect(),
        day: 0,
    };
    let width = 3usize.pow(case.n as u32);
    let mut counts = vec![0u64; width * width];
    let mut s1 = AbmState::susceptible(case.n);
    let mut s2 = AbmState::susceptible(case.n);
    let mut buf = Vec::with_capacity(case.n);
    for r in 0..runs {
        let rng = CounterRng::new(derive_seed(seed, r));
        sim.step_into(&start, &mut s1, &rng);
        sim.step_into(&s1, &mut s2, &rng);
        buf.clear();
        buf.extend(s1.compartments.iter().map(from_c));
        let a = encode(&buf);
        buf.clear();
        buf.extend(s2.compartments.iter().map(from_c));
        counts[a * width + encode(&buf)] += 1;
    }
    counts
}

/// `P(|X - np| > k sd)` for `X ~ Binomial(n, p)`, summed outward from the mode.
pub fn binomial_beyond(n: u64, p: f64, k: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let nf = n as f64;
    let mean = nf * p;
    let sd = (nf * p * (1.0 - p)).sqrt();
    let outside = |x: u64| (x as f64 - mean).abs() > k * sd;
    let mode = (((n + 1) as f64 * p).floor() as u64).min(n);
    let (mut total, mut tail) = (1.0, if outside(mode) { 1.0 } else { 0.0 });
    let odds = p / (1.0 - p);
    let mut w = 1.0;
    let mut x = mode;
    while x < n {
        w *= (n - x) as f64 / (x + 1) as f64 * odds;
        x += 1;
        total += w;
        if outside(x) {
            tail += w;
        }
        if w < 1e-22 * total {
            break;
        }
    }
    let mut w = 1.0;
    let mut x = mode;
    while x > 0 {
        w *= x as f64 / (n - x + 1) as f64 / odds;
        x -= 1;
        total += w;
        if outside(x) {
            tail += w;
        }
        if w < 1e-22 * total {
            break;
        }
    }
    tail / total
}

/// Smallest `k` with `P(Poisson(lambda) <= k) >= q`.
pub fn poisson_quantile(lambda: f64, q: f64) -> u64 {
    let mut term = (-lambda).exp();
    let mut cdf = term;
    let mut k = 0u64;
    while cdf < q {
        k += 1;
        term *= lambda / k as f64;
        cdf += term;
        if k > 1_000_000 {
            break;
        }
    }
    k
}

#[derive(Debug, Default, Clone)]
pub struct Tally {
    pub cases: usize,
    pub cells: usize,
    pub impossible_hits: usize,
    pub beyond3: usize,
    pub beyond5: usize,
    pub expected3: f64,
    pub expected5: f64,
    pub worst_z: f64,
}

impl Tally {
    pub fn add(&mut self, exact: &[f64], counts: &[u64], runs: u64) {
        self.cases += 1;
        let r = runs as f64;
        for (&p, &c) in exact.iter().zip(counts) {
            if p <= 0.0 {
                self.impossible_hits += (c > 0) as usize;
                continue;
            }
            self.cells += 1;
            if p >= 1.0 {
                if c != runs {
                    self.impossible_hits += 1;
                }
                continue;
            }
            let z = (c as f64 - r * p) / (r * p * (1.0 - p)).sqrt();
            self.worst_z = self.worst_z.max(z.abs());
            self.beyond3 += (z.abs() > 3.0) as usize;
            self.beyond5 += (z.abs() > 5.0) as usize;
            self.expected3 += binomial_beyond(runs, p, 3.0);
            self.expected5 += binomial_beyond(runs, p, 5.0);
        }
    }

    pub fn merge(mut self, o: Tally) -> Tally {
        self.cases += o.cases;
        self.cells += o.cells;
        self.impossible_hits += o.impossible_hits;
        self.beyond3 += o.beyond3;
        self.beyond5 += o.beyond5;
        self.expected3 += o.expected3;
        self.expected5 += o.expected5;
        self.worst_z = self.worst_z.max(o.worst_z);
        self
    }

    pub fn limit3(&self) -> u64 {
        poisson_quantile(self.expected3, 0.9999)
    }

    pub fn limit5(&self) -> u64 {
        poisson_quantile(self.expected5, 0.9999)
    }

    pub fn passes(&self) -> bool {
        self.impossible_hits == 0
            && self.beyond3 as u64 <= self.limit3()
            && self.beyond5 as u64 <= self.limit5()
    }

    pub fn describe(&self) -> String {
        format!(
            "{} cases, {} cells, impossible outcomes seen {}, beyond 3 sd {} (expected {:.1}, limit {}), beyond 5 sd {} (expected {:.3}, limit {}), max |z| {:.2}",
            self.cases,
            self.cells,
            self.impossible_hits,
            self.beyond3,
            self.expected3,
            self.limit3(),
            self.beyond5,
            self.expected5,
            self.limit5(),
            self.worst_z
        )
    }
}
