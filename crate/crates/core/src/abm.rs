//! Discrete-time agent-based SMIR on a contact network.
//!
//! Each day is a synchronous update from the day-`t` snapshot:
//!
//! * a susceptible with `m ≥ 1` infected neighbours becomes infected with
//!   probability `1 − (1 − p)^m`, where `p` is `p_O` or `p_M` according to the
//!   *susceptible's* label;
//! * an infected node recovers with probability `γ`.
//!
//! Both decisions read only day-`t` states, so a node infected on day `t`
//! cannot transmit before day `t + 1`. Random numbers come from a
//! [`CounterRng`] keyed by repetition, indexed by `(day, node)`, so a run does
//! not depend on thread count or scheduling.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contactnet::ContactNetwork;
use crate::rng::{derive_seed, CounterRng};
use crate::Label;

const STREAM_INFECT: u32 = 0;
const STREAM_RECOVER: u32 = 1;
const STREAM_SEED: u32 = 2;

/// Below this node count a step runs on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 14;
const CHUNK: usize = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbmError {
    #[error("only {available} misinformed nodes available, {requested} requested as initial infections")]
    InsufficientMisinformed { available: usize, requested: usize },
    #[error("invalid ABM configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbmConfig {
    /// Per-contact daily transmission probability, ordinary susceptibles.
    pub p_o: f64,
    /// Same for misinformed susceptibles.
    pub p_m: f64,
    /// Daily recovery probability.
    pub gamma: f64,
    pub initial_infected: usize,
    pub steps: u32,
    pub repetitions: u32,
}

impl Default for AbmConfig {
    fn default() -> Self {
        Self {
            p_o: 0.01,
            p_m: 1.0,
            gamma: 0.2,
            initial_infected: 100,
            steps: 100,
            repetitions: 10,
        }
    }
}

impl AbmConfig {
    pub fn validate(&self) -> Result<(), AbmError> {
        let bad = |m: String| Err(AbmError::InvalidConfig(m));
        for (name, p) in [("p_o", self.p_o), ("p_m", self.p_m), ("gamma", self.gamma)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.p_m < self.p_o {
            return bad(format!("p_m ({}) must be >= p_o ({})", self.p_m, self.p_o));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1".into());
        }
        Ok(())
    }

    fn transmissibility(&self, label: Label) -> f64 {
        match label {
            Label::Ordinary => self.p_o,
            Label::Misinformed => self.p_m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Compartment {
    S = 0,
    I = 1,
    R = 2,
}

/// Compartment of every node on a given day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbmState {
    pub compartments: Vec<Compartment>,
    pub day: u32,
}

impl AbmState {
    pub fn susceptible(n: usize) -> Self {
        Self {
            compartments: vec![Compartment::S; n],
            day: 0,
        }
    }

    pub fn count(&self, c: Compartment) -> usize {
        self.compartments.iter().filter(|&&x| x == c).count()
    }
}

/// Compressed adjacency of a contact network.
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Adjacency {
    pub fn new(node_count: usize, edges: &[(u32, u32)]) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        for &(u, v) in edges {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; offsets[node_count]];
        for &(u, v) in edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        Self { offsets, neighbors }
    }

    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Per-label tallies of one transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepCounts {
    pub new_infections: [u64; 2],
    pub recoveries: [u64; 2],
}

impl StepCounts {
    fn merge(mut self, other: Self) -> Self {
        for l in 0..2 {
            self.new_infections[l] += other.new_infections[l];
            self.recoveries[l] += other.recoveries[l];
        }
        self
    }
}

/// A contact network prepared for simulation.
pub struct Simulation<'a> {
    labels: &'a [Label],
    adjacency: Adjacency,
    cfg: AbmConfig,
}

impl<'a> Simulation<'a> {
    pub fn new(net: &'a ContactNetwork, cfg: AbmConfig) -> Result<Self, AbmError> {
        cfg.validate()?;
        Ok(Self {
            labels: net.labels(),
            adjacency: Adjacency::new(net.node_count(), net.edges()),
            cfg,
        })
    }

    /// Same as [`Simulation::new`] for an arbitrary labelled edge list.
    pub fn from_edges(labels: &'a [Label], edges: &[(u32, u32)], cfg: AbmConfig) -> Result<Self, AbmError> {
        cfg.validate()?;
        Ok(Self {
            labels,
            adjacency: Adjacency::new(labels.len(), edges),
            cfg,
        })
    }

    pub fn config(&self) -> &AbmConfig {
        &self.cfg
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Infects `initial_infected` misinformed nodes chosen uniformly at
    /// random: the nodes with the smallest keyed random priorities.
    pub fn seed_infection(&self, rng: &CounterRng) -> Result<AbmState, AbmError> {
        let requested = self.cfg.initial_infected;
        let mut candidates: Vec<(u64, u32)> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_misinformed())
            .map(|(i, _)| (rng.bits(0, i as u32, STREAM_SEED), i as u32))
            .collect();
        if candidates.len() < requested {
            return Err(AbmError::InsufficientMisinformed {
                available: candidates.len(),
                requested,
            });
        }
        let mut state = AbmState::susceptible(self.labels.len());
        if requested == 0 {
            return Ok(state);
        }
        if requested < candidates.len() {
            candidates.select_nth_unstable(requested - 1);
        }
        for &(_, i) in &candidates[..requested] {
            state.compartments[i as usize] = Compartment::I;
        }
        Ok(state)
    }

    #[inline]
    fn next_compartment(&self, cur: &[Compartment], j: usize, day: u32, rng: &CounterRng) -> Compartment {
        match cur[j] {
            Compartment::S => {
                let m = self
                    .adjacency
                    .neighbors(j)
                    .iter()
                    .filter(|&&v| cur[v as usize] == Compartment::I)
                    .count();
                if m == 0 {
                    return Compartment::S;
                }
                let p = self.cfg.transmissibility(self.labels[j]);
                let prob = 1.0 - (1.0 - p).powi(m as i32);
                if rng.uniform(day, j as u32, STREAM_INFECT) < prob {
                    Compartment::I
                } else {
                    Compartment::S
                }
            }
            Compartment::I => {
                if rng.uniform(day, j as u32, STREAM_RECOVER) < self.cfg.gamma {
                    Compartment::R
                } else {
                    Compartment::I
                }
            }
            Compartment::R => Compartment::R,
        }
    }

    fn advance_range(
        &self,
        cur: &[Compartment],
        out: &mut [Compartment],
        start: usize,
        day: u32,
        rng: &CounterRng,
    ) -> StepCounts {
        let mut counts = StepCounts::default();
        for (k, slot) in out.iter_mut().enumerate() {
            let j = start + k;
            let next = self.next_compartment(cur, j, day, rng);
            let l = self.labels[j].index();
            match (cur[j], next) {
                (Compartment::S, Compartment::I) => counts.new_infections[l] += 1,
                (Compartment::I, Compartment::R) => counts.recoveries[l] += 1,
                _ => {}
            }
            *slot = next;
        }
        counts
    }

    /// Writes the day `t + 1` state of `current` into `next`.
    pub fn step_into(&self, current: &AbmState, next: &mut AbmState, rng: &CounterRng) -> StepCounts {
        let n = self.labels.len();
        next.compartments.resize(n, Compartment::S);
        next.day = current.day + 1;
        let cur = &current.compartments;
        let day = current.day;
        if n < PARALLEL_THRESHOLD {
            return self.advance_range(cur, &mut next.compartments, 0, day, rng);
        }
        next.compartments
            .par_chunks_mut(CHUNK)
            .enumerate()
            .map(|(c, out)| self.advance_range(cur, out, c * CHUNK, day, rng))
            .reduce(StepCounts::default, StepCounts::merge)
    }

    pub fn step(&self, current: &AbmState, rng: &CounterRng) -> (AbmState, StepCounts) {
        let mut next = AbmState::susceptible(0);
        let counts = self.step_into(current, &mut next, rng);
        (next, counts)
    }

    /// One repetition of `steps` days from a fresh seeding.
    pub fn run_repetition(&self, key: u64) -> Result<RepetitionSeries, AbmError> {
        let rng = CounterRng::new(key);
        let mut cur = self.seed_infection(&rng)?;
        let mut next = AbmState::susceptible(cur.compartments.len());
        let steps = self.cfg.steps as usize;
        let mut series = RepetitionSeries::with_capacity(steps + 1);

        let mut prevalent = [0u64; 2];
        for (c, l) in cur.compartments.iter().zip(self.labels) {
            if *c == Compartment::I {
                prevalent[l.index()] += 1;
            }
        }
        series.push(prevalent, prevalent, prevalent);
        let mut cumulative = prevalent;
        for _ in 0..steps {
            let counts = self.step_into(&cur, &mut next, &rng);
            for l in 0..2 {
                prevalent[l] = prevalent[l] + counts.new_infections[l] - counts.recoveries[l];
                cumulative[l] += counts.new_infections[l];
            }
            series.push(counts.new_infections, prevalent, cumulative);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(series)
    }

    /// `repetitions` runs keyed by `derive_seed(master_seed, r)`, in parallel.
    pub fn run(&self, master_seed: u64) -> Result<EpidemicResult, AbmError> {
        let reps: Vec<RepetitionSeries> = (0..self.cfg.repetitions as u64)
            .into_par_iter()
            .map(|r| self.run_repetition(derive_seed(master_seed, r)))
            .collect::<Result<_, _>>()?;
        Ok(EpidemicResult::from_repetitions(self.labels, &reps))
    }
}

pub fn seed_infection(net: &ContactNetwork, cfg: &AbmConfig, rng: &CounterRng) -> Result<AbmState, AbmError> {
    Simulation::new(net, *cfg)?.seed_infection(rng)
}

pub fn step(state: &AbmState, net: &ContactNetwork, cfg: &AbmConfig, rng: &CounterRng) -> AbmState {
    let sim = Simulation::new(net, *cfg).expect("valid configuration");
    sim.step(state, rng).0
}

pub fn run(net: &ContactNetwork, cfg: &AbmConfig, master_seed: u64) -> Result<EpidemicResult, AbmError> {
    Simulation::new(net, *cfg)?.run(master_seed)
}

/// Daily counts of one repetition, indexed `[day][label]`.
///
/// Day 0 is the seeded state; its new infections are the seeds.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RepetitionSeries {
    pub new_infections: Vec<[u64; 2]>,
    pub prevalent: Vec<[u64; 2]>,
    pub cumulative: Vec<[u64; 2]>,
}

impl RepetitionSeries {
    fn with_capacity(n: usize) -> Self {
        Self {
            new_infections: Vec::with_capacity(n),
            prevalent: Vec::with_capacity(n),
            cumulative: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, new: [u64; 2], prev: [u64; 2], cum: [u64; 2]) {
        self.new_infections.push(new);
        self.prevalent.push(prev);
        self.cumulative.push(cum);
    }

    pub fn days(&self) -> usize {
        self.prevalent.len()
    }

    /// Earliest day of maximal overall prevalence, and that prevalence.
    pub fn peak(&self) -> (u32, u64) {
        let mut best = (0u32, 0u64);
        for (d, p) in self.prevalent.iter().enumerate() {
            let total = p[0] + p[1];
            if total > best.1 {
                best = (d as u32, total);
            }
        }
        best
    }

    pub fn final_cumulative(&self) -> u64 {
        self.cumulative.last().map(|c| c[0] + c[1]).unwrap_or(0)
    }
}

/// Mean and standard deviation across repetitions for one daily series.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Band {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Band {
    fn from_samples(days: usize, reps: usize, value: impl Fn(usize, usize) -> f64) -> Self {
        let mut mean = Vec::with_capacity(days);
        let mut std = Vec::with_capacity(days);
        for d in 0..days {
            let m = (0..reps).map(|r| value(r, d)).sum::<f64>() / reps as f64;
            let var = (0..reps).map(|r| (value(r, d) - m).powi(2)).sum::<f64>() / reps as f64;
            mean.push(m);
            std.push(var.sqrt());
        }
        Self { mean, std }
    }
}

/// A daily metric split overall / ordinary / misinformed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelledBands {
    pub all: Band,
    pub ordinary: Band,
    pub misinformed: Band,
}

/// Aggregate of all repetitions.
///
/// Standard deviations are population (divide-by-`n`) deviations, so a single
/// repetition reports zero spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicResult {
    pub node_count: usize,
    pub misinformed_count: usize,
    pub repetitions: usize,
    pub new_infections: LabelledBands,
    pub prevalent: LabelledBands,
    pub cumulative: LabelledBands,
    /// Peak day and peak prevalence of each repetition.
    pub peaks: Vec<(u32, u64)>,
    pub final_cumulative: Vec<u64>,
}

impl EpidemicResult {
    pub fn from_repetitions(labels: &[Label], reps: &[RepetitionSeries]) -> Self {
        assert!(!reps.is_empty(), "at least one repetition");
        let days = reps[0].days();
        let n = reps.len();
        let bands = |pick: fn(&RepetitionSeries) -> &Vec<[u64; 2]>| LabelledBands {
            all: Band::from_samples(days, n, |r, d| {
                let v = pick(&reps[r])[d];
                (v[0] + v[1]) as f64
            }),
            ordinary: Band::from_samples(days, n, |r, d| pick(&reps[r])[d][0] as f64),
            misinformed: Band::from_samples(days, n, |r, d| pick(&reps[r])[d][1] as f64),
        };
        Self {
            node_count: labels.len(),
            misinformed_count: labels.iter().filter(|l| l.is_misinformed()).count(),
            repetitions: n,
            new_infections: bands(|s| &s.new_infections),
            prevalent: bands(|s| &s.prevalent),
            cumulative: bands(|s| &s.cumulative),
            peaks: reps.iter().map(RepetitionSeries::peak).collect(),
            final_cumulative: reps.iter().map(RepetitionSeries::final_cumulative).collect(),
        }
    }

    pub fn days(&self) -> usize {
        self.prevalent.all.mean.len()
    }

    pub fn mean_peak_day(&self) -> f64 {
        self.peaks.iter().map(|p| p.0 as f64).sum::<f64>() / self.peaks.len() as f64
    }

    /// Mean per-repetition peak prevalence, as a count.
    pub fn mean_peak_height(&self) -> f64 {
        self.peaks.iter().map(|p| p.1 as f64).sum::<f64>() / self.peaks.len() as f64
    }

    pub fn mean_final_cumulative(&self) -> f64 {
        self.final_cumulative.iter().sum::<u64>() as f64 / self.final_cumulative.len() as f64
    }

    pub const CSV_HEADER: [&'static str; 19] = [
        "day",
        "mean_new_inf",
        "std_new_inf",
        "mean_prev_I",
        "std_prev_I",
        "mean_cum",
        "std_cum",
        "mean_new_inf_O",
        "std_new_inf_O",
        "mean_prev_I_O",
        "std_prev_I_O",
        "mean_cum_O",
        "std_cum_O",
        "mean_new_inf_M",
        "std_new_inf_M",
        "mean_prev_I_M",
        "std_prev_I_M",
        "mean_cum_M",
        "std_cum_M",
    ];

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut w = io::BufWriter::new(w);
        writeln!(w, "{}", Self::CSV_HEADER.join(","))?;
        for d in 0..self.days() {
            write!(w, "{d}")?;
            for group in [
                (&self.new_infections.all, &self.prevalent.all, &self.cumulative.all),
                (&self.new_infections.ordinary, &self.prevalent.ordinary, &self.cumulative.ordinary),
                (
                    &self.new_infections.misinformed,
                    &self.prevalent.misinformed,
                    &self.cumulative.misinformed,
                ),
            ] {
                for band in [group.0, group.1, group.2] {
                    write!(w, ",{},{}", band.mean[d], band.std[d])?;
                }
            }
            writeln!(w)?;
        }
        w.flush()
    }
}
