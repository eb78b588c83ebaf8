//! County-structured physical contact networks.
//!
//! Individuals are resampled, with replacement, from the information network
//! so that each county's partisan split matches its voting record. Edges are
//! allocated between county pairs in proportion to mobility and then drawn
//! uniformly within each pair, as in a stochastic block model.

use std::collections::{HashMap, HashSet};
use std::io::{self, Read, Write};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infonet::{InfoNetwork, MisinfoLabeling};
use crate::rng::stream_rng;
use crate::{Label, Party};

#[derive(Debug, Error)]
pub enum ContactNetError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid mobility matrix: {0}")]
    InvalidMobility(String),
    #[error("scenario has no counties")]
    EmptyScenario,
    #[error("county {county} has no {party} accounts in the information network")]
    MissingPartyPool { county: String, party: Party },
    #[error("sample fraction must lie in (0, 1], got {0}")]
    InvalidSampleFraction(f64),
    #[error("mobility matrix sums to zero")]
    ZeroMobility,
    #[error("invalid network parameters: {0}")]
    InvalidParameters(String),
    #[error("block ({x}, {y}) needs {required} edges but holds at most {capacity}")]
    Saturation {
        x: usize,
        y: usize,
        required: u64,
        capacity: u64,
    },
    #[error("block ({x}, {y}): gave up after {attempts} draws placing {required} edges")]
    RetryBudgetExceeded {
        x: usize,
        y: usize,
        required: u64,
        attempts: u64,
    },
    #[error("malformed contact network file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct County {
    pub id: String,
    pub voters: u64,
    pub republican_share: f64,
    pub twitter_users: u64,
}

/// Symmetric county-by-county daily movement counts, stored dense.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl MobilityMatrix {
    /// Validates a row-major `n × n` matrix.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self, ContactNetError> {
        if values.len() != n * n {
            return Err(ContactNetError::InvalidMobility(format!(
                "expected {} entries for {n} counties, got {}",
                n * n,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(ContactNetError::InvalidMobility(format!(
                "entries must be finite and nonnegative, found {v}"
            )));
        }
        for x in 0..n {
            for y in (x + 1)..n {
                let (a, b) = (values[x * n + y], values[y * n + x]);
                if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                    return Err(ContactNetError::InvalidMobility(format!(
                        "not symmetric at ({x}, {y}): {a} vs {b}"
                    )));
                }
            }
        }
        if !values.iter().any(|&v| v > 0.0) {
            return Err(ContactNetError::ZeroMobility);
        }
        Ok(Self { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.n + y]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same matrix multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Sum over unordered county pairs, diagonal included.
    pub fn unordered_total(&self) -> f64 {
        (0..self.n)
            .flat_map(|x| (x..self.n).map(move |y| (x, y)))
            .map(|(x, y)| self.get(x, y))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    counties: Vec<County>,
    mobility: MobilityMatrix,
    index: HashMap<String, usize>,
}

impl Scenario {
    pub fn new(counties: Vec<County>, mobility: MobilityMatrix) -> Result<Self, ContactNetError> {
        if counties.is_empty() {
            return Err(ContactNetError::EmptyScenario);
        }
        if mobility.len() != counties.len() {
            return Err(ContactNetError::InvalidScenario(format!(
                "mobility is {0}x{0} but there are {1} counties",
                mobility.len(),
                counties.len()
            )));
        }
        let mut index = HashMap::with_capacity(counties.len());
        for (i, c) in counties.iter().enumerate() {
            if !(0.0..=1.0).contains(&c.republican_share) {
                return Err(ContactNetError::InvalidScenario(format!(
                    "county {}: republican_share {} outside [0, 1]",
                    c.id, c.republican_share
                )));
            }
            if index.insert(c.id.clone(), i).is_some() {
                return Err(ContactNetError::InvalidScenario(format!(
                    "duplicate county id {}",
                    c.id
                )));
            }
        }
        Ok(Self {
            counties,
            mobility,
            index,
        })
    }

    pub fn counties(&self) -> &[County] {
        &self.counties
    }

    pub fn mobility(&self) -> &MobilityMatrix {
        &self.mobility
    }

    pub fn county_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn total_voters(&self) -> u64 {
        self.counties.iter().map(|c| c.voters).sum()
    }

    /// Per-county sample sizes, `round(voters × fraction)`.
    pub fn sample_sizes(&self, sample_fraction: f64) -> Vec<u64> {
        self.counties
            .iter()
            .map(|c| (c.voters as f64 * sample_fraction).round() as u64)
            .collect()
    }
}

/// An individual drawn into the contact network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampledNode {
    pub county: u32,
    /// Index of the information-network account this individual copies.
    pub persona: u32,
    pub party: Party,
    pub label: Label,
}

/// Party-matched resampling of information-network accounts.
///
/// County by county (in scenario order), `round(count × share)` Republican
/// draws are followed by the Democrat draws, each uniform with replacement
/// from the county's accounts of that party. The sequence of draws does not
/// depend on the labeling, so a fixed seed picks the same personas for every
/// threshold.
pub fn sample_population(
    scenario: &Scenario,
    net: &InfoNetwork,
    labeling: &MisinfoLabeling,
    sample_fraction: f64,
    seed: u64,
) -> Result<Vec<SampledNode>, ContactNetError> {
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(ContactNetError::InvalidSampleFraction(sample_fraction));
    }
    let k = scenario.counties.len();
    let mut pools: Vec<[Vec<u32>; 2]> = vec![[Vec::new(), Vec::new()]; k];
    for (i, node) in net.nodes().iter().enumerate() {
        let Some(county) = scenario.county_index(&node.county) else {
            return Err(ContactNetError::InvalidScenario(format!(
                "information node {} lives in unknown county {}",
                node.id, node.county
            )));
        };
        if let Some(party) = node.party() {
            pools[county][party.index()].push(i as u32);
        }
    }

    let mut rng = stream_rng(seed, 0);
    let sizes = scenario.sample_sizes(sample_fraction);
    let mut out = Vec::with_capacity(sizes.iter().sum::<u64>() as usize);
    for (c, county) in scenario.counties.iter().enumerate() {
        let total = sizes[c];
        let republicans = (total as f64 * county.republican_share).round() as u64;
        for (party, draws) in [
            (Party::Republican, republicans),
            (Party::Democrat, total - republicans),
        ] {
            if draws == 0 {
                continue;
            }
            let pool = &pools[c][party.index()];
            if pool.is_empty() {
                return Err(ContactNetError::MissingPartyPool {
                    county: county.id.clone(),
                    party,
                });
            }
            for _ in 0..draws {
                let persona = pool[rng.random_range(0..pool.len())];
                out.push(SampledNode {
                    county: c as u32,
                    persona,
                    party,
                    label: labeling.labels[persona as usize],
                });
            }
        }
    }
    Ok(out)
}

/// Expected edge counts over unordered county pairs (diagonal included).
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedEdges {
    n: usize,
    /// Row-major upper triangle: `(0,0), (0,1), .., (0,n-1), (1,1), ..`.
    values: Vec<f64>,
}

impl ExpectedEdges {
    pub fn counties(&self) -> usize {
        self.n
    }

    pub fn block_index(&self, x: usize, y: usize) -> usize {
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        x * self.n - x * (x + 1) / 2 + y
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[self.block_index(x, y)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `(x, y, E_xy)` over unordered pairs, in block-index order.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |x| (x..n).map(move |y| (x, y)))
            .zip(self.values.iter())
            .map(|((x, y), &v)| (x, y, v))
    }
}

/// `E_xy = L_xy / Σ L · k̄N/2`, the sum running over unordered pairs.
pub fn expected_edges(
    mobility: &MobilityMatrix,
    k_bar: f64,
    n: usize,
) -> Result<ExpectedEdges, ContactNetError> {
    if !(k_bar > 0.0 && k_bar.is_finite()) {
        return Err(ContactNetError::InvalidParameters(format!("k_bar must be > 0, got {k_bar}")));
    }
    if n < 2 {
        return Err(ContactNetError::InvalidParameters(format!("need at least 2 nodes, got {n}")));
    }
    let total = mobility.unordered_total();
    if total <= 0.0 {
        return Err(ContactNetError::ZeroMobility);
    }
    let edges = k_bar * n as f64 / 2.0;
    let k = mobility.len();
    let values = (0..k)
        .flat_map(|x| (x..k).map(move |y| (x, y)))
        .map(|(x, y)| mobility.get(x, y) / total * edges)
        .collect();
    Ok(ExpectedEdges { n: k, values })
}

/// Undirected simple contact graph. Node `i` is identified by its index.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactNetwork {
    counties: Vec<u32>,
    labels: Vec<Label>,
    /// Sorted `(u, v)` with `u < v`.
    edges: Vec<(u32, u32)>,
    k_bar: f64,
    seed: u64,
}

impl ContactNetwork {
    /// Assembles a network from parts, canonicalizing edge order.
    pub fn from_parts(
        counties: Vec<u32>,
        labels: Vec<Label>,
        edges: Vec<(u32, u32)>,
        k_bar: f64,
        seed: u64,
    ) -> Result<Self, ContactNetError> {
        if counties.len() != labels.len() {
            return Err(ContactNetError::Format("county and label tables differ in length".into()));
        }
        let n = counties.len() as u64;
        let mut edges: Vec<(u32, u32)> = edges
            .into_iter()
            .map(|(u, v)| if u < v { (u, v) } else { (v, u) })
            .collect();
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(ContactNetError::Format(format!("duplicate edge {:?}", w[0])));
            }
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u == v || v as u64 >= n) {
            return Err(ContactNetError::Format(format!("invalid edge ({u}, {v})")));
        }
        Ok(Self {
            counties,
            labels,
            edges,
            k_bar,
            seed,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn counties(&self) -> &[u32] {
        &self.counties
    }

    pub fn k_bar(&self) -> f64 {
        self.k_bar
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.node_count().max(1) as f64
    }

    pub fn misinformed_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_misinformed()).count()
    }

    /// Same graph with new labels (e.g. another threshold on the same personas).
    pub fn relabeled(&self, labels: Vec<Label>) -> Self {
        assert_eq!(labels.len(), self.labels.len());
        Self {
            labels,
            ..self.clone()
        }
    }

    /// Realized edge count of each unordered county pair.
    pub fn block_edge_counts(&self) -> HashMap<(u32, u32), u64> {
        let mut counts = HashMap::new();
        for &(u, v) in &self.edges {
            let (a, b) = (self.counties[u as usize], self.counties[v as usize]);
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        counts
    }
}

const BINARY_MAGIC: &[u8; 8] = b"SMIRCNET";
const BINARY_VERSION: u32 = 1;

impl ContactNetwork {
    /// Little-endian binary layout:
    ///
    /// ```text
    /// magic "SMIRCNET" | u32 version | u64 nodes | f64 k_bar | u64 seed | u64 edges
    /// nodes × u32 county index
    /// ceil(nodes / 8) bytes of labels, bit i (LSB first) set = misinformed
    /// edges × (u32 u, u32 v), sorted, u < v
    /// ```
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&BINARY_VERSION.to_le_bytes())?;
        w.write_all(&(self.node_count() as u64).to_le_bytes())?;
        w.write_all(&self.k_bar.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.edges.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.counties.len() * 4);
        for c in &self.counties {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        w.write_all(&buf)?;
        let mut bits = vec![0u8; self.labels.len().div_ceil(8)];
        for (i, l) in self.labels.iter().enumerate() {
            if l.is_misinformed() {
                bits[i / 8] |= 1 << (i % 8);
            }
        }
        w.write_all(&bits)?;
        for chunk in self.edges.chunks(1 << 16) {
            buf.clear();
            for &(u, v) in chunk {
                buf.extend_from_slice(&u.to_le_bytes());
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, ContactNetError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(ContactNetError::Format("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != BINARY_VERSION {
            return Err(ContactNetError::Format(format!("unsupported version {version}")));
        }
        let mut read_u64 = |r: &mut R| -> io::Result<u64> {
            r.read_exact(&mut b8)?;
            Ok(u64::from_le_bytes(b8))
        };
        let nodes = read_u64(&mut r)? as usize;
        let k_bar = f64::from_bits(read_u64(&mut r)?);
        let seed = read_u64(&mut r)?;
        let edge_count = read_u64(&mut r)? as usize;

        let mut buf = vec![0u8; nodes * 4];
        r.read_exact(&mut buf)?;
        let counties = buf
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut bits = vec![0u8; nodes.div_ceil(8)];
        r.read_exact(&mut bits)?;
        let labels = (0..nodes)
            .map(|i| {
                if bits[i / 8] & (1 << (i % 8)) != 0 {
                    Label::Misinformed
                } else {
                    Label::Ordinary
                }
            })
            .collect();
        let mut buf = vec![0u8; edge_count * 8];
        r.read_exact(&mut buf)?;
        let edges = buf
            .chunks_exact(8)
            .map(|c| {
                (
                    u32::from_le_bytes(c[..4].try_into().unwrap()),
                    u32::from_le_bytes(c[4..].try_into().unwrap()),
                )
            })
            .collect();
        Self::from_parts(counties, labels, edges, k_bar, seed)
    }

    /// Debug CSVs: `node,county,label` and `u,v`.
    pub fn write_debug_csv<W1: Write, W2: Write>(&self, nodes: W1, edges: W2) -> io::Result<()> {
        let mut w = io::BufWriter::new(nodes);
        writeln!(w, "node,county,label")?;
        for (i, (c, l)) in self.counties.iter().zip(&self.labels).enumerate() {
            writeln!(w, "{i},{c},{l}")?;
        }
        w.flush()?;
        let mut w = io::BufWriter::new(edges);
        writeln!(w, "u,v")?;
        for (u, v) in &self.edges {
            writeln!(w, "{u},{v}")?;
        }
        w.flush()
    }
}

fn block_capacity(x: usize, y: usize, members: &[Vec<u32>]) -> u64 {
    let (a, b) = (members[x].len() as u64, members[y].len() as u64);
    if x == y {
        a * a.saturating_sub(1) / 2
    } else {
        a * b
    }
}

/// Splits `total` over `probs` (which sum to 1) with one multinomial draw,
/// as a chain of conditional binomials.
pub fn multinomial<R: Rng>(rng: &mut R, total: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut remaining = total;
    let mut mass_left = 1.0f64;
    let last = probs.iter().rposition(|&p| p > 0.0);
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        if Some(i) == last {
            out[i] = remaining;
            break;
        }
        let q = (p / mass_left).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q).expect("valid binomial").sample(rng);
        out[i] = k;
        remaining -= k;
        mass_left -= p;
    }
    out
}

/// Draws the contact graph.
///
/// The edge budget `round(k̄N/2)` is split over the county-pair blocks by a
/// single multinomial with probabilities proportional to `E_xy`; blocks that
/// cannot hold any edge (an empty county, or a diagonal block with a single
/// node) are left out of the support. Each block then places its edges
/// between uniformly random node pairs, rejecting self-loops and repeats,
/// with a budget of 100 draws per required edge. Block `b` uses ChaCha
/// stream `b` of `seed`; the allocation uses the last stream.
pub fn build_contact_network(
    nodes: &[SampledNode],
    expected: &ExpectedEdges,
    k_bar: f64,
    seed: u64,
) -> Result<ContactNetwork, ContactNetError> {
    if !(k_bar > 0.0 && k_bar.is_finite()) {
        return Err(ContactNetError::InvalidParameters(format!("k_bar must be > 0, got {k_bar}")));
    }
    let k = expected.counties();
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); k];
    for (i, node) in nodes.iter().enumerate() {
        let c = node.county as usize;
        if c >= k {
            return Err(ContactNetError::InvalidParameters(format!(
                "node {i} in county {c}, but only {k} counties"
            )));
        }
        members[c].push(i as u32);
    }

    let blocks: Vec<(usize, usize, f64)> = expected
        .blocks()
        .map(|(x, y, e)| {
            let usable = e > 0.0 && block_capacity(x, y, &members) > 0;
            (x, y, if usable { e } else { 0.0 })
        })
        .collect();
    let mass: f64 = blocks.iter().map(|b| b.2).sum();
    let total_edges = (k_bar * nodes.len() as f64 / 2.0).round() as u64;
    if mass <= 0.0 {
        if total_edges == 0 {
            return ContactNetwork::from_parts(
                nodes.iter().map(|n| n.county).collect(),
                nodes.iter().map(|n| n.label).collect(),
                Vec::new(),
                k_bar,
                seed,
            );
        }
        return Err(ContactNetError::ZeroMobility);
    }
    let probs: Vec<f64> = blocks.iter().map(|b| b.2 / mass).collect();
    let mut alloc_rng = stream_rng(seed, u64::MAX);
    let counts = multinomial(&mut alloc_rng, total_edges, &probs);

    for (b, &(x, y, _)) in blocks.iter().enumerate() {
        let capacity = block_capacity(x, y, &members);
        if counts[b] > capacity {
            return Err(ContactNetError::Saturation {
                x,
                y,
                required: counts[b],
                capacity,
            });
        }
    }

    let per_block: Vec<Vec<(u32, u32)>> = blocks
        .par_iter()
        .enumerate()
        .filter(|(b, _)| counts[*b] > 0)
        .map(|(b, &(x, y, _))| draw_block(x, y, counts[b], &members, seed, b as u64))
        .collect::<Result<_, _>>()?;

    let mut edges: Vec<(u32, u32)> = per_block.into_iter().flatten().collect();
    edges.par_sort_unstable();
    Ok(ContactNetwork {
        counties: nodes.iter().map(|n| n.county).collect(),
        labels: nodes.iter().map(|n| n.label).collect(),
        edges,
        k_bar,
        seed,
    })
}

fn draw_block(
    x: usize,
    y: usize,
    count: u64,
    members: &[Vec<u32>],
    seed: u64,
    stream: u64,
) -> Result<Vec<(u32, u32)>, ContactNetError> {
    let mut rng = stream_rng(seed, stream);
    let (a, b) = (&members[x], &members[y]);
    let budget = count.saturating_mul(100);
    let mut seen: HashSet<(u32, u32)> = HashSet::with_capacity(count as usize);
    let mut out = Vec::with_capacity(count as usize);
    let mut attempts = 0u64;
    while (out.len() as u64) < count {
        if attempts >= budget {
            return Err(ContactNetError::RetryBudgetExceeded {
                x,
                y,
                required: count,
                attempts,
            });
        }
        attempts += 1;
        let u = a[rng.random_range(0..a.len())];
        let v = b[rng.random_range(0..b.len())];
        if u == v {
            continue;
        }
        let e = (u.min(v), u.max(v));
        if seen.insert(e) {
            out.push(e);
        }
    }
    Ok(out)
}

/// Gravity-model stand-in for real mobility data.
///
/// Counties get uniform random coordinates in the unit square;
/// `L_xy = pop_x pop_y / d_xy^exponent` with distances floored at
/// `within_distance`, and `L_xx = pop_x² / within_distance^exponent`.
pub fn generate_synthetic_mobility(
    scenario_counties: &[County],
    gravity_exponent: f64,
    within_distance: f64,
    seed: u64,
) -> Result<MobilityMatrix, ContactNetError> {
    if scenario_counties.iter().any(|c| c.voters == 0) {
        return Err(ContactNetError::InvalidScenario(
            "gravity mobility needs positive county populations".into(),
        ));
    }
    if !(within_distance > 0.0) {
        return Err(ContactNetError::InvalidParameters(format!(
            "within_distance must be > 0, got {within_distance}"
        )));
    }
    let n = scenario_counties.len();
    let mut rng = stream_rng(seed, 0);
    let coords: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let pops: Vec<f64> = scenario_counties.iter().map(|c| c.voters as f64).collect();
    gravity_matrix(&pops, &coords, gravity_exponent, within_distance)
}

/// Gravity matrix for explicit populations and coordinates.
pub fn gravity_matrix(
    pops: &[f64],
    coords: &[(f64, f64)],
    exponent: f64,
    within_distance: f64,
) -> Result<MobilityMatrix, ContactNetError> {
    let n = pops.len();
    assert_eq!(coords.len(), n);
    let mut values = vec![0.0; n * n];
    for x in 0..n {
        for y in x..n {
            let d = if x == y {
                within_distance
            } else {
                let (dx, dy) = (coords[x].0 - coords[y].0, coords[x].1 - coords[y].1);
                (dx * dx + dy * dy).sqrt().max(within_distance)
            };
            let v = pops[x] * pops[y] / d.powf(exponent);
            values[x * n + y] = v;
            values[y * n + x] = v;
        }
    }
    MobilityMatrix::new(n, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infonet::{ExposureMode, InfoEdge, InfoNode};
    use crate::infonet::spread_misinformation;

    fn county(id: &str, voters: u64, share: f64) -> County {
        County {
            id: id.into(),
            voters,
            republican_share: share,
            twitter_users: 0,
        }
    }

    fn uniform(n: usize) -> MobilityMatrix {
        MobilityMatrix::new(n, vec![1.0; n * n]).unwrap()
    }

    fn info_node(id: &str, county: &str, alignment: f64, seed: bool) -> InfoNode {
        InfoNode {
            id: id.into(),
            county: county.into(),
            alignment: Some(alignment),
            misinformed_seed: seed,
        }
    }

    fn nodes_in(counts: &[usize]) -> Vec<SampledNode> {
        counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| {
                (0..n).map(move |_| SampledNode {
                    county: c as u32,
                    persona: 0,
                    party: Party::Democrat,
                    label: Label::Ordinary,
                })
            })
            .collect()
    }

    #[test]
    fn mobility_validation() {
        assert!(MobilityMatrix::new(2, vec![1.0, 2.0, 1.0, 1.0]).is_err());
        assert!(MobilityMatrix::new(2, vec![1.0, -1.0, -1.0, 1.0]).is_err());
        assert!(matches!(MobilityMatrix::new(1, vec![0.0]), Err(ContactNetError::ZeroMobility)));
        assert!(MobilityMatrix::new(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn scenario_rejects_duplicates_and_bad_shares() {
        let dup = Scenario::new(vec![county("1", 10, 0.5), county("1", 10, 0.5)], uniform(2));
        assert!(dup.is_err());
        let share = Scenario::new(vec![county("1", 10, 1.5)], uniform(1));
        assert!(share.is_err());
        assert!(matches!(
            Scenario::new(vec![], MobilityMatrix { n: 0, values: vec![] }),
            Err(ContactNetError::EmptyScenario)
        ));
    }

    #[test]
    fn expected_edges_single_county() {
        let l = MobilityMatrix::new(1, vec![3.5]).unwrap();
        let e = expected_edges(&l, 4.0, 10).unwrap();
        assert_eq!(e.get(0, 0), 20.0);
    }

    #[test]
    fn expected_edges_two_counties() {
        let e = expected_edges(&uniform(2), 4.0, 10).unwrap();
        // three unordered blocks share k̄N/2 = 20
        for (x, y) in [(0, 0), (0, 1), (1, 1)] {
            assert!((e.get(x, y) - 20.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(e.get(1, 0), e.get(0, 1));
        assert!((e.total() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn expected_edges_errors() {
        assert!(expected_edges(&uniform(2), 0.0, 10).is_err());
        assert!(expected_edges(&uniform(2), 4.0, 1).is_err());
    }

    #[test]
    fn two_nodes_one_edge() {
        let nodes = nodes_in(&[2]);
        let e = expected_edges(&uniform(1), 1.0, 2).unwrap();
        let net = build_contact_network(&nodes, &e, 1.0, 9).unwrap();
        assert_eq!(net.edges(), &[(0, 1)]);
    }

    #[test]
    fn zero_mobility_pair_gets_no_edges() {
        let l = MobilityMatrix::new(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let nodes = nodes_in(&[50, 50]);
        let e = expected_edges(&l, 6.0, nodes.len()).unwrap();
        let net = build_contact_network(&nodes, &e, 6.0, 3).unwrap();
        assert_eq!(net.edge_count(), 300);
        assert!(!net.block_edge_counts().contains_key(&(0, 1)));
    }

    #[test]
    fn saturated_block_is_an_error() {
        let nodes = nodes_in(&[3]);
        let e = expected_edges(&uniform(1), 4.0, 3).unwrap();
        let err = build_contact_network(&nodes, &e, 4.0, 1).unwrap_err();
        assert!(matches!(err, ContactNetError::Saturation { required: 6, capacity: 3, .. }));
    }

    #[test]
    fn empty_county_drops_out_of_support() {
        let nodes = nodes_in(&[40, 0, 40]);
        let e = expected_edges(&uniform(3), 4.0, nodes.len()).unwrap();
        let net = build_contact_network(&nodes, &e, 4.0, 5).unwrap();
        assert_eq!(net.edge_count(), 160);
    }

    #[test]
    fn multinomial_preserves_total() {
        let mut rng = stream_rng(1, 0);
        let counts = multinomial(&mut rng, 1000, &[0.2, 0.0, 0.5, 0.3]);
        assert_eq!(counts.iter().sum::<u64>(), 1000);
        assert_eq!(counts[1], 0);
    }

    #[test]
    fn binary_round_trip() {
        let nodes = nodes_in(&[30, 20]);
        let e = expected_edges(&uniform(2), 5.0, nodes.len()).unwrap();
        let net = build_contact_network(&nodes, &e, 5.0, 11).unwrap();
        let mut labels = net.labels().to_vec();
        labels[3] = Label::Misinformed;
        labels[49] = Label::Misinformed;
        let net = net.relabeled(labels);
        let mut buf = Vec::new();
        net.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 32 + 50 * 4 + 7 + net.edge_count() * 8);
        assert_eq!(ContactNetwork::read_binary(&buf[..]).unwrap(), net);
        assert!(ContactNetwork::read_binary(&buf[..20]).is_err());
    }

    fn sampling_fixture() -> (Scenario, InfoNetwork) {
        let scenario = Scenario::new(
            vec![county("A", 1000, 0.6), county("B", 200, 1.0)],
            uniform(2),
        )
        .unwrap();
        let nodes = vec![
            info_node("r1", "A", 0.5, true),
            info_node("r2", "A", 0.2, false),
            info_node("d1", "A", -0.5, false),
            info_node("rb", "B", 0.9, false),
        ];
        let net = InfoNetwork::new(nodes, vec![InfoEdge { src: 0, dst: 2, weight: 1 }]).unwrap();
        (scenario, net)
    }

    #[test]
    fn sampling_matches_party_split() {
        let (scenario, net) = sampling_fixture();
        let labels = spread_misinformation(&net, 1, ExposureMode::DistinctFriends);
        let sample = sample_population(&scenario, &net, &labels, 0.1, 4).unwrap();
        assert_eq!(sample.len(), 120);
        // independent tally over the emitted list
        let a: Vec<_> = sample.iter().filter(|s| s.county == 0).collect();
        let rep = a.iter().filter(|s| net.nodes()[s.persona as usize].alignment.unwrap() > 0.0).count();
        assert_eq!((a.len(), rep), (100, 60));
        assert!(sample
            .iter()
            .filter(|s| s.county == 1)
            .all(|s| s.persona == 3 && s.party == Party::Republican));
        for s in &sample {
            assert_eq!(s.label, labels.labels[s.persona as usize]);
        }
    }

    #[test]
    fn sampling_rounding_to_zero_contributes_nothing() {
        let (scenario, net) = sampling_fixture();
        let labels = spread_misinformation(&net, 1, ExposureMode::DistinctFriends);
        // B: 200 × 0.002 = 0.4 rounds to 0
        let sample = sample_population(&scenario, &net, &labels, 0.002, 4).unwrap();
        assert_eq!(sample.len(), 2);
        assert!(sample.iter().all(|s| s.county == 0));
    }

    #[test]
    fn sampling_missing_pool() {
        let (_, net) = sampling_fixture();
        let scenario = Scenario::new(
            vec![county("A", 1000, 0.6), county("B", 200, 0.5)],
            uniform(2),
        )
        .unwrap();
        let labels = spread_misinformation(&net, 1, ExposureMode::DistinctFriends);
        let err = sample_population(&scenario, &net, &labels, 0.1, 4).unwrap_err();
        assert!(matches!(
            err,
            ContactNetError::MissingPartyPool { ref county, party: Party::Democrat } if county == "B"
        ));
        assert!(sample_population(&scenario, &net, &labels, 0.0, 4).is_err());
    }

    #[test]
    fn gravity_mobility_properties() {
        let counties = vec![county("a", 100, 0.5), county("b", 100, 0.5), county("c", 300, 0.5)];
        let l = generate_synthetic_mobility(&counties, 0.0, 0.02, 7).unwrap();
        assert_eq!(l.get(0, 1), 100.0 * 100.0);
        assert_eq!(l.get(0, 2), 100.0 * 300.0);
        assert_eq!(l.get(2, 2), 300.0 * 300.0);
        let again = generate_synthetic_mobility(&counties, 2.0, 0.02, 7).unwrap();
        assert_eq!(again, generate_synthetic_mobility(&counties, 2.0, 0.02, 7).unwrap());
        assert_eq!(again.get(0, 2), again.get(2, 0));
    }

    #[test]
    fn gravity_equal_distances_give_equal_flows() {
        // a and b equally far from c
        let coords = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.5)];
        let l = gravity_matrix(&[100.0, 100.0, 50.0], &coords, 2.0, 0.01).unwrap();
        assert_eq!(l.get(0, 2), l.get(1, 2));
    }
}
