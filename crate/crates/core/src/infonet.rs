//! Directed, weighted retweet networks.
//!
//! An edge `(i → j, w)` records that `j` retweeted `i` `w` times, so
//! content flows along edge direction. The accounts a user retweeted are that
//! user's "friends": exposure to misinformation arrives over in-edges.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contactnet::Scenario;
use crate::rng::{stage_seed, stream_rng};
use crate::{Label, Party};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoNetError {
    #[error("information network has no nodes")]
    Empty,
    #[error("edge {src} -> {dst}: {reason}")]
    InvalidEdge { src: u32, dst: u32, reason: String },
    #[error("duplicate node id '{0}'")]
    DuplicateNode(String),
    #[error("no node has a political alignment score")]
    NoScoredNodes,
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoNode {
    pub id: String,
    /// County identifier (FIPS code for real data).
    pub county: String,
    /// Signed political alignment; positive leans Republican.
    pub alignment: Option<f64>,
    /// Account observed sharing low-credibility content.
    pub misinformed_seed: bool,
}

impl InfoNode {
    pub fn party(&self) -> Option<Party> {
        self.alignment.and_then(Party::from_alignment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InfoEdge {
    pub src: u32,
    pub dst: u32,
    pub weight: u32,
}

/// Retweet network with cached in-adjacency.
///
/// Parallel edges `i → j` are merged by summing their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoNetwork {
    nodes: Vec<InfoNode>,
    edges: Vec<InfoEdge>,
    in_offsets: Vec<usize>,
    in_edges: Vec<(u32, u32)>,
}

impl InfoNetwork {
    pub fn new(nodes: Vec<InfoNode>, mut edges: Vec<InfoEdge>) -> Result<Self, InfoNetError> {
        if nodes.is_empty() {
            return Err(InfoNetError::Empty);
        }
        let n = nodes.len();
        for e in &edges {
            let bad = |reason: &str| InfoNetError::InvalidEdge {
                src: e.src,
                dst: e.dst,
                reason: reason.to_string(),
            };
            if e.src as usize >= n || e.dst as usize >= n {
                return Err(bad("endpoint out of range"));
            }
            if e.src == e.dst {
                return Err(bad("self-edge"));
            }
            if e.weight == 0 {
                return Err(bad("weight must be >= 1"));
            }
        }
        edges.sort_unstable_by_key(|e| (e.src, e.dst));
        edges.dedup_by(|next, kept| {
            if next.src == kept.src && next.dst == kept.dst {
                kept.weight += next.weight;
                true
            } else {
                false
            }
        });

        let mut in_offsets = vec![0usize; n + 1];
        for e in &edges {
            in_offsets[e.dst as usize + 1] += 1;
        }
        for i in 0..n {
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut fill = in_offsets.clone();
        let mut in_edges = vec![(0u32, 0u32); edges.len()];
        for e in &edges {
            let slot = &mut fill[e.dst as usize];
            in_edges[*slot] = (e.src, e.weight);
            *slot += 1;
        }
        Ok(Self {
            nodes,
            edges,
            in_offsets,
            in_edges,
        })
    }

    /// Builds from string ids, resolving edge endpoints by id.
    pub fn from_ids(
        nodes: Vec<InfoNode>,
        edges: impl IntoIterator<Item = (String, String, u32)>,
    ) -> Result<Self, InfoNetError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i as u32).is_some() {
                return Err(InfoNetError::DuplicateNode(node.id.clone()));
            }
        }
        let mut resolved = Vec::new();
        for (src, dst, weight) in edges {
            let lookup = |id: &str| {
                index.get(id).copied().ok_or_else(|| InfoNetError::InvalidEdge {
                    src: u32::MAX,
                    dst: u32::MAX,
                    reason: format!("unknown node id '{id}' in edge {src} -> {dst}"),
                })
            };
            resolved.push(InfoEdge {
                src: lookup(&src)?,
                dst: lookup(&dst)?,
                weight,
            });
        }
        Self::new(nodes, resolved)
    }

    pub fn nodes(&self) -> &[InfoNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[InfoEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(src, weight)` pairs of the accounts `node` retweeted.
    pub fn in_neighbors(&self, node: usize) -> &[(u32, u32)] {
        &self.in_edges[self.in_offsets[node]..self.in_offsets[node + 1]]
    }

    pub fn seed_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.misinformed_seed).count()
    }

    /// Copy of the network with alignments replaced.
    pub fn with_alignments(&self, alignments: &[Option<f64>]) -> Self {
        assert_eq!(alignments.len(), self.nodes.len());
        let mut out = self.clone();
        for (node, &a) in out.nodes.iter_mut().zip(alignments) {
            node.alignment = a;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExposureMode {
    /// Number of distinct seed accounts retweeted.
    #[default]
    DistinctFriends,
    /// Total retweets of seed accounts.
    RetweetWeighted,
}

impl std::str::FromStr for ExposureMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "distinct_friends" | "friends" => Ok(ExposureMode::DistinctFriends),
            "retweet_weighted" | "retweets" => Ok(ExposureMode::RetweetWeighted),
            other => Err(format!(
                "unknown exposure mode '{other}' (expected distinct-friends or retweet-weighted)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisinfoLabeling {
    pub phi: u32,
    pub mode: ExposureMode,
    pub labels: Vec<Label>,
}

impl MisinfoLabeling {
    pub fn misinformed_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_misinformed()).count()
    }

    pub fn misinformed_fraction(&self) -> f64 {
        self.misinformed_count() as f64 / self.labels.len().max(1) as f64
    }
}

/// Seed exposure of every node: seeds retweeted (or retweets of seeds).
pub fn seed_exposure(net: &InfoNetwork, mode: ExposureMode) -> Vec<u64> {
    (0..net.len())
        .into_par_iter()
        .map(|j| {
            net.in_neighbors(j)
                .iter()
                .filter(|(src, _)| net.nodes[*src as usize].misinformed_seed)
                .map(|&(_, w)| match mode {
                    ExposureMode::DistinctFriends => 1,
                    ExposureMode::RetweetWeighted => w as u64,
                })
                .sum()
        })
        .collect()
}

/// Single-step linear threshold: a node is misinformed if it is a seed or
/// its exposure to seeds reaches `phi`. Newly converted nodes do not expose
/// anyone in the same call.
pub fn spread_misinformation(net: &InfoNetwork, phi: u32, mode: ExposureMode) -> MisinfoLabeling {
    assert!(phi >= 1, "phi must be >= 1");
    let exposure = seed_exposure(net, mode);
    let labels = net
        .nodes
        .iter()
        .zip(&exposure)
        .map(|(node, &x)| {
            if node.misinformed_seed || x >= phi as u64 {
                Label::Misinformed
            } else {
                Label::Ordinary
            }
        })
        .collect();
    MisinfoLabeling { phi, mode, labels }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOutcome {
    pub alignments: Vec<Option<f64>>,
    /// Rounds that scored at least one node.
    pub rounds: u32,
    pub newly_scored: usize,
}

/// Fills missing alignments with the retweet-weighted mean of scored
/// neighbours (in- and out-neighbours alike).
///
/// Rounds are synchronous: scores assigned in a round become visible in the
/// next one. Propagation stops once a round scores nobody, or after
/// `max_rounds`. Nodes unreachable from any scored node stay unscored.
pub fn propagate_alignment(
    net: &InfoNetwork,
    max_rounds: u32,
) -> Result<PropagationOutcome, InfoNetError> {
    let mut scores: Vec<Option<f64>> = net.nodes.iter().map(|n| n.alignment).collect();
    if scores.iter().all(Option::is_none) {
        return Err(InfoNetError::NoScoredNodes);
    }
    let n = net.len();
    let mut offsets = vec![0usize; n + 1];
    for e in &net.edges {
        offsets[e.src as usize + 1] += 1;
        offsets[e.dst as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut nbrs = vec![(0u32, 0u32); offsets[n]];
    for e in &net.edges {
        nbrs[fill[e.src as usize]] = (e.dst, e.weight);
        fill[e.src as usize] += 1;
        nbrs[fill[e.dst as usize]] = (e.src, e.weight);
        fill[e.dst as usize] += 1;
    }

    let mut rounds = 0;
    let mut newly_scored = 0;
    while rounds < max_rounds {
        let updates: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .filter(|&v| scores[v].is_none())
            .filter_map(|v| {
                let (num, den) = nbrs[offsets[v]..offsets[v + 1]]
                    .iter()
                    .filter_map(|&(u, w)| scores[u as usize].map(|s| (s, w as f64)))
                    .fold((0.0, 0.0), |(num, den), (s, w)| (num + w * s, den + w));
                (den > 0.0).then(|| (v, num / den))
            })
            .collect();
        if updates.is_empty() {
            break;
        }
        newly_scored += updates.len();
        for (v, s) in updates {
            scores[v] = Some(s);
        }
        rounds += 1;
    }
    Ok(PropagationOutcome {
        alignments: scores,
        rounds,
        newly_scored,
    })
}

/// Parameters of the synthetic retweet-network generator.
///
/// Users arrive in random order. Each arriving user retweets a number of
/// earlier accounts drawn from a discrete power law (so the number of
/// accounts retweeted is heavy tailed), choosing each one with probability
/// proportional to one plus the times it has already been retweeted, from
/// its own party with probability `homophily`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoGenConfig {
    /// Power-law exponent of accounts retweeted per user (> 1).
    pub retweeted_exponent: f64,
    pub min_retweeted: u32,
    pub max_retweeted: u32,
    /// Probability that a retweet targets a same-party account.
    pub homophily: f64,
    /// Mean retweets per edge (>= 1); weights are 1 + geometric.
    pub mean_weight: f64,
    pub seed_rate_republican: f64,
    pub seed_rate_democrat: f64,
    /// Share of users whose alignment is withheld (to be recovered by label
    /// propagation).
    pub unscored_fraction: f64,
}

impl Default for InfoGenConfig {
    fn default() -> Self {
        Self {
            retweeted_exponent: 1.8,
            min_retweeted: 1,
            max_retweeted: 2000,
            homophily: 0.85,
            mean_weight: 2.0,
            seed_rate_republican: 0.06,
            seed_rate_democrat: 0.015,
            unscored_fraction: 0.2,
        }
    }
}

impl InfoGenConfig {
    pub fn validate(&self) -> Result<(), InfoNetError> {
        let bad = |m: String| Err(InfoNetError::InvalidConfig(m));
        let probs = [
            ("homophily", self.homophily),
            ("seed_rate_republican", self.seed_rate_republican),
            ("seed_rate_democrat", self.seed_rate_democrat),
            ("unscored_fraction", self.unscored_fraction),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.retweeted_exponent > 1.0 && self.retweeted_exponent.is_finite()) {
            return bad(format!("retweeted_exponent must be > 1, got {}", self.retweeted_exponent));
        }
        if self.min_retweeted == 0 || self.max_retweeted < self.min_retweeted {
            return bad(format!(
                "need 1 <= min_retweeted <= max_retweeted, got {}..{}",
                self.min_retweeted, self.max_retweeted
            ));
        }
        if !(self.mean_weight >= 1.0 && self.mean_weight.is_finite()) {
            return bad(format!("mean_weight must be >= 1, got {}", self.mean_weight));
        }
        Ok(())
    }
}

/// Draws a synthetic retweet network with the scenario's per-county user
/// counts. Fully determined by `seed`.
pub fn generate_synthetic_infonet(
    scenario: &Scenario,
    cfg: &InfoGenConfig,
    seed: u64,
) -> Result<InfoNetwork, InfoNetError> {
    cfg.validate()?;
    if let Some(c) = scenario.counties().iter().find(|c| c.twitter_users == 0) {
        return Err(InfoNetError::InvalidConfig(format!(
            "county {} has no twitter users",
            c.id
        )));
    }

    let mut rng = stream_rng(stage_seed(seed, "infonet-nodes"), 0);
    let mut nodes = Vec::new();
    let mut parties = Vec::new();
    for county in scenario.counties() {
        for k in 0..county.twitter_users {
            let party = if rng.random_bool(county.republican_share) {
                Party::Republican
            } else {
                Party::Democrat
            };
            let magnitude: f64 = rng.random_range(0.05..=1.0);
            let alignment = match party {
                Party::Republican => magnitude,
                Party::Democrat => -magnitude,
            };
            let rate = match party {
                Party::Republican => cfg.seed_rate_republican,
                Party::Democrat => cfg.seed_rate_democrat,
            };
            let misinformed_seed = rng.random_bool(rate);
            let scored = !rng.random_bool(cfg.unscored_fraction);
            nodes.push(InfoNode {
                id: format!("{}-{}", county.id, k),
                county: county.id.clone(),
                alignment: scored.then_some(alignment),
                misinformed_seed,
            });
            parties.push(party);
        }
    }

    let mut rng = stream_rng(stage_seed(seed, "infonet-edges"), 0);
    let mut order: Vec<u32> = (0..nodes.len() as u32).collect();
    order.shuffle(&mut rng);
    let weight_dist = Geometric::new(1.0 / cfg.mean_weight)
        .map_err(|e| InfoNetError::InvalidConfig(e.to_string()))?;
    // popularity urns: one entry per arrival plus one per retweet received
    let mut urns: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
    let mut edges = Vec::new();
    let mut chosen: Vec<u32> = Vec::new();
    let tail = 1.0 / (cfg.retweeted_exponent - 1.0);
    for &j in &order {
        let own = parties[j as usize];
        let u: f64 = rng.random_range(f64::EPSILON..1.0);
        let draws = ((cfg.min_retweeted as f64) * u.powf(-tail))
            .floor()
            .min(cfg.max_retweeted as f64) as u32;
        chosen.clear();
        for _ in 0..draws {
            let party = if rng.random_bool(cfg.homophily) { own } else { own.other() };
            let urn = &urns[party.index()];
            if urn.is_empty() {
                continue;
            }
            // a few retries against repeats; popular accounts collide often
            for _ in 0..8 {
                let i = urn[rng.random_range(0..urn.len())];
                if !chosen.contains(&i) {
                    chosen.push(i);
                    break;
                }
            }
        }
        for &i in &chosen {
            let weight = 1 + weight_dist.sample(&mut rng).min(u32::MAX as u64 - 1) as u32;
            edges.push(InfoEdge { src: i, dst: j, weight });
            urns[parties[i as usize].index()].push(i);
        }
        urns[own.index()].push(j);
    }
    InfoNetwork::new(nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: &str, alignment: Option<f64>, seed: bool) -> InfoNode {
        InfoNode {
            id: id.into(),
            county: "1".into(),
            alignment,
            misinformed_seed: seed,
        }
    }

    fn edge(src: u32, dst: u32, weight: u32) -> InfoEdge {
        InfoEdge { src, dst, weight }
    }

    fn misinformed(l: &MisinfoLabeling) -> Vec<usize> {
        (0..l.labels.len()).filter(|&i| l.labels[i].is_misinformed()).collect()
    }

    #[test]
    fn rejects_self_edges_and_zero_weights() {
        let nodes = vec![node("a", None, false), node("b", None, false)];
        assert!(InfoNetwork::new(nodes.clone(), vec![edge(0, 0, 1)]).is_err());
        assert!(InfoNetwork::new(nodes.clone(), vec![edge(0, 1, 0)]).is_err());
        assert!(InfoNetwork::new(nodes, vec![edge(0, 2, 1)]).is_err());
        assert_eq!(InfoNetwork::new(vec![], vec![]), Err(InfoNetError::Empty));
    }

    #[test]
    fn parallel_edges_are_merged() {
        let nodes = vec![node("a", None, false), node("b", None, false)];
        let net = InfoNetwork::new(nodes, vec![edge(0, 1, 2), edge(0, 1, 3)]).unwrap();
        assert_eq!(net.edges(), &[edge(0, 1, 5)]);
        assert_eq!(net.in_neighbors(1), &[(0, 5)]);
    }

    #[test]
    fn four_node_example_both_modes() {
        // seeds a, b; a->c (3), b->c (1), a->d (5)
        let nodes = vec![
            node("a", None, true),
            node("b", None, true),
            node("c", None, false),
            node("d", None, false),
        ];
        let net =
            InfoNetwork::new(nodes, vec![edge(0, 2, 3), edge(1, 2, 1), edge(0, 3, 5)]).unwrap();
        let friends = spread_misinformation(&net, 2, ExposureMode::DistinctFriends);
        assert_eq!(misinformed(&friends), vec![0, 1, 2]);
        let weighted = spread_misinformation(&net, 2, ExposureMode::RetweetWeighted);
        assert_eq!(misinformed(&weighted), vec![0, 1, 2, 3]);
    }

    #[test]
    fn spreading_is_single_step() {
        // seed -> a -> b
        let nodes = vec![node("s", None, true), node("a", None, false), node("b", None, false)];
        let net = InfoNetwork::new(nodes, vec![edge(0, 1, 1), edge(1, 2, 1)]).unwrap();
        let l = spread_misinformation(&net, 1, ExposureMode::DistinctFriends);
        assert_eq!(misinformed(&l), vec![0, 1]);
    }

    #[test]
    fn phi_one_converts_every_exposed_node() {
        let nodes = vec![
            node("s", None, true),
            node("a", None, false),
            node("b", None, false),
            node("c", None, false),
        ];
        let net = InfoNetwork::new(nodes, vec![edge(0, 1, 1), edge(0, 2, 7), edge(2, 3, 1)]).unwrap();
        let l = spread_misinformation(&net, 1, ExposureMode::DistinctFriends);
        assert_eq!(misinformed(&l), vec![0, 1, 2]);
        // unreachable threshold leaves only the seeds
        let l = spread_misinformation(&net, 100, ExposureMode::RetweetWeighted);
        assert_eq!(misinformed(&l), vec![0]);
    }

    #[test]
    fn propagation_fixed_point_when_all_scored() {
        let nodes = vec![node("a", Some(0.4), false), node("b", Some(-0.2), false)];
        let net = InfoNetwork::new(nodes, vec![edge(0, 1, 2)]).unwrap();
        let out = propagate_alignment(&net, 100).unwrap();
        assert_eq!(out.alignments, vec![Some(0.4), Some(-0.2)]);
        assert_eq!(out.rounds, 0);
    }

    #[test]
    fn propagation_along_a_path() {
        let nodes = vec![node("u", Some(1.0), false), node("v", None, false), node("x", None, false)];
        let net = InfoNetwork::new(nodes, vec![edge(0, 1, 1), edge(1, 2, 1)]).unwrap();
        let one = propagate_alignment(&net, 1).unwrap();
        assert_eq!(one.alignments, vec![Some(1.0), Some(1.0), None]);
        let two = propagate_alignment(&net, 2).unwrap();
        assert_eq!(two.alignments, vec![Some(1.0), Some(1.0), Some(1.0)]);
        assert_eq!(two.rounds, 2);
    }

    #[test]
    fn propagation_weighted_star() {
        // centre unscored, leaves +1 (w=3) and -1 (w=1)
        let nodes = vec![node("c", None, false), node("p", Some(1.0), false), node("n", Some(-1.0), false)];
        let net = InfoNetwork::new(nodes, vec![edge(1, 0, 3), edge(0, 2, 1)]).unwrap();
        let out = propagate_alignment(&net, 10).unwrap();
        let independent = (3.0 * 1.0 - 1.0) / (3.0 + 1.0);
        assert_eq!(out.alignments[0], Some(0.5));
        assert_eq!(out.alignments[0], Some(independent));
    }

    #[test]
    fn propagation_leaves_unreachable_nodes_unscored() {
        let nodes = vec![node("a", Some(1.0), false), node("b", None, false), node("c", None, false)];
        let net = InfoNetwork::new(nodes, vec![edge(0, 1, 1)]).unwrap();
        let out = propagate_alignment(&net, 100).unwrap();
        assert_eq!(out.alignments[2], None);
    }

    #[test]
    fn propagation_needs_a_scored_node() {
        let net = InfoNetwork::new(vec![node("a", None, false)], vec![]).unwrap();
        assert_eq!(propagate_alignment(&net, 5), Err(InfoNetError::NoScoredNodes));
    }

    #[test]
    fn zero_alignment_has_no_party() {
        assert_eq!(node("z", Some(0.0), false).party(), None);
        assert_eq!(node("r", Some(0.1), false).party(), Some(Party::Republican));
        assert_eq!(node("d", Some(-0.1), false).party(), Some(Party::Democrat));
    }

    #[test]
    fn generator_config_validation() {
        let mut cfg = InfoGenConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.homophily = 1.5;
        assert!(cfg.validate().is_err());
        cfg = InfoGenConfig {
            seed_rate_democrat: -0.1,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
