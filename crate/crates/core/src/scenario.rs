//! Scenario files and synthetic scenario generation.
//!
//! A scenario directory holds:
//!
//! * `counties.csv`: `fips,voters,republican_share,twitter_users`
//! * `mobility.csv`: `x_fips,y_fips,L_xy`; missing pairs are zero, a pair
//!   given in one direction only is mirrored
//! * optionally `info_nodes.csv` (`id,county_fips,alignment,misinformed_seed`,
//!   empty alignment for unscored users) and `info_edges.csv`
//!   (`src,dst,weight`, ids as in `info_nodes.csv`)
//!
//! Generator settings live in a flat `key = value` file (TOML syntax).

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand_distr::{Beta, Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contactnet::{generate_synthetic_mobility, ContactNetError, County, MobilityMatrix, Scenario};
use crate::infonet::{generate_synthetic_infonet, InfoEdge, InfoGenConfig, InfoNetError, InfoNetwork, InfoNode};
use crate::rng::{stage_seed, stream_rng};

pub const COUNTIES_FILE: &str = "counties.csv";
pub const MOBILITY_FILE: &str = "mobility.csv";
pub const INFO_NODES_FILE: &str = "info_nodes.csv";
pub const INFO_EDGES_FILE: &str = "info_edges.csv";

/// Relative asymmetry above which loading a mobility file logs a warning.
pub const ASYMMETRY_WARN: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{}:{line}: {message}", path.display())]
    Validation { path: PathBuf, line: u64, message: String },
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Scenario(#[from] ContactNetError),
    #[error(transparent)]
    InfoNet(#[from] InfoNetError),
}

/// Settings for [`generate_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub county_count: usize,
    /// Log-normal county population, parameters of the underlying normal.
    pub population_log_mean: f64,
    pub population_log_sigma: f64,
    /// Beta distribution of the Republican vote share.
    pub republican_share_alpha: f64,
    pub republican_share_beta: f64,
    pub min_twitter_users: u64,
    pub twitter_users_per_capita: f64,
    pub gravity_exponent: f64,
    /// Distance floor, also used as the within-county distance.
    pub within_distance: f64,
    pub retweeted_exponent: f64,
    pub min_retweeted: u32,
    pub max_retweeted: u32,
    pub homophily: f64,
    pub mean_weight: f64,
    pub seed_rate_republican: f64,
    pub seed_rate_democrat: f64,
    pub unscored_fraction: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let info = InfoGenConfig::default();
        Self {
            county_count: 341,
            population_log_mean: 12.7,
            population_log_sigma: 1.0,
            republican_share_alpha: 5.0,
            republican_share_beta: 4.0,
            min_twitter_users: 200,
            twitter_users_per_capita: 0.001,
            gravity_exponent: 2.0,
            within_distance: 0.02,
            retweeted_exponent: info.retweeted_exponent,
            min_retweeted: info.min_retweeted,
            max_retweeted: info.max_retweeted,
            homophily: info.homophily,
            mean_weight: info.mean_weight,
            seed_rate_republican: info.seed_rate_republican,
            seed_rate_democrat: info.seed_rate_democrat,
            unscored_fraction: info.unscored_fraction,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn infogen(&self) -> InfoGenConfig {
        InfoGenConfig {
            retweeted_exponent: self.retweeted_exponent,
            min_retweeted: self.min_retweeted,
            max_retweeted: self.max_retweeted,
            homophily: self.homophily,
            mean_weight: self.mean_weight,
            seed_rate_republican: self.seed_rate_republican,
            seed_rate_democrat: self.seed_rate_democrat,
            unscored_fraction: self.unscored_fraction,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::InvalidConfig(m));
        if self.county_count == 0 {
            return bad("county_count must be >= 1".into());
        }
        if !self.population_log_mean.is_finite() || !(self.population_log_sigma >= 0.0) {
            return bad("population distribution needs finite mean and sigma >= 0".into());
        }
        if !(self.republican_share_alpha > 0.0 && self.republican_share_beta > 0.0) {
            return bad("republican share beta parameters must be > 0".into());
        }
        if self.min_twitter_users == 0 {
            return bad("min_twitter_users must be >= 1".into());
        }
        if !(self.twitter_users_per_capita >= 0.0 && self.twitter_users_per_capita.is_finite()) {
            return bad("twitter_users_per_capita must be >= 0".into());
        }
        if !(self.gravity_exponent >= 0.0 && self.gravity_exponent.is_finite()) {
            return bad("gravity_exponent must be >= 0".into());
        }
        if !(self.within_distance > 0.0) {
            return bad("within_distance must be > 0".into());
        }
        self.infogen().validate()?;
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = toml::from_str(s).map_err(|e| ScenarioError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_toml_str(&read(path)?)
    }
}

/// Synthesizes a scenario and its information network.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<(Scenario, InfoNetwork), ScenarioError> {
    cfg.validate()?;
    let mut rng = stream_rng(stage_seed(cfg.seed, "counties"), 0);
    let pop = LogNormal::new(cfg.population_log_mean, cfg.population_log_sigma)
        .map_err(|e| ScenarioError::InvalidConfig(e.to_string()))?;
    let share = Beta::new(cfg.republican_share_alpha, cfg.republican_share_beta)
        .map_err(|e| ScenarioError::InvalidConfig(e.to_string()))?;
    let width = cfg.county_count.to_string().len().max(5);
    let counties: Vec<County> = (0..cfg.county_count)
        .map(|i| {
            let voters = (pop.sample(&mut rng).round() as u64).max(1);
            // shares of exactly 0 or 1 would leave a party pool empty
            let republican_share = share.sample(&mut rng).clamp(0.01, 0.99);
            let twitter_users =
                ((voters as f64 * cfg.twitter_users_per_capita).round() as u64).max(cfg.min_twitter_users);
            County {
                id: format!("{:0width$}", i + 1),
                voters,
                republican_share,
                twitter_users,
            }
        })
        .collect();

    let mobility = generate_synthetic_mobility(
        &counties,
        cfg.gravity_exponent,
        cfg.within_distance,
        stage_seed(cfg.seed, "mobility"),
    )?;
    let scenario = Scenario::new(counties, mobility)?;
    let net = generate_synthetic_infonet(&scenario, &cfg.infogen(), stage_seed(cfg.seed, "infonet"))?;
    Ok((scenario, net))
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<io::BufWriter<File>, ScenarioError> {
    File::create(path)
        .map(io::BufWriter::new)
        .map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Header-checked CSV records with their 1-based line numbers.
fn records(path: &Path, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>, ScenarioError> {
    let text = read(path)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let parse = |line: u64, message: String| ScenarioError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let found = rdr.headers().map_err(|e| parse(1, e.to_string()))?.clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(parse(
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        out.push((line, rec));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(path: &Path, line: u64, rec: &csv::StringRecord, i: usize, name: &str) -> Result<T, ScenarioError>
where
    T::Err: std::fmt::Display,
{
    rec[i].parse().map_err(|e| ScenarioError::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("{name} `{}`: {e}", &rec[i]),
    })
}

fn invalid(path: &Path, line: u64, message: String) -> ScenarioError {
    ScenarioError::Validation {
        path: path.to_path_buf(),
        line,
        message,
    }
}

pub fn load_counties(path: &Path) -> Result<Vec<County>, ScenarioError> {
    let mut counties = Vec::new();
    let mut seen = HashMap::new();
    for (line, rec) in records(path, &["fips", "voters", "republican_share", "twitter_users"])? {
        let id = rec[0].to_string();
        let voters: i64 = field(path, line, &rec, 1, "voters")?;
        let share: f64 = field(path, line, &rec, 2, "republican_share")?;
        let users: i64 = field(path, line, &rec, 3, "twitter_users")?;
        if id.is_empty() {
            return Err(invalid(path, line, "empty fips".into()));
        }
        if voters < 0 {
            return Err(invalid(path, line, format!("county {id}: voters must be >= 0, got {voters}")));
        }
        if !(0.0..=1.0).contains(&share) {
            return Err(invalid(path, line, format!("county {id}: republican_share {share} outside [0, 1]")));
        }
        if users < 0 {
            return Err(invalid(path, line, format!("county {id}: twitter_users must be >= 0, got {users}")));
        }
        if let Some(first) = seen.insert(id.clone(), line) {
            return Err(invalid(path, line, format!("county {id} already defined on line {first}")));
        }
        counties.push(County {
            id,
            voters: voters as u64,
            republican_share: share,
            twitter_users: users as u64,
        });
    }
    if counties.is_empty() {
        return Err(invalid(path, 1, "no counties".into()));
    }
    Ok(counties)
}

/// Reads a mobility file against a county list. A pair listed in both
/// directions is averaged, one listed once is mirrored.
pub fn load_mobility(path: &Path, counties: &[County]) -> Result<MobilityMatrix, ScenarioError> {
    let index: HashMap<&str, usize> = counties.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
    let n = counties.len();
    let mut given: Vec<Option<(f64, u64)>> = vec![None; n * n];
    for (line, rec) in records(path, &["x_fips", "y_fips", "L_xy"])? {
        let lookup = |i: usize| {
            index
                .get(&rec[i])
                .copied()
                .ok_or_else(|| invalid(path, line, format!("unknown county {}", &rec[i])))
        };
        let (x, y) = (lookup(0)?, lookup(1)?);
        let v: f64 = field(path, line, &rec, 2, "L_xy")?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(path, line, format!("L_xy must be finite and >= 0, got {v}")));
        }
        if let Some((_, first)) = given[x * n + y] {
            return Err(invalid(path, line, format!("pair ({}, {}) already given on line {first}", &rec[0], &rec[1])));
        }
        given[x * n + y] = Some((v, line));
    }

    let mut values = vec![0.0; n * n];
    let mut worst: Option<(f64, usize, usize)> = None;
    for x in 0..n {
        for y in x..n {
            let v = match (given[x * n + y], given[y * n + x]) {
                (Some((a, _)), Some((b, _))) if x != y => {
                    let rel = (a - b).abs() / a.max(b).max(f64::MIN_POSITIVE);
                    if rel > worst.map_or(0.0, |w| w.0) {
                        worst = Some((rel, x, y));
                    }
                    (a + b) / 2.0
                }
                (Some((a, _)), _) | (None, Some((a, _))) => a,
                (None, None) => 0.0,
            };
            values[x * n + y] = v;
            values[y * n + x] = v;
        }
    }
    if let Some((rel, x, y)) = worst {
        if rel > ASYMMETRY_WARN {
            log::warn!(
                "{}: mobility asymmetric by up to {:.2}% (counties {}, {}); averaged",
                path.display(),
                rel * 100.0,
                counties[x].id,
                counties[y].id
            );
        }
    }
    MobilityMatrix::new(n, values).map_err(|e| invalid(path, 0, e.to_string()))
}

pub fn load_scenario(counties_path: &Path, mobility_path: &Path) -> Result<Scenario, ScenarioError> {
    let counties = load_counties(counties_path)?;
    let mobility = load_mobility(mobility_path, &counties)?;
    Ok(Scenario::new(counties, mobility)?)
}

/// Loads `counties.csv` and `mobility.csv` from a directory.
pub fn load_scenario_dir(dir: &Path) -> Result<Scenario, ScenarioError> {
    load_scenario(&dir.join(COUNTIES_FILE), &dir.join(MOBILITY_FILE))
}

/// Writes `counties.csv` and `mobility.csv` in canonical form: counties in
/// scenario order, mobility as the nonzero upper triangle.
pub fn save_scenario(scenario: &Scenario, dir: &Path) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(COUNTIES_FILE);
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ScenarioError::Io { path, source }
    };
    let mut w = create(&path)?;
    (|| -> io::Result<()> {
        writeln!(w, "fips,voters,republican_share,twitter_users")?;
        for c in scenario.counties() {
            writeln!(w, "{},{},{},{}", c.id, c.voters, c.republican_share, c.twitter_users)?;
        }
        w.flush()
    })()
    .map_err(io_err(&path))?;

    let path = dir.join(MOBILITY_FILE);
    let mut w = create(&path)?;
    let counties = scenario.counties();
    let l = scenario.mobility();
    (|| -> io::Result<()> {
        writeln!(w, "x_fips,y_fips,L_xy")?;
        for x in 0..counties.len() {
            for y in x..counties.len() {
                let v = l.get(x, y);
                if v > 0.0 {
                    writeln!(w, "{},{},{}", counties[x].id, counties[y].id, v)?;
                }
            }
        }
        w.flush()
    })()
    .map_err(io_err(&path))
}

/// Reads `info_nodes.csv` and `info_edges.csv`, checking county ids against
/// the scenario.
pub fn load_infonet(nodes_path: &Path, edges_path: &Path, scenario: &Scenario) -> Result<InfoNetwork, ScenarioError> {
    let mut nodes = Vec::new();
    let mut index: HashMap<String, u32> = HashMap::new();
    for (line, rec) in records(nodes_path, &["id", "county_fips", "alignment", "misinformed_seed"])? {
        let id = rec[0].to_string();
        let county = rec[1].to_string();
        if scenario.county_index(&county).is_none() {
            return Err(invalid(nodes_path, line, format!("node {id}: unknown county {county}")));
        }
        let alignment = if rec[2].is_empty() {
            None
        } else {
            let a: f64 = field(nodes_path, line, &rec, 2, "alignment")?;
            if !(-1.0..=1.0).contains(&a) {
                return Err(invalid(nodes_path, line, format!("node {id}: alignment {a} outside [-1, 1]")));
            }
            Some(a)
        };
        let misinformed_seed = match &rec[3] {
            "1" | "true" => true,
            "0" | "false" => false,
            other => {
                return Err(ScenarioError::Parse {
                    path: nodes_path.to_path_buf(),
                    line,
                    message: format!("misinformed_seed `{other}`: expected 0 or 1"),
                })
            }
        };
        if index.insert(id.clone(), nodes.len() as u32).is_some() {
            return Err(invalid(nodes_path, line, format!("duplicate node id {id}")));
        }
        nodes.push(InfoNode {
            id,
            county,
            alignment,
            misinformed_seed,
        });
    }
    let mut edges = Vec::new();
    for (line, rec) in records(edges_path, &["src", "dst", "weight"])? {
        let lookup = |i: usize| {
            index
                .get(&rec[i])
                .copied()
                .ok_or_else(|| invalid(edges_path, line, format!("unknown node {}", &rec[i])))
        };
        let (src, dst) = (lookup(0)?, lookup(1)?);
        let weight: u32 = field(edges_path, line, &rec, 2, "weight")?;
        if weight == 0 || src == dst {
            return Err(invalid(edges_path, line, "edges need weight >= 1 and distinct endpoints".into()));
        }
        edges.push(InfoEdge { src, dst, weight });
    }
    Ok(InfoNetwork::new(nodes, edges)?)
}

pub fn load_infonet_dir(dir: &Path, scenario: &Scenario) -> Result<InfoNetwork, ScenarioError> {
    load_infonet(&dir.join(INFO_NODES_FILE), &dir.join(INFO_EDGES_FILE), scenario)
}

pub fn save_infonet(net: &InfoNetwork, dir: &Path) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let nodes_path = dir.join(INFO_NODES_FILE);
    let mut w = create(&nodes_path)?;
    (|| -> io::Result<()> {
        writeln!(w, "id,county_fips,alignment,misinformed_seed")?;
        for n in net.nodes() {
            let a = n.alignment.map(|a| a.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{}", n.id, n.county, a, n.misinformed_seed as u8)?;
        }
        w.flush()
    })()
    .map_err(|source| ScenarioError::Io {
        path: nodes_path.clone(),
        source,
    })?;

    let edges_path = dir.join(INFO_EDGES_FILE);
    let mut w = create(&edges_path)?;
    let nodes = net.nodes();
    (|| -> io::Result<()> {
        writeln!(w, "src,dst,weight")?;
        for e in net.edges() {
            writeln!(w, "{},{},{}", nodes[e.src as usize].id, nodes[e.dst as usize].id, e.weight)?;
        }
        w.flush()
    })()
    .map_err(|source| ScenarioError::Io {
        path: edges_path.clone(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn two_county_fixture_loads() {
        let d = tempfile::tempdir().unwrap();
        let c = write(d.path(), "c.csv", "fips,voters,republican_share,twitter_users\n01001,1000,0.6,250\n01003,2000,0.4,300\n");
        let m = write(d.path(), "m.csv", "x_fips,y_fips,L_xy\n01001,01001,10\n01001,01003,2\n01003,01003,8\n");
        let s = load_scenario(&c, &m).unwrap();
        assert_eq!(s.counties().len(), 2);
        assert_eq!(s.mobility().get(1, 0), 2.0);
    }

    #[test]
    fn negative_population_cites_the_row() {
        let d = tempfile::tempdir().unwrap();
        let c = write(d.path(), "c.csv", "fips,voters,republican_share,twitter_users\n1,1000,0.6,250\n2,-5,0.4,300\n");
        match load_counties(&c).unwrap_err() {
            ScenarioError::Validation { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("voters"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let d = tempfile::tempdir().unwrap();
        let c = write(d.path(), "c.csv", "fips,voters,republican_share,twitter_users\n1,1000,0.6,250\n2,12,abc,300\n");
        match load_counties(&c).unwrap_err() {
            ScenarioError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        let bad_header = write(d.path(), "h.csv", "fips,pop\n1,2\n");
        assert!(matches!(load_counties(&bad_header), Err(ScenarioError::Parse { line: 1, .. })));
    }

    #[test]
    fn slight_asymmetry_is_averaged() {
        let d = tempfile::tempdir().unwrap();
        let c = write(d.path(), "c.csv", "fips,voters,republican_share,twitter_users\na,10,0.5,1\nb,10,0.5,1\n");
        let m = write(d.path(), "m.csv", "x_fips,y_fips,L_xy\na,b,100\nb,a,100.5\n");
        let s = load_scenario(&c, &m).unwrap();
        assert_eq!(s.mobility().get(0, 1), 100.25);
        assert_eq!(s.mobility().get(1, 0), 100.25);
    }

    #[test]
    fn unknown_county_in_mobility_is_rejected() {
        let d = tempfile::tempdir().unwrap();
        let c = write(d.path(), "c.csv", "fips,voters,republican_share,twitter_users\na,10,0.5,1\n");
        let m = write(d.path(), "m.csv", "x_fips,y_fips,L_xy\na,a,1\na,z,1\n");
        assert!(matches!(load_scenario(&c, &m), Err(ScenarioError::Validation { line: 3, .. })));
    }

    #[test]
    fn canonical_files_round_trip_byte_identically() {
        let d = tempfile::tempdir().unwrap();
        let counties = "fips,voters,republican_share,twitter_users\n01001,1000,0.6,250\n01003,2000,0.45,300\n01005,30,0.5,1\n";
        let mobility = "x_fips,y_fips,L_xy\n01001,01001,10\n01001,01003,2.5\n01003,01003,8\n01005,01005,0.125\n";
        write(d.path(), COUNTIES_FILE, counties);
        write(d.path(), MOBILITY_FILE, mobility);
        let s = load_scenario_dir(d.path()).unwrap();
        let out = tempfile::tempdir().unwrap();
        save_scenario(&s, out.path()).unwrap();
        assert_eq!(fs::read_to_string(out.path().join(COUNTIES_FILE)).unwrap(), counties);
        assert_eq!(fs::read_to_string(out.path().join(MOBILITY_FILE)).unwrap(), mobility);
    }

    fn small_config() -> ScenarioConfig {
        ScenarioConfig {
            county_count: 6,
            population_log_mean: 9.0,
            min_twitter_users: 30,
            seed: 11,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn single_county_puts_all_mobility_on_the_diagonal() {
        let cfg = ScenarioConfig {
            county_count: 1,
            ..small_config()
        };
        let (s, net) = generate_scenario(&cfg).unwrap();
        assert_eq!(s.counties().len(), 1);
        assert!(s.mobility().get(0, 0) > 0.0);
        assert_eq!(net.len() as u64, s.counties()[0].twitter_users);
    }

    #[test]
    fn generation_is_deterministic() {
        let (s1, n1) = generate_scenario(&small_config()).unwrap();
        let (s2, n2) = generate_scenario(&small_config()).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(n1, n2);
        let (s3, _) = generate_scenario(&ScenarioConfig { seed: 12, ..small_config() }).unwrap();
        assert_ne!(s1, s3);
    }

    #[test]
    fn default_config_shape() {
        let cfg = ScenarioConfig::default();
        assert_eq!(cfg.county_count, 341);
        let (s, _) = generate_scenario(&cfg).unwrap();
        assert_eq!(s.counties().len(), 341);
        assert!(s.counties().iter().all(|c| c.twitter_users >= 200));
    }

    #[test]
    fn generated_scenario_and_infonet_pass_the_loaders() {
        let (s, net) = generate_scenario(&small_config()).unwrap();
        let d = tempfile::tempdir().unwrap();
        save_scenario(&s, d.path()).unwrap();
        save_infonet(&net, d.path()).unwrap();
        let s2 = load_scenario_dir(d.path()).unwrap();
        assert_eq!(s2.counties(), s.counties());
        let net2 = load_infonet_dir(d.path(), &s2).unwrap();
        assert_eq!(net2, net);
    }

    #[test]
    fn config_toml_round_trip_and_unknown_keys() {
        let cfg = small_config();
        let text = cfg.to_toml_string();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);
        assert_eq!(ScenarioConfig::from_toml_str("seed = 5\n").unwrap().seed, 5);
        assert!(ScenarioConfig::from_toml_str("colour = 1\n").is_err());
        assert!(ScenarioConfig::from_toml_str("county_count = 0\n").is_err());
    }
}
