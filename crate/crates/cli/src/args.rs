//! Command-line arguments. Every argument struct is also serializable so a
//! run manifest can record and replay it.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use smir_core::infonet::ExposureMode;
use smir_core::meanfield::Scheme;

pub const OUTPUT_DIR_ENV: &str = "SMIR_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "smir", version, about = "SMIR epidemic simulations: mean-field ODEs and network ABM")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Only print warnings and errors on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the mean-field model, optionally over a sweep or grid.
    Meanfield(MeanfieldArgs),
    /// Spread misinformation, build a contact network and run the ABM.
    Pipeline(PipelineArgs),
    /// Run the pipeline once per value of phi, k-bar or the sample fraction.
    Sweep(SweepArgs),
    /// Write a synthetic scenario and information network.
    GenScenario(GenScenarioArgs),
    /// Print statistics of a contact network, scenario directory or manifest.
    Inspect(InspectArgs),
    /// Re-run the command recorded in a manifest and compare outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(long, short, env = OUTPUT_DIR_ENV, default_value = "smir-out")]
    pub out: PathBuf,

    /// Also write SVG plots.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeArg {
    Euler,
    Rk4,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Euler => Scheme::Euler,
            SchemeArg::Rk4 => Scheme::Rk4,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MeanfieldArgs {
    #[arg(long, default_value_t = 0.3)]
    pub beta_o: f64,
    /// Transmission multiplier of the misinformed group.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.2)]
    pub gamma: f64,
    /// Misinformed share of the population.
    #[arg(long, default_value_t = 0.5)]
    pub mu: f64,
    /// Homophily: weight of same-group contacts.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Initially infected fraction, split evenly between the groups.
    #[arg(long, default_value_t = 0.001)]
    pub epsilon: f64,

    #[arg(long, value_enum, default_value_t = SchemeArg::Euler)]
    pub scheme: SchemeArg,
    /// Step size in days.
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    /// Days to integrate.
    #[arg(long, default_value_t = 100)]
    pub horizon: u32,

    /// Sweep one parameter, e.g. `lambda=1:3:0.1` or `alpha=0.5,0.75,1`.
    /// Parameters: lambda, alpha, beta-o, tau.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Second axis for an attack-rate heatmap, e.g. `beta-o=0.1:0.4`
    /// (step 0.01 unless given); needs `--sweep alpha=...`.
    #[arg(long)]
    pub grid: Option<String>,

    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScenarioArgs {
    /// Generate a synthetic scenario from the master seed.
    #[arg(long, conflicts_with = "scenario")]
    pub synthetic: bool,
    /// Directory with counties.csv, mobility.csv, info_nodes.csv and info_edges.csv.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Flat key = value file overriding synthetic scenario settings.
    #[arg(long, conflicts_with = "scenario")]
    pub scenario_config: Option<PathBuf>,
    /// Number of synthetic counties.
    #[arg(long, conflicts_with = "scenario")]
    pub counties: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Fraction of voters drawn into the contact network.
    #[arg(long, conflicts_with = "nodes")]
    pub sample: Option<f64>,
    /// Approximate contact network size (alternative to --sample).
    #[arg(long)]
    pub nodes: Option<u64>,
    /// Mean contact degree.
    #[arg(long, default_value_t = 25.0)]
    pub k_bar: f64,
    #[arg(long, value_parser = parse_exposure, default_value = "distinct-friends")]
    pub exposure: ExposureMode,
    #[arg(long, default_value_t = 100)]
    pub propagation_rounds: u32,

    #[arg(long, default_value_t = 0.01)]
    pub p_o: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_m: f64,
    #[arg(long, default_value_t = 0.2)]
    pub gamma: f64,
    /// Initially infected misinformed individuals.
    #[arg(long, default_value_t = 100)]
    pub initial_infected: usize,
    #[arg(long, default_value_t = 100)]
    pub steps: u32,
    #[arg(long, default_value_t = 10)]
    pub repetitions: u32,
    /// Draw a new contact network for each repetition instead of reusing one.
    #[arg(long)]
    pub regenerate_network: bool,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn parse_exposure(s: &str) -> Result<ExposureMode, String> {
    s.parse()
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PipelineArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    /// Misinformation threshold: seed accounts a user must have retweeted.
    #[arg(long, default_value_t = 1)]
    pub phi: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Skip the CSV copy of the contact network.
    #[arg(long)]
    pub no_debug_csv: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Phi,
    KBar,
    Sample,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Phi => "phi",
            SweepVar::KBar => "k_bar",
            SweepVar::Sample => "sample_fraction",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum)]
    pub vary: SweepVar,
    /// Values as a list `1,2,5` or range `start:stop:step`.
    #[arg(long)]
    pub values: String,
    /// Threshold for rows that do not vary it.
    #[arg(long, default_value_t = 1)]
    pub phi: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenScenarioArgs {
    /// Flat key = value scenario config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub counties: Option<usize>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short, env = OUTPUT_DIR_ENV, default_value = "smir-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    /// Contact network (.bin), scenario directory or manifest.json.
    pub path: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Where to write the replayed outputs (default: `<run dir>-replay`).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
