//! Information network → labels → sampled population → contact network → ABM.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use smir_core::abm::{AbmConfig, EpidemicResult, RepetitionSeries, Simulation};
use smir_core::contactnet::{build_contact_network, expected_edges, sample_population, ContactNetwork, Scenario};
use smir_core::infonet::{propagate_alignment, spread_misinformation, ExposureMode, InfoNetwork, MisinfoLabeling};
use smir_core::rng::{derive_seed, stage_seed};
use smir_core::scenario::{generate_scenario, load_infonet_dir, load_scenario_dir, ScenarioConfig};

use crate::error::CliError;

/// Where the scenario and information network come from.
///
/// A synthetic scenario is generated from its config's own seed; the
/// command layer derives it from the master seed unless a config file sets
/// it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSource {
    Synthetic(ScenarioConfig),
    /// Directory with counties, mobility and info network CSVs.
    Files(PathBuf),
}

/// How many people to draw into the contact network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSize {
    Fraction(f64),
    /// Approximate node count; converted to a fraction of all voters.
    Nodes(u64),
}

impl SampleSize {
    pub fn fraction(&self, scenario: &Scenario) -> f64 {
        match *self {
            SampleSize::Fraction(f) => f,
            SampleSize::Nodes(n) => (n as f64 / scenario.total_voters().max(1) as f64).min(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub phi: u32,
    pub exposure: ExposureMode,
    pub sample: SampleSize,
    pub k_bar: f64,
    pub abm: AbmConfig,
    pub propagation_rounds: u32,
    /// Draw a fresh contact network for every repetition.
    pub regenerate_network: bool,
    pub seed: u64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            phi: 1,
            exposure: ExposureMode::DistinctFriends,
            sample: SampleSize::Fraction(0.001),
            k_bar: 25.0,
            abm: AbmConfig::default(),
            propagation_rounds: 100,
            regenerate_network: false,
            seed: 1,
        }
    }
}

/// Scenario and information network after alignment propagation, shared by
/// all rows of a sweep.
pub struct Prepared {
    pub scenario: Scenario,
    pub infonet: InfoNetwork,
    pub propagation_rounds: u32,
    pub newly_scored: usize,
}

pub fn prepare(source: &ScenarioSource, max_rounds: u32) -> Result<Prepared, CliError> {
    let (scenario, raw) = match source {
        ScenarioSource::Synthetic(cfg) => {
            generate_scenario(cfg).map_err(|e| CliError::stage("generate_scenario", e))?
        }
        ScenarioSource::Files(dir) => {
            let scenario = load_scenario_dir(dir).map_err(|e| CliError::stage("load_scenario", e))?;
            let net = load_infonet_dir(dir, &scenario).map_err(|e| CliError::stage("load_infonet", e))?;
            (scenario, net)
        }
    };
    let outcome = propagate_alignment(&raw, max_rounds).map_err(|e| CliError::stage("propagate_alignment", e))?;
    let infonet = raw.with_alignments(&outcome.alignments);
    Ok(Prepared {
        scenario,
        infonet,
        propagation_rounds: outcome.rounds,
        newly_scored: outcome.newly_scored,
    })
}

pub struct PipelineOutput {
    pub labeling: MisinfoLabeling,
    pub sample_fraction: f64,
    /// Contact network of the first repetition.
    pub network: ContactNetwork,
    pub result: EpidemicResult,
    pub timings: Vec<(&'static str, f64)>,
}

impl PipelineOutput {
    pub fn misinformed_fraction(&self) -> f64 {
        self.network.misinformed_count() as f64 / self.network.node_count().max(1) as f64
    }
}

/// Runs one pipeline configuration on a prepared scenario.
pub fn run(prepared: &Prepared, params: &PipelineParams) -> Result<PipelineOutput, CliError> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timings: &mut Vec<(&'static str, f64)>| {
        timings.push((name, clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };

    let labeling = spread_misinformation(&prepared.infonet, params.phi, params.exposure);
    lap("spread_misinformation", &mut timings);

    let fraction = params.sample.fraction(&prepared.scenario);
    let nodes = sample_population(
        &prepared.scenario,
        &prepared.infonet,
        &labeling,
        fraction,
        stage_seed(params.seed, "sample"),
    )
    .map_err(|e| CliError::stage("sample_population", e))?;
    lap("sample_population", &mut timings);

    let expected = expected_edges(prepared.scenario.mobility(), params.k_bar, nodes.len())
        .map_err(|e| CliError::stage("build_contact_network", e))?;
    let contact_seed = stage_seed(params.seed, "contactnet");
    let build = |seed: u64| {
        build_contact_network(&nodes, &expected, params.k_bar, seed)
            .map_err(|e| CliError::stage("build_contact_network", e))
    };
    let network = build(contact_seed)?;
    lap("build_contact_network", &mut timings);

    let abm_seed = stage_seed(params.seed, "abm");
    let result = if params.regenerate_network {
        let mut reps = Vec::with_capacity(params.abm.repetitions as usize);
        for r in 0..params.abm.repetitions as u64 {
            let net = if r == 0 { network.clone() } else { build(derive_seed(contact_seed, r))? };
            let sim = Simulation::new(&net, params.abm).map_err(|e| CliError::stage("abm", e))?;
            let series: RepetitionSeries =
                sim.run_repetition(derive_seed(abm_seed, r)).map_err(|e| CliError::stage("abm", e))?;
            reps.push(series);
        }
        EpidemicResult::from_repetitions(network.labels(), &reps)
    } else {
        let sim = Simulation::new(&network, params.abm).map_err(|e| CliError::stage("abm", e))?;
        sim.run(abm_seed).map_err(|e| CliError::stage("abm", e))?
    };
    lap("abm", &mut timings);

    Ok(PipelineOutput {
        labeling,
        sample_fraction: fraction,
        network,
        result,
        timings,
    })
}
