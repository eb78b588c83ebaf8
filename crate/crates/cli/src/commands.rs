//! Subcommand implementations. Each writes its data files and a manifest to
//! the output directory and returns the summary table for stdout.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use smir_core::abm::{AbmConfig, EpidemicResult};
use smir_core::contactnet::ContactNetwork;
use smir_core::meanfield::{
    homophily_grid, sweep, MeanFieldParams, SolverConfig, SweepParam, SweepRow, Trajectory, COMPARTMENTS,
};
use smir_core::rng::stage_seed;
use smir_core::scenario::{generate_scenario, load_scenario_dir, save_infonet, save_scenario, ScenarioConfig};

use crate::args::*;
use crate::error::CliError;
use crate::manifest::{hash_path, RunManifest, MANIFEST_FILE};
use crate::pipeline::{self, PipelineOutput, PipelineParams, Prepared, SampleSize, ScenarioSource};
use crate::svg::{self, Series};

pub const CONTACT_BIN: &str = "contact_network.bin";
pub const CONTACT_NODES_CSV: &str = "contact_nodes.csv";
pub const CONTACT_EDGES_CSV: &str = "contact_edges.csv";
pub const EPIDEMIC_CSV: &str = "epidemic.csv";
pub const SUMMARY_CSV: &str = "summary.csv";

/// Values from `a,b,c` or `start:stop[:step]`.
pub fn parse_values(spec: &str, default_step: Option<f64>) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Usage(format!("bad value list `{spec}`: {m}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let step = match (parts.get(2), default_step) {
            (Some(s), _) => num(s)?,
            (None, Some(d)) => d,
            (None, None) => return Err(bad("range needs a step, start:stop:step".into())),
        };
        if parts.len() > 3 || !(step > 0.0) || stop < start {
            return Err(bad("expected start:stop:step with step > 0 and stop >= start".into()));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(bad(format!("{count} values is too many")));
        }
        // rounding keeps 1 + 3 × 0.1 printing as 1.3
        Ok((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
    } else {
        let v: Vec<f64> = spec.split(',').map(num).collect::<Result<_, _>>()?;
        if v.is_empty() {
            return Err(bad("no values".into()));
        }
        Ok(v)
    }
}

/// `name=values`.
pub fn parse_assignment(spec: &str, default_step: Option<f64>) -> Result<(SweepParam, Vec<f64>), CliError> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected PARAM=VALUES, got `{spec}`")))?;
    let param: SweepParam = name.parse().map_err(CliError::Usage)?;
    Ok((param, parse_values(values, default_step)?))
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(CliError::io(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(CliError::io(path))
}

fn finish(mut manifest: RunManifest, out: &Path, started: Instant) -> Result<(), CliError> {
    manifest.duration_secs = started.elapsed().as_secs_f64();
    manifest.record_outputs(out)?;
    manifest.write(out)
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("arguments serialize")
}

// ---------------------------------------------------------------- meanfield

fn write_trajectory(path: &Path, t: &Trajectory) -> Result<(), CliError> {
    let mut w = create(path)?;
    (|| -> io::Result<()> {
        writeln!(w, "day,{}", COMPARTMENTS.join(","))?;
        for (d, s) in t.states.iter().enumerate() {
            let a = s.to_array();
            writeln!(w, "{d},{},{},{},{},{},{}", a[0], a[1], a[2], a[3], a[4], a[5])?;
        }
        w.flush()
    })()
    .map_err(CliError::io(path))
}

fn write_meanfield_summary(path: &Path, param: SweepParam, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = create(path)?;
    (|| -> io::Result<()> {
        writeln!(
            w,
            "param,value,peak_day,peak_infected,cumulative_infected,\
             peak_day_O,peak_infected_O,cumulative_infected_O,\
             peak_day_M,peak_infected_M,cumulative_infected_M"
        )?;
        for r in rows {
            let s = &r.summary;
            write!(w, "{},{}", param.name(), r.value)?;
            for g in [&s.overall, &s.ordinary, &s.misinformed] {
                write!(w, ",{},{},{}", g.peak_day, g.peak_infected, g.total_infected)?;
            }
            writeln!(w)?;
        }
        w.flush()
    })()
    .map_err(CliError::io(path))
}

pub fn cmd_meanfield(args: &MeanfieldArgs) -> Result<String, CliError> {
    let started = Instant::now();
    let template = MeanFieldParams {
        beta_o: args.beta_o,
        lambda: args.lambda,
        gamma: args.gamma,
        mu: args.mu,
        alpha: args.alpha,
        epsilon: args.epsilon,
    };
    let solver = SolverConfig {
        scheme: args.scheme.into(),
        dt: args.dt,
        horizon: args.horizon,
    };
    let (param, values) = match &args.sweep {
        Some(s) => parse_assignment(s, None)?,
        None => (SweepParam::Lambda, vec![args.lambda]),
    };
    let grid = args.grid.as_deref().map(|g| parse_assignment(g, Some(0.01))).transpose()?;
    if let Some((gp, _)) = &grid {
        if *gp != SweepParam::BetaO || param != SweepParam::Alpha {
            return Err(CliError::Usage("--grid takes beta-o=... together with --sweep alpha=...".into()));
        }
    }
    let out = &args.output.out;
    prepare_out(out)?;
    let mut table = String::new();

    if let Some((_, betas)) = grid {
        log::info!("integrating {} x {} grid", betas.len(), values.len());
        let g = homophily_grid(&template, &solver, &betas, &values).map_err(|e| CliError::stage("meanfield", e))?;
        let path = out.join("grid.csv");
        let mut w = create(&path)?;
        (|| -> io::Result<()> {
            writeln!(w, "beta_o,alpha,cumulative_infected,attack_rate_O,attack_rate_M")?;
            for (b, beta) in g.betas.iter().enumerate() {
                for (a, alpha) in g.alphas.iter().enumerate() {
                    writeln!(
                        w,
                        "{beta},{alpha},{},{},{}",
                        g.overall[b][a], g.ordinary[b][a], g.misinformed[b][a]
                    )?;
                }
            }
            w.flush()
        })()
        .map_err(CliError::io(&path))?;
        if args.output.plot {
            for (name, surface) in [("overall", &g.overall), ("ordinary", &g.ordinary), ("misinformed", &g.misinformed)] {
                let svg = svg::heatmap(
                    &format!("Cumulative infected ({name})"),
                    "alpha",
                    "beta_O",
                    &g.alphas,
                    &g.betas,
                    surface,
                );
                write_text(&out.join(format!("grid_{name}.svg")), &svg)?;
            }
        }
        let _ = writeln!(table, "{:>8} {:>10} {:>12}", "beta_o", "argmax_a", "max_cum");
        for (b, beta) in g.betas.iter().enumerate() {
            let a = g.argmax_alpha[b];
            let _ = writeln!(table, "{beta:>8} {:>10} {:>12.6}", g.alphas[a], g.overall[b][a]);
        }
    } else {
        let rows = sweep(&template, &solver, param, &values).map_err(|e| CliError::stage("meanfield", e))?;
        if args.sweep.is_some() {
            let dir = out.join("trajectories");
            prepare_out(&dir)?;
            for r in &rows {
                write_trajectory(&dir.join(format!("{}={}.csv", param.name(), r.value)), &r.trajectory)?;
            }
        } else {
            write_trajectory(&out.join("trajectory.csv"), &rows[0].trajectory)?;
        }
        write_meanfield_summary(&out.join(SUMMARY_CSV), param, &rows)?;
        if args.output.plot {
            let series: Vec<Series> = rows
                .iter()
                .map(|r| {
                    let t = &r.trajectory;
                    Series::new(
                        format!("{}={}", param.name(), r.value),
                        (0..t.states.len()).map(|d| d as f64),
                        t.states.iter().map(|s| s.infected()),
                    )
                })
                .collect();
            let svg = svg::line_chart("Infected fraction", "day", "I_O + I_M", &series);
            write_text(&out.join("infected.svg"), &svg)?;
        }
        let _ = writeln!(table, "{:>10} {:>9} {:>12} {:>12}", param.name(), "peak_day", "peak_I", "cumulative");
        for r in &rows {
            let s = &r.summary.overall;
            let _ = writeln!(
                table,
                "{:>10} {:>9} {:>12.6} {:>12.6}",
                r.value, s.peak_day, s.peak_infected, s.total_infected
            );
        }
    }
    finish(RunManifest::new("meanfield", to_json(args), 0), out, started)?;
    Ok(table)
}

// ---------------------------------------------------------------- pipeline

fn resolve_source(args: &ScenarioArgs, seed: u64, manifest: &mut RunManifest) -> Result<ScenarioSource, CliError> {
    match (&args.scenario, args.synthetic) {
        (Some(dir), _) => {
            if !dir.is_dir() {
                return Err(CliError::stage(
                    "load_scenario",
                    io::Error::new(io::ErrorKind::NotFound, format!("{}: no such directory", dir.display())),
                ));
            }
            manifest.add_input(dir)?;
            Ok(ScenarioSource::Files(dir.clone()))
        }
        (None, _) => {
            let mut cfg = match &args.scenario_config {
                Some(p) => {
                    manifest.add_input(p)?;
                    ScenarioConfig::load(p).map_err(|e| CliError::stage("load_scenario", e))?
                }
                None => ScenarioConfig {
                    seed: stage_seed(seed, "scenario"),
                    ..ScenarioConfig::default()
                },
            };
            if let Some(n) = args.counties {
                cfg.county_count = n;
            }
            Ok(ScenarioSource::Synthetic(cfg))
        }
    }
}

fn pipeline_params(model: &ModelArgs, phi: u32) -> Result<PipelineParams, CliError> {
    let sample = match (model.sample, model.nodes) {
        (Some(f), _) => SampleSize::Fraction(f),
        (None, Some(n)) => SampleSize::Nodes(n),
        (None, None) => SampleSize::Fraction(0.001),
    };
    let abm = AbmConfig {
        p_o: model.p_o,
        p_m: model.p_m,
        gamma: model.gamma,
        initial_infected: model.initial_infected,
        steps: model.steps,
        repetitions: model.repetitions,
    };
    abm.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if !(model.k_bar > 0.0 && model.k_bar.is_finite()) {
        return Err(CliError::Usage(format!("--k-bar must be > 0, got {}", model.k_bar)));
    }
    Ok(PipelineParams {
        phi,
        exposure: model.exposure,
        sample,
        k_bar: model.k_bar,
        abm,
        propagation_rounds: model.propagation_rounds,
        regenerate_network: model.regenerate_network,
        seed: model.seed,
    })
}

/// One row of the pipeline / sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub phi: u32,
    pub k_bar: f64,
    pub sample_fraction: f64,
    pub nodes: usize,
    pub edges: usize,
    pub misinformed_fraction: f64,
    pub mean_peak_day: f64,
    pub mean_peak_height: f64,
    pub mean_cumulative: f64,
    pub std_cumulative: f64,
    pub relative_increase: f64,
}

pub const SUMMARY_HEADER: &str = "phi,k_bar,sample_fraction,nodes,edges,misinformed_fraction,\
mean_peak_day,mean_peak_height,mean_cumulative,std_cumulative,relative_increase";

impl SummaryRow {
    fn new(phi: u32, k_bar: f64, o: &PipelineOutput) -> Self {
        let r = &o.result;
        let last = r.days() - 1;
        Self {
            phi,
            k_bar,
            sample_fraction: o.sample_fraction,
            nodes: o.network.node_count(),
            edges: o.network.edge_count(),
            misinformed_fraction: o.misinformed_fraction(),
            mean_peak_day: r.mean_peak_day(),
            mean_peak_height: r.mean_peak_height(),
            mean_cumulative: r.cumulative.all.mean[last],
            std_cumulative: r.cumulative.all.std[last],
            relative_increase: 0.0,
        }
    }

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.phi,
            self.k_bar,
            self.sample_fraction,
            self.nodes,
            self.edges,
            self.misinformed_fraction,
            self.mean_peak_day,
            self.mean_peak_height,
            self.mean_cumulative,
            self.std_cumulative,
            self.relative_increase
        )
    }
}

fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), CliError> {
    let mut text = String::from(SUMMARY_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(&r.csv());
        text.push('\n');
    }
    write_text(path, &text)
}

/// Reads a summary CSV written by `pipeline` or `sweep`.
pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let bad = |line: usize| CliError::Usage(format!("{}:{}: malformed summary row", path.display(), line + 1));
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 11 {
                return Err(bad(i));
            }
            let num = |k: usize| f[k].parse::<f64>().map_err(|_| bad(i));
            Ok(SummaryRow {
                phi: f[0].parse().map_err(|_| bad(i))?,
                k_bar: num(1)?,
                sample_fraction: num(2)?,
                nodes: f[3].parse().map_err(|_| bad(i))?,
                edges: f[4].parse().map_err(|_| bad(i))?,
                misinformed_fraction: num(5)?,
                mean_peak_day: num(6)?,
                mean_peak_height: num(7)?,
                mean_cumulative: num(8)?,
                std_cumulative: num(9)?,
                relative_increase: num(10)?,
            })
        })
        .collect()
}

fn summary_table(rows: &[SummaryRow]) -> String {
    let mut t = format!(
        "{:>5} {:>6} {:>10} {:>8} {:>9} {:>8} {:>9} {:>11} {:>8}\n",
        "phi", "k_bar", "sample", "nodes", "misinf", "peak_d", "peak_h", "cumulative", "rel_inc"
    );
    for r in rows {
        let _ = writeln!(
            t,
            "{:>5} {:>6} {:>10.3e} {:>8} {:>9.4} {:>8.2} {:>9.1} {:>11.1} {:>8.4}",
            r.phi,
            r.k_bar,
            r.sample_fraction,
            r.nodes,
            r.misinformed_fraction,
            r.mean_peak_day,
            r.mean_peak_height,
            r.mean_cumulative,
            r.relative_increase
        );
    }
    t
}

fn write_epidemic(dir: &Path, result: &EpidemicResult) -> Result<(), CliError> {
    let path = dir.join(EPIDEMIC_CSV);
    let f = File::create(&path).map_err(CliError::io(&path))?;
    result.write_csv(f).map_err(CliError::io(path))
}

fn write_network(dir: &Path, net: &ContactNetwork, debug_csv: bool) -> Result<(), CliError> {
    let path = dir.join(CONTACT_BIN);
    net.write_binary(create(&path)?).map_err(CliError::io(&path))?;
    if debug_csv {
        let (n, e) = (dir.join(CONTACT_NODES_CSV), dir.join(CONTACT_EDGES_CSV));
        net.write_debug_csv(create(&n)?, create(&e)?).map_err(CliError::io(dir))?;
    }
    Ok(())
}

fn prevalence_series(name: String, r: &EpidemicResult) -> Series {
    Series::new(name, (0..r.days()).map(|d| d as f64), r.prevalent.all.mean.iter().copied())
}

pub fn cmd_pipeline(args: &PipelineArgs) -> Result<String, CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("pipeline", to_json(args), args.model.seed);
    let params = pipeline_params(&args.model, args.phi)?;
    let source = resolve_source(&args.scenario, params.seed, &mut manifest)?;
    let out = &args.output.out;
    prepare_out(out)?;

    log::info!("preparing scenario");
    let prepared = pipeline::prepare(&source, params.propagation_rounds)?;
    log::info!(
        "{} counties, {} accounts; alignment propagation scored {} more in {} rounds",
        prepared.scenario.counties().len(),
        prepared.infonet.len(),
        prepared.newly_scored,
        prepared.propagation_rounds
    );
    let output = pipeline::run(&prepared, &params)?;
    for (stage, secs) in &output.timings {
        log::info!("{stage}: {secs:.2}s");
    }
    write_network(out, &output.network, !args.no_debug_csv)?;
    write_epidemic(out, &output.result)?;
    let row = SummaryRow::new(params.phi, params.k_bar, &output);
    write_summary(&out.join(SUMMARY_CSV), std::slice::from_ref(&row))?;
    if args.output.plot {
        let r = &output.result;
        let days = || (0..r.days()).map(|d| d as f64);
        let series = vec![
            Series::new("all", days(), r.prevalent.all.mean.iter().copied()),
            Series::new("ordinary", days(), r.prevalent.ordinary.mean.iter().copied()),
            Series::new("misinformed", days(), r.prevalent.misinformed.mean.iter().copied()),
        ];
        write_text(
            &out.join("epidemic.svg"),
            &svg::line_chart("Mean infected", "day", "infected", &series),
        )?;
    }
    finish(manifest, out, started)?;
    Ok(summary_table(&[row]))
}

// ---------------------------------------------------------------- sweep

fn row_key(var: SweepVar, value: f64) -> String {
    format!("{}={}", var.name(), value)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("sweep", to_json(args), args.model.seed);
    let values = parse_values(&args.values, None)?;
    let base = pipeline_params(&args.model, args.phi)?;
    let mut rows_params = Vec::with_capacity(values.len());
    for &v in &values {
        let mut p = base.clone();
        match args.vary {
            SweepVar::Phi => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(CliError::Usage(format!("phi values must be positive integers, got {v}")));
                }
                p.phi = v as u32;
            }
            SweepVar::KBar => p.k_bar = v,
            SweepVar::Sample => p.sample = SampleSize::Fraction(v),
        }
        rows_params.push(p);
    }
    let source = resolve_source(&args.scenario, base.seed, &mut manifest)?;
    let out = &args.output.out;
    prepare_out(out)?;
    log::info!("preparing scenario");
    let prepared: Prepared = pipeline::prepare(&source, base.propagation_rounds)?;

    let outputs: Vec<PipelineOutput> = rows_params
        .par_iter()
        .zip(values.par_iter())
        .map(|(p, &v)| {
            let o = pipeline::run(&prepared, p).map_err(|e| match e {
                CliError::Stage { stage, code, source } => CliError::Stage {
                    stage,
                    code,
                    source: format!("row {}: {source}", row_key(args.vary, v)).into(),
                },
                other => other,
            })?;
            log::info!("row {} done", row_key(args.vary, v));
            let dir = out.join(format!("row_{}", row_key(args.vary, v)));
            prepare_out(&dir)?;
            write_epidemic(&dir, &o.result)?;
            Ok(o)
        })
        .collect::<Result<_, CliError>>()?;

    let mut rows: Vec<SummaryRow> = outputs
        .iter()
        .zip(&rows_params)
        .map(|(o, p)| SummaryRow::new(p.phi, p.k_bar, o))
        .collect();
    // largest phi is the baseline; other sweeps use the last value
    let baseline = match args.vary {
        SweepVar::Phi => (0..values.len())
            .max_by(|&a, &b| values[a].total_cmp(&values[b]).then(b.cmp(&a)))
            .expect("at least one value"),
        _ => values.len() - 1,
    };
    let base_cum = rows[baseline].mean_cumulative;
    for r in &mut rows {
        r.relative_increase = if base_cum > 0.0 {
            (r.mean_cumulative - base_cum) / base_cum
        } else {
            0.0
        };
    }
    write_summary(&out.join(SUMMARY_CSV), &rows)?;
    if args.output.plot {
        let series: Vec<Series> = outputs
            .iter()
            .zip(&values)
            .map(|(o, &v)| prevalence_series(row_key(args.vary, v), &o.result))
            .collect();
        write_text(
            &out.join("sweep.svg"),
            &svg::line_chart("Mean infected", "day", "infected", &series),
        )?;
    }
    finish(manifest, out, started)?;
    Ok(summary_table(&rows))
}

// ---------------------------------------------------------------- gen-scenario

pub fn cmd_gen_scenario(args: &GenScenarioArgs) -> Result<String, CliError> {
    let started = Instant::now();
    let mut cfg = match &args.config {
        Some(p) => ScenarioConfig::load(p).map_err(|e| CliError::stage("load_scenario", e))?,
        None => ScenarioConfig::default(),
    };
    if let Some(n) = args.counties {
        cfg.county_count = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let mut manifest = RunManifest::new("gen-scenario", to_json(args), cfg.seed);
    if let Some(p) = &args.config {
        manifest.add_input(p)?;
    }
    let (scenario, net) = generate_scenario(&cfg).map_err(|e| CliError::stage("generate_scenario", e))?;
    let out = &args.out;
    save_scenario(&scenario, out).map_err(|e| CliError::stage("save_scenario", e))?;
    save_infonet(&net, out).map_err(|e| CliError::stage("save_scenario", e))?;
    write_text(&out.join("scenario.toml"), &cfg.to_toml_string())?;
    finish(manifest, out, started)?;
    let users: u64 = scenario.counties().iter().map(|c| c.twitter_users).sum();
    Ok(format!(
        "counties {}\nvoters {}\naccounts {}\nretweet edges {}\nseed accounts {}\n",
        scenario.counties().len(),
        scenario.total_voters(),
        users,
        net.edges().len(),
        net.seed_count()
    ))
}

// ---------------------------------------------------------------- inspect

pub fn cmd_inspect(args: &InspectArgs) -> Result<String, CliError> {
    let path = &args.path;
    if path.is_dir() {
        let s = load_scenario_dir(path).map_err(|e| CliError::stage("load_scenario", e))?;
        let users: u64 = s.counties().iter().map(|c| c.twitter_users).sum();
        let shares: Vec<f64> = s.counties().iter().map(|c| c.republican_share).collect();
        let mean_share = shares.iter().sum::<f64>() / shares.len() as f64;
        let diag: f64 = (0..s.counties().len()).map(|x| s.mobility().get(x, x)).sum();
        return Ok(format!(
            "scenario {}\ncounties {}\nvoters {}\ntwitter users {}\nmean republican share {:.4}\nwithin-county mobility share {:.4}\n",
            path.display(),
            s.counties().len(),
            s.total_voters(),
            users,
            mean_share,
            diag / s.mobility().unordered_total()
        ));
    }
    if path.file_name().is_some_and(|n| n == MANIFEST_FILE) || path.extension().is_some_and(|e| e == "json") {
        let m = RunManifest::read(path)?;
        return Ok(format!(
            "subcommand {}\nengine {}\nmaster seed {}\nduration {:.2}s\ninputs {}\noutputs {}\n",
            m.subcommand,
            m.engine_version,
            m.master_seed,
            m.duration_secs,
            m.inputs.len(),
            m.outputs.len()
        ));
    }
    let f = File::open(path).map_err(CliError::io(path))?;
    let net = ContactNetwork::read_binary(io::BufReader::new(f)).map_err(|e| CliError::stage("inspect", e))?;
    let n = net.node_count();
    let mut degree = vec![0u32; n];
    for &(u, v) in net.edges() {
        degree[u as usize] += 1;
        degree[v as usize] += 1;
    }
    let max_degree = degree.iter().copied().max().unwrap_or(0);
    let isolated = degree.iter().filter(|&&d| d == 0).count();
    let counties = net.counties().iter().copied().max().map_or(0, |c| c + 1);
    Ok(format!(
        "contact network {}\nnodes {}\nedges {}\nk_bar {}\nmean degree {:.4}\nmax degree {}\nisolated {}\nmisinformed {} ({:.4})\ncounties {}\nseed {}\n",
        path.display(),
        n,
        net.edge_count(),
        net.k_bar(),
        net.mean_degree(),
        max_degree,
        isolated,
        net.misinformed_count(),
        net.misinformed_count() as f64 / n.max(1) as f64,
        counties,
        net.seed()
    ))
}

// ---------------------------------------------------------------- replay

fn with_out<T: serde::de::DeserializeOwned>(params: &serde_json::Value, key: &str, out: &Path) -> Result<T, CliError> {
    let mut p = params.clone();
    p[key] = serde_json::Value::String(out.display().to_string());
    serde_json::from_value(p).map_err(|e| CliError::Usage(format!("manifest parameters: {e}")))
}

/// Re-runs a manifest into `out` and compares every recorded output hash.
pub fn cmd_replay(args: &ReplayArgs) -> Result<String, CliError> {
    let m = RunManifest::read(&args.manifest)?;
    let out: PathBuf = match &args.out {
        Some(o) => o.clone(),
        None => {
            // a sibling, so the replay never lands inside the recorded tree
            let dir = args.manifest.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let dir = dir.canonicalize().map_err(CliError::io(dir))?;
            let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            dir.with_file_name(format!("{name}-replay"))
        }
    };
    for (input, digest) in &m.inputs {
        let now = hash_path(Path::new(input)).map_err(CliError::io(input))?;
        if &now != digest {
            return Err(CliError::Usage(format!("input {input} changed since the manifest was written")));
        }
    }
    match m.subcommand.as_str() {
        "meanfield" => cmd_meanfield(&with_out(&m.params, "out", &out)?)?,
        "pipeline" => cmd_pipeline(&with_out(&m.params, "out", &out)?)?,
        "sweep" => cmd_sweep(&with_out(&m.params, "out", &out)?)?,
        "gen-scenario" => cmd_gen_scenario(&with_out(&m.params, "out", &out)?)?,
        other => return Err(CliError::Usage(format!("cannot replay subcommand `{other}`"))),
    };
    let replayed = RunManifest::read(&out.join(MANIFEST_FILE))?;
    let mut report = String::new();
    let mut mismatches = 0;
    for (file, digest) in &m.outputs {
        let status = match replayed.outputs.get(file) {
            Some(d) if d == digest => "identical",
            Some(_) => {
                mismatches += 1;
                "DIFFERS"
            }
            None => {
                mismatches += 1;
                "MISSING"
            }
        };
        let _ = writeln!(report, "{status:>9}  {file}");
    }
    if mismatches > 0 {
        return Err(CliError::Stage {
            stage: "replay",
            code: crate::error::EXIT_NUMERIC,
            source: format!("{mismatches} output file(s) differ\n{report}").into(),
        });
    }
    Ok(report)
}
