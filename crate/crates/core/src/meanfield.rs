//! Deterministic mean-field SMIR dynamics with homophily.
//!
//! Two SIR chains, ordinary (`O`) and misinformed (`M`), share a single force
//! of infection. Susceptibles of group `g` are infected at rate
//! `2 β_g S_g (α I_g + (1 − α) I_other)`; with `α = 0.5` this is exactly the
//! homophily-free form `β_g S_g (I_O + I_M)`.
//!
//! The infection curve reported throughout is prevalence (`I_O + I_M`), not
//! daily incidence.
//!
//! Seeds are split `ε/2` / `ε/2` between the groups regardless of `μ`, so for
//! `μ ≠ 0.5` the per-capita seeding of the two groups differs. When one group
//! is empty (`μ ∈ {0, 1}`) its compartments stay at zero and the whole seed
//! goes to the other group.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed on `[0, 1]` before a state is declared broken.
const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeanFieldError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid solver configuration: {0}")]
    InvalidSolver(String),
    #[error("state left [0, 1] at day {day}: {compartment} = {value}")]
    NonfiniteState {
        day: u32,
        compartment: &'static str,
        value: f64,
    },
    #[error("sweep point {param}={value}: {source}")]
    SweepPoint {
        param: SweepParam,
        value: f64,
        #[source]
        source: Box<MeanFieldError>,
    },
}

pub type Result<T> = std::result::Result<T, MeanFieldError>;

/// Rates and population split of the mean-field system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldParams {
    /// Transmission rate of ordinary susceptibles, per day.
    pub beta_o: f64,
    /// `β_M / β_O`, at least 1.
    pub lambda: f64,
    /// Recovery rate, per day.
    pub gamma: f64,
    /// Fraction of the population that is ordinary.
    pub mu: f64,
    /// Homophily: 0.5 is random mixing, 1 is fully separated groups.
    pub alpha: f64,
    /// Initial infected fraction, split evenly between the groups.
    pub epsilon: f64,
}

impl Default for MeanFieldParams {
    fn default() -> Self {
        Self {
            beta_o: 0.3,
            lambda: 1.0,
            gamma: 0.2,
            mu: 0.5,
            alpha: 0.5,
            epsilon: 0.001,
        }
    }
}

impl MeanFieldParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("beta_o", self.beta_o),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("mu", self.mu),
            ("alpha", self.alpha),
            ("epsilon", self.epsilon),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(invalid(format!("{name} is not finite ({v})")));
        }
        if self.beta_o <= 0.0 {
            return Err(invalid(format!("beta_o must be > 0, got {}", self.beta_o)));
        }
        if self.gamma <= 0.0 {
            return Err(invalid(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if self.lambda < 1.0 {
            return Err(invalid(format!("lambda must be >= 1, got {}", self.lambda)));
        }
        if !(0.5..=1.0).contains(&self.alpha) {
            return Err(invalid(format!("alpha must lie in [0.5, 1], got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(invalid(format!("mu must lie in [0, 1], got {}", self.mu)));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(invalid(format!("epsilon must lie in [0, 1), got {}", self.epsilon)));
        }
        if self.is_two_group() {
            let half = self.epsilon / 2.0;
            if self.mu - half < 0.0 || 1.0 - self.mu - half < 0.0 {
                return Err(invalid(format!(
                    "epsilon/2 = {half} exceeds a group size (mu = {})",
                    self.mu
                )));
            }
        }
        Ok(())
    }

    pub fn beta_m(&self) -> f64 {
        self.lambda * self.beta_o
    }

    /// Mean infectious period `1/γ`, in days.
    pub fn tau(&self) -> f64 {
        1.0 / self.gamma
    }

    /// Basic reproduction number of the ordinary group, `β_O/γ`.
    pub fn r0(&self) -> f64 {
        self.beta_o / self.gamma
    }

    fn is_two_group(&self) -> bool {
        self.mu > 0.0 && self.mu < 1.0
    }
}

fn invalid(msg: String) -> MeanFieldError {
    MeanFieldError::InvalidParams(msg)
}

/// `β_O/γ`.
pub fn r0(params: &MeanFieldParams) -> f64 {
    params.r0()
}

/// Population fractions in the six compartments.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub s_o: f64,
    pub i_o: f64,
    pub r_o: f64,
    pub s_m: f64,
    pub i_m: f64,
    pub r_m: f64,
}

pub const COMPARTMENTS: [&str; 6] = ["S_O", "I_O", "R_O", "S_M", "I_M", "R_M"];

impl MeanFieldState {
    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            s_o: a[0],
            i_o: a[1],
            r_o: a[2],
            s_m: a[3],
            i_m: a[4],
            r_m: a[5],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.s_o, self.i_o, self.r_o, self.s_m, self.i_m, self.r_m]
    }

    pub fn ordinary_total(&self) -> f64 {
        self.s_o + self.i_o + self.r_o
    }

    pub fn misinformed_total(&self) -> f64 {
        self.s_m + self.i_m + self.r_m
    }

    pub fn infected(&self) -> f64 {
        self.i_o + self.i_m
    }

    /// Ever infected (`I + R`), valid because `R` is absorbing.
    pub fn ever_infected(&self) -> f64 {
        self.ever_infected_o() + self.ever_infected_m()
    }

    pub fn ever_infected_o(&self) -> f64 {
        self.i_o + self.r_o
    }

    pub fn ever_infected_m(&self) -> f64 {
        self.i_m + self.r_m
    }
}

/// Canonical starting point: `ε/2` infected in each group, nobody recovered.
pub fn initial_state(params: &MeanFieldParams) -> Result<MeanFieldState> {
    params.validate()?;
    let eps = params.epsilon;
    let state = if params.mu >= 1.0 {
        MeanFieldState {
            s_o: 1.0 - eps,
            i_o: eps,
            ..Default::default()
        }
    } else if params.mu <= 0.0 {
        MeanFieldState {
            s_m: 1.0 - eps,
            i_m: eps,
            ..Default::default()
        }
    } else {
        MeanFieldState {
            s_o: params.mu - eps / 2.0,
            i_o: eps / 2.0,
            r_o: 0.0,
            s_m: 1.0 - params.mu - eps / 2.0,
            i_m: eps / 2.0,
            r_m: 0.0,
        }
    };
    Ok(state)
}

/// Time derivatives of the homophily system, in [`COMPARTMENTS`] order.
pub fn derivatives(state: &MeanFieldState, params: &MeanFieldParams) -> [f64; 6] {
    let a = params.alpha;
    let pressure_o = state.i_o * a + state.i_m * (1.0 - a);
    let pressure_m = state.i_o * (1.0 - a) + state.i_m * a;
    let new_o = 2.0 * params.beta_o * state.s_o * pressure_o;
    let new_m = 2.0 * params.beta_m() * state.s_m * pressure_m;
    let rec_o = params.gamma * state.i_o;
    let rec_m = params.gamma * state.i_m;
    [-new_o, new_o - rec_o, rec_o, -new_m, new_m - rec_m, rec_m]
}

/// Derivatives of the well-mixed system (no homophily term); `alpha` is ignored.
pub fn derivatives_well_mixed(state: &MeanFieldState, params: &MeanFieldParams) -> [f64; 6] {
    let infected = state.i_o + state.i_m;
    let new_o = params.beta_o * state.s_o * infected;
    let new_m = params.beta_m() * state.s_m * infected;
    [
        -new_o,
        new_o - params.gamma * state.i_o,
        params.gamma * state.i_o,
        -new_m,
        new_m - params.gamma * state.i_m,
        params.gamma * state.i_m,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    Rk4,
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Scheme::Euler),
            "rk4" => Ok(Scheme::Rk4),
            other => Err(format!("unknown scheme '{other}' (expected euler or rk4)")),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Euler => "euler",
            Scheme::Rk4 => "rk4",
        })
    }
}

/// Fixed-step integration settings.
///
/// The default (forward Euler, one step per day, 100 days) is a daily
/// difference-equation reading of the system and is what the reference
/// peak days and attack rates are reproduced with. Use [`SolverConfig::rk4`]
/// for a converged solution of the ODE itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Step in days; must divide one day evenly.
    pub dt: f64,
    /// Number of days simulated.
    pub horizon: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Euler,
            dt: 1.0,
            horizon: 100,
        }
    }
}

impl SolverConfig {
    pub fn rk4(dt: f64, horizon: u32) -> Self {
        Self {
            scheme: Scheme::Rk4,
            dt,
            horizon,
        }
    }

    pub fn euler(dt: f64, horizon: u32) -> Self {
        Self {
            scheme: Scheme::Euler,
            dt,
            horizon,
        }
    }

    fn steps_per_day(&self) -> Result<u32> {
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= 1.0) {
            return Err(MeanFieldError::InvalidSolver(format!(
                "dt must lie in (0, 1], got {}",
                self.dt
            )));
        }
        let n = (1.0 / self.dt).round();
        if (n * self.dt - 1.0).abs() > 1e-9 {
            return Err(MeanFieldError::InvalidSolver(format!(
                "dt = {} does not divide one day evenly",
                self.dt
            )));
        }
        if self.horizon < 1 {
            return Err(MeanFieldError::InvalidSolver("horizon must be >= 1".into()));
        }
        Ok(n as u32)
    }
}

/// Day-sampled solution; `states[d]` is the state at the end of day `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: MeanFieldParams,
    pub solver: SolverConfig,
    pub states: Vec<MeanFieldState>,
}

impl Trajectory {
    pub fn horizon(&self) -> u32 {
        self.solver.horizon
    }

    pub fn dt(&self) -> f64 {
        self.solver.dt
    }

    pub fn final_state(&self) -> &MeanFieldState {
        self.states.last().expect("trajectory has at least one state")
    }
}

fn axpy(base: &[f64; 6], scale: f64, dir: &[f64; 6]) -> [f64; 6] {
    std::array::from_fn(|k| base[k] + scale * dir[k])
}

fn step_once(s: [f64; 6], params: &MeanFieldParams, scheme: Scheme, dt: f64) -> [f64; 6] {
    let f = |x: &[f64; 6]| derivatives(&MeanFieldState::from_array(*x), params);
    match scheme {
        Scheme::Euler => axpy(&s, dt, &f(&s)),
        Scheme::Rk4 => {
            let k1 = f(&s);
            let k2 = f(&axpy(&s, dt / 2.0, &k1));
            let k3 = f(&axpy(&s, dt / 2.0, &k2));
            let k4 = f(&axpy(&s, dt, &k3));
            std::array::from_fn(|k| s[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]))
        }
    }
}

fn check_range(state: &[f64; 6], day: u32) -> Result<()> {
    for (k, &v) in state.iter().enumerate() {
        if !(v.is_finite() && (-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&v)) {
            return Err(MeanFieldError::NonfiniteState {
                day,
                compartment: COMPARTMENTS[k],
                value: v,
            });
        }
    }
    Ok(())
}

/// Integrates from [`initial_state`] and samples every whole day.
pub fn integrate(params: &MeanFieldParams, solver: &SolverConfig) -> Result<Trajectory> {
    let substeps = solver.steps_per_day()?;
    let mut s = initial_state(params)?.to_array();
    let mut states = Vec::with_capacity(solver.horizon as usize + 1);
    states.push(MeanFieldState::from_array(s));
    for day in 1..=solver.horizon {
        for _ in 0..substeps {
            s = step_once(s, params, solver.scheme, solver.dt);
        }
        check_range(&s, day)?;
        states.push(MeanFieldState::from_array(s));
    }
    Ok(Trajectory {
        params: *params,
        solver: *solver,
        states,
    })
}

/// Peak and attack-rate figures for one population.
///
/// All fractions are of the whole population, so the two group values add up
/// to the overall value for `total_infected`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub peak_day: u32,
    pub peak_infected: f64,
    pub total_infected: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub overall: GroupSummary,
    pub ordinary: GroupSummary,
    pub misinformed: GroupSummary,
}

fn group_summary(
    states: &[MeanFieldState],
    infected: impl Fn(&MeanFieldState) -> f64,
    ever: impl Fn(&MeanFieldState) -> f64,
) -> GroupSummary {
    let mut peak_day = 0;
    let mut peak = f64::NEG_INFINITY;
    for (day, st) in states.iter().enumerate() {
        let v = infected(st);
        // strict: earliest day wins ties
        if v > peak {
            peak = v;
            peak_day = day as u32;
        }
    }
    GroupSummary {
        peak_day,
        peak_infected: peak,
        total_infected: states.last().map(ever).unwrap_or(0.0),
    }
}

pub fn summarize(traj: &Trajectory) -> Summary {
    let st = &traj.states;
    Summary {
        overall: group_summary(st, MeanFieldState::infected, MeanFieldState::ever_infected),
        ordinary: group_summary(st, |s| s.i_o, MeanFieldState::ever_infected_o),
        misinformed: group_summary(st, |s| s.i_m, MeanFieldState::ever_infected_m),
    }
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Lambda,
    Alpha,
    BetaO,
    /// Recovery period; sets `gamma = 1/tau`.
    Tau,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Lambda => "lambda",
            SweepParam::Alpha => "alpha",
            SweepParam::BetaO => "beta_o",
            SweepParam::Tau => "tau",
        }
    }

    pub fn apply(&self, template: &MeanFieldParams, value: f64) -> MeanFieldParams {
        let mut p = *template;
        match self {
            SweepParam::Lambda => p.lambda = value,
            SweepParam::Alpha => p.alpha = value,
            SweepParam::BetaO => p.beta_o = value,
            SweepParam::Tau => p.gamma = 1.0 / value,
        }
        p
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "lambda" => Ok(SweepParam::Lambda),
            "alpha" => Ok(SweepParam::Alpha),
            "beta_o" | "beta" => Ok(SweepParam::BetaO),
            "tau" => Ok(SweepParam::Tau),
            other => Err(format!(
                "unknown sweep parameter '{other}' (expected lambda, alpha, beta-o or tau)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub params: MeanFieldParams,
    pub summary: Summary,
    pub trajectory: Trajectory,
}

fn run_point(
    template: &MeanFieldParams,
    solver: &SolverConfig,
    param: SweepParam,
    value: f64,
) -> Result<SweepRow> {
    let params = param.apply(template, value);
    let trajectory = integrate(&params, solver).map_err(|e| MeanFieldError::SweepPoint {
        param,
        value,
        source: Box::new(e),
    })?;
    Ok(SweepRow {
        value,
        params,
        summary: summarize(&trajectory),
        trajectory,
    })
}

/// One summary row per value, in input order. Rows are evaluated in parallel.
pub fn sweep(
    template: &MeanFieldParams,
    solver: &SolverConfig,
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<SweepRow>> {
    values
        .par_iter()
        .map(|&v| run_point(template, solver, param, v))
        .collect()
}

/// Attack-rate surfaces over a `β_O × α` grid.
///
/// Surfaces are indexed `[beta][alpha]`. Group surfaces are within-group
/// attack rates (ever infected divided by group size); `overall` is the
/// fraction of the whole population.
#[derive(Debug, Clone, PartialEq)]
pub struct HomophilyGrid {
    pub betas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub ordinary: Vec<Vec<f64>>,
    pub misinformed: Vec<Vec<f64>>,
    pub overall: Vec<Vec<f64>>,
    /// Index into `alphas` of the largest overall attack rate for each beta
    /// (earliest on ties).
    pub argmax_alpha: Vec<usize>,
}

impl HomophilyGrid {
    pub fn argmax_alpha_value(&self, beta_index: usize) -> f64 {
        self.alphas[self.argmax_alpha[beta_index]]
    }
}

pub fn homophily_grid(
    template: &MeanFieldParams,
    solver: &SolverConfig,
    betas: &[f64],
    alphas: &[f64],
) -> Result<HomophilyGrid> {
    let cells: Vec<(usize, usize)> = (0..betas.len())
        .flat_map(|b| (0..alphas.len()).map(move |a| (b, a)))
        .collect();
    let finals: Vec<MeanFieldState> = cells
        .par_iter()
        .map(|&(b, a)| {
            let mut p = SweepParam::BetaO.apply(template, betas[b]);
            p.alpha = alphas[a];
            integrate(&p, solver)
                .map(|t| *t.final_state())
                .map_err(|e| MeanFieldError::SweepPoint {
                    param: SweepParam::Alpha,
                    value: alphas[a],
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;

    let within = |ever: f64, size: f64| if size > 0.0 { ever / size } else { 0.0 };
    let mu = template.mu;
    let surface = |f: &dyn Fn(&MeanFieldState) -> f64| -> Vec<Vec<f64>> {
        finals.chunks(alphas.len()).map(|row| row.iter().map(f).collect()).collect()
    };
    let ordinary = surface(&|s| within(s.ever_infected_o(), mu));
    let misinformed = surface(&|s| within(s.ever_infected_m(), 1.0 - mu));
    let overall = surface(&|s| s.ever_infected());
    let argmax_alpha = overall
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                .0
        })
        .collect();
    Ok(HomophilyGrid {
        betas: betas.to_vec(),
        alphas: alphas.to_vec(),
        ordinary,
        misinformed,
        overall,
        argmax_alpha,
    })
}
