//! The sweep, scaling and optimization experiments.

use rayon::prelude::*;
use ris_mimo::ga::{optimize_min_rate, GaParams, TracePoint};
use ris_mimo::montecarlo::Oracle;
use ris_mimo::rate::scaling::{scaling_point, Regime};
use ris_mimo::stats::{nmse_closed_form, split_budget};
use ris_mimo::{dbm_to_watts, Error, Mode, PhaseVector, Scenario, SystemConfig};

use crate::output::{num, Table};
use crate::CliError;

/// Stand-in for an infinite Rician factor: the NLoS share 1/(δ+1) is below double precision.
pub const LOS_ONLY_FACTOR: f64 = 1e12;

/// One configuration key and the values it takes across a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: String,
    pub values: Vec<String>,
}

impl SweepSpec {
    /// Parses `values` as a comma-separated list; `P_total` is accepted for `P_total_dBm`.
    pub fn parse(key: &str, values: &str) -> Result<Self, CliError> {
        let key = match key {
            "P_total" => "P_total_dBm",
            other => other,
        };
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(CliError::Sweep("the value list is empty".into()));
        }
        Ok(Self { key: key.to_string(), values })
    }

    /// The base configuration with the swept key set to each value, each one validated.
    pub fn configs(&self, base: &SystemConfig) -> Result<Vec<SystemConfig>, CliError> {
        self.values
            .iter()
            .map(|v| {
                let mut cfg = base.clone();
                cfg.set(&self.key, v)?;
                cfg.validate()?;
                Ok(cfg)
            })
            .collect()
    }
}

/// One NMSE series: a pilot length, and whether every link is replaced by its LoS part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmseSeries {
    pub tau: usize,
    pub los_only: bool,
}

impl NmseSeries {
    pub fn label(&self) -> String {
        if self.los_only {
            format!("tau={} los-only", self.tau)
        } else {
            format!("tau={}", self.tau)
        }
    }

    pub fn apply(&self, cfg: &SystemConfig) -> SystemConfig {
        let mut cfg = cfg.clone();
        cfg.tau = self.tau;
        if self.los_only {
            cfg.delta = LOS_ONLY_FACTOR;
            cfg.epsilon = vec![LOS_ONLY_FACTOR];
        }
        cfg
    }
}

/// Pilot lengths 8 and 30, each with the configured Rician factors and with LoS-only links.
pub fn default_nmse_series() -> Vec<NmseSeries> {
    [8, 30].into_iter().flat_map(|tau| [false, true].map(|los_only| NmseSeries { tau, los_only })).collect()
}

/// A scenario whose whole budget goes to the users and the amplifier.
///
/// Estimation-error studies leave the RIS circuit power out of the split.
pub fn scenario_without_circuit_power(cfg: &SystemConfig) -> Result<Scenario, CliError> {
    let v = cfg.validate()?;
    let raw = v.raw();
    let budget = split_budget(v.mode(), v.p_total, raw.n, raw.k, 0.0, 0.0, raw.xi)?;
    let angles = ris_mimo::generate_angles(v.seed(), v.k());
    Ok(Scenario::with_budget(v, angles, budget)?)
}

/// NMSE of every user in closed form and by Monte Carlo, for every sweep point and series.
///
/// Columns: sweep_value, series, user, nmse_closed_form, nmse_empirical, std_error.
/// With `samples = 0` the empirical columns are left empty.
pub fn run_nmse_sweep(
    base: &SystemConfig,
    spec: &SweepSpec,
    series: &[NmseSeries],
    samples: usize,
) -> Result<Table, CliError> {
    let configs = spec.configs(base)?;
    let jobs: Vec<(usize, NmseSeries)> = (0..configs.len()).flat_map(|i| series.iter().map(move |s| (i, *s))).collect();
    let blocks = jobs
        .par_iter()
        .map(|&(i, s)| -> Result<Vec<Vec<String>>, CliError> {
            let scenario = scenario_without_circuit_power(&s.apply(&configs[i]))?;
            let theory = nmse_closed_form(&scenario.stats);
            let empirical = (samples > 0).then(|| {
                let phase = scenario.random_phase(0);
                Oracle::from_scenario(&scenario).empirical_sinr(&phase, samples).0
            });
            Ok((0..theory.len())
                .map(|k| {
                    let (mean, se) = match &empirical {
                        Some(e) => (num(e.users[k].nmse.mean), num(e.users[k].nmse.std_error)),
                        None => (String::new(), String::new()),
                    };
                    vec![spec.values[i].clone(), s.label(), (k + 1).to_string(), num(theory[k]), mean, se]
                })
                .collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["sweep_value", "series", "user", "nmse_closed_form", "nmse_empirical", "std_error"]);
    blocks.into_iter().flatten().for_each(|r| table.push(r));
    Ok(table)
}

/// How the RIS phases of a rate-sweep point are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhasePolicy {
    /// Max-min rate phases from the genetic search.
    Optimized,
    /// The first phase vector of the configuration's random phase stream.
    Random,
}

impl std::str::FromStr for PhasePolicy {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "optimized" | "ga" => Ok(PhasePolicy::Optimized),
            "random" => Ok(PhasePolicy::Random),
            other => Err(CliError::Sweep(format!("`{other}` is not a phase policy (optimized, random)"))),
        }
    }
}

impl PhasePolicy {
    pub fn label(self) -> &'static str {
        match self {
            PhasePolicy::Optimized => "optimized",
            PhasePolicy::Random => "random",
        }
    }
}

/// Column label of a mode.
pub fn mode_label(mode: Mode) -> &'static str {
    match mode {
        Mode::ActiveRis => "Active",
        Mode::PassiveRis => "Passive",
        Mode::NoRis => "NoRIS",
    }
}

/// Settings shared by every rate-sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSweepOptions {
    pub modes: Vec<Mode>,
    pub policies: Vec<PhasePolicy>,
    /// Monte Carlo realizations per point; zero leaves sum_rate_sim empty.
    pub samples: usize,
    /// Overrides the genetic search's generation cap.
    pub max_iters: Option<usize>,
}

/// Result of one rate evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub feasible: bool,
    pub sum_rate_theory: f64,
    pub sum_rate_sim: Option<f64>,
    pub min_rate: f64,
    pub phase: Option<PhaseVector>,
}

/// Phases chosen by `policy` for a scenario.
pub fn choose_phase(
    scenario: &Scenario,
    policy: PhasePolicy,
    max_iters: Option<usize>,
) -> Result<PhaseVector, CliError> {
    Ok(match policy {
        PhasePolicy::Random => scenario.random_phase(0),
        PhasePolicy::Optimized => {
            let mut params = GaParams::for_elements(scenario.cfg.n());
            if let Some(it) = max_iters {
                params.max_iters = it;
            }
            optimize_min_rate(&scenario.rate_model(), &params, scenario.cfg.seed())?.best
        }
    })
}

/// Sum and minimum rate of one configuration; an unaffordable RIS yields zero rates.
pub fn evaluate_rate_point(
    cfg: &SystemConfig,
    policy: PhasePolicy,
    samples: usize,
    max_iters: Option<usize>,
) -> Result<RatePoint, CliError> {
    let scenario = match Scenario::new(cfg) {
        Ok(s) => s,
        Err(Error::InfeasiblePower { .. }) => {
            return Ok(RatePoint {
                feasible: false,
                sum_rate_theory: 0.0,
                sum_rate_sim: (samples > 0).then_some(0.0),
                min_rate: 0.0,
                phase: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let phase =
        if cfg.mode == Mode::NoRis { PhaseVector::zeros(cfg.n) } else { choose_phase(&scenario, policy, max_iters)? };
    let report = scenario.rate_model().evaluate(&phase);
    let sum_rate_sim =
        (samples > 0).then(|| Oracle::from_scenario(&scenario).empirical_sinr(&phase, samples).1.sum_rate);
    Ok(RatePoint {
        feasible: true,
        sum_rate_theory: report.sum_rate,
        sum_rate_sim,
        min_rate: report.min_rate,
        phase: Some(phase),
    })
}

/// Sum rate per sweep point, mode and phase policy.
///
/// Columns: sweep_value, mode, phase_policy, feasible, sum_rate_theory,
/// sum_rate_sim, min_rate. Without a RIS the phases are irrelevant and a
/// single row with policy `none` is written.
pub fn run_rate_sweep(base: &SystemConfig, spec: &SweepSpec, opts: &RateSweepOptions) -> Result<Table, CliError> {
    let configs = spec.configs(base)?;
    let mut jobs: Vec<(usize, Mode, Option<PhasePolicy>)> = Vec::new();
    for i in 0..configs.len() {
        for &mode in &opts.modes {
            if mode == Mode::NoRis {
                jobs.push((i, mode, None));
            } else {
                jobs.extend(opts.policies.iter().map(|&p| (i, mode, Some(p))));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(i, mode, policy)| -> Result<Vec<String>, CliError> {
            let cfg = SystemConfig { mode, ..configs[i].clone() };
            let point = evaluate_rate_point(&cfg, policy.unwrap_or(PhasePolicy::Random), opts.samples, opts.max_iters)?;
            Ok(vec![
                spec.values[i].clone(),
                mode_label(mode).to_string(),
                policy.map_or("none", PhasePolicy::label).to_string(),
                point.feasible.to_string(),
                num(point.sum_rate_theory),
                point.sum_rate_sim.map(num).unwrap_or_default(),
                num(point.min_rate),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table =
        Table::new(&["sweep_value", "mode", "phase_policy", "feasible", "sum_rate_theory", "sum_rate_sim", "min_rate"]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Full-theory and dominant-term sum rates as M grows with p = E_u/M^a.
///
/// The amplifier output power stays at the configuration's equal-split value
/// and the phases are the configuration's first random phase vector.
/// Columns: M, a, rate_full_theory, rate_dominant_terms.
pub fn run_power_scaling(
    cfg: &SystemConfig,
    regime: Regime,
    a: f64,
    e_u_dbm: f64,
    ms: &[usize],
) -> Result<Table, CliError> {
    let scenario = Scenario::new(cfg)?;
    regime.check(&scenario.stats.params)?;
    let phase = scenario.random_phase(0);
    let e_u = dbm_to_watts(e_u_dbm);
    let points = ms
        .par_iter()
        .map(|&m| {
            scaling_point(
                &scenario.stats.params,
                &scenario.los,
                &phase,
                regime,
                a,
                e_u,
                m,
                scenario.budget.p_a,
                cfg.formulation,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["M", "a", "rate_full_theory", "rate_dominant_terms"]);
    for p in points {
        table.push(vec![p.m.to_string(), num(p.a), num(p.full), num(p.dominant)]);
    }
    Ok(table)
}

/// Genetic max-min search on the configured scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub trace: Table,
    pub phases: Table,
    pub best_fitness: f64,
}

/// Runs the search and returns its per-generation trace and the best phases.
///
/// Trace columns: generation, best_fitness, mean_fitness. Phase columns: element, theta.
pub fn run_optimize(cfg: &SystemConfig, max_iters: Option<usize>) -> Result<OptimizeResult, CliError> {
    let scenario = Scenario::new(cfg)?;
    let mut params = GaParams::for_elements(scenario.cfg.n());
    if let Some(it) = max_iters {
        params.max_iters = it;
    }
    let outcome = optimize_min_rate(&scenario.rate_model(), &params, cfg.seed)?;
    let mut trace = Table::new(&["generation", "best_fitness", "mean_fitness"]);
    for TracePoint { generation, best_fitness, mean_fitness } in &outcome.trace {
        trace.push(vec![generation.to_string(), num(*best_fitness), num(*mean_fitness)]);
    }
    let mut phases = Table::new(&["element", "theta"]);
    for (i, t) in outcome.best.as_slice().iter().enumerate() {
        phases.push(vec![(i + 1).to_string(), num(*t)]);
    }
    Ok(OptimizeResult { trace, phases, best_fitness: outcome.best_fitness })
}
