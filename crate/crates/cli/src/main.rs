use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ris_mimo::rate::scaling::Regime;
use ris_mimo::{Mode, Scenario, SystemConfig};
use ris_mimo_cli::experiments::{
    default_nmse_series, run_nmse_sweep, run_optimize, run_power_scaling, run_rate_sweep, PhasePolicy,
    RateSweepOptions, SweepSpec,
};
use ris_mimo_cli::output::{write_csv, Table};
use ris_mimo_cli::settings::resolve;
use ris_mimo_cli::validate::{checks_table, run_checks, Level};
use ris_mimo_cli::CliError;

/// Closed-form and Monte Carlo experiments for active-RIS-aided uplink massive MIMO.
#[derive(Debug, Parser)]
#[command(name = "ris-mimo", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Flat TOML file of configuration keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, as key=value. Repeatable; applied after --config.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master seed; overrides the configuration's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output CSV path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Sweep {
    /// Configuration key to sweep (M, N, P_total, delta, epsilon, v or any other key).
    #[arg(long)]
    vary: String,
    /// Comma-separated values of the swept key.
    #[arg(long)]
    values: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// NMSE in closed form and by Monte Carlo over a sweep, for pilot lengths 8 and 30 with and without LoS-only links.
    NmseSweep {
        #[command(flatten)]
        sweep: Sweep,
        /// Monte Carlo realizations per point; 0 skips the simulation.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Sum and minimum rates over a sweep for each mode and phase policy.
    RateSweep {
        #[command(flatten)]
        sweep: Sweep,
        /// Comma-separated modes: active, passive, none.
        #[arg(long, default_value = "active,passive,none")]
        modes: String,
        /// Comma-separated phase policies: optimized, random.
        #[arg(long, default_value = "optimized,random")]
        phases: String,
        /// Monte Carlo realizations per point; 0 leaves sum_rate_sim empty.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        /// Generation cap of the phase search.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Rates as M grows with the user power scaled as p = E_u/M^a.
    PowerScaling {
        /// ricric, ricray or rayray; must match the Rician factors.
        #[arg(long, default_value = "ricric")]
        regime: String,
        /// Power-scaling exponent.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// E_u in dBm.
        #[arg(long, default_value_t = 10.0)]
        eu_dbm: f64,
        /// Comma-separated antenna counts.
        #[arg(long, default_value = "64,256,1024,4096")]
        values: String,
    },
    /// Max-min rate phase search; writes the per-generation trace.
    Optimize {
        /// Also write the best phases to this CSV.
        #[arg(long)]
        phases_out: Option<PathBuf>,
        /// Generation cap.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Runs the oracle suite; exits with status 1 if any check fails.
    Validate {
        /// quick (1e4 realizations) or full (2e5).
        #[arg(long, default_value = "quick")]
        level: String,
    },
}

fn list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| CliError::Config(format!("{what}: {e}"))))
        .collect()
}

fn emit(path: Option<&PathBuf>, cfg: &SystemConfig, table: &Table) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            write_csv(&mut w, cfg, table)?;
            w.flush()?;
        }
        None => write_csv(io::stdout().lock(), cfg, table)?,
    }
    Ok(())
}

/// Runs the command; `Ok(false)` means validation found a failing check.
fn run(cli: &Cli) -> Result<bool, CliError> {
    let g = &cli.global;
    let cfg = resolve(g.config.as_deref(), &g.set, g.seed)?;
    let out = g.out.as_ref();
    match &cli.command {
        Command::NmseSweep { sweep, samples } => {
            let spec = SweepSpec::parse(&sweep.vary, &sweep.values)?;
            emit(out, &cfg, &run_nmse_sweep(&cfg, &spec, &default_nmse_series(), *samples)?)?;
        }
        Command::RateSweep { sweep, modes, phases, samples, max_iters } => {
            let spec = SweepSpec::parse(&sweep.vary, &sweep.values)?;
            let opts = RateSweepOptions {
                modes: list::<Mode>(modes, "modes")?,
                policies: list::<PhasePolicy>(phases, "phases")?,
                samples: *samples,
                max_iters: *max_iters,
            };
            emit(out, &cfg, &run_rate_sweep(&cfg, &spec, &opts)?)?;
        }
        Command::PowerScaling { regime, a, eu_dbm, values } => {
            let regime: Regime = regime.parse()?;
            let ms = list::<usize>(values, "values")?;
            emit(out, &cfg, &run_power_scaling(&cfg, regime, *a, *eu_dbm, &ms)?)?;
        }
        Command::Optimize { phases_out, max_iters } => {
            let result = run_optimize(&cfg, *max_iters)?;
            emit(out, &cfg, &result.trace)?;
            if let Some(p) = phases_out {
                emit(Some(p), &cfg, &result.phases)?;
            }
        }
        Command::Validate { level } => {
            let level: Level = level.parse()?;
            let checks = run_checks(&Scenario::new(&cfg)?, level.samples())?;
            emit(out, &cfg, &checks_table(&checks))?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            if !failed.is_empty() {
                eprintln!("{} of {} checks failed: {}", failed.len(), checks.len(), failed.join("; "));
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.global.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(CliError::Config(format!("thread pool: {e}"))),
        },
        None => run(&cli),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
