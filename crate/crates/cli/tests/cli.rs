//! Behaviour of the experiment runners and of the binary.

use std::process::Command;

use ris_mimo::rate::scaling::Regime;
use ris_mimo::{Mode, Scenario, SystemConfig};
use ris_mimo_cli::experiments::{
    default_nmse_series, run_nmse_sweep, run_optimize, run_power_scaling, run_rate_sweep, PhasePolicy,
    RateSweepOptions, SweepSpec,
};
use ris_mimo_cli::output::{config_hash, Table};
use ris_mimo_cli::validate::{run_checks, Measure};

fn bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ris-mimo")).args(args).output().expect("binary runs")
}

fn small() -> SystemConfig {
    SystemConfig { m: 16, n: 9, k: 2, tau: 2, ..SystemConfig::default() }
}

fn column_strings(t: &Table, name: &str) -> Vec<String> {
    let c = t.column(name).unwrap();
    t.rows.iter().map(|r| r[c].clone()).collect()
}

#[test]
fn every_output_carries_the_stamp() {
    let out = bin(&["--set", "K=2", "--set", "tau=2", "power-scaling", "--values", "64"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let cfg = SystemConfig { k: 2, tau: 2, ..SystemConfig::default() };
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# ris-mimo "), "{first}");
    assert!(first.contains(&format!("seed 0 | config sha256 {}", config_hash(&cfg))), "{first}");
    assert!(first.contains("trend-level"));
    assert_eq!(text.lines().nth(1), Some("M,a,rate_full_theory,rate_dominant_terms"));
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = std::env::temp_dir().join(format!("ris-mimo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scenario.toml");
    std::fs::write(&path, "K = 2\ntau = 4\nseed = 5\n").unwrap();
    let out = bin(&["--config", path.to_str().unwrap(), "--set", "tau=2", "power-scaling", "--values", "64"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let cfg = SystemConfig { k: 2, tau: 2, seed: 5, ..SystemConfig::default() };
    assert!(text.lines().next().unwrap().contains(&config_hash(&cfg)));
    let seeded = bin(&["--config", path.to_str().unwrap(), "--seed", "9", "power-scaling", "--values", "64"]);
    assert!(String::from_utf8(seeded.stdout)
        .unwrap()
        .starts_with(&format!("# ris-mimo {} | seed 9 ", env!("CARGO_PKG_VERSION"))));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn errors_exit_with_status_two() {
    let out = bin(&["--set", "M=15", "validate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("perfect square"));
    assert_eq!(bin(&["--set", "bogus=1", "optimize"]).status.code(), Some(2));
    assert_eq!(bin(&["power-scaling", "--regime", "rayray"]).status.code(), Some(2));
    let missing = bin(&["--config", "/nonexistent/ris.toml", "optimize"]);
    assert!(String::from_utf8(missing.stderr).unwrap().contains("/nonexistent/ris.toml"));
}

#[test]
fn out_flag_writes_a_file() {
    let path = std::env::temp_dir().join(format!("ris-mimo-out-{}.csv", std::process::id()));
    let out = bin(&["--out", path.to_str().unwrap(), "optimize", "--max-iters", "3"]);
    assert!(out.status.success() && out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2 + 3);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn sweep_values_are_validated_up_front() {
    let spec = SweepSpec::parse("M", "16,15").unwrap();
    assert!(spec.configs(&small()).is_err());
    assert!(SweepSpec::parse("M", " , ").is_err());
    assert_eq!(SweepSpec::parse("P_total", "10").unwrap().key, "P_total_dBm");
}

#[test]
fn nmse_is_flat_in_n_and_falls_with_longer_pilots() {
    let spec = SweepSpec::parse("N", "4,16,64").unwrap();
    let t =
        run_nmse_sweep(&SystemConfig { k: 4, ..SystemConfig::default() }, &spec, &default_nmse_series(), 0).unwrap();
    let nmse = t.numbers("nmse_closed_form");
    let series = column_strings(&t, "series");
    let users = column_strings(&t, "user");
    let values = column_strings(&t, "sweep_value");
    assert_eq!(t.rows.len(), 3 * 4 * 4);
    assert!(column_strings(&t, "nmse_empirical").iter().all(String::is_empty));
    for i in 0..t.rows.len() {
        for j in 0..t.rows.len() {
            if series[i] == series[j] && users[i] == users[j] {
                assert!(
                    (nmse[i] - nmse[j]).abs() <= 1e-12 * nmse[i],
                    "N-dependence: {:?} vs {:?}",
                    t.rows[i],
                    t.rows[j]
                );
            }
            let long = format!("tau=30{}", series[i].strip_prefix("tau=8").unwrap_or("-"));
            if values[i] == values[j] && users[i] == users[j] && series[j] == long {
                assert!(nmse[j] <= nmse[i], "{:?} vs {:?}", t.rows[i], t.rows[j]);
            }
        }
    }
}

#[test]
fn nmse_sweep_simulation_agrees_with_closed_form() {
    let spec = SweepSpec::parse("M", "16,64").unwrap();
    let t = run_nmse_sweep(&small(), &spec, &default_nmse_series(), 4000).unwrap();
    let (theory, emp, se) = (t.numbers("nmse_closed_form"), t.numbers("nmse_empirical"), t.numbers("std_error"));
    for (i, row) in t.rows.iter().enumerate() {
        assert!((emp[i] - theory[i]).abs() <= 3.0 * se[i], "{row:?}");
    }
}

#[test]
fn infeasible_budgets_give_zero_rate_rows() {
    let spec = SweepSpec::parse("P_total", "0,40").unwrap();
    let opts = RateSweepOptions {
        modes: vec![Mode::ActiveRis, Mode::PassiveRis, Mode::NoRis],
        policies: vec![PhasePolicy::Random],
        samples: 0,
        max_iters: None,
    };
    let t = run_rate_sweep(&small(), &spec, &opts).unwrap();
    let rows: Vec<Vec<&str>> = t.rows.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
    assert_eq!(rows[0], ["0", "Active", "random", "false", "0.0", "", "0.0"]);
    // Nine switches at 0.1 mW fit in a 1 mW budget; nine active elements at 0.42 mW do not.
    assert_eq!(rows[1][..4], ["0", "Passive", "random", "true"]);
    assert_eq!(rows[2][..4], ["0", "NoRIS", "none", "true"]);
    assert!(rows[3..].iter().all(|r| r[3] == "true"));
    assert_eq!(rows.len(), 6);
}

#[test]
fn rate_sweep_trends() {
    let opts = RateSweepOptions {
        modes: vec![Mode::ActiveRis, Mode::PassiveRis],
        policies: vec![PhasePolicy::Optimized],
        samples: 0,
        max_iters: None,
    };
    let t = run_rate_sweep(&SystemConfig::default(), &SweepSpec::parse("P_total", "30,40").unwrap(), &opts).unwrap();
    let sum = t.numbers("sum_rate_theory");
    assert!(sum[0] > sum[1] && sum[2] > sum[3], "active must beat passive at high budgets: {sum:?}");

    let active = RateSweepOptions { modes: vec![Mode::ActiveRis], ..opts };
    let t =
        run_rate_sweep(&SystemConfig::default(), &SweepSpec::parse("delta", "1,4,16,64").unwrap(), &active).unwrap();
    let sum = t.numbers("sum_rate_theory");
    assert!(sum.windows(2).all(|w| w[0] > w[1]), "delta trend {sum:?}");
}

#[test]
fn simulated_rate_tracks_theory() {
    let opts = RateSweepOptions {
        modes: vec![Mode::ActiveRis],
        policies: vec![PhasePolicy::Random],
        samples: 20_000,
        max_iters: None,
    };
    let t = run_rate_sweep(&small(), &SweepSpec::parse("v", "0,2,inf").unwrap(), &opts).unwrap();
    for (th, sim) in t.numbers("sum_rate_theory").iter().zip(t.numbers("sum_rate_sim")) {
        assert!((th - sim).abs() / th < 0.03, "{th} vs {sim}");
    }
}

#[test]
fn power_scaling_shapes() {
    let cfg = SystemConfig::default();
    let ms = [64, 256, 1024, 4096];
    let t = run_power_scaling(&cfg, Regime::RicRic, 1.0, 10.0, &ms).unwrap();
    let full = t.numbers("rate_full_theory");
    let peak = full.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(full[peak..].windows(2).all(|w| w[1] < w[0]), "{full:?}");
    let flat = run_power_scaling(&cfg, Regime::RicRic, 0.0, 10.0, &ms).unwrap().numbers("rate_full_theory");
    assert!(flat.windows(2).all(|w| w[1] >= w[0]), "{flat:?}");
    let far = run_power_scaling(&cfg, Regime::RicRic, 1.0, 10.0, &[1 << 20]).unwrap();
    let (f, d) = (far.numbers("rate_full_theory")[0], far.numbers("rate_dominant_terms")[0]);
    assert!((d - f).abs() / f < 0.1, "{d} vs {f}");
    assert!(run_power_scaling(&cfg, Regime::RicRay, 1.0, 10.0, &ms).is_err());
}

#[test]
fn optimize_trace_is_monotone() {
    let r = run_optimize(&small(), Some(40)).unwrap();
    let best = r.trace.numbers("best_fitness");
    assert!(best.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(*best.last().unwrap(), r.best_fitness);
    assert_eq!(r.phases.rows.len(), 9);
}

#[test]
fn validate_passes_on_defaults_and_catches_a_corrupt_estimator() {
    let s = Scenario::new(&SystemConfig::default()).unwrap();
    let checks = run_checks(&s, 10_000).unwrap();
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    assert!(failed.is_empty(), "{failed:?}");
    assert!(checks.iter().any(|c| c.measure == Measure::RelError));

    let mut bad = Scenario::new(&small()).unwrap();
    bad.stats.a3[0] *= 3.0;
    bad.stats.e1[0] = bad.stats.a3[0] + bad.stats.a4[0];
    bad.stats.e2[0] = bad.stats.m() * bad.stats.a3[0] + bad.stats.a4[0];
    let checks = run_checks(&bad, 10_000).unwrap();
    let nmse = checks.iter().find(|c| c.name == "user 1 NMSE").unwrap();
    assert!(!nmse.pass, "{nmse:?}");
}

#[test]
fn validate_exit_status_reflects_the_checks() {
    let out = bin(&["--set", "K=2", "--set", "tau=2", "--set", "M=16", "validate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().nth(1), Some("check,measure,value,threshold,pass"));
    assert!(text.lines().skip(2).all(|l| l.ends_with(",true")));
}
