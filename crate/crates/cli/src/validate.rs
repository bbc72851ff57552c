//! The oracle suite behind the `validate` subcommand.
//!
//! Statistical checks compare a Monte Carlo mean with its closed form through
//! a z-score. The threshold keeps the family-wise false-alarm rate at that of
//! a single two-sided 3σ test: z* = Φ⁻¹(1 − 0.0027/(2n)) for n checks.
//! Deterministic identities are checked to a relative error of 1e-12.

use rayon::prelude::*;
use ris_mimo::geometry::PhaseTerms;
use ris_mimo::montecarlo::{chunk_bounds, Oracle};
use ris_mimo::rate::{desired_signal, static_noise_kernel};
use ris_mimo::sampler::{complex_normals, sample_realization, stream, Purpose};
use ris_mimo::stats::{nmse_closed_form, nmse_from_mse};
use ris_mimo::{Mode, Scenario, SystemConfig, C64};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::output::{num, Table};
use crate::CliError;

/// Relative tolerance of the deterministic identities.
pub const EXACT_TOL: f64 = 1e-12;

/// Family-wise two-sided false-alarm rate, that of one 3σ test.
pub const FAMILY_ALPHA: f64 = 0.0027;

/// Monte Carlo realizations per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn samples(self) -> usize {
        match self {
            Level::Quick => 10_000,
            Level::Full => 200_000,
        }
    }
}

impl std::str::FromStr for Level {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(CliError::Config(format!("`{other}` is not a validation level (quick, full)"))),
        }
    }
}

/// What a check's `value` measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// (Monte Carlo mean − closed form)/standard error.
    ZScore,
    /// Largest relative deviation of an identity.
    RelError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measure: Measure,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// z* such that `n` two-sided tests jointly reject with probability [`FAMILY_ALPHA`].
pub fn bonferroni_threshold(n: usize) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    normal.inverse_cdf(1.0 - FAMILY_ALPHA / (2.0 * n.max(1) as f64))
}

fn z_score(mean: f64, se: f64, expected: f64) -> f64 {
    let diff = mean - expected;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= EXACT_TOL * expected.abs().max(1.0) {
        // Deterministic statistic, as under ideal phases.
        0.0
    } else {
        f64::INFINITY
    }
}

fn rel_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Welford accumulators merged in chunk order.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: &Welford) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n / n;
        self.m2 += o.m2 + d * d * self.n * o.n / n;
        self.n = n;
    }

    fn se(&self) -> f64 {
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

/// A statistic drawn once per realization and the closed-form value of its mean.
struct Statistic {
    name: String,
    expected: f64,
}

/// Per-realization statistics of the channel model itself: covariance
/// projections of every user's aggregate channel and pilot observation, the
/// circular moments of the phase noise, and a Gaussian quadratic form.
fn channel_statistics(s: &Scenario, samples: usize) -> Vec<(Statistic, Welford)> {
    let (m, n, k) = (s.cfg.m(), s.cfg.n(), s.cfg.k());
    let mf = m as f64;
    let st = &s.stats;
    let phase = s.random_phase(0);
    let oracle = Oracle::from_scenario(s);
    let mu: Vec<Vec<C64>> = (0..k)
        .map(|u| {
            let f = s.los.f(&phase, u);
            s.los.a_m.iter().map(|a| st.mean_scale(u) * f * a).collect()
        })
        .collect();
    let rho = st.params.phase_noise.rho;
    let mut d_rng = stream(s.cfg.seed(), Purpose::Experiment, &[4, 4], 0);
    let d = complex_normals(&mut d_rng, 16);
    let trace_d: C64 = (0..4).map(|i| d[i * 4 + i]).sum();

    let mut stats = Vec::new();
    for u in 0..k {
        let scale = mf * (st.a1[u] + st.a2[u]);
        let user = u + 1;
        stats.push(Statistic { name: format!("user {user} trace of channel covariance"), expected: 1.0 });
        stats.push(Statistic {
            name: format!("user {user} LoS projection of channel covariance"),
            expected: mf * (mf * st.a1[u] + st.a2[u]) / scale,
        });
        stats.push(Statistic {
            name: format!("user {user} trace of observation covariance"),
            expected: mf * (st.m_k[u] + st.n_k[u]) / scale,
        });
        stats.push(Statistic {
            name: format!("user {user} LoS projection of observation covariance"),
            expected: mf * (mf * st.m_k[u] + st.n_k[u]) / scale,
        });
    }
    stats.push(Statistic { name: "phase noise first circular moment".into(), expected: rho });
    stats.push(Statistic {
        name: "phase noise on a unit-modulus vector".into(),
        expected: 1.0 + (n as f64 - 1.0) * rho * rho,
    });
    stats.push(Statistic { name: "Gaussian quadratic form diagonal (real)".into(), expected: trace_d.re });
    stats.push(Statistic { name: "Gaussian quadratic form diagonal (imaginary)".into(), expected: trace_d.im });
    stats.push(Statistic { name: "Gaussian quadratic form off-diagonal".into(), expected: 0.0 });

    let width = stats.len();
    let parts: Vec<Vec<Welford>> = chunk_bounds(samples)
        .par_iter()
        .map(|&(first, count)| {
            let mut acc = vec![Welford::default(); width];
            for idx in first..first + count {
                let real = sample_realization(&s.cfg, &s.pathloss, &s.los, idx);
                let obs = oracle.pilot_observations(&real, &phase);
                let mut j = 0;
                let mut push = |x: f64| {
                    acc[j].push(x);
                    j += 1;
                };
                for (u, o) in obs.iter().enumerate() {
                    let scale = mf * (st.a1[u] + st.a2[u]);
                    for v in [&o.q, &o.y] {
                        let c: Vec<C64> = v.iter().zip(&mu[u]).map(|(x, m)| x - m).collect();
                        let proj: C64 = s.los.a_m.iter().zip(&c).map(|(a, x)| a.conj() * x).sum();
                        push(c.iter().map(|z| z.norm_sqr()).sum::<f64>() / scale);
                        push(proj.norm_sqr() / scale);
                    }
                }
                let phasors: Vec<C64> = real.theta_noise.iter().map(|&t| C64::from_polar(1.0, t)).collect();
                push(phasors.iter().map(|z| z.re).sum::<f64>() / n as f64);
                push(phasors.iter().sum::<C64>().norm_sqr() / n as f64);
                let mut rng = stream(s.cfg.seed(), Purpose::Experiment, &[3, 4], idx);
                let x = complex_normals(&mut rng, 12);
                let entry = |a: usize, b: usize| -> C64 {
                    (0..4)
                        .flat_map(|i| (0..4).map(move |j| (i, j)))
                        .map(|(i, j)| x[a * 4 + i] * d[i * 4 + j] * x[b * 4 + j].conj())
                        .sum()
                };
                let diag = entry(0, 0);
                push(diag.re);
                push(diag.im);
                push(entry(0, 1).re);
            }
            acc
        })
        .collect();
    let mut total = vec![Welford::default(); width];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    stats.into_iter().zip(total).collect()
}

/// Runs every check on `s` with `samples` Monte Carlo realizations.
pub fn run_checks(s: &Scenario, samples: usize) -> Result<Vec<Check>, CliError> {
    let phase = s.random_phase(0);
    let model = s.rate_model();
    let theory = model.evaluate(&phase);
    let nmse = nmse_closed_form(&s.stats);

    // (name, mean, standard error, expected)
    let mut statistical: Vec<(String, f64, f64, f64)> = Vec::new();
    let (emp, _) = Oracle::from_scenario(s).empirical_sinr(&phase, samples);
    for (u, (e, c)) in emp.users.iter().zip(&theory.components).enumerate() {
        let user = u + 1;
        for (what, est, value) in [
            ("NMSE", e.nmse, nmse[u]),
            ("desired signal", e.signal, c.signal),
            ("beamforming gain uncertainty", e.leak, c.leak),
            ("interference", e.interference_sum, c.interference_sum()),
            ("noise", e.noise, c.noise),
            ("estimation error orthogonality (real)", e.orthogonality.0, 0.0),
            ("estimation error orthogonality (imaginary)", e.orthogonality.1, 0.0),
        ] {
            statistical.push((format!("user {user} {what}"), est.mean, est.std_error, value));
        }
    }
    for (stat, w) in channel_statistics(s, samples) {
        statistical.push((stat.name, w.mean, w.se(), stat.expected));
    }

    let z_star = bonferroni_threshold(statistical.len());
    let mut checks: Vec<Check> = statistical
        .into_iter()
        .map(|(name, mean, se, expected)| {
            let z = z_score(mean, se, expected);
            Check { name, measure: Measure::ZScore, value: z, threshold: z_star, pass: z.abs() <= z_star }
        })
        .collect();

    let mut exact = |name: &str, err: f64| {
        checks.push(Check {
            name: name.into(),
            measure: Measure::RelError,
            value: err,
            threshold: EXACT_TOL,
            pass: err <= EXACT_TOL,
        });
    };
    let terms = PhaseTerms::new(&s.los, &phase);
    let signal_err = (0..s.cfg.k())
        .map(|u| {
            let es = static_noise_kernel(&s.stats, &terms, u);
            rel_error(desired_signal(&s.stats, &terms, u), es * es)
        })
        .fold(0.0, f64::max);
    exact("desired signal equals squared static-noise kernel", signal_err);
    let nmse_err = nmse.iter().zip(nmse_from_mse(&s.stats)).map(|(a, b)| rel_error(*a, b)).fold(0.0, f64::max);
    exact("NMSE observation form equals MSE trace ratio", nmse_err);
    if s.cfg.mode() == Mode::ActiveRis {
        let p = &s.stats.params;
        let load: f64 = p.alpha.iter().map(|a| p.p * a).sum::<f64>() + p.sigma_e2;
        let output = s.stats.eta * s.stats.eta * p.n as f64 * load;
        exact("amplifier output power equals its budget", rel_error(output, s.budget.p_a));
    }
    let rayleigh = Scenario::new(&SystemConfig { delta: 0.0, ..s.cfg.raw().clone() })?;
    let rayleigh_model = rayleigh.rate_model();
    let reference = rayleigh_model.evaluate(&rayleigh.random_phase(0)).sinr;
    let invariance_err = (1..10)
        .flat_map(|i| {
            let sinr = rayleigh_model.evaluate(&rayleigh.random_phase(i)).sinr;
            sinr.into_iter().zip(reference.clone()).map(|(a, b)| rel_error(a, b)).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    exact("SINR independent of phases without RIS-BS LoS", invariance_err);
    Ok(checks)
}

/// Checks as a table with columns check, measure, value, threshold, pass.
pub fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["check", "measure", "value", "threshold", "pass"]);
    for c in checks {
        let measure = match c.measure {
            Measure::ZScore => "z_score",
            Measure::RelError => "rel_error",
        };
        t.push(vec![c.name.clone(), measure.into(), num(c.value), num(c.threshold), c.pass.to_string()]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_is_three_sigma_for_one_test() {
        assert!((bonferroni_threshold(1) - 3.0).abs() < 1e-3);
        assert!(bonferroni_threshold(100) > bonferroni_threshold(10));
    }

    #[test]
    fn z_score_handles_degenerate_statistics() {
        assert_eq!(z_score(1.0, 0.0, 1.0 + 1e-15), 0.0);
        assert!(z_score(1.0, 0.0, 1.1).is_infinite());
        assert_eq!(z_score(1.5, 0.25, 1.0), 2.0);
    }
}
