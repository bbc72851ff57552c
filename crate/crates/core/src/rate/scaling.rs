//! Dominant-term rates when the user power shrinks as p = E_u/M^a.
//!
//! Three regimes are distinguished by the Rician factors. In each one the
//! amplified RIS thermal noise eventually outgrows the desired signal, so the
//! rate decays to zero however the array grows.
//!
//! Under [`Formulation::Printed`] the thermal-noise dominant terms are the
//! reference ones. [`Formulation::Exact`] adds the contributions those drop:
//! with Rayleigh user–RIS links the e_k1²/N share of the order-M^{2+a}
//! thermal term, and with Rayleigh links on both hops the order-M^{2+a} term
//! σ_e²Δ²β²e_k1²/(NτE_u). Without the latter the printed Rayleigh–Rayleigh
//! rate overshoots the full expression by orders of magnitude at large M.

use super::{rate_from_sinr, RateModel};
use crate::config::Formulation;
use crate::error::{Error, Result};
use crate::geometry::{LoSCache, PhaseTerms, PhaseVector};
use crate::stats::{ChannelStats, ModelParams};

/// Which links carry a LoS component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// δ > 0 and every ε_k > 0.
    RicRic,
    /// δ > 0 and every ε_k = 0.
    RicRay,
    /// δ = 0 and every ε_k = 0.
    RayRay,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::RicRic => "RicRic",
            Regime::RicRay => "RicRay",
            Regime::RayRay => "RayRay",
        }
    }

    /// Checks that the Rician factors belong to this regime.
    pub fn check(self, params: &ModelParams) -> Result<()> {
        let all_eps = |pred: fn(f64) -> bool| params.epsilon.iter().all(|&e| pred(e));
        let (ok, requirement) = match self {
            Regime::RicRic => (params.delta > 0.0 && all_eps(|e| e > 0.0), "delta > 0 and every epsilon > 0"),
            Regime::RicRay => (params.delta > 0.0 && all_eps(|e| e == 0.0), "delta > 0 and every epsilon = 0"),
            Regime::RayRay => (params.delta == 0.0 && all_eps(|e| e == 0.0), "delta = 0 and every epsilon = 0"),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::RegimeMismatch { regime: self.name(), requirement })
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ricric" => Ok(Regime::RicRic),
            "ricray" => Ok(Regime::RicRay),
            "rayray" => Ok(Regime::RayRay),
            other => Err(crate::error::invalid("regime", format!("`{other}` is not one of ricric, ricray, rayray"))),
        }
    }
}

/// Per-user dominant-term rates for statistics computed at p = E_u/M^a.
pub fn scaling_law_rate(
    stats: &ChannelStats,
    terms: &PhaseTerms,
    regime: Regime,
    a: f64,
    e_u: f64,
    formulation: Formulation,
) -> Result<Vec<f64>> {
    let p = &stats.params;
    regime.check(p)?;
    let (m, n, kk) = (stats.m(), stats.n(), stats.k());
    let (big, b, d, r) = (p.big_delta, p.beta, p.delta, p.phase_noise.rho);
    let (se2, sg2, tau) = (p.sigma_e2, p.sigma2, p.tau as f64);
    let exact = formulation == Formulation::Exact;
    let r2 = r * r;

    let rates = (0..kk)
        .map(|k| {
            let (c, e, g, e1, e2) = (stats.c[k], p.epsilon[k], p.gamma[k], stats.e1[k], stats.e2[k]);
            let sinr = match regime {
                Regime::RicRic => {
                    let fk2 = terms.f[k].norm_sqr();
                    let ds = fk2 * fk2 / (n * n) * big * big * c * c * d * d * e * e * r2 * r2;
                    let le = fk2 / n * big * big * c * c * d * d * e * r2 * (e * (1.0 - r2) + 1.0);
                    let inter: f64 = (0..kk)
                        .filter(|&i| i != k)
                        .map(|i| {
                            let fi2 = terms.f[i].norm_sqr();
                            fk2 / n
                                * big
                                * big
                                * c
                                * d
                                * d
                                * e
                                * stats.c[i]
                                * r2
                                * (p.epsilon[i] * (1.0 - r2 + r2 * fi2 / n) + 1.0)
                        })
                        .sum();
                    let tn = b / (n * (d + 1.0)) * big * big * fk2 * c * d * d * e * r2;
                    let sn = fk2 / n * big * c * d * e * r2;
                    let gain = e_u * m.powf(2.0 - a);
                    gain * ds / (gain * (le + inter) + se2 * m * m * tn + sg2 * m * sn)
                }
                Regime::RicRay => {
                    let ds = (big * c * (d * e2 + e1) + g * e1).powi(2);
                    let common = big * big * se2 * b / (tau * e_u * (d + 1.0))
                        * (d * d * e2 * e2 + (2.0 * d * e1 * e2 + e1 * e1) / n);
                    let le = common * c;
                    let inter: f64 = (0..kk).filter(|&i| i != k).map(|i| common * stats.c[i]).sum();
                    let pre = big * big * se2 * b * b / (tau * e_u * (d + 1.0).powi(2));
                    let tn = if exact {
                        pre * (d * e2 * (d * e2 + 2.0 * e1 / n) + e1 * e1 / n)
                    } else {
                        pre * d * e2 * (d * e2 + 2.0 * e1 / n)
                    };
                    let sn = big * c * d * e2 + big * c * e1 + g * e1;
                    e_u * m.powf(2.0 - a) * ds
                        / (e_u * m * m * (le + inter) + se2 * m.powf(2.0 + a) * tn + sg2 * m * sn)
                }
                Regime::RayRay => {
                    let al = p.alpha[k];
                    let ds = e1 * e1 * (big * b * al + g).powi(2);
                    let le = e1 * e1 * big * big * se2 / (tau * e_u) * b * b * al / n;
                    let inter: f64 = (0..kk)
                        .filter(|&i| i != k)
                        .map(|i| big * big * e1 * e1 * b * b * p.alpha[i] * se2 / (tau * e_u) / n)
                        .sum();
                    let tn1 = e1 * e1 * big * big * b * b * al / n;
                    let tn2 = big * e1 * e1 * b * (big * se2 * b + sg2) / (tau * e_u);
                    let tn3 = if exact { e1 * e1 * big * big * b * b * se2 / (n * tau * e_u) } else { 0.0 };
                    let sn = e1 * (big * b * al + g);
                    e_u * m.powf(2.0 - a) * ds
                        / (e_u * m * m * (le + inter)
                            + se2 * m * (m * tn1 + m.powf(a) * tn2 + m.powf(1.0 + a) * tn3)
                            + sg2 * m * sn)
                }
            };
            rate_from_sinr(p.chi, sinr)
        })
        .collect();
    Ok(rates)
}

/// Full-theory and dominant-term sum rates at one array size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub m: usize,
    pub a: f64,
    /// Sum rate from the complete closed form.
    pub full: f64,
    /// Sum rate from the dominant terms.
    pub dominant: f64,
}

/// Evaluates both sum rates at M = `m` with p = E_u/M^a and a fixed amplifier power `p_a`.
///
/// `base` supplies every other parameter; Δ is recomputed from `p_a` and the
/// scaled user power. Only the N-element geometry of `los` is read.
#[allow(clippy::too_many_arguments)]
pub fn scaling_point(
    base: &ModelParams,
    los: &LoSCache,
    phase: &PhaseVector,
    regime: Regime,
    a: f64,
    e_u: f64,
    m: usize,
    p_a: f64,
    formulation: Formulation,
) -> Result<ScalingPoint> {
    regime.check(base)?;
    let mut params = base.clone();
    params.m = m;
    params.p = e_u / (m as f64).powf(a);
    let load: f64 = params.alpha.iter().map(|al| params.p * al).sum::<f64>() + params.sigma_e2;
    params.big_delta = p_a / load;
    let stats = ChannelStats::new(params);
    let terms = PhaseTerms::new(los, phase);
    let dominant = scaling_law_rate(&stats, &terms, regime, a, e_u, formulation)?.iter().sum();
    let model = RateModel::new(stats, los.clone(), formulation, true);
    let full = model.evaluate(phase).sum_rate;
    Ok(ScalingPoint { m, a, full, dominant })
}
