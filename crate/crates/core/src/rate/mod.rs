//! Closed-form SINR components and achievable rates.
//!
//! With maximum-ratio combining on the LMMSE estimate q̂_k, the
//! use-and-then-forget bound gives
//!
//! ```text
//! SINR_k = p·E_signal / (p·E_leak + p·Σ_{i≠k} I_ki + E_noise)
//! E_noise = σ²·E_s + η²σ_e²·E_t
//! ```
//!
//! with E_s = E{‖q̂_k‖²}, E_t = E{‖q̂_kᴴ H₂ΦΘ‖²}, E_signal = E_s²,
//! E_leak = Var{q̂_kᴴ q_k} and I_ki = E{|q̂_kᴴ q_i|²}. Every component is a
//! scalar function of the statistics and of f_k, F_ki and h̄_kᴴ h̄_i; M only
//! enters as a number.
//!
//! [`Formulation::Exact`] evaluates the expressions that agree with the Monte
//! Carlo oracle; [`Formulation::Printed`] keeps the reference transcription
//! (see [`printed`]).

mod leakage;
pub mod printed;
pub mod scaling;

use crate::config::Formulation;
use crate::geometry::{LoSCache, PhaseTerms, PhaseVector};
use crate::stats::ChannelStats;

pub use leakage::leakage_exact;
pub use scaling::{scaling_law_rate, scaling_point, Regime, ScalingPoint};

/// The SINR ingredients of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrComponents {
    /// Desired-signal power |E{q̂_kᴴ q_k}|².
    pub signal: f64,
    /// Signal leakage Var{q̂_kᴴ q_k}.
    pub leak: f64,
    /// I_ki for every i; the entry at i = k is zero.
    pub interference: Vec<f64>,
    /// σ²E_s + η²σ_e²E_t.
    pub noise: f64,
    /// E_s = E{‖q̂_k‖²}.
    pub static_noise: f64,
    /// E_t = E{‖q̂_kᴴ H₂ΦΘ‖²}.
    pub thermal_noise: f64,
}

impl SinrComponents {
    /// Σ_{i≠k} I_ki.
    pub fn interference_sum(&self) -> f64 {
        self.interference.iter().sum()
    }
}

/// Per-user SINRs and rates for one phase configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub sinr: Vec<f64>,
    /// χ·log₂(1 + SINR_k), bits/s/Hz.
    pub rate: Vec<f64>,
    pub sum_rate: f64,
    pub min_rate: f64,
    pub components: Vec<SinrComponents>,
}

/// χ·log₂(1 + sinr), accurate for tiny SINRs.
pub fn rate_from_sinr(chi: f64, sinr: f64) -> f64 {
    chi * sinr.ln_1p() / std::f64::consts::LN_2
}

/// SINR from its components at per-user power `p`.
pub fn sinr_from_components(p: f64, c: &SinrComponents) -> f64 {
    p * c.signal / (p * c.leak + p * c.interference_sum() + c.noise)
}

/// Builds the report from per-user components.
pub fn assemble_report(p: f64, chi: f64, components: Vec<SinrComponents>) -> RateReport {
    let sinr: Vec<f64> = components.iter().map(|c| sinr_from_components(p, c)).collect();
    let rate: Vec<f64> = sinr.iter().map(|&s| rate_from_sinr(chi, s)).collect();
    let sum_rate = rate.iter().sum();
    let min_rate = rate.iter().copied().fold(f64::INFINITY, f64::min);
    RateReport { sinr, rate, sum_rate, min_rate, components }
}

/// Local shorthand for the scalars of user `k`.
pub(crate) struct User {
    pub m: f64,
    pub n: f64,
    pub big: f64,
    pub c: f64,
    pub d: f64,
    pub eps: f64,
    pub rho: f64,
    pub l: f64,
    pub w: f64,
    pub wd: f64,
    pub sn: f64,
    pub g: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub a3: f64,
    pub a4: f64,
}

impl User {
    pub fn new(stats: &ChannelStats, k: usize) -> Self {
        let p = &stats.params;
        Self {
            m: stats.m(),
            n: stats.n(),
            big: p.big_delta,
            c: stats.c[k],
            d: p.delta,
            eps: p.epsilon[k],
            rho: p.phase_noise.rho,
            l: p.phase_noise.l,
            w: stats.varpi,
            wd: stats.varpi_over_delta,
            sn: stats.pilot_noise,
            g: p.gamma[k],
            e1: stats.e1[k],
            e2: stats.e2[k],
            e3: stats.e3[k],
            a3: stats.a3[k],
            a4: stats.a4[k],
        }
    }

    /// The phase-independent bracket of E_s.
    fn kernel_bracket(&self) -> f64 {
        let u = self;
        u.big * u.c * u.d * u.e2 * (u.eps * (1.0 - u.rho * u.rho) + 1.0)
            + u.big * u.c * (u.eps + 1.0) * u.e1
            + u.g * u.e1
    }

    /// The |f_k|²-weighted part of E_s, without the M/N prefactor.
    fn kernel_los(&self, f2: f64) -> f64 {
        f2 * self.big * self.c * self.d * self.eps * self.rho * self.rho
    }
}

/// E_s = E{‖q̂_k‖²} = E{q̂_kᴴ q_k}.
pub fn static_noise_kernel(stats: &ChannelStats, terms: &PhaseTerms, k: usize) -> f64 {
    let u = User::new(stats, k);
    u.m * u.kernel_bracket() + u.m / u.n * u.kernel_los(terms.f[k].norm_sqr())
}

/// E_signal written out as a polynomial in |f_k|²; equals the square of [`static_noise_kernel`].
pub fn desired_signal(stats: &ChannelStats, terms: &PhaseTerms, k: usize) -> f64 {
    let u = User::new(stats, k);
    let a = u.kernel_bracket();
    let b = u.kernel_los(terms.f[k].norm_sqr());
    u.m * u.m * a * a + u.m * u.m / (u.n * u.n) * b * b + 2.0 * u.m * u.m / u.n * b * a
}

/// E_t = E{‖q̂_kᴴ H₂ΦΘ‖²}.
pub fn thermal_noise_term(stats: &ChannelStats, terms: &PhaseTerms, k: usize) -> f64 {
    thermal_noise_with(stats, terms, k, true)
}

/// E_t with or without the amplified-thermal-noise share of the M²e_k1² summand.
pub(crate) fn thermal_noise_with(stats: &ChannelStats, terms: &PhaseTerms, k: usize, full_cross: bool) -> f64 {
    let u = User::new(stats, k);
    let (m, n, d) = (u.m, u.n, u.d);
    let f2 = terms.f[k].norm_sqr();
    // Δ·(c(ε(1−ρ²)+1) + ϖ/Δ), expanded so that Δ = 0 stays finite.
    let dx = u.big * u.c * (u.eps * (1.0 - u.rho * u.rho) + 1.0) + u.w;
    let y = u.big * u.c * (u.eps + 1.0) + u.w + u.sn + u.g;
    let cross = if full_cross { u.big * u.c * (u.eps + 1.0) + u.w } else { u.big * u.c * (u.eps + 1.0) };
    let beta = stats.params.beta;
    beta / (d + 1.0)
        * ((m * m * n * d * d * u.e2 * u.e2 + m * n * d * u.e2 * u.e2 + 2.0 * m * m * d * u.e1 * u.e2) * dx
            + m * m * u.e1 * u.e1 * cross
            + (2.0 * m * m * n * d * u.a3 * u.a4 + m * n * (d * u.a4 * u.a4 + u.e3) + m * m * m * n * d * u.a3 * u.a3)
                * y
            + f2 * u.big * u.c * d * u.eps * u.rho * u.rho * (m * m * d + 2.0 * m * m / n * u.e1 + m))
}

/// I_ki = E{|q̂_kᴴ q_i|²} for i ≠ k.
pub fn interference_term(stats: &ChannelStats, los: &LoSCache, terms: &PhaseTerms, k: usize, i: usize) -> f64 {
    let u = User::new(stats, k);
    let (m, n, big, d, r, l) = (u.m, u.n, u.big, u.d, u.rho, u.l);
    let (ck, ek, gk, e1, e2, e3, wd, w, sn) = (u.c, u.eps, u.g, u.e1, u.e2, u.e3, u.wd, u.w, u.sn);
    let ci = stats.c[i];
    let ei = stats.params.epsilon[i];
    let gi = stats.params.gamma[i];
    let (fk, fi) = (terms.f[k], terms.f[i]);
    let (fk2, fi2) = (fk.norm_sqr(), fi.norm_sqr());
    let h = los.hbar_inner(k, i);
    let big_f = terms.f_pair(k, i);
    let r2 = r * r;
    let (m2, n2, big2) = (m * m, n * n, big * big);

    let mut t = m2 / n2 * h.norm_sqr() * big2 * ck * ek * ci * ei * (d * e2 * (1.0 - r2) + e1).powi(2);
    t += m2 / n2 * big_f.norm_sqr() * big2 * ck * d * d * ek * ci * ei * e2 * e2 * (l - r2).powi(2);
    t += m2 / n2 * fk2 * fi2 * big2 * r2 * r2 * ck * d * d * ek * ci * ei;
    t += 2.0 * m2 / n2
        * big2
        * r2
        * ci
        * d
        * (ck * d * ek * ei * e2 * (2.0 * r2 - 1.0 - l) * (fk2 + fi2 * e2)
            + fk2 * ck * ek * e1
            + fi2 * ei * e1 * e2 * (ck + wd));
    t += m2 / n
        * big2
        * r2
        * ci
        * d
        * d
        * (ck * ek * ei * (1.0 - r2) * (fk2 + fi2 * e2 * e2) + fk2 * ck * ek + fi2 * ei * e2 * e2 * (ck + wd));
    t += m / n
        * big
        * r2
        * d
        * (big * ck * ek * ci * ei * (fk2 + fi2 * e2 * e2)
            + ck * ek * fk2 * (big * ci + gi)
            + fi2 * ci * ei * e2 * e2 * (sn + w + gk + big * ck));
    t += m2
        * big2
        * ci
        * d
        * d
        * e2
        * e2
        * (ck * (1.0 - r2) * (ei + ek + ei * ek * (1.0 - r2)) + ck + wd * (1.0 + ei * (1.0 - r2)));
    t += m2 / n * big2 * ci * e1 * (ck + wd) * (2.0 * d * e2 + e1);
    t += m2 / n
        * big2
        * ci
        * (ck * ek * d * d * ei * e2 * e2 * (4.0 * r2 + 4.0 * l * r2 - l * l - 1.0 - 6.0 * r2 * r2)
            + e1 * (ei * (ck + wd) + ck * ek) * (2.0 * d * e2 * (1.0 - r2) + e1));
    t += m
        * (big2
            * ck
            * ci
            * ((ek * ei + ek + ei + 1.0) * (2.0 * d * e2 * e2 + e3) - r2 * d * e2 * e2 * (2.0 * ek * ei + ek + ei))
            + w * ((d * e2 * e2 + e3) * gi + big * ci * (ei + 1.0) * (2.0 * d * e2 * e2 + e3)
                - big * d * e2 * e2 * ci * ei * r2)
            + (sn + gk) * (big * ci * (ei + 1.0) * (d * e2 * e2 + e3) - big * d * e2 * e2 * ci * ei * r2 + e3 * gi)
            + big * ck * gi * (ek + 1.0) * (d * e2 * e2 + e3)
            - big * d * e2 * e2 * ck * gi * ek * r2);
    t += 2.0 * m2 / n2 * (h * fi.conj() * fk).re * big2 * r2 * ck * d * ek * ci * ei * (d * e2 * (1.0 - r2) + e1);
    t += 2.0 * m2 / n2 * (big_f.conj() * fk * fi).re * big2 * r2 * (l - r2) * ck * d * d * ek * ci * ei * e2;
    t
}

/// Var{q̂_kᴴ q_k}.
pub fn leakage_term(stats: &ChannelStats, terms: &PhaseTerms, k: usize) -> f64 {
    leakage_exact(stats, terms, k)
}

/// E_noise = σ²E_s + η²σ_e²E_t.
pub fn combined_noise(stats: &ChannelStats, static_noise: f64, thermal_noise: f64) -> f64 {
    stats.params.sigma2 * static_noise + stats.eta * stats.eta * stats.params.sigma_e2 * thermal_noise
}

/// A statistics/geometry pair ready to score phase vectors.
#[derive(Debug, Clone)]
pub struct RateModel {
    pub stats: ChannelStats,
    pub los: LoSCache,
    pub formulation: Formulation,
    /// Keep the double-conjugate summand of the printed leakage.
    pub leak_pseudo_term: bool,
}

impl RateModel {
    pub fn new(stats: ChannelStats, los: LoSCache, formulation: Formulation, leak_pseudo_term: bool) -> Self {
        Self { stats, los, formulation, leak_pseudo_term }
    }

    /// The SINR ingredients of user `k`.
    pub fn components(&self, terms: &PhaseTerms, k: usize) -> SinrComponents {
        let stats = &self.stats;
        let kk = stats.k();
        let (signal, leak, static_noise, thermal_noise) = match self.formulation {
            Formulation::Exact => {
                let es = static_noise_kernel(stats, terms, k);
                (
                    desired_signal(stats, terms, k),
                    leakage_exact(stats, terms, k),
                    es,
                    thermal_noise_term(stats, terms, k),
                )
            }
            Formulation::Printed => (
                printed::desired_signal(stats, terms, k),
                printed::leakage(stats, terms, k, self.leak_pseudo_term),
                static_noise_kernel(stats, terms, k),
                printed::thermal_noise(stats, terms, k),
            ),
        };
        let interference =
            (0..kk).map(|i| if i == k { 0.0 } else { interference_term(stats, &self.los, terms, k, i) }).collect();
        SinrComponents {
            signal,
            leak,
            interference,
            noise: combined_noise(stats, static_noise, thermal_noise),
            static_noise,
            thermal_noise,
        }
    }

    /// Full report for a phase vector.
    pub fn evaluate(&self, phase: &PhaseVector) -> RateReport {
        let terms = PhaseTerms::new(&self.los, phase);
        let components = (0..self.stats.k()).map(|k| self.components(&terms, k)).collect();
        assemble_report(self.stats.params.p, self.stats.params.chi, components)
    }

    /// Smallest user rate, the max-min objective.
    pub fn min_rate(&self, phase: &PhaseVector) -> f64 {
        self.evaluate(phase).min_rate
    }
}
