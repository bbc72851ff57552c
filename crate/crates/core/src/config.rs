//! Scenario description, unit conversion and validation.
//!
//! Every other module consumes a [`ValidatedConfig`]. The raw [`SystemConfig`]
//! is a flat key/value record so that it maps one-to-one onto configuration
//! files and `--set key=value` overrides; [`SystemConfig::set`] is the single
//! entry point for both.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm.
pub fn watts_to_dbm(p_w: f64) -> f64 {
    10.0 * p_w.log10() + 30.0
}

/// Which system is being modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Amplifying RIS with thermal noise and phase noise.
    ActiveRis,
    /// Conventional reflect-only RIS: unit gain, no thermal noise, ideal phases.
    PassiveRis,
    /// Direct links only.
    NoRis,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "active" | "activeris" => Ok(Mode::ActiveRis),
            "passive" | "passiveris" => Ok(Mode::PassiveRis),
            "none" | "noris" => Ok(Mode::NoRis),
            other => Err(invalid("mode", format!("`{other}` is not one of active, passive, none"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::ActiveRis => "active",
            Mode::PassiveRis => "passive",
            Mode::NoRis => "none",
        })
    }
}

/// Denominator of the pre-log factor χ applied to every rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChiConvention {
    /// χ = (τ_c − τ)/τ_c, the fraction of the coherence block carrying data.
    CoherenceBlock,
    /// χ = (τ_c − τ)/τ, which exceeds one for realistic block lengths.
    PilotLength,
}

impl FromStr for ChiConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tau_c" | "coherence" | "block" => Ok(ChiConvention::CoherenceBlock),
            "tau" | "pilot" => Ok(ChiConvention::PilotLength),
            other => Err(invalid("chi_convention", format!("`{other}` is not one of tau_c, tau"))),
        }
    }
}

impl fmt::Display for ChiConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChiConvention::CoherenceBlock => "tau_c",
            ChiConvention::PilotLength => "tau",
        })
    }
}

/// Which set of closed-form expressions the rate module evaluates.
///
/// `Exact` is the set that agrees with the Monte Carlo oracle; `Printed`
/// transcribes the reference expressions literally, including the terms the
/// oracle shows to be wrong. See the rate chapter of the book for the list of
/// differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Formulation {
    #[default]
    Exact,
    Printed,
}

impl FromStr for Formulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Formulation::Exact),
            "printed" => Ok(Formulation::Printed),
            other => Err(invalid("formulation", format!("`{other}` is not one of exact, printed"))),
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Exact => "exact",
            Formulation::Printed => "printed",
        })
    }
}

/// All scalar parameters of a scenario.
///
/// Field names follow the configuration keys (see [`SystemConfig::KEYS`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// BS antenna count (perfect square).
    pub m: usize,
    /// RIS element count (perfect square).
    pub n: usize,
    /// Number of single-antenna users.
    pub k: usize,
    /// Rician factor of the RIS–BS channel.
    pub delta: f64,
    /// Rician factors of the user–RIS channels; a single entry applies to every user.
    pub epsilon: Vec<f64>,
    /// Radius of the user semicircle around the RIS, metres.
    pub r_ur: f64,
    /// RIS–BS distance, metres.
    pub d_rb: f64,
    /// Coherence block length in symbols.
    pub tau_c: usize,
    /// Pilot length in symbols.
    pub tau: usize,
    /// Static noise power at the BS, dBm.
    pub sigma2_dbm: f64,
    /// Thermal noise power introduced by the active RIS, dBm.
    pub sigma_e2_dbm: f64,
    /// Von Mises concentration of the RIS phase noise (`inf` for ideal phases).
    pub v: f64,
    /// Total power budget, dBm.
    pub p_total_dbm: f64,
    /// Per-element switch/control power, dBm.
    pub p_sc_dbm: f64,
    /// Per-element DC biasing power, dBm.
    pub p_dc_dbm: f64,
    /// Amplifier efficiency.
    pub xi: f64,
    /// Element spacing over wavelength.
    pub d_over_lambda: f64,
    /// Active RIS, passive RIS or no RIS.
    pub mode: Mode,
    /// Master seed for every random stream.
    pub seed: u64,
    /// Denominator of the pre-log factor.
    pub chi_convention: ChiConvention,
    /// Closed-form expression set.
    pub formulation: Formulation,
    /// Keep the `|a_Nᵀ Φᴴ Φᴴ a_N|²` summand of the printed leakage expression.
    pub leak_pseudo_term: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            m: 64,
            n: 16,
            k: 8,
            delta: 1.0,
            epsilon: vec![10.0],
            r_ur: 20.0,
            d_rb: 700.0,
            tau_c: 196,
            tau: 8,
            sigma2_dbm: -104.0,
            sigma_e2_dbm: -70.0,
            v: 2.0,
            p_total_dbm: 20.0,
            p_sc_dbm: -10.0,
            p_dc_dbm: -5.0,
            xi: 0.8,
            d_over_lambda: 0.5,
            mode: Mode::ActiveRis,
            seed: 0,
            chi_convention: ChiConvention::CoherenceBlock,
            formulation: Formulation::Exact,
            leak_pseudo_term: true,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse::<T>().map_err(|_| invalid(key, format!("cannot parse `{}`", value.trim())))
}

fn parse_real(key: &str, value: &str) -> Result<f64> {
    let v = value.trim();
    match v.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => return Ok(f64::INFINITY),
        _ => {}
    }
    let x: f64 = parse_num(key, v)?;
    if x.is_nan() {
        return Err(invalid(key, "NaN is not allowed"));
    }
    Ok(x)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(invalid(key, format!("`{other}` is not a boolean"))),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let body = value.trim().trim_start_matches('[').trim_end_matches(']');
    let items: Result<Vec<f64>> =
        body.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_real(key, s)).collect();
    let items = items?;
    if items.is_empty() {
        return Err(invalid(key, "empty list"));
    }
    Ok(items)
}

fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x:?}")
    }
}

impl SystemConfig {
    /// Every accepted configuration key, in canonical order.
    pub const KEYS: [&'static str; 22] = [
        "M",
        "N",
        "K",
        "delta",
        "epsilon",
        "r_UR",
        "d_RB",
        "tau_c",
        "tau",
        "sigma2_dBm",
        "sigma_e2_dBm",
        "v",
        "P_total_dBm",
        "P_SC_dBm",
        "P_DC_dBm",
        "xi",
        "d_over_lambda",
        "mode",
        "seed",
        "chi_convention",
        "formulation",
        "leak_pseudo_term",
    ];

    /// Sets one field from its textual value. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "M" => self.m = parse_num(key, value)?,
            "N" => self.n = parse_num(key, value)?,
            "K" => self.k = parse_num(key, value)?,
            "delta" => self.delta = parse_real(key, value)?,
            "epsilon" => self.epsilon = parse_list(key, value)?,
            "r_UR" => self.r_ur = parse_real(key, value)?,
            "d_RB" => self.d_rb = parse_real(key, value)?,
            "tau_c" => self.tau_c = parse_num(key, value)?,
            "tau" => self.tau = parse_num(key, value)?,
            "sigma2_dBm" => self.sigma2_dbm = parse_real(key, value)?,
            "sigma_e2_dBm" => self.sigma_e2_dbm = parse_real(key, value)?,
            "v" => self.v = parse_real(key, value)?,
            "P_total_dBm" => self.p_total_dbm = parse_real(key, value)?,
            "P_SC_dBm" => self.p_sc_dbm = parse_real(key, value)?,
            "P_DC_dBm" => self.p_dc_dbm = parse_real(key, value)?,
            "xi" => self.xi = parse_real(key, value)?,
            "d_over_lambda" => self.d_over_lambda = parse_real(key, value)?,
            "mode" => self.mode = value.parse()?,
            "seed" => self.seed = parse_num(key, value)?,
            "chi_convention" => self.chi_convention = value.parse()?,
            "formulation" => self.formulation = value.parse()?,
            "leak_pseudo_term" => self.leak_pseudo_term = parse_bool(key, value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Returns the textual value of one key, in the form [`SystemConfig::set`] accepts.
    pub fn get(&self, key: &str) -> Result<String> {
        Ok(match key {
            "M" => self.m.to_string(),
            "N" => self.n.to_string(),
            "K" => self.k.to_string(),
            "delta" => fmt_real(self.delta),
            "epsilon" => {
                let items: Vec<String> = self.epsilon.iter().map(|&e| fmt_real(e)).collect();
                format!("[{}]", items.join(", "))
            }
            "r_UR" => fmt_real(self.r_ur),
            "d_RB" => fmt_real(self.d_rb),
            "tau_c" => self.tau_c.to_string(),
            "tau" => self.tau.to_string(),
            "sigma2_dBm" => fmt_real(self.sigma2_dbm),
            "sigma_e2_dBm" => fmt_real(self.sigma_e2_dbm),
            "v" => fmt_real(self.v),
            "P_total_dBm" => fmt_real(self.p_total_dbm),
            "P_SC_dBm" => fmt_real(self.p_sc_dbm),
            "P_DC_dBm" => fmt_real(self.p_dc_dbm),
            "xi" => fmt_real(self.xi),
            "d_over_lambda" => fmt_real(self.d_over_lambda),
            "mode" => self.mode.to_string(),
            "seed" => self.seed.to_string(),
            "chi_convention" => self.chi_convention.to_string(),
            "formulation" => self.formulation.to_string(),
            "leak_pseudo_term" => self.leak_pseudo_term.to_string(),
            other => return Err(Error::UnknownKey(other.to_string())),
        })
    }

    /// Canonical `key = value` listing of every field, one per line.
    ///
    /// Two configurations are equal exactly when their canonical listings are
    /// equal, so this is what reproducibility stamps hash.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            let value = self.get(key).expect("KEYS only lists known keys");
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        }
        out
    }

    /// Checks every invariant and precomputes the linear-scale powers.
    // The negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<ValidatedConfig> {
        let sqrt_m = exact_sqrt(self.m).ok_or(Error::NonSquareArray { which: "M", value: self.m })?;
        let sqrt_n = exact_sqrt(self.n).ok_or(Error::NonSquareArray { which: "N", value: self.n })?;
        if self.k == 0 {
            return Err(invalid("K", "at least one user is required"));
        }
        if self.tau < self.k {
            return Err(Error::PilotTooShort { tau: self.tau, k: self.k });
        }
        if self.tau_c <= self.tau {
            return Err(invalid("tau_c", "the coherence block must be longer than the pilot"));
        }
        if !(self.delta >= 0.0) || self.delta.is_infinite() {
            return Err(invalid("delta", "must be a finite nonnegative number"));
        }
        let epsilon = match self.epsilon.len() {
            1 => vec![self.epsilon[0]; self.k],
            len if len == self.k => self.epsilon.clone(),
            len => return Err(invalid("epsilon", format!("has {len} entries but K = {}", self.k))),
        };
        if epsilon.iter().any(|&e| !(e >= 0.0) || e.is_infinite()) {
            return Err(invalid("epsilon", "entries must be finite and nonnegative"));
        }
        if !(self.r_ur > 0.0) || !self.r_ur.is_finite() {
            return Err(invalid("r_UR", "must be positive"));
        }
        if !(self.d_rb > 0.0) || !self.d_rb.is_finite() {
            return Err(invalid("d_RB", "must be positive"));
        }
        if !(self.v >= 0.0) {
            return Err(invalid("v", "must be nonnegative"));
        }
        if !(self.xi > 0.0 && self.xi <= 1.0) {
            return Err(invalid("xi", "must lie in (0, 1]"));
        }
        if !(self.d_over_lambda > 0.0) || !self.d_over_lambda.is_finite() {
            return Err(invalid("d_over_lambda", "must be positive"));
        }
        let watts = |field: &'static str, dbm: f64| {
            let w = dbm_to_watts(dbm);
            if w > 0.0 && w.is_finite() {
                Ok(w)
            } else {
                Err(Error::NonPositivePower { field })
            }
        };
        Ok(ValidatedConfig {
            sigma2: watts("sigma2_dBm", self.sigma2_dbm)?,
            sigma_e2: watts("sigma_e2_dBm", self.sigma_e2_dbm)?,
            p_total: watts("P_total_dBm", self.p_total_dbm)?,
            p_sc: watts("P_SC_dBm", self.p_sc_dbm)?,
            p_dc: watts("P_DC_dBm", self.p_dc_dbm)?,
            epsilon,
            sqrt_m,
            sqrt_n,
            raw: self.clone(),
        })
    }
}

fn exact_sqrt(x: usize) -> Option<usize> {
    if x == 0 {
        return None;
    }
    let r = (x as f64).sqrt().round() as usize;
    (r * r == x).then_some(r)
}

/// A configuration whose invariants hold, with every power in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    raw: SystemConfig,
    /// Rician factor per user (length K).
    pub epsilon: Vec<f64>,
    /// Static noise power, W.
    pub sigma2: f64,
    /// RIS thermal noise power, W.
    pub sigma_e2: f64,
    /// Total power budget, W.
    pub p_total: f64,
    /// Per-element switch/control power, W.
    pub p_sc: f64,
    /// Per-element DC biasing power, W.
    pub p_dc: f64,
    /// √M.
    pub sqrt_m: usize,
    /// √N.
    pub sqrt_n: usize,
}

impl ValidatedConfig {
    /// The configuration this was validated from.
    pub fn raw(&self) -> &SystemConfig {
        &self.raw
    }
    pub fn m(&self) -> usize {
        self.raw.m
    }
    pub fn n(&self) -> usize {
        self.raw.n
    }
    pub fn k(&self) -> usize {
        self.raw.k
    }
    pub fn delta(&self) -> f64 {
        self.raw.delta
    }
    pub fn mode(&self) -> Mode {
        self.raw.mode
    }
    pub fn seed(&self) -> u64 {
        self.raw.seed
    }

    /// Von Mises concentration actually in force: a passive RIS has ideal phases.
    pub fn phase_noise_concentration(&self) -> f64 {
        match self.raw.mode {
            Mode::PassiveRis => f64::INFINITY,
            Mode::ActiveRis | Mode::NoRis => self.raw.v,
        }
    }

    /// RIS thermal noise actually in force: only an active RIS adds any.
    pub fn effective_sigma_e2(&self) -> f64 {
        match self.raw.mode {
            Mode::ActiveRis => self.sigma_e2,
            Mode::PassiveRis | Mode::NoRis => 0.0,
        }
    }

    /// Pre-log factor χ of every rate.
    pub fn chi(&self) -> f64 {
        let data = (self.raw.tau_c - self.raw.tau) as f64;
        match self.raw.chi_convention {
            ChiConvention::CoherenceBlock => data / self.raw.tau_c as f64,
            ChiConvention::PilotLength => data / self.raw.tau as f64,
        }
    }
}

/// Large-scale gains of every link.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossSet {
    /// User–RIS gains α_k.
    pub alpha: Vec<f64>,
    /// RIS–BS gain β.
    pub beta: f64,
    /// User–BS gains γ_k.
    pub gamma: Vec<f64>,
    /// User–BS distances, metres.
    pub d_ub: Vec<f64>,
}

/// Large-scale fading for users on a semicircle of radius `r_UR` around the RIS.
///
/// User `k` (1-based) sits at angle πk/9; its distance to the BS follows from
/// the law of cosines, and the three links use exponents 2, 2.8 and 4.2 with a
/// −30 dB reference gain.
pub fn derive_pathloss(cfg: &ValidatedConfig) -> PathLossSet {
    let raw = cfg.raw();
    let alpha = vec![1e-3 * raw.r_ur.powi(-2); raw.k];
    let beta = 1e-3 * raw.d_rb.powf(-2.8);
    let d_ub: Vec<f64> = (1..=raw.k)
        .map(|k| {
            let phi = PI * k as f64 / 9.0;
            ((raw.d_rb - raw.r_ur * phi.cos()).powi(2) + (raw.r_ur * phi.sin()).powi(2)).sqrt()
        })
        .collect();
    let gamma = d_ub.iter().map(|d| 1e-3 * d.powf(-4.2)).collect();
    PathLossSet { alpha, beta, gamma, d_ub }
}
