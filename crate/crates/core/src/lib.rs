//! Active-RIS-aided uplink massive MIMO: closed-form analysis and its Monte Carlo oracle.
//!
//! The crate evaluates the LMMSE channel-estimation error and the
//! use-and-then-forget achievable rate of a multi-user uplink in which an
//! amplifying reconfigurable intelligent surface (RIS) with Von Mises phase
//! noise assists a massive-MIMO base station using maximum-ratio combining.
//!
//! Module map:
//!
//! * [`config`] turns a flat key/value scenario into a [`ValidatedConfig`].
//! * [`geometry`] builds array responses and the phase-dependent scalars f_k and F_ki.
//! * [`sampler`] draws channel, phase-noise and thermal-noise realizations from
//!   counter-based streams.
//! * [`stats`] holds the Bessel moments, the power split and every
//!   estimator coefficient, plus the closed-form NMSE.
//! * [`rate`] evaluates the four SINR components, the rate report and the
//!   large-array scaling laws.
//! * [`montecarlo`] estimates the same expectations by brute force.
//! * [`ga`] searches phase shifts for max-min fairness.
//!
//! A complete evaluation:
//!
//! ```
//! use ris_mimo::{Scenario, SystemConfig, PhaseVector};
//!
//! let cfg = SystemConfig { k: 4, ..SystemConfig::default() };
//! let scenario = Scenario::new(&cfg)?;
//! let phase = PhaseVector::zeros(cfg.n);
//! let report = scenario.rate_model().evaluate(&phase);
//! assert_eq!(report.rate.len(), 4);
//! assert!(report.min_rate > 0.0 && report.min_rate <= report.sum_rate);
//! # Ok::<(), ris_mimo::Error>(())
//! ```

pub mod config;
pub mod error;
pub mod ga;
pub mod geometry;
pub mod moments;
pub mod montecarlo;
pub mod rate;
pub mod sampler;
pub mod scenario;
pub mod stats;

pub use config::{
    dbm_to_watts, derive_pathloss, watts_to_dbm, ChiConvention, Formulation, Mode, PathLossSet, SystemConfig,
    ValidatedConfig,
};
pub use error::{Error, Result};
pub use geometry::{array_response, generate_angles, AngleSet, LoSCache, PhaseVector};
pub use rate::{RateModel, RateReport, SinrComponents};
pub use scenario::Scenario;
pub use stats::{ChannelStats, ModelParams, PhaseNoiseChar, PowerBudget};

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;
