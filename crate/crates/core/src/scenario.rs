//! Everything derived from one configuration, bundled.

use crate::config::{derive_pathloss, PathLossSet, SystemConfig, ValidatedConfig};
use crate::error::Result;
use crate::geometry::{generate_angles, AngleSet, LoSCache, PhaseVector};
use crate::rate::RateModel;
use crate::sampler::{stream, Purpose};
use crate::stats::{compute_stats, power_split, ChannelStats, PowerBudget};

/// A validated configuration with its path loss, geometry, power split and statistics.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cfg: ValidatedConfig,
    pub pathloss: PathLossSet,
    pub angles: AngleSet,
    pub los: LoSCache,
    pub budget: PowerBudget,
    pub stats: ChannelStats,
}

impl Scenario {
    /// Validates `raw` and derives everything else; angles come from the configuration seed.
    pub fn new(raw: &SystemConfig) -> Result<Self> {
        let cfg = raw.validate()?;
        let angles = generate_angles(cfg.seed(), cfg.k());
        Self::with_angles(cfg, angles)
    }

    /// Like [`Scenario::new`] with explicit angles.
    pub fn with_angles(cfg: ValidatedConfig, angles: AngleSet) -> Result<Self> {
        let budget = power_split(&cfg)?;
        Self::with_budget(cfg, angles, budget)
    }

    /// Like [`Scenario::with_angles`] with an explicit power budget.
    pub fn with_budget(cfg: ValidatedConfig, angles: AngleSet, budget: PowerBudget) -> Result<Self> {
        let pathloss = derive_pathloss(&cfg);
        let los = LoSCache::new(&cfg, &angles)?;
        let stats = compute_stats(&cfg, &pathloss, &budget);
        Ok(Self { cfg, pathloss, angles, los, budget, stats })
    }

    /// The closed-form evaluator for this scenario.
    pub fn rate_model(&self) -> RateModel {
        let raw = self.cfg.raw();
        RateModel::new(self.stats.clone(), self.los.clone(), raw.formulation, raw.leak_pseudo_term)
    }

    /// Random phase vector number `index` of the `phases` stream.
    pub fn random_phase(&self, index: u64) -> PhaseVector {
        let mut rng = stream(self.cfg.seed(), Purpose::Phases, &[self.cfg.n()], index);
        PhaseVector::random(self.cfg.n(), &mut rng)
    }
}
