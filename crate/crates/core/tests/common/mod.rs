//! Random systems shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_mimo::stats::phase_noise_char;
use ris_mimo::{ChannelStats, LoSCache, ModelParams, PhaseVector, C64};

/// Which Rician factors a random system may have.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Links {
    Any,
    RayleighRis,
}

/// Log-uniform draw on [lo, hi].
pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

pub fn unit_phasors(rng: &mut ChaCha8Rng, len: usize) -> Vec<C64> {
    (0..len).map(|_| C64::from_polar(1.0, rng.random::<f64>() * TAU)).collect()
}

/// Model parameters with every scalar drawn over several decades.
pub fn random_params(rng: &mut ChaCha8Rng, links: Links) -> ModelParams {
    let side = rng.random_range(1..=16usize);
    let m = side * side;
    let n = rng.random_range(1..=8usize).pow(2);
    let k = rng.random_range(1..=4usize);
    let delta = match links {
        Links::RayleighRis => 0.0,
        Links::Any if rng.random_bool(0.2) => 0.0,
        Links::Any => log_uniform(rng, 1e-2, 1e2),
    };
    let epsilon = (0..k).map(|_| if rng.random_bool(0.2) { 0.0 } else { log_uniform(rng, 1e-2, 1e2) }).collect();
    let v = match rng.random_range(0..4) {
        0 => 0.0,
        1 => f64::INFINITY,
        _ => log_uniform(rng, 1e-2, 1e3),
    };
    ModelParams {
        m,
        n,
        delta,
        epsilon,
        alpha: (0..k).map(|_| log_uniform(rng, 1e-2, 1e1)).collect(),
        beta: log_uniform(rng, 1e-2, 1e1),
        gamma: (0..k).map(|_| log_uniform(rng, 1e-3, 1e1)).collect(),
        sigma2: log_uniform(rng, 1e-3, 1e1),
        sigma_e2: log_uniform(rng, 1e-3, 1e1),
        tau: rng.random_range(k..=4 * k),
        p: log_uniform(rng, 1e-2, 1e2),
        big_delta: log_uniform(rng, 1e-1, 1e2),
        phase_noise: phase_noise_char(v),
        chi: rng.random_range(0.1..1.0),
    }
}

/// Unit-modulus LoS vectors sized for `params`.
pub fn random_los(rng: &mut ChaCha8Rng, params: &ModelParams) -> LoSCache {
    let a_m = unit_phasors(rng, params.m);
    let a_n = unit_phasors(rng, params.n);
    let hbar = (0..params.k()).map(|_| unit_phasors(rng, params.n)).collect();
    LoSCache::from_vectors(a_m, a_n, hbar)
}

pub struct System {
    pub stats: ChannelStats,
    pub los: LoSCache,
    pub phase: PhaseVector,
}

pub fn random_system(seed: u64, links: Links) -> System {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = random_params(&mut rng, links);
    let los = random_los(&mut rng, &params);
    let phase = PhaseVector::random(params.n, &mut rng);
    System { stats: ChannelStats::new(params), los, phase }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
