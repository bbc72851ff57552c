//! Counter-based random streams and the channel/noise samplers built on them.
//!
//! Every draw is addressed by `(seed, purpose, shape, index)`. The first three
//! select a ChaCha8 key and the realization index selects the ChaCha stream,
//! so realization `i` is the same whichever thread draws it and in whatever
//! order. Purposes are named so that a new consumer can never silently share
//! a stream with an existing one.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::{PathLossSet, ValidatedConfig};
use crate::geometry::LoSCache;
use crate::C64;

/// The named consumers of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// LoS angle generation.
    Angles,
    /// Small-scale fading of every link.
    Channel,
    /// RIS phase-noise draws.
    PhaseNoise,
    /// RIS thermal noise on the pilot.
    Thermal,
    /// BS static noise on the pilot.
    Static,
    /// Random phase-shift baselines.
    Phases,
    /// Genetic-algorithm operators.
    Genetic,
    /// Free-form draws for configuration generators in tests and experiments.
    Experiment,
}

impl Purpose {
    /// Stable name hashed into the stream key.
    pub fn label(self) -> &'static str {
        match self {
            Purpose::Angles => "angles",
            Purpose::Channel => "channel",
            Purpose::PhaseNoise => "phase-noise",
            Purpose::Thermal => "thermal",
            Purpose::Static => "static",
            Purpose::Phases => "phases",
            Purpose::Genetic => "genetic",
            Purpose::Experiment => "experiment",
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

/// The generator for one `(seed, purpose, shape, index)` address.
pub fn stream(seed: u64, purpose: Purpose, shape: &[usize], index: u64) -> ChaCha8Rng {
    let mut state = seed ^ fnv1a(purpose.label().as_bytes());
    for &dim in shape {
        state = splitmix64(&mut state) ^ dim as u64;
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// One circularly-symmetric complex Gaussian draw with the given variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

/// Fills a vector with unit-variance complex Gaussians.
pub fn complex_normals<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(FRAC_1_SQRT_2 * re, FRAC_1_SQRT_2 * im)
        })
        .collect()
}

/// Concentration above which a wrapped normal replaces the rejection sampler.
const NORMAL_LIMIT: f64 = 1e10;

/// One Von Mises(0, κ) draw on [−π, π).
///
/// Uses the Best–Fisher wrapped-Cauchy envelope. κ = 0 gives the uniform
/// distribution, κ = ∞ the point mass at zero, and beyond 1e10 the normal
/// approximation N(0, 1/κ) is used, whose error is O(κ⁻²).
pub fn von_mises<R: Rng + ?Sized>(rng: &mut R, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return rng.random::<f64>() * TAU - PI;
    }
    if kappa.is_infinite() {
        return 0.0;
    }
    if kappa > NORMAL_LIMIT {
        let z: f64 = rng.sample(StandardNormal);
        return z / kappa.sqrt();
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let u3: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let theta = f.clamp(-1.0, 1.0).acos();
            return if u3 > 0.5 { theta } else { -theta };
        }
    }
}

/// `n` independent Von Mises(0, v) draws.
pub fn sample_von_mises<R: Rng + ?Sized>(v: f64, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| von_mises(rng, v)).collect()
}

/// One coherence block of small-scale fading.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// RIS–BS channel, row-major M×N.
    pub h2: Vec<C64>,
    /// User–RIS channels, one length-N vector per user.
    pub h: Vec<Vec<C64>>,
    /// Direct user–BS channels, one length-M vector per user.
    pub d: Vec<Vec<C64>>,
    /// Phase-noise draws θ̃_n.
    pub theta_noise: Vec<f64>,
    /// Position in the Monte Carlo stream.
    pub realization_index: u64,
}

impl ChannelRealization {
    /// Row `m` of H_2.
    pub fn h2_row(&self, m: usize, n: usize) -> &[C64] {
        &self.h2[m * n..(m + 1) * n]
    }
}

/// Draws realization `idx` of every channel and the block's phase noise.
///
/// Rician links mix the cached LoS vectors with unit-variance NLoS entries;
/// the direct links are Rayleigh.
pub fn sample_realization(
    cfg: &ValidatedConfig,
    pathloss: &PathLossSet,
    los: &LoSCache,
    idx: u64,
) -> ChannelRealization {
    let (m, n, k) = (cfg.m(), cfg.n(), cfg.k());
    let delta = cfg.delta();
    let mut rng = stream(cfg.seed(), Purpose::Channel, &[m, n, k], idx);

    let scale = (pathloss.beta / (delta + 1.0)).sqrt();
    let los_w = delta.sqrt();
    let mut h2 = complex_normals(&mut rng, m * n);
    for (row, am) in h2.chunks_exact_mut(n).zip(&los.a_m) {
        for (x, an) in row.iter_mut().zip(&los.a_n) {
            *x = scale * (los_w * am * an.conj() + *x);
        }
    }

    let mut h = Vec::with_capacity(k);
    let mut d = Vec::with_capacity(k);
    for user in 0..k {
        let eps = cfg.epsilon[user];
        let s = (pathloss.alpha[user] / (eps + 1.0)).sqrt();
        let e = eps.sqrt();
        let hk: Vec<C64> =
            complex_normals(&mut rng, n).into_iter().zip(&los.hbar[user]).map(|(z, hb)| s * (e * hb + z)).collect();
        h.push(hk);
        let g = pathloss.gamma[user].sqrt();
        d.push(complex_normals(&mut rng, m).into_iter().map(|z| g * z).collect());
    }

    let mut pn = stream(cfg.seed(), Purpose::PhaseNoise, &[n], idx);
    let theta_noise = sample_von_mises(cfg.phase_noise_concentration(), n, &mut pn);

    ChannelRealization { h2, h, d, theta_noise, realization_index: idx }
}

/// Which pilot noise a draw represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseTag {
    /// RIS thermal noise, variance σ_e².
    Thermal,
    /// BS static noise, variance σ².
    Static,
}

/// Complex Gaussian noise of `shape` for realization `idx`, row-major.
pub fn sample_noise(cfg: &ValidatedConfig, shape: &[usize], idx: u64, tag: NoiseTag) -> Vec<C64> {
    let (purpose, variance) = match tag {
        NoiseTag::Thermal => (Purpose::Thermal, cfg.effective_sigma_e2()),
        NoiseTag::Static => (Purpose::Static, cfg.sigma2),
    };
    let mut rng = stream(cfg.seed(), purpose, shape, idx);
    let len = shape.iter().product();
    let s = variance.sqrt();
    complex_normals(&mut rng, len).into_iter().map(|z| s * z).collect()
}
