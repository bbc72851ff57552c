//! Line-of-sight structure: planar-array responses and phase-dependent scalars.
//!
//! The rank-one RIS–BS LoS matrix `a_M a_Nᴴ` is never formed. Everything the
//! closed forms need reduces to the per-element phasors
//!
//! ```text
//! f_{k,n}(θ) = conj(a_N[n]) · e^{jθ_n} · h̄_k[n] = e^{j(ξ_n^k + θ_n)}
//! ```
//!
//! and their sums f_k = Σ_n f_{k,n} and F_ki = Σ_n f_{k,n} f_{i,n}.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::config::ValidatedConfig;
use crate::error::{Error, Result};
use crate::sampler::{stream, Purpose};
use crate::C64;

/// Uniform square planar array response of `x` elements.
///
/// Entry `i` (zero-based) sits on row `⌊i/√x⌋` and column `i mod √x` of the grid:
///
/// ```text
/// a[i] = exp{ j2π(d/λ)(⌊i/√x⌋ sinθᵉ sinθᵃ + (i mod √x) cosθᵉ) }
/// ```
pub fn array_response(x: usize, theta_a: f64, theta_e: f64, d_over_lambda: f64) -> Result<Vec<C64>> {
    let side = (x as f64).sqrt().round() as usize;
    if x == 0 || side * side != x {
        return Err(Error::NonSquareArray { which: "X", value: x });
    }
    let row_phase = TAU * d_over_lambda * theta_e.sin() * theta_a.sin();
    let col_phase = TAU * d_over_lambda * theta_e.cos();
    Ok((0..x).map(|i| C64::from_polar(1.0, (i / side) as f64 * row_phase + (i % side) as f64 * col_phase)).collect())
}

/// Azimuth and elevation angles of every LoS link.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSet {
    /// Azimuth of arrival at the BS.
    pub phi_r_a: f64,
    /// Elevation of arrival at the BS.
    pub phi_r_e: f64,
    /// Azimuth of departure from the RIS towards the BS.
    pub varphi_t_a: f64,
    /// Elevation of departure from the RIS towards the BS.
    pub varphi_t_e: f64,
    /// Per-user azimuth of arrival at the RIS.
    pub varphi_kr_a: Vec<f64>,
    /// Per-user elevation of arrival at the RIS.
    pub varphi_kr_e: Vec<f64>,
}

/// Draws every LoS angle from the `angles` stream of `seed`.
///
/// Azimuths are uniform on [0, 2π) and elevations uniform on [0, π). The draw
/// order is BS azimuth, BS elevation, RIS departure azimuth and elevation,
/// then user azimuth and elevation for each user in turn.
pub fn generate_angles(seed: u64, k: usize) -> AngleSet {
    let mut rng = stream(seed, Purpose::Angles, &[k], 0);
    let az = |rng: &mut rand_chacha::ChaCha8Rng| rng.random::<f64>() * TAU;
    let phi_r_a = az(&mut rng);
    let phi_r_e = rng.random::<f64>() * PI;
    let varphi_t_a = az(&mut rng);
    let varphi_t_e = rng.random::<f64>() * PI;
    let mut varphi_kr_a = Vec::with_capacity(k);
    let mut varphi_kr_e = Vec::with_capacity(k);
    for _ in 0..k {
        varphi_kr_a.push(az(&mut rng));
        varphi_kr_e.push(rng.random::<f64>() * PI);
    }
    AngleSet { phi_r_a, phi_r_e, varphi_t_a, varphi_t_e, varphi_kr_a, varphi_kr_e }
}

/// RIS phase shifts θ_n, each kept in [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(Vec<f64>);

/// Maps any finite angle into [0, 2π).
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl PhaseVector {
    /// Wraps every entry into [0, 2π).
    pub fn new(theta: Vec<f64>) -> Self {
        Self(theta.into_iter().map(wrap_angle).collect())
    }

    /// All-zero phase shifts.
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// Independent uniform phases.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| rng.random::<f64>() * TAU).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The diagonal of Φ, that is e^{jθ_n}.
    pub fn phasors(&self) -> Vec<C64> {
        self.0.iter().map(|&t| C64::from_polar(1.0, t)).collect()
    }
}

/// Array responses and per-user phase offsets of one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct LoSCache {
    /// BS response towards the RIS.
    pub a_m: Vec<C64>,
    /// RIS response towards the BS.
    pub a_n: Vec<C64>,
    /// RIS responses towards each user.
    pub hbar: Vec<Vec<C64>>,
    /// ξ_n^k = arg h̄_k[n] − arg a_N[n], per user.
    pub xi: Vec<Vec<f64>>,
}

impl LoSCache {
    /// Builds the responses for a configuration and an angle set.
    pub fn new(cfg: &ValidatedConfig, angles: &AngleSet) -> Result<Self> {
        let dl = cfg.raw().d_over_lambda;
        let a_m = array_response(cfg.m(), angles.phi_r_a, angles.phi_r_e, dl)?;
        let a_n = array_response(cfg.n(), angles.varphi_t_a, angles.varphi_t_e, dl)?;
        let hbar = angles
            .varphi_kr_a
            .iter()
            .zip(&angles.varphi_kr_e)
            .take(cfg.k())
            .map(|(&a, &e)| array_response(cfg.n(), a, e, dl))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_vectors(a_m, a_n, hbar))
    }

    /// Builds the cache from explicit unit-modulus vectors.
    pub fn from_vectors(a_m: Vec<C64>, a_n: Vec<C64>, hbar: Vec<Vec<C64>>) -> Self {
        let xi = hbar.iter().map(|h| h.iter().zip(&a_n).map(|(hn, an)| hn.arg() - an.arg()).collect()).collect();
        Self { a_m, a_n, hbar, xi }
    }

    pub fn m(&self) -> usize {
        self.a_m.len()
    }

    pub fn n(&self) -> usize {
        self.a_n.len()
    }

    pub fn k(&self) -> usize {
        self.hbar.len()
    }

    /// Per-element phasors f_{k,n} = e^{j(ξ_n^k + θ_n)}.
    pub fn phasors(&self, phase: &PhaseVector, k: usize) -> Vec<C64> {
        self.xi[k].iter().zip(phase.as_slice()).map(|(&x, &t)| C64::from_polar(1.0, x + t)).collect()
    }

    /// f_k(θ) = Σ_n e^{j(ξ_n^k + θ_n)}.
    pub fn f(&self, phase: &PhaseVector, k: usize) -> C64 {
        self.phasors(phase, k).iter().sum()
    }

    /// F_ki(θ) = Σ_n f_{k,n} f_{i,n}, a plain product without conjugation.
    pub fn f_pair(&self, phase: &PhaseVector, k: usize, i: usize) -> C64 {
        self.phasors(phase, k).iter().zip(self.phasors(phase, i)).map(|(a, b)| a * b).sum()
    }

    /// h̄_kᴴ h̄_i.
    pub fn hbar_inner(&self, k: usize, i: usize) -> C64 {
        self.hbar[k].iter().zip(&self.hbar[i]).map(|(a, b)| a.conj() * b).sum()
    }

    /// a_Nᵀ Φᴴ Φᴴ a_N = Σ_n a_N[n]² e^{−j2θ_n}.
    pub fn double_conjugate_term(&self, phase: &PhaseVector) -> C64 {
        self.a_n.iter().zip(phase.as_slice()).map(|(a, &t)| a * a * C64::from_polar(1.0, -2.0 * t)).sum()
    }

    /// The phase that aligns every phasor of user `k`: θ_n = −ξ_n^k.
    pub fn aligned_phase(&self, k: usize) -> PhaseVector {
        PhaseVector::new(self.xi[k].iter().map(|x| -x).collect())
    }
}

/// Every phase-dependent scalar the closed forms read, evaluated once per phase vector.
#[derive(Debug, Clone)]
pub struct PhaseTerms {
    /// f_{k,n} per user.
    pub phasors: Vec<Vec<C64>>,
    /// f_k per user.
    pub f: Vec<C64>,
    /// a_Nᵀ Φᴴ Φᴴ a_N.
    pub double_conjugate: C64,
}

impl PhaseTerms {
    pub fn new(los: &LoSCache, phase: &PhaseVector) -> Self {
        let phasors: Vec<Vec<C64>> = (0..los.k()).map(|k| los.phasors(phase, k)).collect();
        let f = phasors.iter().map(|p| p.iter().sum()).collect();
        Self { phasors, f, double_conjugate: los.double_conjugate_term(phase) }
    }

    /// F_ki from the cached phasors.
    pub fn f_pair(&self, k: usize, i: usize) -> C64 {
        self.phasors[k].iter().zip(&self.phasors[i]).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;

    #[test]
    fn trivial_responses() {
        assert_eq!(array_response(1, 0.3, 1.1, 0.5).unwrap(), vec![C64::new(1.0, 0.0)]);
        let a = array_response(4, 0.0, PI / 2.0, 0.5).unwrap();
        for z in a {
            assert!((z - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
        assert!(array_response(5, 0.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn aligned_phase_reaches_n() {
        let cfg = SystemConfig::default().validate().unwrap();
        let los = LoSCache::new(&cfg, &generate_angles(3, cfg.k())).unwrap();
        for k in 0..cfg.k() {
            let f = los.f(&los.aligned_phase(k), k);
            assert!((f - C64::new(cfg.n() as f64, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn angles_in_range() {
        let a = generate_angles(0, 8);
        let az = [a.phi_r_a, a.varphi_t_a].into_iter().chain(a.varphi_kr_a.iter().copied());
        let el = [a.phi_r_e, a.varphi_t_e].into_iter().chain(a.varphi_kr_e.iter().copied());
        assert_eq!(az.clone().count() + el.clone().count(), 20);
        assert!(az.into_iter().all(|x| (0.0..TAU).contains(&x)));
        assert!(el.into_iter().all(|x| (0.0..PI).contains(&x)));
        assert_eq!(a, generate_angles(0, 8));
        assert_ne!(a, generate_angles(1, 8));
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(TAU), 0.0);
        assert_eq!(wrap_angle(-1e-300), 0.0);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
    }
}
