//! Brute-force estimates of every expectation in the SINR and of the NMSE.
//!
//! Each realization draws the channels, the block's phase noise and the pilot
//! noise, forms the pilot observation y_k, applies the LMMSE estimator and
//! records q̂_kᴴ q_i, ‖q̂_k‖² and ‖q̂_kᴴ H₂ΦΘ‖². Realizations are grouped
//! into fixed chunks that run in parallel and are merged in chunk order, so
//! every result is bitwise independent of the thread count.
//!
//! Plain means report the sample standard error. Smooth functions of several
//! means (signal power, leakage, SINR, rate and NMSE) report the
//! delete-one-chunk jackknife standard error.

use rayon::prelude::*;

use crate::config::{PathLossSet, ValidatedConfig};
use crate::geometry::{LoSCache, PhaseTerms, PhaseVector};
use crate::rate::{assemble_report, rate_from_sinr, RateReport, SinrComponents};
use crate::sampler::{sample_noise, sample_realization, ChannelRealization, NoiseTag};
use crate::scenario::Scenario;
use crate::stats::ChannelStats;
use crate::C64;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl OracleEstimate {
    /// (mean − value)/std_error; zero when both the error and the difference vanish.
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = self.mean - value;
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }

    /// |mean − value|/|value|.
    pub fn rel_error(&self, value: f64) -> f64 {
        ((self.mean - value) / value).abs()
    }
}

/// Streaming mean and centred second moment, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0.0 {
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n / n;
        self.m2 += other.m2 + delta * delta * self.n * other.n / n;
        self.n = n;
    }

    fn estimate(&self) -> OracleEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { f64::NAN };
        OracleEstimate { mean: self.mean, std_error: (var / self.n).sqrt(), n_samples: self.n as usize }
    }
}

/// Per-user estimates of every SINR ingredient.
#[derive(Debug, Clone, PartialEq)]
pub struct UserEstimate {
    /// |E{q̂_kᴴ q_k}|².
    pub signal: OracleEstimate,
    /// Var{q̂_kᴴ q_k}.
    pub leak: OracleEstimate,
    /// E{|q̂_kᴴ q_i|²} for every i; the entry at i = k is E{|q̂_kᴴ q_k|²}.
    pub interference: Vec<OracleEstimate>,
    /// Σ_{i≠k} E{|q̂_kᴴ q_i|²}.
    pub interference_sum: OracleEstimate,
    /// E{‖q̂_k‖²}.
    pub static_noise: OracleEstimate,
    /// E{‖q̂_kᴴ H₂ΦΘ‖²}.
    pub thermal_noise: OracleEstimate,
    /// σ²E{‖q̂_k‖²} + η²σ_e²E{‖q̂_kᴴ H₂ΦΘ‖²}.
    pub noise: OracleEstimate,
    pub sinr: OracleEstimate,
    pub rate: OracleEstimate,
    /// E{‖q_k − q̂_k‖²}/Tr Cov{q_k}.
    pub nmse: OracleEstimate,
    /// E{q̂_kᴴ (q_k − q̂_k)}, which the orthogonality principle sets to zero.
    pub orthogonality: (OracleEstimate, OracleEstimate),
}

/// Estimates for every user.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSinr {
    pub users: Vec<UserEstimate>,
    pub n_samples: usize,
}

/// The inputs a Monte Carlo run reads.
#[derive(Debug, Clone, Copy)]
pub struct Oracle<'a> {
    pub cfg: &'a ValidatedConfig,
    pub pathloss: &'a PathLossSet,
    pub los: &'a LoSCache,
    pub stats: &'a ChannelStats,
}

/// Pilot observation and true aggregate channel of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotSample {
    /// q_k = ηH₂ΦΘh_k + d_k.
    pub q: Vec<C64>,
    /// y_k = q_k + (η/√(τp))H₂ΦΘv_k + n_k/√(τp).
    pub y: Vec<C64>,
}

/// Work buffers reused across the realizations of one chunk.
struct Workspace {
    g: Vec<C64>,
    q: Vec<Vec<C64>>,
    qhat: Vec<Vec<C64>>,
    y: Vec<C64>,
    t: Vec<C64>,
}

/// Sums over one chunk: jackknife totals and streaming moments.
#[derive(Debug, Clone)]
struct ChunkSums {
    count: f64,
    totals: Vec<f64>,
    moments: Vec<Moments>,
}

/// Offsets into the per-user blocks of [`ChunkSums`].
#[derive(Debug, Clone, Copy)]
struct Layout {
    k: usize,
    m: usize,
}

impl Layout {
    // Totals per user: Re X, Im X, |X|², Σ_{i≠k}|X_ki|², E_s, E_t, ‖q − q̂‖², ‖q‖², then Σq (2M reals).
    const RE_X: usize = 0;
    const IM_X: usize = 1;
    const ABS_X: usize = 2;
    const INTERF: usize = 3;
    const STATIC: usize = 4;
    const THERMAL: usize = 5;
    const ERR: usize = 6;
    const POWER: usize = 7;
    const Q: usize = 8;

    fn total_stride(&self) -> usize {
        Self::Q + 2 * self.m
    }

    fn total(&self, k: usize, slot: usize) -> usize {
        k * self.total_stride() + slot
    }

    fn totals_len(&self) -> usize {
        self.k * self.total_stride()
    }

    // Moments per user: |X_ki|² for every i, Σ_{i≠k}, E_s, E_t, noise, Re and Im of q̂ᴴ(q − q̂).
    fn moment_stride(&self) -> usize {
        self.k + 6
    }

    fn moment(&self, k: usize, slot: usize) -> usize {
        k * self.moment_stride() + slot
    }

    fn moments_len(&self) -> usize {
        self.k * self.moment_stride()
    }
}

fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl<'a> Oracle<'a> {
    pub fn new(
        cfg: &'a ValidatedConfig,
        pathloss: &'a PathLossSet,
        los: &'a LoSCache,
        stats: &'a ChannelStats,
    ) -> Self {
        Self { cfg, pathloss, los, stats }
    }

    pub fn from_scenario(s: &'a Scenario) -> Self {
        Self::new(&s.cfg, &s.pathloss, &s.los, &s.stats)
    }

    fn layout(&self) -> Layout {
        Layout { k: self.cfg.k(), m: self.cfg.m() }
    }

    /// H₂ΦΘ for one realization, row-major M×N.
    fn cascade(&self, real: &ChannelRealization, phase: &PhaseVector, out: &mut [C64]) {
        let n = self.cfg.n();
        let psi: Vec<C64> =
            phase.as_slice().iter().zip(&real.theta_noise).map(|(t, e)| C64::from_polar(1.0, t + e)).collect();
        for (row_out, row) in out.chunks_exact_mut(n).zip(real.h2.chunks_exact(n)) {
            for ((o, h), p) in row_out.iter_mut().zip(row).zip(&psi) {
                *o = h * p;
            }
        }
    }

    fn mat_vec(&self, g: &[C64], x: &[C64], scale: f64, out: &mut [C64]) {
        let n = self.cfg.n();
        for (o, row) in out.iter_mut().zip(g.chunks_exact(n)) {
            *o += scale * row.iter().zip(x).map(|(a, b)| a * b).sum::<C64>();
        }
    }

    /// q_k and y_k of every user for realization `real`.
    pub fn pilot_observations(&self, real: &ChannelRealization, phase: &PhaseVector) -> Vec<PilotSample> {
        let (m, n, k) = (self.cfg.m(), self.cfg.n(), self.cfg.k());
        let mut g = vec![C64::default(); m * n];
        self.cascade(real, phase, &mut g);
        let thermal = sample_noise(self.cfg, &[k, n], real.realization_index, NoiseTag::Thermal);
        let static_ = sample_noise(self.cfg, &[k, m], real.realization_index, NoiseTag::Static);
        (0..k)
            .map(|u| {
                let mut q = real.d[u].clone();
                self.mat_vec(&g, &real.h[u], self.stats.eta, &mut q);
                let y = self.observe(&g, &q, &thermal[u * n..(u + 1) * n], &static_[u * m..(u + 1) * m]);
                PilotSample { q, y }
            })
            .collect()
    }

    fn observe(&self, g: &[C64], q: &[C64], thermal: &[C64], static_: &[C64]) -> Vec<C64> {
        let inv = 1.0 / (self.stats.params.tau as f64 * self.stats.params.p).sqrt();
        let mut y: Vec<C64> = q.iter().zip(static_).map(|(a, b)| a + inv * b).collect();
        self.mat_vec(g, thermal, self.stats.eta * inv, &mut y);
        y
    }

    /// q̂_k = a_k3 a_M(a_Mᴴ y) + a_k4 y + (1 − e_k2)μ_k, with μ_k = E{q_k}.
    pub fn lmmse_estimate(&self, y: &[C64], f_k: C64, k: usize) -> Vec<C64> {
        let mut out = vec![C64::default(); y.len()];
        self.lmmse_into(y, f_k, k, &mut out);
        out
    }

    fn lmmse_into(&self, y: &[C64], f_k: C64, k: usize, out: &mut [C64]) {
        let s = self.stats;
        let a_m = &self.los.a_m;
        let proj = dot_conj(a_m, y);
        let bias = (1.0 - s.e2[k]) * s.mean_scale(k) * f_k;
        for ((o, &yi), &am) in out.iter_mut().zip(y).zip(a_m) {
            *o = s.a3[k] * proj * am + s.a4[k] * yi + bias * am;
        }
    }

    fn run_chunk(&self, phase: &PhaseVector, terms: &PhaseTerms, first: u64, count: u64) -> ChunkSums {
        let (m, n, k) = (self.cfg.m(), self.cfg.n(), self.cfg.k());
        let lay = self.layout();
        let mut sums = ChunkSums {
            count: count as f64,
            totals: vec![0.0; lay.totals_len()],
            moments: vec![Moments::default(); lay.moments_len()],
        };
        let mut ws = Workspace {
            g: vec![C64::default(); m * n],
            q: vec![vec![C64::default(); m]; k],
            qhat: vec![vec![C64::default(); m]; k],
            y: vec![C64::default(); m],
            t: vec![C64::default(); n],
        };
        let p = &self.stats.params;
        let noise_scale = (p.sigma2, self.stats.eta * self.stats.eta * p.sigma_e2);

        for idx in first..first + count {
            let real = sample_realization(self.cfg, self.pathloss, self.los, idx);
            self.cascade(&real, phase, &mut ws.g);
            let thermal = sample_noise(self.cfg, &[k, n], idx, NoiseTag::Thermal);
            let static_ = sample_noise(self.cfg, &[k, m], idx, NoiseTag::Static);
            for u in 0..k {
                ws.q[u].copy_from_slice(&real.d[u]);
                self.mat_vec(&ws.g, &real.h[u], self.stats.eta, &mut ws.q[u]);
            }
            for u in 0..k {
                let y = self.observe(&ws.g, &ws.q[u], &thermal[u * n..(u + 1) * n], &static_[u * m..(u + 1) * m]);
                ws.y.copy_from_slice(&y);
                let mut qhat = std::mem::take(&mut ws.qhat[u]);
                self.lmmse_into(&ws.y, terms.f[u], u, &mut qhat);
                ws.qhat[u] = qhat;
            }
            for u in 0..k {
                let qhat = &ws.qhat[u];
                let x = dot_conj(qhat, &ws.q[u]);
                let mut interf = 0.0;
                for i in 0..k {
                    let xi = dot_conj(qhat, &ws.q[i]).norm_sqr();
                    sums.moments[lay.moment(u, i)].push(xi);
                    if i != u {
                        interf += xi;
                    }
                }
                for (tn, col) in ws.t.iter_mut().zip(0..n) {
                    *tn = (0..m).map(|r| qhat[r].conj() * ws.g[r * n + col]).sum();
                }
                let es: f64 = qhat.iter().map(|z| z.norm_sqr()).sum();
                let et: f64 = ws.t.iter().map(|z| z.norm_sqr()).sum();
                let err: f64 = ws.q[u].iter().zip(qhat).map(|(a, b)| (a - b).norm_sqr()).sum();
                let power: f64 = ws.q[u].iter().map(|z| z.norm_sqr()).sum();
                let ortho: C64 = qhat.iter().zip(&ws.q[u]).map(|(h, q)| h.conj() * (q - h)).sum();

                let tot = &mut sums.totals;
                tot[lay.total(u, Layout::RE_X)] += x.re;
                tot[lay.total(u, Layout::IM_X)] += x.im;
                tot[lay.total(u, Layout::ABS_X)] += x.norm_sqr();
                tot[lay.total(u, Layout::INTERF)] += interf;
                tot[lay.total(u, Layout::STATIC)] += es;
                tot[lay.total(u, Layout::THERMAL)] += et;
                tot[lay.total(u, Layout::ERR)] += err;
                tot[lay.total(u, Layout::POWER)] += power;
                let qbase = lay.total(u, Layout::Q);
                for (j, z) in ws.q[u].iter().enumerate() {
                    tot[qbase + 2 * j] += z.re;
                    tot[qbase + 2 * j + 1] += z.im;
                }

                let mo = &mut sums.moments;
                mo[lay.moment(u, k)].push(interf);
                mo[lay.moment(u, k + 1)].push(es);
                mo[lay.moment(u, k + 2)].push(et);
                mo[lay.moment(u, k + 3)].push(noise_scale.0 * es + noise_scale.1 * et);
                mo[lay.moment(u, k + 4)].push(ortho.re);
                mo[lay.moment(u, k + 5)].push(ortho.im);
            }
        }
        sums
    }

    /// Runs `n_samples` realizations (indices 0..n_samples) and estimates every SINR ingredient.
    ///
    /// The returned report is the empirical SINR built from the estimated means.
    pub fn empirical_sinr(&self, phase: &PhaseVector, n_samples: usize) -> (EmpiricalSinr, RateReport) {
        assert!(n_samples >= 2, "at least two realizations are needed for a standard error");
        let chunks = chunk_bounds(n_samples);
        let terms = PhaseTerms::new(self.los, phase);
        let parts: Vec<ChunkSums> =
            chunks.par_iter().map(|&(first, count)| self.run_chunk(phase, &terms, first, count)).collect();
        self.summarize(&parts, n_samples)
    }

    fn summarize(&self, parts: &[ChunkSums], n_samples: usize) -> (EmpiricalSinr, RateReport) {
        let lay = self.layout();
        let k = lay.k;
        let mut totals = vec![0.0; lay.totals_len()];
        let mut moments = vec![Moments::default(); lay.moments_len()];
        for part in parts {
            for (t, x) in totals.iter_mut().zip(&part.totals) {
                *t += x;
            }
            for (mo, x) in moments.iter_mut().zip(&part.moments) {
                mo.merge(x);
            }
        }
        let n = n_samples as f64;
        let p = &self.stats.params;
        let noise_scale = (p.sigma2, self.stats.eta * self.stats.eta * p.sigma_e2);

        // Nonlinear functionals of the per-user totals.
        let signal = |t: &[f64], n: f64, u: usize| {
            let re = t[lay.total(u, Layout::RE_X)] / n;
            let im = t[lay.total(u, Layout::IM_X)] / n;
            re * re + im * im
        };
        let leak = |t: &[f64], n: f64, u: usize| t[lay.total(u, Layout::ABS_X)] / n - signal(t, n, u);
        let sinr = |t: &[f64], n: f64, u: usize| {
            let noise = noise_scale.0 * t[lay.total(u, Layout::STATIC)] / n
                + noise_scale.1 * t[lay.total(u, Layout::THERMAL)] / n;
            let interf = t[lay.total(u, Layout::INTERF)] / n;
            p.p * signal(t, n, u) / (p.p * leak(t, n, u) + p.p * interf + noise)
        };
        let rate = |t: &[f64], n: f64, u: usize| rate_from_sinr(p.chi, sinr(t, n, u));
        let nmse = |t: &[f64], n: f64, u: usize| {
            let base = lay.total(u, Layout::Q);
            let mean_sq: f64 =
                (0..lay.m).map(|j| (t[base + 2 * j] / n).powi(2) + (t[base + 2 * j + 1] / n).powi(2)).sum();
            (t[lay.total(u, Layout::ERR)] / n) / (t[lay.total(u, Layout::POWER)] / n - mean_sq)
        };

        let jack = |f: &dyn Fn(&[f64], f64, usize) -> f64, u: usize| -> OracleEstimate {
            let full = f(&totals, n, u);
            let g = parts.len() as f64;
            let mut scratch = totals.clone();
            let leave_out: Vec<f64> = parts
                .iter()
                .map(|part| {
                    for ((s, t), x) in scratch.iter_mut().zip(&totals).zip(&part.totals) {
                        *s = t - x;
                    }
                    f(&scratch, n - part.count, u)
                })
                .collect();
            let mean_lo = leave_out.iter().sum::<f64>() / g;
            let var = (g - 1.0) / g * leave_out.iter().map(|x| (x - mean_lo).powi(2)).sum::<f64>();
            OracleEstimate { mean: full, std_error: var.sqrt(), n_samples }
        };

        let users: Vec<UserEstimate> = (0..k)
            .map(|u| UserEstimate {
                signal: jack(&signal, u),
                leak: jack(&leak, u),
                interference: (0..k).map(|i| moments[lay.moment(u, i)].estimate()).collect(),
                interference_sum: moments[lay.moment(u, k)].estimate(),
                static_noise: moments[lay.moment(u, k + 1)].estimate(),
                thermal_noise: moments[lay.moment(u, k + 2)].estimate(),
                noise: moments[lay.moment(u, k + 3)].estimate(),
                sinr: jack(&sinr, u),
                rate: jack(&rate, u),
                nmse: jack(&nmse, u),
                orthogonality: (moments[lay.moment(u, k + 4)].estimate(), moments[lay.moment(u, k + 5)].estimate()),
            })
            .collect();

        let components = users
            .iter()
            .enumerate()
            .map(|(u, e)| SinrComponents {
                signal: e.signal.mean,
                leak: e.leak.mean,
                interference: e
                    .interference
                    .iter()
                    .enumerate()
                    .map(|(i, x)| if i == u { 0.0 } else { x.mean })
                    .collect(),
                noise: e.noise.mean,
                static_noise: e.static_noise.mean,
                thermal_noise: e.thermal_noise.mean,
            })
            .collect();
        let report = assemble_report(p.p, p.chi, components);
        (EmpiricalSinr { users, n_samples }, report)
    }
}

/// Realization ranges of the chunks for a run of `n` realizations.
///
/// The split depends on `n` alone: up to 200 chunks of at least 50
/// realizations, sizes differing by at most one.
pub fn chunk_bounds(n: usize) -> Vec<(u64, u64)> {
    let g = (n / 50).clamp(1, 200);
    let base = n / g;
    let extra = n % g;
    let mut first = 0u64;
    (0..g)
        .map(|j| {
            let count = (base + usize::from(j < extra)) as u64;
            let out = (first, count);
            first += count;
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range() {
        for n in [2, 49, 50, 999, 1000, 12345, 200_000] {
            let c = chunk_bounds(n);
            assert_eq!(c.iter().map(|x| x.1).sum::<u64>(), n as u64);
            assert_eq!(c[0].0, 0);
            for w in c.windows(2) {
                assert_eq!(w[0].0 + w[0].1, w[1].0);
            }
        }
    }

    #[test]
    fn welford_merge_matches_direct() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.3 + 1.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..40].iter().for_each(|&x| a.push(x));
        xs[40..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - whole.mean).abs() < 1e-12);
        assert!((a.m2 - whole.m2).abs() < 1e-9);
    }
}
