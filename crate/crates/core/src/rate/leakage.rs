//! Signal leakage Var{q̂_kᴴ q_k}.
//!
//! The second moment E{|q̂_kᴴ q_k|²} is expanded over the independent
//! Gaussian parts of the channels and the pilot noise. What remains are
//! expectations over the phase noise of the cascaded LoS sum
//! Y = Σ_n f_{k,n} ω_n, up to fourth order, which
//! [`phase_moment`](crate::moments::phase_moment) evaluates exactly.

use super::static_noise_kernel;
use crate::geometry::PhaseTerms;
use crate::moments::{phase_moment, Factor};
use crate::stats::ChannelStats;

/// Leakage of user `k` from the full second-moment expansion.
pub fn leakage_exact(stats: &ChannelStats, terms: &PhaseTerms, k: usize) -> f64 {
    let p = &stats.params;
    let (m, n) = (stats.m(), stats.n());
    let tp = p.tau as f64 * p.p;
    // Per-entry NLoS variance of h_k, effective cascade gain and pilot-noise variances.
    let s2 = p.alpha[k] / (p.epsilon[k] + 1.0);
    let g_casc = p.big_delta / n * p.beta / (p.delta + 1.0);
    let su2 = p.sigma_e2 / tp;
    let sn2 = p.sigma2 / tp;
    let (e1, e2, e3) = (stats.e1[k], stats.e2[k], stats.e3[k]);
    let d = p.delta;
    let rho = p.phase_noise.rho;
    let ek = p.epsilon[k];
    let g = p.gamma[k];

    let v = s2 + su2;
    let big_v = n * s2;
    let zbar = s2 * ek * n;
    let a = (s2 * ek).sqrt();
    let fk = terms.f[k];
    let mk = a * rho * fk;
    let kap = (1.0 - e2) * mk;

    let pk = &terms.phasors[k][..];
    let pn = &p.phase_noise;
    let ey = rho * fk;
    let ey2 = phase_moment(pn, &[Factor::plain(pk), Factor::conj(pk)]).re;
    let ey_y2 = phase_moment(pn, &[Factor::plain(pk), Factor::plain(pk), Factor::conj(pk)]);
    let ey4 = phase_moment(pn, &[Factor::plain(pk), Factor::conj(pk), Factor::plain(pk), Factor::conj(pk)]).re;

    let mu2 = a * a * ey2;
    let mu4 = a.powi(4) * ey4;
    let rkmu = (kap.conj() * a * ey).re;
    let rkmu3 = (kap.conj() * a.powi(3) * ey_y2).re;
    let kap2 = kap.norm_sqr();

    let ez2 = zbar + n * s2;
    let ew2 = zbar + n * v;
    let ez4 = (zbar + n * s2).powi(2) + n * s2 * s2 + 2.0 * s2 * zbar;
    let ew2z2 = ez4 + n * su2 * ez2;
    let et2 = mu2 + big_v;
    let et2z2 = et2 * ez2 + s2 * s2 * n + 2.0 * s2 * mu2;
    let et2w2 = et2z2 + n * su2 * et2;
    let es2z2 = e2 * e2 * et2z2 + 2.0 * e2 * rkmu * (zbar + (n + 1.0) * s2) + kap2 * ez2 + e2 * e2 * n * su2 * ez2;
    let es2t2 = e2 * e2 * (mu4 + 4.0 * mu2 * big_v + 2.0 * big_v * big_v)
        + 2.0 * e2 * (rkmu3 + 2.0 * big_v * rkmu)
        + kap2 * et2
        + e2 * e2 * n * su2 * et2;
    let ewz2 = ez4 + su2 * ez2;
    let re_h = e2 * et2z2 + rkmu * (zbar + (n + 1.0) * s2) + e2 * su2 * et2;
    let re_i = e2 * et2 + rkmu;
    let es2 = e2 * e2 * et2 + 2.0 * e2 * rkmu + kap2 + e2 * e2 * n * su2;
    let gr = g + sn2;
    let gc = g_casc;

    let second = gc * gc * m * m * (d * d * es2t2 + e1 * e1 * ewz2 + 2.0 * d * e1 * re_h)
        + 2.0 * gc * m * m * e1 * g * (d * re_i + e1 * ez2)
        + m * m * e1 * e1 * g * g
        + gc * m * d * (gc * es2z2 + g * es2)
        + e2 * e2 * gc * m * d * (gc * et2w2 + gr * et2)
        + m * e3 * (gc * gc * ew2z2 + gc * gr * ez2 + gc * g * ew2 + g * gr);
    let mean = static_noise_kernel(stats, terms, k);
    second - mean * mean
}
