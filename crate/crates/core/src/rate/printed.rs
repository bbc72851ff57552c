//! Reference transcription of the closed forms, kept for comparison.
//!
//! These agree with [`Formulation::Exact`](crate::Formulation::Exact) except
//! in three places, each quantified against the Monte Carlo oracle:
//!
//! * [`desired_signal`] squares the bracket in the |f_k|² cross term, so it
//!   is not the square of E_s.
//! * [`thermal_noise`] omits the ϖ share of the M²e_k1² summand; the exact
//!   summand is M²Δe_k1²(c_k(ε_k+1) + ϖ/Δ).
//! * [`leakage`] deviates from the oracle by roughly 1 to 6 percent whenever
//!   δ > 0, and its |a_Nᵀ Φᴴ Φᴴ a_N|² summand makes it depend on Φ even for
//!   ε_k = 0, which a circularly symmetric user–RIS channel rules out. The
//!   `pseudo_term` switch removes that summand.

use super::{thermal_noise_with, User};
use crate::geometry::PhaseTerms;
use crate::stats::ChannelStats;

/// E_signal with the squared bracket in the cross term.
pub fn desired_signal(stats: &ChannelStats, terms: &PhaseTerms, k: usize) -> f64 {
    let u = User::new(stats, k);
    let a = u.kernel_bracket();
    let b = u.kernel_los(terms.f[k].norm_sqr());
    u.m * u.m * a * a + u.m * u.m / (u.n * u.n) * b * b + 2.0 * u.m * u.m / u.n * b * a * a
}

/// E_t without the ϖ share of the M²e_k1² summand.
pub fn thermal_noise(stats: &ChannelStats, terms: &PhaseTerms, k: usize) -> f64 {
    thermal_noise_with(stats, terms, k, false)
}

/// Leakage as transcribed, with the unbalanced group read inside the order-M bracket.
pub fn leakage(stats: &ChannelStats, terms: &PhaseTerms, k: usize, pseudo_term: bool) -> f64 {
    let u = User::new(stats, k);
    let (m, n, big, c, d, e, r, l) = (u.m, u.n, u.big, u.c, u.d, u.eps, u.rho, u.l);
    let (w, wd, sn, g, e1, e2, e3) = (u.w, u.wd, u.sn, u.g, u.e1, u.e2, u.e3);
    let f = terms.f[k];
    let f2 = f.norm_sqr();
    let big_f = terms.f_pair(k, k);
    let aa2 = if pseudo_term { terms.double_conjugate.norm_sqr() } else { 0.0 };
    let (r2, m2, n2, big2) = (r * r, m * m, n * n, big * big);
    let spread = e * (1.0 - r2) + 1.0;

    let mut t = m2 * big2 * (c * d * d * e2 * e2 * spread * (c * spread + wd) + 2.0 * c * c * d * e1 * e2 * (e2 - 1.0));
    t += 2.0 * m / n2 * f2 * big2 * r2 * c * c * d * e * e2 * (1.0 + e2);
    t += m2 / n
        * big2
        * c
        * (e1 * (e * (2.0 * c + wd) * (2.0 * d * e2 * (1.0 - r2) + e1) + e1 * (c + wd) + 2.0 * d * e2 * (c * e2 + wd))
            + c * d * d * e2 * e2 * (e * e * (4.0 * l * r2 + 4.0 * r2 - l * l - 6.0 * r2 * r2 - 1.0) - l * l));
    let order_m_group = w * d * e2 * e2 * (big * c * (2.0 * e + 2.0 - e * r2) + g) + g * e3 * (sn + g + w);
    t += 2.0 * m2 / n2
        * f2
        * big2
        * c
        * d
        * e
        * r2
        * (c * (1.0 + e2) * (d * e * (2.0 * r2 - 1.0 - l) * e2 + e1) + wd * e1 * e2);
    t += m2 / n2
        * big2
        * c
        * c
        * d
        * d
        * e
        * e
        * e2
        * (l - r2)
        * (big_f.norm_sqr() * e2 * (l - r2) + 2.0 * (f * f * big_f.conj()).re * r2);
    t += m2 / n2 * big2 * c * c * d * d * e2 * e2 * l * l * aa2;
    t += m / n * f2 * big * c * d * e * r2 * (big * c * (e + 1.0) * (e2 + 1.0) + g + (w + sn + g) * e2 * e2);
    t += m / n * big2 * c * c * ((2.0 * e + 1.0) * (2.0 * d * e2 * e2 + e3) - 4.0 * d * e * r2 * e2 * e2);
    t += m
        * (big * c * (big * c * (e + 1.0) + 2.0 * g + sn) * ((d * e2 * e2 + e3) * (e + 1.0) - d * e * r2 * e2 * e2)
            + big * c * (e + 1.0) * (big * c * d * e2 * e2 * spread + w * e3)
            + order_m_group);
    t += m2 / n
        * f2
        * big2
        * c
        * d
        * d
        * e
        * r2
        * (c * ((e2 * e2 - 1.0).powi(2) + 2.0 * e1 + e * (1.0 - r2) * (e2 * e2 + 1.0)) + wd * e2 * e2);
    t
}
