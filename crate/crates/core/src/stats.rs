//! Closed-form second-order statistics.
//!
//! [`ModelParams`] is the scalar description every closed form reads. It can
//! be derived from a validated configuration ([`ModelParams::from_config`]) or
//! assembled by hand, which is how the property tests explore random
//! parameter sets. [`ChannelStats`] then holds every per-user coefficient of
//! the pilot observation model and the LMMSE estimator.

use crate::config::{Mode, PathLossSet, ValidatedConfig};
use crate::error::{Error, Result};

/// Boundary between the power series and the asymptotic expansion.
const SERIES_LIMIT: f64 = 20.0;

/// e^{−x} I_ν(x), the exponentially scaled modified Bessel function of the first kind.
///
/// A power series is summed for x ≤ 20 and the large-argument expansion
/// above; both reach about 1e−15 relative accuracy over their range.
pub fn bessel_i_scaled(nu: u32, x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_i_scaled needs a nonnegative argument");
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        let half = x / 2.0;
        let mut term = (1..=nu).fold(1.0, |t, j| t * half / j as f64);
        let mut sum = term;
        let q = half * half;
        for m in 1.. {
            term *= q / (m as f64 * (m + nu) as f64);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        let mu = 4.0 * (nu as f64).powi(2);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let odd = (2 * k - 1) as f64;
            let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

/// I_ν(x). Overflows to infinity beyond x ≈ 700; use [`bessel_i_scaled`] for ratios.
pub fn bessel_i(nu: u32, x: f64) -> f64 {
    bessel_i_scaled(nu, x) * x.exp()
}

/// Circular moments of the Von Mises phase noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseNoiseChar {
    /// Concentration v.
    pub v: f64,
    /// ρ = E{e^{jθ̃}} = I₁(v)/I₀(v).
    pub rho: f64,
    /// l = E{e^{j2θ̃}} = I₂(v)/I₀(v).
    pub l: f64,
    /// E{e^{j3θ̃}} = I₃(v)/I₀(v).
    pub m3: f64,
    /// E{e^{j4θ̃}} = I₄(v)/I₀(v).
    pub m4: f64,
}

impl PhaseNoiseChar {
    /// Ideal phases: every circular moment is one.
    pub fn ideal() -> Self {
        Self { v: f64::INFINITY, rho: 1.0, l: 1.0, m3: 1.0, m4: 1.0 }
    }

    /// E{e^{jdθ̃}} for |d| ≤ 4; the distribution is symmetric so the sign of d is irrelevant.
    pub fn moment(&self, d: i32) -> f64 {
        match d.unsigned_abs() {
            0 => 1.0,
            1 => self.rho,
            2 => self.l,
            3 => self.m3,
            4 => self.m4,
            other => panic!("circular moment of order {other} is not tabulated"),
        }
    }
}

/// Circular moments for concentration `v` (`inf` for ideal phases).
pub fn phase_noise_char(v: f64) -> PhaseNoiseChar {
    assert!(v >= 0.0, "Von Mises concentration must be nonnegative");
    if v.is_infinite() {
        return PhaseNoiseChar::ideal();
    }
    let i0 = bessel_i_scaled(0, v);
    let ratio = |nu| bessel_i_scaled(nu, v) / i0;
    PhaseNoiseChar { v, rho: ratio(1), l: ratio(2), m3: ratio(3), m4: ratio(4) }
}

/// How the total power is shared between users and the RIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    /// Per-user transmit power, W.
    pub p: f64,
    /// RIS amplification power, W.
    pub p_a: f64,
    /// RIS circuit power, W.
    pub p_cir: f64,
    /// Total budget, W.
    pub p_total: f64,
}

/// Equal split of the budget left after the RIS circuits.
///
/// An active RIS gives half of the remainder to the users and half to the
/// amplifier input (of which the efficiency ξ reaches the output). A passive
/// RIS only draws switch power; without a RIS every watt goes to the users.
pub fn power_split(cfg: &ValidatedConfig) -> Result<PowerBudget> {
    let raw = cfg.raw();
    split_budget(cfg.mode(), cfg.p_total, raw.n, raw.k, cfg.p_sc, cfg.p_dc, raw.xi)
}

/// [`power_split`] on explicit wattages.
pub fn split_budget(
    mode: Mode,
    p_total: f64,
    n: usize,
    k: usize,
    p_sc: f64,
    p_dc: f64,
    xi: f64,
) -> Result<PowerBudget> {
    let (n, k) = (n as f64, k as f64);
    let infeasible = |p_cir: f64| Error::InfeasiblePower { budget_w: p_total, circuit_w: p_cir };
    match mode {
        Mode::ActiveRis => {
            let p_cir = n * (p_sc + p_dc);
            if p_total <= p_cir {
                return Err(infeasible(p_cir));
            }
            let users = (p_total - p_cir) / 2.0;
            Ok(PowerBudget { p: users / k, p_a: xi * users, p_cir, p_total })
        }
        Mode::PassiveRis => {
            let p_cir = n * p_sc;
            if p_total <= p_cir {
                return Err(infeasible(p_cir));
            }
            Ok(PowerBudget { p: (p_total - p_cir) / k, p_a: 0.0, p_cir, p_total })
        }
        Mode::NoRis => Ok(PowerBudget { p: p_total / k, p_a: 0.0, p_cir: 0.0, p_total }),
    }
}

/// Scalar inputs of every closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// BS antennas.
    pub m: usize,
    /// RIS elements.
    pub n: usize,
    /// RIS–BS Rician factor δ.
    pub delta: f64,
    /// User–RIS Rician factors ε_k.
    pub epsilon: Vec<f64>,
    /// User–RIS gains α_k.
    pub alpha: Vec<f64>,
    /// RIS–BS gain β.
    pub beta: f64,
    /// Direct-link gains γ_k.
    pub gamma: Vec<f64>,
    /// Static noise power σ², W.
    pub sigma2: f64,
    /// RIS thermal noise power σ_e², W.
    pub sigma_e2: f64,
    /// Pilot length τ.
    pub tau: usize,
    /// Per-user power p, W.
    pub p: f64,
    /// Amplification factor Δ = Nη².
    pub big_delta: f64,
    /// Phase-noise moments.
    pub phase_noise: PhaseNoiseChar,
    /// Pre-log factor χ.
    pub chi: f64,
}

impl ModelParams {
    /// Derives the model parameters of a configuration under a power budget.
    ///
    /// Δ = P_A/(Σ_k pα_k + σ_e²) for an active RIS, so that the amplified
    /// output power η²N(Σ_k pα_k + σ_e²) equals P_A. A passive RIS has η = 1
    /// (Δ = N), and without a RIS Δ = 0 switches every reflected path off.
    pub fn from_config(cfg: &ValidatedConfig, pathloss: &PathLossSet, budget: &PowerBudget) -> Self {
        let sigma_e2 = cfg.effective_sigma_e2();
        let big_delta = match cfg.mode() {
            Mode::ActiveRis => {
                let load: f64 = pathloss.alpha.iter().map(|a| budget.p * a).sum::<f64>() + sigma_e2;
                budget.p_a / load
            }
            Mode::PassiveRis => cfg.n() as f64,
            Mode::NoRis => 0.0,
        };
        Self {
            m: cfg.m(),
            n: cfg.n(),
            delta: cfg.delta(),
            epsilon: cfg.epsilon.clone(),
            alpha: pathloss.alpha.clone(),
            beta: pathloss.beta,
            gamma: pathloss.gamma.clone(),
            sigma2: cfg.sigma2,
            sigma_e2,
            tau: cfg.raw().tau,
            p: budget.p,
            big_delta,
            phase_noise: phase_noise_char(cfg.phase_noise_concentration()),
            chi: cfg.chi(),
        }
    }

    pub fn k(&self) -> usize {
        self.epsilon.len()
    }
}

/// Per-user coefficients of the observation model and the LMMSE estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    /// The inputs these were computed from.
    pub params: ModelParams,
    /// RIS amplitude gain η = √(Δ/N).
    pub eta: f64,
    /// ϖ = Δβσ_e²/(τp(δ+1)).
    pub varpi: f64,
    /// ϖ/Δ, computed directly so that it stays finite when Δ = 0.
    pub varpi_over_delta: f64,
    /// σ²/(τp).
    pub pilot_noise: f64,
    /// c_k = βα_k/((δ+1)(ε_k+1)).
    pub c: Vec<f64>,
    /// Rank-one weight of Cov{q_k, q_k}.
    pub a1: Vec<f64>,
    /// Identity weight of Cov{q_k, q_k}.
    pub a2: Vec<f64>,
    /// Rank-one weight of the LMMSE matrix A_k.
    pub a3: Vec<f64>,
    /// Identity weight of A_k.
    pub a4: Vec<f64>,
    /// Rank-one weight of the MSE matrix.
    pub a5: Vec<f64>,
    /// Identity weight of the MSE matrix.
    pub a6: Vec<f64>,
    /// Rank-one weight of Cov{y_k, y_k}.
    pub m_k: Vec<f64>,
    /// Identity weight of Cov{y_k, y_k}.
    pub n_k: Vec<f64>,
    /// a_k3 + a_k4.
    pub e1: Vec<f64>,
    /// M a_k3 + a_k4.
    pub e2: Vec<f64>,
    /// M a_k3² + 2 a_k3 a_k4 + a_k4².
    pub e3: Vec<f64>,
}

/// Computes every coefficient of a configuration under a power budget.
pub fn compute_stats(cfg: &ValidatedConfig, pathloss: &PathLossSet, budget: &PowerBudget) -> ChannelStats {
    ChannelStats::new(ModelParams::from_config(cfg, pathloss, budget))
}

impl ChannelStats {
    pub fn new(params: ModelParams) -> Self {
        let k = params.k();
        let m = params.m as f64;
        let d = params.delta;
        let rho2 = params.phase_noise.rho.powi(2);
        let tp = params.tau as f64 * params.p;
        let big = params.big_delta;
        let varpi_over_delta = params.beta * params.sigma_e2 / (tp * (d + 1.0));
        let varpi = big * varpi_over_delta;
        let sn = params.sigma2 / tp;
        let s = sn + varpi;

        let mut out = Self {
            eta: (big / params.n as f64).sqrt(),
            varpi,
            varpi_over_delta,
            pilot_noise: sn,
            c: Vec::with_capacity(k),
            a1: Vec::with_capacity(k),
            a2: Vec::with_capacity(k),
            a3: Vec::with_capacity(k),
            a4: Vec::with_capacity(k),
            a5: Vec::with_capacity(k),
            a6: Vec::with_capacity(k),
            m_k: Vec::with_capacity(k),
            n_k: Vec::with_capacity(k),
            e1: Vec::with_capacity(k),
            e2: Vec::with_capacity(k),
            e3: Vec::with_capacity(k),
            params,
        };
        for u in 0..k {
            let eps = out.params.epsilon[u];
            let c = out.params.beta * out.params.alpha[u] / ((d + 1.0) * (eps + 1.0));
            let a1 = big * c * d * (eps * (1.0 - rho2) + 1.0);
            let a2 = big * c * (eps + 1.0) + out.params.gamma[u];
            let mk = a1 + varpi * d;
            let nk = a2 + s;
            let big_den = nk + m * mk;
            let a3 = (s * a1 - varpi * d * a2) / (nk * big_den);
            let a4 = a2 / nk;
            let a5 = (a1 * s * s + m * a1 * varpi * d * nk + varpi * d * a2 * a2) / (nk * big_den);
            let a6 = a2 * s / nk;
            out.c.push(c);
            out.a1.push(a1);
            out.a2.push(a2);
            out.a3.push(a3);
            out.a4.push(a4);
            out.a5.push(a5);
            out.a6.push(a6);
            out.m_k.push(mk);
            out.n_k.push(nk);
            out.e1.push(a3 + a4);
            out.e2.push(m * a3 + a4);
            out.e3.push(m * a3 * a3 + 2.0 * a3 * a4 + a4 * a4);
        }
        out
    }

    pub fn k(&self) -> usize {
        self.params.k()
    }

    pub fn m(&self) -> f64 {
        self.params.m as f64
    }

    pub fn n(&self) -> f64 {
        self.params.n as f64
    }

    /// Scale of the LMMSE bias term: the mean of q_k is `mean_scale(k)·f_k·a_M`.
    pub fn mean_scale(&self, k: usize) -> f64 {
        self.eta * self.params.phase_noise.rho * (self.c[k] * self.params.delta * self.params.epsilon[k]).sqrt()
    }
}

/// NMSE of every user, in the form written over the observation coefficients.
pub fn nmse_closed_form(stats: &ChannelStats) -> Vec<f64> {
    let m = stats.m();
    let d = stats.params.delta;
    let w = stats.varpi;
    let s = stats.pilot_noise + w;
    (0..stats.k())
        .map(|u| {
            let (a1, a2, nk) = (stats.a1[u], stats.a2[u], stats.n_k[u]);
            let num = (s + m * w * d) * s * (a1 + a2) + (w * d + s) * (a2 * a2 + m * a1 * a2);
            let den = nk * (nk + m * (a1 + w * d)) * (a1 + a2);
            num / den
        })
        .collect()
}

/// NMSE of every user as (a_k5 + a_k6)/(a_k1 + a_k2), the trace ratio of the MSE and covariance matrices.
pub fn nmse_from_mse(stats: &ChannelStats) -> Vec<f64> {
    (0..stats.k()).map(|u| (stats.a5[u] + stats.a6[u]) / (stats.a1[u] + stats.a2[u])).collect()
}

/// NMSE when the RIS–BS link has no LoS component (δ = 0).
///
/// Returns `None` for δ > 0, where the simplification does not apply.
pub fn nmse_rayleigh_ris(stats: &ChannelStats) -> Option<Vec<f64>> {
    let p = &stats.params;
    if p.delta != 0.0 {
        return None;
    }
    let tp = p.tau as f64 * p.p;
    let thermal = p.big_delta * p.sigma_e2 * p.beta / tp;
    let static_ = p.sigma2 / tp;
    Some(
        (0..stats.k())
            .map(|u| (static_ + thermal) / (p.big_delta * p.beta * p.alpha[u] + p.gamma[u] + static_ + thermal))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;

    #[test]
    fn bessel_oracle_values() {
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(bessel_i(0, 2.0), 2.279_585_302_336_067) < 1e-14);
        assert!(rel(bessel_i(1, 2.0), 1.590_636_854_637_329) < 1e-14);
        assert!(rel(bessel_i(2, 2.0), 0.688_948_447_698_738_2) < 1e-14);
    }

    #[test]
    fn bessel_branches_meet() {
        for nu in 0..5 {
            let below = bessel_i_scaled(nu, SERIES_LIMIT);
            let above = bessel_i_scaled(nu, SERIES_LIMIT * (1.0 + 1e-12));
            assert!(((below - above) / below).abs() < 1e-11, "nu={nu}: {below} vs {above}");
        }
    }

    #[test]
    fn phase_noise_limits() {
        let z = phase_noise_char(0.0);
        assert_eq!((z.rho, z.l), (0.0, 0.0));
        let big = phase_noise_char(1e9);
        assert!(1.0 - big.rho < 1e-6 && 1.0 - big.l < 1e-6);
        let two = phase_noise_char(2.0);
        assert!((two.rho - 1.590_636_854_637_329 / 2.279_585_302_336_067).abs() < 1e-14);
    }

    #[test]
    fn default_split() {
        let cfg = SystemConfig::default().validate().unwrap();
        let b = power_split(&cfg).unwrap();
        let p_cir = 16.0 * (1e-4 + 10f64.powf(-3.5));
        assert!((b.p_cir - p_cir).abs() < 1e-15);
        assert!((8.0 * b.p - (0.1 - p_cir) / 2.0).abs() < 1e-15);
        assert!((b.p_a - 0.8 * (0.1 - p_cir) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_budget_is_infeasible() {
        let (p_sc, p_dc) = (1e-4, 10f64.powf(-3.5));
        let p_cir = 16.0 * (p_sc + p_dc);
        let r = split_budget(Mode::ActiveRis, p_cir, 16, 8, p_sc, p_dc, 0.8);
        assert!(matches!(r, Err(Error::InfeasiblePower { .. })));
        assert!(split_budget(Mode::ActiveRis, p_cir * 1.01, 16, 8, p_sc, p_dc, 0.8).is_ok());
    }
}
