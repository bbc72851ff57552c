//! Properties that must hold for every admissible input.

mod common;

use std::f64::consts::TAU;

use common::{random_system, rel_diff, Links};
use proptest::prelude::*;
use ris_mimo::geometry::PhaseTerms;
use ris_mimo::rate::{desired_signal, rate_from_sinr, static_noise_kernel};
use ris_mimo::stats::{nmse_closed_form, nmse_from_mse, nmse_rayleigh_ris, phase_noise_char, split_budget};
use ris_mimo::{
    array_response, dbm_to_watts, derive_pathloss, watts_to_dbm, ChannelStats, Formulation, Mode, ModelParams,
    PhaseVector, RateModel, Scenario, SystemConfig,
};

fn model(sys: &common::System, formulation: Formulation) -> RateModel {
    RateModel::new(sys.stats.clone(), sys.los.clone(), formulation, true)
}

fn with_params(params: &ModelParams, edit: impl FnOnce(&mut ModelParams)) -> ChannelStats {
    let mut p = params.clone();
    edit(&mut p);
    ChannelStats::new(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn signal_is_square_of_static_kernel(seed in any::<u64>()) {
        let sys = random_system(seed, Links::Any);
        let terms = PhaseTerms::new(&sys.los, &sys.phase);
        for k in 0..sys.stats.k() {
            let es = static_noise_kernel(&sys.stats, &terms, k);
            let signal = desired_signal(&sys.stats, &terms, k);
            prop_assert!(rel_diff(signal, es * es) < 1e-12, "user {k}: {signal} vs {}", es * es);
        }
    }

    #[test]
    fn rayleigh_nmse_has_simple_form(seed in any::<u64>()) {
        let sys = random_system(seed, Links::RayleighRis);
        let simple = nmse_rayleigh_ris(&sys.stats).unwrap();
        for (a, b) in nmse_closed_form(&sys.stats).into_iter().zip(simple) {
            prop_assert!(rel_diff(a, b) < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn amplifier_output_meets_budget(
        n_side in 1usize..=16,
        k in 1usize..=16,
        p_total_dbm in 20.0f64..40.0,
        xi in 0.05f64..1.0,
        sigma_e2_dbm in -100.0f64..-40.0,
    ) {
        let n = n_side * n_side;
        let budget = split_budget(Mode::ActiveRis, dbm_to_watts(p_total_dbm), n, k, 1e-4, 1e-4, xi).unwrap();
        let cfg = SystemConfig { n, k, tau: k, sigma_e2_dbm, p_total_dbm, xi, p_sc_dbm: 10.0, p_dc_dbm: 10.0, ..SystemConfig::default() };
        let cfg = cfg.validate().unwrap();
        let stats = ris_mimo::stats::compute_stats(&cfg, &derive_pathloss(&cfg), &budget);
        let load: f64 = stats.params.alpha.iter().map(|a| budget.p * a).sum::<f64>() + cfg.sigma_e2;
        prop_assert!(rel_diff(stats.eta * stats.eta * n as f64 * load, budget.p_a) < 1e-12);
        let spent = k as f64 * budget.p + budget.p_cir + budget.p_a / xi;
        prop_assert!(rel_diff(spent, budget.p_total) < 1e-12);
    }
}

proptest! {
    #[test]
    fn los_sum_is_bounded_and_periodic(seed in any::<u64>(), shift in 0usize..64, turns in -3i32..=3) {
        let sys = random_system(seed, Links::Any);
        let n = sys.los.n();
        let mut shifted = sys.phase.as_slice().to_vec();
        shifted[shift % n] += f64::from(turns) * TAU;
        let raw = ris_mimo::geometry::PhaseVector::new(shifted);
        for k in 0..sys.los.k() {
            let f = sys.los.f(&sys.phase, k);
            prop_assert!(f.norm() <= n as f64 * (1.0 + 1e-12));
            prop_assert!((f - sys.los.f(&raw, k)).norm() < 1e-9);
            let dense: ris_mimo::C64 = (0..n)
                .map(|i| sys.los.a_n[i].conj() * ris_mimo::C64::from_polar(1.0, sys.phase.as_slice()[i]) * sys.los.hbar[k][i])
                .sum();
            prop_assert!((f - dense).norm() < 1e-9 * n as f64);
        }
    }

    #[test]
    fn planar_array_norms(side in 1usize..=16, ta in 0.0f64..TAU, te in 0.0f64..std::f64::consts::PI) {
        let a = array_response(side * side, ta, te, 0.5).unwrap();
        let gram: ris_mimo::C64 = a.iter().map(|z| z.conj() * z).sum();
        prop_assert!((gram.re - (side * side) as f64).abs() < 1e-12 * (side * side) as f64);
        prop_assert!(gram.im.abs() < 1e-12);
    }

    #[test]
    fn rayleigh_ris_rate_ignores_phases(seed in any::<u64>(), other in any::<u64>()) {
        let sys = random_system(seed, Links::RayleighRis);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(other);
        let second = PhaseVector::random(sys.los.n(), &mut rng);
        for formulation in [Formulation::Exact, Formulation::Printed] {
            let m = model(&sys, formulation);
            let (a, b) = (m.evaluate(&sys.phase), m.evaluate(&second));
            for (x, y) in a.sinr.iter().zip(&b.sinr) {
                prop_assert!(rel_diff(*x, *y) < 1e-12, "{formulation}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn nmse_is_a_fraction(seed in any::<u64>()) {
        let sys = random_system(seed, Links::Any);
        for (a, b) in nmse_closed_form(&sys.stats).into_iter().zip(nmse_from_mse(&sys.stats)) {
            prop_assert!(a > 0.0 && a < 1.0, "nmse {a}");
            prop_assert!(rel_diff(a, b) < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn coefficient_relations(seed in any::<u64>()) {
        let sys = random_system(seed, Links::Any);
        let st = &sys.stats;
        for k in 0..st.k() {
            prop_assert!(st.a2[k] > 0.0 && st.n_k[k] > 0.0 && st.e3[k] >= 0.0);
            let scale = st.a4[k] + st.m() * st.a3[k].abs();
            prop_assert!((st.e2[k] - st.e1[k] - (st.m() - 1.0) * st.a3[k]).abs() <= 1e-14 * scale);
            if st.params.delta == 0.0 {
                prop_assert_eq!(st.a1[k], 0.0);
                prop_assert_eq!(st.a3[k], 0.0);
            }
        }
    }

    #[test]
    fn nmse_ignores_ris_size_at_fixed_gain(seed in any::<u64>()) {
        let sys = random_system(seed, Links::Any);
        let base = nmse_closed_form(&sys.stats);
        for n in [4, 16, 64] {
            let other = with_params(&sys.stats.params, |p| p.n = n);
            for (a, b) in base.iter().zip(nmse_closed_form(&other)) {
                prop_assert!(rel_diff(*a, b) < 1e-12);
            }
        }
    }

    #[test]
    fn rayleigh_ris_nmse_ignores_phase_noise(seed in any::<u64>()) {
        let sys = random_system(seed, Links::RayleighRis);
        let base = nmse_closed_form(&with_params(&sys.stats.params, |p| p.phase_noise = phase_noise_char(0.0)));
        for v in [2.0, 100.0] {
            let other = with_params(&sys.stats.params, |p| p.phase_noise = phase_noise_char(v));
            for (a, b) in base.iter().zip(nmse_closed_form(&other)) {
                prop_assert!(rel_diff(*a, b) < 1e-12);
            }
        }
    }

    #[test]
    fn components_are_nonnegative(seed in any::<u64>()) {
        let sys = random_system(seed, Links::Any);
        for formulation in [Formulation::Exact, Formulation::Printed] {
            let report = model(&sys, formulation).evaluate(&sys.phase);
            for c in &report.components {
                prop_assert!(c.signal >= 0.0 && c.noise >= 0.0);
                prop_assert!(c.static_noise >= 0.0 && c.thermal_noise >= 0.0);
                prop_assert!(c.interference.iter().all(|&i| i >= 0.0), "{:?}", c.interference);
                // Exact leakage is a variance; allow rounding at the scale of the second moment it came from.
                prop_assert!(c.leak >= -1e-12 * c.signal, "{formulation}: leak {} signal {}", c.leak, c.signal);
            }
        }
    }

    /// Holds at the phase that aligns user k; see the counterexample below for arbitrary phases.
    #[test]
    fn signal_grows_with_phase_accuracy(seed in any::<u64>()) {
        let sys = random_system(seed, Links::Any);
        for k in 0..sys.stats.k() {
            let terms = PhaseTerms::new(&sys.los, &sys.los.aligned_phase(k));
            let signal = |v: f64| {
                let s = with_params(&sys.stats.params, |p| p.phase_noise = phase_noise_char(v));
                desired_signal(&s, &terms, k)
            };
            let (ideal, noisy, uniform) = (signal(f64::INFINITY), signal(2.0), signal(0.0));
            prop_assert!(ideal >= noisy * (1.0 - 1e-12), "{ideal} < {noisy}");
            prop_assert!(noisy >= uniform * (1.0 - 1e-12), "{noisy} < {uniform}");
        }
    }

    #[test]
    fn report_is_consistent(seed in any::<u64>()) {
        let sys = random_system(seed, Links::Any);
        let report = model(&sys, Formulation::Exact).evaluate(&sys.phase);
        let chi = sys.stats.params.chi;
        let sum: f64 = report.rate.iter().sum();
        prop_assert!(rel_diff(sum, report.sum_rate) < 1e-15);
        prop_assert_eq!(report.min_rate, report.rate.iter().copied().fold(f64::INFINITY, f64::min));
        for (&s, &r) in report.sinr.iter().zip(&report.rate) {
            prop_assert_eq!(r, rate_from_sinr(chi, s));
            prop_assert!(rate_from_sinr(chi, s * 1.001) > r);
        }
    }

    #[test]
    fn phase_noise_moments_are_ordered(v in prop_oneof![Just(0.0), 1e-3f64..1e4, Just(f64::INFINITY)]) {
        let pn = phase_noise_char(v);
        prop_assert!(0.0 <= pn.l && pn.l <= pn.rho && pn.rho <= 1.0);
    }

    #[test]
    fn dbm_round_trip(p in 1e-30f64..1e6) {
        prop_assert!(rel_diff(dbm_to_watts(watts_to_dbm(p)), p) < 1e-12);
    }

    #[test]
    fn pathloss_is_pure(k in 1usize..=16, r_ur in 1.0f64..100.0, d_rb in 50.0f64..2000.0) {
        let cfg = SystemConfig { k, tau: k, r_ur, d_rb, ..SystemConfig::default() }.validate().unwrap();
        let (a, b) = (derive_pathloss(&cfg), derive_pathloss(&cfg));
        prop_assert_eq!(&a, &b);
        prop_assert!(a.alpha.iter().chain(&a.gamma).all(|&x| x > 0.0) && a.beta > 0.0);
    }
}

/// With |f_k|² small the ρ² weight of the LoS mean is outweighed by the ρ²
/// removed from the scattered part, so ideal phases can lower the signal.
#[test]
fn misaligned_phases_can_lose_signal_to_phase_accuracy() {
    let sys = random_system(1137321553702629401, Links::Any);
    let terms = PhaseTerms::new(&sys.los, &sys.phase);
    let signal = |v: f64, k: usize| {
        let s = with_params(&sys.stats.params, |p| p.phase_noise = phase_noise_char(v));
        desired_signal(&s, &terms, k)
    };
    let n = sys.los.n() as f64;
    let k = (0..sys.stats.k()).find(|&k| signal(f64::INFINITY, k) < signal(2.0, k)).expect("counterexample");
    assert!(terms.f[k].norm_sqr() < n);
}

#[test]
fn nmse_limits_in_pilot_power() {
    let s = Scenario::new(&SystemConfig::default()).unwrap();
    let at = |p: f64| nmse_closed_form(&with_params(&s.stats.params, |m| m.p = p));
    assert!(at(1e6).iter().all(|&x| x <= 1e-4), "{:?}", at(1e6));
    assert!(at(1e12).iter().all(|&x| x <= 1e-6));
    assert!(at(1e-20).iter().all(|&x| x >= 1.0 - 1e-4), "{:?}", at(1e-20));
    assert!(at(1e-30).iter().all(|&x| x >= 1.0 - 1e-6));
}

#[test]
fn default_scenario_amplifier_budget() {
    let s = Scenario::new(&SystemConfig::default()).unwrap();
    let load: f64 = s.pathloss.alpha.iter().map(|a| s.budget.p * a).sum::<f64>() + s.cfg.sigma_e2;
    assert!(rel_diff(s.stats.eta * s.stats.eta * s.cfg.n() as f64 * load, s.budget.p_a) < 1e-12);
}
