//! Genetic-algorithm operators and runs.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_mimo::ga::{
    crossover, crossover_at, fitness_scale, mutate, optimize, optimize_min_rate, sus_select, sus_select_from, GaParams,
    Individual,
};
use ris_mimo::{PhaseVector, Scenario, SystemConfig};

fn individuals(fitness: &[f64]) -> Vec<Individual> {
    fitness
        .iter()
        .map(|&f| Individual { chromosome: PhaseVector::zeros(1), raw_fitness: f, rank: 0, expected_fitness: 0.0 })
        .collect()
}

fn short_run(n: usize) -> GaParams {
    GaParams { max_iters: 60, ..GaParams::for_elements(n) }
}

#[test]
fn single_individual_takes_all_weight() {
    let mut pop = individuals(&[0.3]);
    fitness_scale(&mut pop);
    assert_eq!(pop[0].expected_fitness, 1.0);
    assert_eq!(sus_select_from(&[1.0], 6, 0.1), vec![0; 6]);
}

#[test]
fn sus_two_halves() {
    for p0 in [0.0, 0.2, 0.4999] {
        let mut picks = sus_select_from(&[0.5, 0.5], 2, p0);
        picks.sort();
        assert_eq!(picks, [0, 1]);
    }
}

#[test]
fn crossover_of_identical_parents_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = PhaseVector::random(16, &mut rng);
    for cut in 1..=16 {
        assert_eq!(crossover_at(&a, &a, cut), a);
    }
    assert_eq!(crossover(&[&a, &a, &a, &a], &mut rng), vec![a.clone(), a]);
}

#[test]
fn mutation_rates() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let parent = PhaseVector::random(1000, &mut rng);
    assert_eq!(mutate(&parent, 1e-12, &mut rng), parent);
    let all = mutate(&parent, 1.0, &mut rng);
    assert!(all.as_slice().iter().zip(parent.as_slice()).all(|(a, b)| a != b));
    for _ in 0..10 {
        let child = mutate(&parent, 0.1, &mut rng);
        let changed = child.as_slice().iter().zip(parent.as_slice()).filter(|(a, b)| a != b).count();
        assert!((70..=130).contains(&changed), "{changed} genes mutated");
    }
}

proptest! {
    #[test]
    fn scaled_fitness_is_a_distribution(raw in prop::collection::vec(-10.0f64..10.0, 1..120)) {
        let mut pop = individuals(&raw);
        fitness_scale(&mut pop);
        prop_assert!(pop.iter().all(|i| i.expected_fitness > 0.0));
        prop_assert!((pop.iter().map(|i| i.expected_fitness).sum::<f64>() - 1.0).abs() < 1e-12);
        let mut ranks: Vec<usize> = pop.iter().map(|i| i.rank).collect();
        ranks.sort();
        prop_assert_eq!(ranks, (1..=raw.len()).collect::<Vec<_>>());
        for a in &pop {
            for b in &pop {
                if a.raw_fitness > b.raw_fitness {
                    prop_assert!(a.rank < b.rank && a.expected_fitness > b.expected_fitness);
                }
            }
        }
    }

    #[test]
    fn sus_counts_are_floor_or_ceil(raw in prop::collection::vec(0.0f64..1.0, 1..60), n_parents in 1usize..200, seed in any::<u64>()) {
        let mut pop = individuals(&raw);
        fitness_scale(&mut pop);
        let expected: Vec<f64> = pop.iter().map(|i| i.expected_fitness).collect();
        let picks = sus_select(&expected, n_parents, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(picks.len(), n_parents);
        for (i, &f) in expected.iter().enumerate() {
            let count = picks.iter().filter(|&&p| p == i).count() as f64;
            let target = n_parents as f64 * f;
            // Rounding in the cumulative sum can push a pointer across a boundary it touches exactly.
            prop_assert!(count >= (target - 1e-9).floor() && count <= (target + 1e-9).ceil(), "{count} vs {target}");
        }
    }
}

#[test]
fn elitism_keeps_the_best() {
    // A rugged objective with many local maxima.
    let objective =
        |p: &PhaseVector| p.as_slice().iter().enumerate().map(|(i, t)| ((i + 1) as f64 * t).sin()).sum::<f64>();
    let out = optimize(objective, 12, &short_run(12), 4).unwrap();
    assert!(out.trace.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness));
    assert!(out.trace.iter().all(|t| t.mean_fitness <= t.best_fitness));
    assert_eq!(out.best_fitness, out.trace.last().unwrap().best_fitness);
    assert_eq!(out.best_fitness, objective(&out.best));
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let s = Scenario::new(&SystemConfig { k: 3, tau: 3, ..SystemConfig::default() }).unwrap();
    let model = s.rate_model();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| optimize_min_rate(&model, &short_run(16), 9).unwrap())
    };
    assert_eq!(run(1), run(4));
    assert_ne!(run(1).best, optimize_min_rate(&model, &short_run(16), 10).unwrap().best);
}

#[test]
fn rayleigh_ris_trace_is_flat() {
    let s = Scenario::new(&SystemConfig { delta: 0.0, ..SystemConfig::default() }).unwrap();
    let out = optimize_min_rate(&s.rate_model(), &short_run(16), 0).unwrap();
    let first = out.trace[0].best_fitness;
    assert!(out.trace.iter().all(|t| ((t.best_fitness - first) / first).abs() < 1e-12));
    // A flat trace triggers the stall rule as soon as the window fills.
    assert_eq!(out.trace.len(), GaParams::for_elements(16).stall_window + 1);
}

#[test]
fn single_user_reaches_aligned_optimum() {
    let cfg =
        SystemConfig { k: 1, tau: 1, delta: 1e12, epsilon: vec![1e12], v: f64::INFINITY, ..SystemConfig::default() };
    let s = Scenario::new(&cfg).unwrap();
    let out = optimize_min_rate(&s.rate_model(), &GaParams::for_elements(16), 0).unwrap();
    let ratio = s.los.f(&out.best, 0).norm() / 16.0;
    assert!(ratio >= 0.99, "|f|/N = {ratio}");
}

#[test]
fn invalid_parameters_are_rejected() {
    let base = GaParams::for_elements(4);
    for bad in [
        GaParams { mutation: 20, ..base.clone() },
        GaParams { mutation_rate: 0.0, ..base.clone() },
        GaParams { mutation_rate: 1.0, ..base.clone() },
        GaParams { max_iters: 0, ..base.clone() },
    ] {
        assert!(optimize(|_| 0.0, 4, &bad, 0).is_err());
    }
}
