//! Genetic search over RIS phase shifts.
//!
//! Each generation evaluates the raw fitness of every chromosome (in
//! parallel), ranks the population, keeps the elites verbatim, fills the
//! crossover share from pairs chosen by stochastic universal sampling and
//! the mutation share from a second sampling pass. All operator randomness
//! comes from one sequential stream, so a seed fixes the whole run.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::PhaseVector;
use crate::rate::RateModel;
use crate::sampler::{stream, Purpose};

/// Population sizes, operator rates and stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaParams {
    /// Population size N_p.
    pub population: usize,
    /// Elites copied unchanged, N_e.
    pub elites: usize,
    /// Offspring produced by crossover, N_c.
    pub crossover: usize,
    /// Offspring produced by mutation, N_m.
    pub mutation: usize,
    /// Per-gene mutation probability p_m.
    pub mutation_rate: f64,
    /// Generation cap.
    pub max_iters: usize,
    /// Stop once the best fitness has improved by less than this per generation,
    /// averaged over the last `stall_window` generations.
    pub stall_tol: f64,
    pub stall_window: usize,
}

impl GaParams {
    /// Default sizes for `n` RIS elements: 100 individuals split 5/76/19, p_m = 0.1, at most 100·n generations.
    pub fn for_elements(n: usize) -> Self {
        Self {
            population: 100,
            elites: 5,
            crossover: 76,
            mutation: 19,
            mutation_rate: 0.1,
            max_iters: 100 * n,
            stall_tol: 1e-4,
            stall_window: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.elites + self.crossover + self.mutation != self.population {
            return Err(invalid("ga", "elites + crossover + mutation must equal the population size"));
        }
        if self.elites == 0 {
            return Err(invalid("ga", "at least one elite is required"));
        }
        if !(self.mutation_rate > 0.0 && self.mutation_rate < 1.0) {
            return Err(invalid("ga", "mutation rate must lie in (0, 1)"));
        }
        if self.max_iters == 0 || self.stall_window == 0 {
            return Err(invalid("ga", "max_iters and stall_window must be positive"));
        }
        Ok(())
    }
}

/// A chromosome with its raw and scaled fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub chromosome: PhaseVector,
    pub raw_fitness: f64,
    /// 1-based rank after a stable descending sort.
    pub rank: usize,
    pub expected_fitness: f64,
}

/// Ranks by raw fitness (descending, ties by position) and assigns f^e_i ∝ 1/√rank, normalized to sum to one.
pub fn fitness_scale(population: &mut [Individual]) {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| population[b].raw_fitness.total_cmp(&population[a].raw_fitness));
    let norm: f64 = (1..=population.len()).map(|r| 1.0 / (r as f64).sqrt()).sum();
    for (pos, &idx) in order.iter().enumerate() {
        let rank = pos + 1;
        population[idx].rank = rank;
        population[idx].expected_fitness = 1.0 / (rank as f64).sqrt() / norm;
    }
}

/// Stochastic universal sampling with an explicit first pointer `p0` ∈ [0, 1/n_parents).
///
/// Returns population indices in pointer order.
pub fn sus_select_from(expected: &[f64], n_parents: usize, p0: f64) -> Vec<usize> {
    let step = 1.0 / n_parents as f64;
    let mut out = Vec::with_capacity(n_parents);
    let mut idx = 0;
    let mut cum = expected[0];
    for j in 0..n_parents {
        let pointer = p0 + j as f64 * step;
        while pointer >= cum && idx + 1 < expected.len() {
            idx += 1;
            cum += expected[idx];
        }
        out.push(idx);
    }
    out
}

/// Stochastic universal sampling with a uniform first pointer.
pub fn sus_select<R: Rng + ?Sized>(expected: &[f64], n_parents: usize, rng: &mut R) -> Vec<usize> {
    let p0 = rng.random::<f64>() / n_parents as f64;
    sus_select_from(expected, n_parents, p0)
}

/// Single-point crossover: genes 1..=cut from `first`, the rest from `second`.
pub fn crossover_at(first: &PhaseVector, second: &PhaseVector, cut: usize) -> PhaseVector {
    let mut genes = first.as_slice()[..cut].to_vec();
    genes.extend_from_slice(&second.as_slice()[cut..]);
    PhaseVector::new(genes)
}

/// Pairs consecutive parents and crosses each pair at a uniform cut in 1..=N.
pub fn crossover<R: Rng + ?Sized>(parents: &[&PhaseVector], rng: &mut R) -> Vec<PhaseVector> {
    parents
        .chunks_exact(2)
        .map(|pair| {
            let cut = rng.random_range(1..=pair[0].len());
            crossover_at(pair[0], pair[1], cut)
        })
        .collect()
}

/// Redraws each gene uniformly on [0, 2π) with probability `rate`.
pub fn mutate<R: Rng + ?Sized>(parent: &PhaseVector, rate: f64, rng: &mut R) -> PhaseVector {
    PhaseVector::new(
        parent
            .as_slice()
            .iter()
            .map(|&g| if rng.random::<f64>() < rate { rng.random::<f64>() * TAU } else { g })
            .collect(),
    )
}

/// Best and mean raw fitness of one generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

/// Result of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: PhaseVector,
    pub best_fitness: f64,
    pub trace: Vec<TracePoint>,
}

fn evaluate<F>(objective: &F, chromosomes: Vec<PhaseVector>) -> Vec<Individual>
where
    F: Fn(&PhaseVector) -> f64 + Sync,
{
    chromosomes
        .into_par_iter()
        .map(|c| {
            let raw_fitness = objective(&c);
            Individual { chromosome: c, raw_fitness, rank: 0, expected_fitness: 0.0 }
        })
        .collect()
}

fn stalled(trace: &[TracePoint], params: &GaParams) -> bool {
    let w = params.stall_window;
    if trace.len() <= w {
        return false;
    }
    let now = trace[trace.len() - 1].best_fitness;
    let then = trace[trace.len() - 1 - w].best_fitness;
    (now - then) / (w as f64) < params.stall_tol
}

/// Maximizes `objective` over phase vectors of length `n`.
pub fn optimize<F>(objective: F, n: usize, params: &GaParams, seed: u64) -> Result<GaOutcome>
where
    F: Fn(&PhaseVector) -> f64 + Sync,
{
    params.validate()?;
    let mut rng: ChaCha8Rng = stream(seed, Purpose::Genetic, &[n, params.population], 0);
    let initial = (0..params.population).map(|_| PhaseVector::random(n, &mut rng)).collect();
    let mut population = evaluate(&objective, initial);
    let mut trace = Vec::new();

    for generation in 0.. {
        fitness_scale(&mut population);
        let best = population.iter().find(|i| i.rank == 1).expect("population is nonempty");
        let mean = population.iter().map(|i| i.raw_fitness).sum::<f64>() / population.len() as f64;
        trace.push(TracePoint { generation, best_fitness: best.raw_fitness, mean_fitness: mean });
        if generation + 1 >= params.max_iters || stalled(&trace, params) {
            break;
        }

        let mut by_rank: Vec<&Individual> = population.iter().collect();
        by_rank.sort_by_key(|i| i.rank);
        let expected: Vec<f64> = population.iter().map(|i| i.expected_fitness).collect();

        let mut next: Vec<PhaseVector> = by_rank[..params.elites].iter().map(|i| i.chromosome.clone()).collect();
        let mut parents: Vec<&PhaseVector> = sus_select(&expected, 2 * params.crossover, &mut rng)
            .into_iter()
            .map(|i| &population[i].chromosome)
            .collect();
        // SUS returns parents in fitness order; shuffling stops the best individuals from always mating with each other.
        parents.shuffle(&mut rng);
        next.extend(crossover(&parents, &mut rng));
        let mutants: Vec<usize> = sus_select(&expected, params.mutation, &mut rng);
        next.extend(mutants.into_iter().map(|i| mutate(&population[i].chromosome, params.mutation_rate, &mut rng)));

        let elites: Vec<Individual> = by_rank[..params.elites].iter().map(|&i| i.clone()).collect();
        let fresh = evaluate(&objective, next.split_off(params.elites));
        population = elites.into_iter().chain(fresh).collect();
    }

    let winner = population.iter().find(|i| i.rank == 1).expect("population is nonempty");
    Ok(GaOutcome { best: winner.chromosome.clone(), best_fitness: winner.raw_fitness, trace })
}

/// Max-min rate phase design for a closed-form model.
pub fn optimize_min_rate(model: &RateModel, params: &GaParams, seed: u64) -> Result<GaOutcome> {
    optimize(|phase| model.min_rate(phase), model.los.n(), params, seed)
}
