//! Real-coded genetic search over the unit hypercube.
//!
//! Tournament selection, blend (BLX-α) crossover, Gaussian mutation scaled
//! to the cube, elitism. All random draws happen on the calling thread;
//! fitness evaluation is parallel but order-preserving, so results do not
//! depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::OptimizerConfig;

const TOURNAMENT: usize = 3;
const BLEND_ALPHA: f64 = 0.5;
const CROSSOVER_RATE: f64 = 0.9;
const LINE_FRACTION: f64 = 0.5;
/// Relative gain in the best fitness below which a generation counts as stalled.
const STALL_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Debug)]
pub(crate) struct GaOutcome {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub generations: usize,
    pub evaluations: usize,
}

#[derive(Clone)]
struct Individual {
    genes: Vec<f64>,
    fitness: f64,
    center_dist: f64,
}

fn center_dist(u: &[f64]) -> f64 {
    u.iter().map(|x| (x - 0.5).powi(2)).sum::<f64>().sqrt()
}

/// Higher fitness first; among ties the point nearer the cube center.
fn better(a: &Individual, b: &Individual) -> std::cmp::Ordering {
    b.fitness
        .total_cmp(&a.fitness)
        .then(a.center_dist.total_cmp(&b.center_dist))
}

fn evaluate<F>(genes: Vec<Vec<f64>>, fitness: &F) -> Vec<Individual>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    genes
        .into_par_iter()
        .map(|g| {
            let f = fitness(&g);
            Individual {
                fitness: if f.is_finite() { f } else { f64::NEG_INFINITY },
                center_dist: center_dist(&g),
                genes: g,
            }
        })
        .collect()
}

fn tournament<'a>(pop: &'a [Individual], rng: &mut ChaCha8Rng) -> &'a Individual {
    let mut best = &pop[rng.random_range(0..pop.len())];
    for _ in 1..TOURNAMENT {
        let c = &pop[rng.random_range(0..pop.len())];
        if better(c, best).is_lt() {
            best = c;
        }
    }
    best
}

/// Maximizes `fitness` over `[0, 1]^dim`. `seeds` are injected into the
/// initial population ahead of the random draws.
pub(crate) fn maximize<F>(dim: usize, cfg: &OptimizerConfig, seeds: &[Vec<f64>], fitness: F) -> GaOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let size = cfg.population.max(4);
    let mut genes: Vec<Vec<f64>> = seeds.iter().take(size).cloned().collect();
    while genes.len() < size {
        genes.push((0..dim).map(|_| rng.random::<f64>()).collect());
    }
    let mut pop = evaluate(genes, &fitness);
    let mut evaluations = pop.len();
    pop.sort_by(better);

    let mutation_rate = 1.0 / dim as f64;
    let mut best_value = pop[0].fitness;
    let mut stall = 0;
    let mut generations = 0;
    for gen in 0..cfg.generations {
        generations = gen + 1;
        // Mutation width shrinks linearly from 0.1 to 0.01 of the cube.
        let progress = gen as f64 / cfg.generations.max(1) as f64;
        let sigma = 0.1 * (1.0 - progress) + 0.01 * progress;

        let mut children = Vec::with_capacity(size - cfg.elites);
        while children.len() < size - cfg.elites.min(size) {
            let a = tournament(&pop, &mut rng);
            let b = tournament(&pop, &mut rng);
            let mut child: Vec<f64> = if rng.random::<f64>() < CROSSOVER_RATE {
                if rng.random::<f64>() < LINE_FRACTION {
                    // One blend weight for all genes keeps the child on the
                    // line through both parents.
                    let w = -BLEND_ALPHA + rng.random::<f64>() * (1.0 + 2.0 * BLEND_ALPHA);
                    a.genes.iter().zip(&b.genes).map(|(&x, &y)| x + w * (y - x)).collect()
                } else {
                    a.genes
                        .iter()
                        .zip(&b.genes)
                        .map(|(&x, &y)| {
                            let (lo, hi) = (x.min(y), x.max(y));
                            let span = hi - lo;
                            let w: f64 = rng.random();
                            lo - BLEND_ALPHA * span + w * (1.0 + 2.0 * BLEND_ALPHA) * span
                        })
                        .collect()
                }
            } else {
                a.genes.clone()
            };
            for g in child.iter_mut() {
                if rng.random::<f64>() < mutation_rate {
                    let n: f64 = rng.sample(StandardNormal);
                    *g += sigma * n;
                }
                *g = g.clamp(0.0, 1.0);
            }
            children.push(child);
        }
        evaluations += children.len();
        let mut next: Vec<Individual> = pop[..cfg.elites.min(size)].to_vec();
        next.extend(evaluate(children, &fitness));
        next.sort_by(better);
        pop = next;

        let improved = pop[0].fitness > best_value + STALL_TOLERANCE * best_value.abs();
        best_value = best_value.max(pop[0].fitness);
        if improved {
            stall = 0;
        } else {
            stall += 1;
            if cfg.stall_generations > 0 && stall >= cfg.stall_generations {
                break;
            }
        }
    }
    GaOutcome {
        best: pop[0].genes.clone(),
        best_value: pop[0].fitness,
        generations,
        evaluations,
    }
}
