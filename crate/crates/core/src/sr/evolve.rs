use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::constants::optimize_with_stack;
use super::generate::random_expression;
use super::variation::{crossover, mutate};
use super::{ParetoEntry, ParetoFrontier, Samples, SrConfig, SrError};
use crate::expr::{Compiled, EvalStack, Expr};

#[derive(Debug, Clone)]
struct Individual {
    expr: Expr,
    loss: f64,
}

// splitmix64 finaliser
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, generation: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(mix(seed) ^ generation) ^ index))
}

/// Offers `candidate` to the frontier; see [`ParetoFrontier::update`].
pub fn pareto_update(frontier: &mut ParetoFrontier, candidate: ParetoEntry) -> bool {
    frontier.update(candidate)
}

/// Runs the search and returns the final frontier.
pub fn evolve(config: &SrConfig, data: &Samples) -> Result<ParetoFrontier, SrError> {
    evolve_with(config, data, |_, _| {})
}

/// Like [`evolve`], calling `observer(generation, frontier)` after the initial
/// population (generation 0) and after every generation.
pub fn evolve_with<F>(config: &SrConfig, data: &Samples, mut observer: F) -> Result<ParetoFrontier, SrError>
where
    F: FnMut(usize, &ParetoFrontier),
{
    config.validate()?;
    data.check()?;
    let search = match config.max_samples {
        Some(m) if m < data.len() => data.subsample(m, config.rng_seed),
        _ => data.clone(),
    };
    let seed = config.rng_seed;
    let steps = config.constant_optimizer_steps;
    let mut archive = ParetoFrontier::new();

    let mut population: Vec<Individual> = (0..config.population_size)
        .into_par_iter()
        .map_init(EvalStack::new, |stack, i| {
            let mut rng = rng_for(seed, 0, i as u64);
            let e = random_expression(config, &mut rng, config.max_size);
            let (expr, loss) = optimize_with_stack(&e, &search, steps, &mut rng, stack);
            Individual { expr, loss }
        })
        .collect();
    admit(&mut archive, &population);
    observer(0, &archive);

    for generation in 1..=config.n_iterations {
        let elites = migrants(&archive, config.population_size / 16);
        let n_children = config.population_size - elites.len();
        let parents = Parents {
            population: &population,
            archive: archive.entries(),
            k: config.tournament_size,
        };
        let children: Vec<Individual> = (0..n_children)
            .into_par_iter()
            .map_init(EvalStack::new, |stack, i| {
                let mut rng = rng_for(seed, generation as u64, i as u64);
                let r: f64 = rng.random();
                let child = if r < config.p_crossover {
                    let a = parents.pick(&mut rng);
                    let b = parents.pick(&mut rng);
                    crossover(a, b, config, &mut rng)
                } else if r < config.p_crossover + config.p_mutation {
                    mutate(parents.pick(&mut rng), config, &mut rng)
                } else {
                    parents.pick(&mut rng).clone()
                };
                let (expr, loss) = optimize_with_stack(&child, &search, steps, &mut rng, stack);
                Individual { expr, loss }
            })
            .collect();
        admit(&mut archive, &children);
        if generation % REFINE_EVERY == 0 {
            for e in polish(&archive, &search, seed, REFINE_STEPS, generation as u64) {
                archive.update(e);
            }
        }
        population = elites;
        population.extend(children);
        observer(generation, &archive);
    }

    let polished = polish(&archive, &search, seed, config.polish_steps, u64::MAX);
    for e in polished {
        archive.update(e);
    }
    if search.len() < data.len() {
        archive = rescore(&archive, data);
    }
    Ok(archive)
}

fn admit(archive: &mut ParetoFrontier, batch: &[Individual]) {
    for ind in batch {
        if ind.loss.is_finite() {
            archive.update(ParetoEntry::new(ind.expr.clone(), ind.loss));
        }
    }
}

// frontier members re-injected into the next population, spread over the curve
fn migrants(archive: &ParetoFrontier, slots: usize) -> Vec<Individual> {
    let entries = archive.entries();
    let take = slots.min(entries.len());
    (0..take)
        .map(|k| {
            let e = &entries[entries.len() - 1 - k * entries.len() / take];
            Individual {
                expr: e.expression.clone(),
                loss: e.loss,
            }
        })
        .collect()
}

// share of parents drawn straight from the frontier instead of by tournament
const ARCHIVE_PARENT_RATE: f64 = 0.15;

struct Parents<'a> {
    population: &'a [Individual],
    archive: &'a [ParetoEntry],
    k: usize,
}

impl Parents<'_> {
    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> &Expr {
        if !self.archive.is_empty() && rng.random_bool(ARCHIVE_PARENT_RATE) {
            &self.archive[rng.random_range(0..self.archive.len())].expression
        } else {
            &tournament(self.population, self.k, rng).expr
        }
    }
}

fn tournament<'a, R: Rng + ?Sized>(pop: &'a [Individual], k: usize, rng: &mut R) -> &'a Individual {
    let mut best = &pop[rng.random_range(0..pop.len())];
    for _ in 1..k {
        let c = &pop[rng.random_range(0..pop.len())];
        let better = c.loss < best.loss
            || (c.loss == best.loss && c.expr.complexity() < best.expr.complexity())
            || (best.loss.is_nan() && !c.loss.is_nan());
        if better {
            best = c;
        }
    }
    best
}

// periodic extra constant tuning of the frontier during the search
const REFINE_EVERY: usize = 10;
const REFINE_STEPS: usize = 256;

fn polish(archive: &ParetoFrontier, data: &Samples, seed: u64, steps: usize, stream: u64) -> Vec<ParetoEntry> {
    if steps == 0 {
        return Vec::new();
    }
    archive
        .entries()
        .par_iter()
        .map_init(EvalStack::new, |stack, e| {
            let mut rng = rng_for(seed, stream ^ (1 << 63), e.id as u64);
            let (expr, loss) = optimize_with_stack(&e.expression, data, steps, &mut rng, stack);
            ParetoEntry::new(expr, loss)
        })
        .collect()
}

// recompute losses on the full training set after a subsampled search
fn rescore(archive: &ParetoFrontier, data: &Samples) -> ParetoFrontier {
    let scored: Vec<ParetoEntry> = archive
        .entries()
        .par_iter()
        .map_init(EvalStack::new, |stack, e| {
            let program = Compiled::new(&e.expression);
            let loss = data.mse(&program, program.constants(), stack);
            ParetoEntry::new(e.expression.clone(), loss)
        })
        .collect();
    scored.into_iter().collect()
}
