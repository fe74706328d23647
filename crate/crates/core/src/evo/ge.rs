//! Elitist grammatical evolution.

use rand::Rng;

use super::{
    check_genome, check_probability, crossover, driver_rng, evaluate_batch, mutate, tournament_select, Evaluate,
    Individual, TrendPoint,
};
use crate::grammar::Genotype;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GeConfig {
    pub n_pop: usize,
    /// Total evaluations, initial population included.
    pub total_pop: usize,
    pub tournament_size: usize,
    pub p_cx: f64,
    /// Probability that an offspring is mutated at all.
    pub p_mu: f64,
    /// Probability that a mutated offspring's gene is redrawn.
    pub mutation_rate: f64,
    pub genotype_size: usize,
    pub max_value: u32,
}

impl GeConfig {
    pub fn cartpole() -> Self {
        Self {
            n_pop: 200,
            total_pop: 10_000,
            tournament_size: 2,
            p_cx: 0.1,
            p_mu: 1.0,
            mutation_rate: 0.01,
            genotype_size: 100,
            max_value: 40_000,
        }
    }

    pub fn mountain_car() -> Self {
        Self { total_pop: 200_000, ..Self::cartpole() }
    }

    pub fn validate(&self, min_alternatives: usize) -> Result<()> {
        if self.n_pop < 2 || !self.n_pop.is_multiple_of(2) {
            return Err(Error::Config("n_pop must be even and at least 2".into()));
        }
        if self.total_pop < self.n_pop {
            return Err(Error::Config("total_pop must be at least n_pop".into()));
        }
        if self.tournament_size == 0 {
            return Err(Error::Config("tournament_size must be positive".into()));
        }
        check_probability("p_cx", self.p_cx)?;
        check_probability("p_mu", self.p_mu)?;
        check_genome(self.genotype_size, self.max_value, self.mutation_rate, min_alternatives)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeOutcome {
    pub best: Individual,
    /// Final population, fittest first.
    pub population: Vec<Individual>,
    /// Best-so-far after the initial population and after every generation.
    pub trend: Vec<TrendPoint>,
    pub evaluations: u64,
}

/// Runs GE until exactly `total_pop` genotypes have been evaluated.
///
/// `observer` sees every evaluated individual in evaluation order.
pub fn run_ge<E, F>(config: &GeConfig, evaluator: &E, master_seed: u64, mut observer: F) -> Result<GeOutcome>
where
    E: Evaluate + ?Sized,
    F: FnMut(&Individual),
{
    config.validate(evaluator.max_alternatives())?;
    let mut rng = driver_rng(master_seed);
    let initial: Vec<Genotype> =
        (0..config.n_pop).map(|_| Genotype::random(config.genotype_size, config.max_value, &mut rng)).collect();
    let mut population = evaluate_batch(evaluator, initial, 0, master_seed);
    population.iter().for_each(&mut observer);
    sort_by_fitness(&mut population);
    let mut evaluations = config.n_pop as u64;
    let mut trend = vec![TrendPoint { evaluations, best_fitness: Some(population[0].fitness) }];

    while evaluations < config.total_pop as u64 {
        let n_offspring = (config.total_pop as u64 - evaluations).min(config.n_pop as u64) as usize;

        let mut offspring: Vec<Genotype> = (0..config.n_pop)
            .map(|_| population[tournament_select(&population, config.tournament_size, &mut rng)].genotype.clone())
            .collect();
        for pair in offspring.chunks_exact_mut(2) {
            if rng.random::<f64>() < config.p_cx {
                let (c1, c2) = crossover(&pair[0], &pair[1], &mut rng);
                pair[0] = c1;
                pair[1] = c2;
            }
        }
        for child in offspring.iter_mut() {
            if rng.random::<f64>() < config.p_mu {
                *child = mutate(child, config.mutation_rate, &mut rng);
            }
        }
        offspring.truncate(n_offspring);

        let evaluated = evaluate_batch(evaluator, offspring, evaluations, master_seed);
        evaluated.iter().for_each(&mut observer);
        evaluations += n_offspring as u64;

        // Offspring first so that ties favor them, then creation order.
        let mut pool = evaluated;
        pool.append(&mut population);
        sort_by_fitness(&mut pool);
        pool.truncate(config.n_pop);
        population = pool;

        trend.push(TrendPoint { evaluations, best_fitness: Some(population[0].fitness) });
    }

    Ok(GeOutcome { best: population[0].clone(), population, trend, evaluations })
}

fn sort_by_fitness(pop: &mut [Individual]) {
    pop.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
}
