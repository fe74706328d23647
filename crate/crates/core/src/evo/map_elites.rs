//! MAP-Elites over (entropy, depth).

use rand::Rng;

use super::{
    check_genome, driver_rng, evaluate_batch, mutate, Archive, CoveragePoint, Evaluate, GridSpec, Individual,
    TrendPoint,
};
use crate::grammar::Genotype;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MeConfig {
    pub grid: GridSpec,
    /// Total evaluations, initial batch included.
    pub total_pop: usize,
    pub batch_n: usize,
    pub init_pop: usize,
    pub mutation_rate: f64,
    pub genotype_size: usize,
    pub max_value: u32,
}

impl MeConfig {
    pub fn cartpole() -> Self {
        Self {
            grid: GridSpec::cartpole(),
            total_pop: 10_000,
            batch_n: 20,
            init_pop: 200,
            mutation_rate: 0.01,
            genotype_size: 100,
            max_value: 40_000,
        }
    }

    pub fn mountain_car() -> Self {
        Self { grid: GridSpec::mountain_car(), total_pop: 200_000, ..Self::cartpole() }
    }

    pub fn validate(&self, min_alternatives: usize) -> Result<()> {
        self.grid.validate()?;
        if self.batch_n == 0 || self.init_pop == 0 {
            return Err(Error::Config("batch_n and init_pop must be positive".into()));
        }
        if self.batch_n > self.init_pop {
            return Err(Error::Config("batch_n must not exceed init_pop".into()));
        }
        if self.total_pop < self.init_pop {
            return Err(Error::Config("total_pop must be at least init_pop".into()));
        }
        check_genome(self.genotype_size, self.max_value, self.mutation_rate, min_alternatives)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeOutcome {
    pub archive: Archive,
    /// Best archive fitness after initialization and after every batch.
    pub trend: Vec<TrendPoint>,
    pub coverage: Vec<CoveragePoint>,
    pub evaluations: u64,
}

/// Runs MAP-Elites until exactly `total_pop` genotypes have been evaluated.
///
/// Parents are drawn uniformly, with replacement, from the occupied cells and
/// mutated; there is no crossover. While the archive is empty, batches are
/// filled with fresh random genotypes instead.
pub fn run_map_elites<E, F>(config: &MeConfig, evaluator: &E, master_seed: u64, mut observer: F) -> Result<MeOutcome>
where
    E: Evaluate + ?Sized,
    F: FnMut(&Individual),
{
    config.validate(evaluator.max_alternatives())?;
    let mut rng = driver_rng(master_seed);
    let mut archive = Archive::new(config.grid);
    let mut trend = Vec::new();
    let mut coverage = Vec::new();
    let mut evaluations = 0u64;

    let mut commit = |batch: Vec<Individual>, archive: &mut Archive, evaluations: &mut u64| {
        for ind in &batch {
            observer(ind);
            archive.add(ind);
        }
        *evaluations += batch.len() as u64;
        trend.push(TrendPoint { evaluations: *evaluations, best_fitness: archive.best().map(|(_, e)| e.fitness) });
        coverage.push(CoveragePoint { evaluations: *evaluations, coverage: archive.coverage() });
    };

    let initial: Vec<Genotype> =
        (0..config.init_pop).map(|_| Genotype::random(config.genotype_size, config.max_value, &mut rng)).collect();
    let batch = evaluate_batch(evaluator, initial, 0, master_seed);
    commit(batch, &mut archive, &mut evaluations);

    while evaluations < config.total_pop as u64 {
        let n = (config.total_pop as u64 - evaluations).min(config.batch_n as u64) as usize;
        let parents: Vec<&Genotype> = archive.iter().map(|(_, e)| &e.genotype).collect();
        let children: Vec<Genotype> = (0..n)
            .map(|_| {
                if parents.is_empty() {
                    Genotype::random(config.genotype_size, config.max_value, &mut rng)
                } else {
                    let p = parents[rng.random_range(0..parents.len())];
                    mutate(p, config.mutation_rate, &mut rng)
                }
            })
            .collect();
        let batch = evaluate_batch(evaluator, children, evaluations, master_seed);
        commit(batch, &mut archive, &mut evaluations);
    }

    Ok(MeOutcome { archive, trend, coverage, evaluations })
}
