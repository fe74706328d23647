//! Optimizers over genotype space.
//!
//! Both drivers draw all of their own randomness (initial genotypes,
//! selection, variation) from one coordinator stream and give evaluation
//! `i` of a run the seed [`eval_seed`]`(master_seed, i)`. Batches are
//! evaluated in parallel and committed in index order, so a run is a pure
//! function of its configuration and master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::eval::{Descriptor, Evaluator};
use crate::grammar::Genotype;
use crate::{seed, Error, Result};

mod archive;
mod ge;
mod map_elites;
mod operators;

pub use archive::{coords, Archive, Elite, GridSpec, OobPolicy, OutOfBounds};
pub use ge::{run_ge, GeConfig, GeOutcome};
pub use map_elites::{run_map_elites, MeConfig, MeOutcome};
pub use operators::{crossover, crossover_at, mutate, tournament_select};

const DRIVER_STREAM: u64 = 0x5EED_0000_0000_0001;
const EVAL_STREAM: u64 = 0x5EED_0000_0000_0002;

/// Seed used for the `index`-th evaluation of a run.
pub fn eval_seed(master_seed: u64, index: u64) -> u64 {
    seed::mix(seed::mix(master_seed, EVAL_STREAM), index)
}

pub(crate) fn driver_rng(master_seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed::mix(master_seed, DRIVER_STREAM))
}

/// What an optimizer needs to know about an evaluated genotype.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub fitness: f64,
    /// `None` for genotypes that failed to translate.
    pub descriptor: Option<Descriptor>,
}

pub trait Evaluate: Sync {
    fn score(&self, genotype: &Genotype, eval_seed: u64) -> Score;

    /// Largest alternative count of the decoding grammar; genotype max
    /// values must exceed it.
    fn max_alternatives(&self) -> usize {
        0
    }
}

impl Evaluate for Evaluator {
    fn score(&self, genotype: &Genotype, eval_seed: u64) -> Score {
        let r = self.evaluate(genotype, eval_seed);
        Score { fitness: r.fitness, descriptor: r.descriptor() }
    }

    fn max_alternatives(&self) -> usize {
        self.grammar.max_alternatives()
    }
}

/// An evaluated genotype.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub fitness: f64,
    pub descriptor: Option<Descriptor>,
    pub eval_seed: u64,
    /// Position in the run's evaluation order.
    pub index: u64,
}

impl Individual {
    pub fn is_valid(&self) -> bool {
        self.descriptor.is_some()
    }
}

/// Best fitness after a given number of evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendPoint {
    pub evaluations: u64,
    /// `None` while the archive is still empty.
    pub best_fitness: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveragePoint {
    pub evaluations: u64,
    /// Fraction of occupied cells.
    pub coverage: f64,
}

pub(crate) fn evaluate_batch<E: Evaluate + ?Sized>(
    evaluator: &E,
    genotypes: Vec<Genotype>,
    first_index: u64,
    master_seed: u64,
) -> Vec<Individual> {
    genotypes
        .into_par_iter()
        .enumerate()
        .map(|(i, genotype)| {
            let index = first_index + i as u64;
            let seed = eval_seed(master_seed, index);
            let score = evaluator.score(&genotype, seed);
            Individual { genotype, fitness: score.fitness, descriptor: score.descriptor, eval_seed: seed, index }
        })
        .collect()
}

pub(crate) fn check_genome(genotype_size: usize, max_value: u32, rate: f64, min_alternatives: usize) -> Result<()> {
    if genotype_size == 0 {
        return Err(Error::Config("genotype_size must be positive".into()));
    }
    if (max_value as usize) <= min_alternatives {
        return Err(Error::Config(format!(
            "max_value {max_value} must exceed the largest rule alternative count {min_alternatives}"
        )));
    }
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Config("mutation_rate must lie in (0, 1]".into()));
    }
    Ok(())
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in [0, 1]")))
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// Cheap synthetic evaluator: fitness from the first genes, descriptor
    /// spread over the grid, invalid when gene 0 is divisible by 13.
    pub struct Synthetic;

    impl Evaluate for Synthetic {
        fn score(&self, g: &Genotype, eval_seed: u64) -> Score {
            let genes = g.genes();
            if genes[0].is_multiple_of(13) {
                return Score { fitness: -1.0, descriptor: None };
            }
            let fitness = genes.iter().take(8).map(|&x| x as f64).sum::<f64>() + (eval_seed % 3) as f64;
            let entropy = (genes[1] % 1001) as f64 / 1000.0;
            let depth = 1 + (genes[2] % 12) as usize;
            Score { fitness, descriptor: Some(Descriptor { entropy, depth }) }
        }
    }
}
