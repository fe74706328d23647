use rand::Rng;

use super::Individual;
use crate::grammar::Genotype;

/// Replaces each gene, independently with probability `per_gene_rate`, by a
/// fresh uniform draw from `[0, max_value]`.
pub fn mutate<R: Rng + ?Sized>(genotype: &Genotype, per_gene_rate: f64, rng: &mut R) -> Genotype {
    let mut child = genotype.clone();
    let max = genotype.max_value();
    for g in child.genes_mut() {
        if rng.random::<f64>() < per_gene_rate {
            *g = rng.random_range(0..=max);
        }
    }
    child
}

/// One-point crossover at a uniform cut in `[0, len]`.
pub fn crossover<R: Rng + ?Sized>(p1: &Genotype, p2: &Genotype, rng: &mut R) -> (Genotype, Genotype) {
    let cut = rng.random_range(0..=p1.len());
    crossover_at(p1, p2, cut)
}

/// `(p1[..cut] ++ p2[cut..], p2[..cut] ++ p1[cut..])`.
pub fn crossover_at(p1: &Genotype, p2: &Genotype, cut: usize) -> (Genotype, Genotype) {
    assert_eq!(p1.len(), p2.len(), "crossover parents must have equal length");
    assert!(cut <= p1.len());
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    c1.genes_mut()[cut..].copy_from_slice(&p2.genes()[cut..]);
    c2.genes_mut()[cut..].copy_from_slice(&p1.genes()[cut..]);
    (c1, c2)
}

/// Samples `k` members with replacement and returns the index of the fittest;
/// the earliest sample wins ties.
pub fn tournament_select<R: Rng + ?Sized>(population: &[Individual], k: usize, rng: &mut R) -> usize {
    assert!(!population.is_empty() && k >= 1);
    let mut best = rng.random_range(0..population.len());
    for _ in 1..k {
        let c = rng.random_range(0..population.len());
        if population[c].fitness > population[best].fitness {
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn genotype(genes: &[u32]) -> Genotype {
        Genotype::new(genes.to_vec(), 40000).unwrap()
    }

    fn member(fitness: f64) -> Individual {
        Individual { genotype: genotype(&[0]), fitness, descriptor: None, eval_seed: 0, index: 0 }
    }

    #[test]
    fn full_rate_redraws_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let parent = Genotype::random(100, 40000, &mut rng);
        let child = mutate(&parent, 1.0, &mut rng);
        let same = parent.genes().iter().zip(child.genes()).filter(|(a, b)| a == b).count();
        // Each position matches with probability 1/40001.
        assert!(same <= 2, "{same} genes unchanged");
        assert!(child.genes().iter().all(|&g| g <= 40000));
    }

    #[test]
    fn per_gene_rate_binomial() {
        // Changes ~ Bin(100, 0.01) minus the 1/40001 chance of redrawing the same value.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let parent = Genotype::random(100, 40000, &mut rng);
        let trials = 10_000;
        let p = 0.01 * (1.0 - 1.0 / 40001.0);
        let mut changed = 0usize;
        for _ in 0..trials {
            let child = mutate(&parent, 0.01, &mut rng);
            changed += parent.genes().iter().zip(child.genes()).filter(|(a, b)| a != b).count();
        }
        let n = (trials * 100) as f64;
        let mean = n * p;
        let sigma = (n * p * (1.0 - p)).sqrt();
        assert!((changed as f64 - mean).abs() < 3.0 * sigma, "{changed} vs {mean}");
    }

    #[test]
    fn crossover_boundaries() {
        let a = genotype(&[1, 2, 3, 4]);
        let b = genotype(&[5, 6, 7, 8]);
        assert_eq!(crossover_at(&a, &b, 0), (b.clone(), a.clone()));
        assert_eq!(crossover_at(&a, &b, 4), (a.clone(), b.clone()));
        let (c1, c2) = crossover_at(&a, &b, 1);
        assert_eq!(c1.genes(), &[1, 6, 7, 8]);
        assert_eq!(c2.genes(), &[5, 2, 3, 4]);
    }

    #[test]
    fn crossover_preserves_positional_multiset() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = Genotype::random(20, 40000, &mut rng);
            let b = Genotype::random(20, 40000, &mut rng);
            let (c1, c2) = crossover(&a, &b, &mut rng);
            for i in 0..20 {
                let mut before = [a.genes()[i], b.genes()[i]];
                let mut after = [c1.genes()[i], c2.genes()[i]];
                before.sort_unstable();
                after.sort_unstable();
                assert_eq!(before, after);
            }
        }
    }

    #[test]
    fn binary_tournament_probability() {
        // P(pick fitness 2 from {1, 2}) = 1 - (1/2)^2 = 0.75.
        let pop = vec![member(1.0), member(2.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 10_000;
        let wins = (0..n).filter(|_| tournament_select(&pop, 2, &mut rng) == 1).count();
        let sigma = (n as f64 * 0.75 * 0.25).sqrt();
        assert!((wins as f64 - 0.75 * n as f64).abs() < 3.0 * sigma, "{wins}");
    }

    #[test]
    fn unit_tournament_is_uniform() {
        let pop: Vec<_> = (0..4).map(|i| member(i as f64)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[tournament_select(&pop, 1, &mut rng)] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 4.0).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn large_tournament_finds_best() {
        let pop: Vec<_> = [3.0, 9.0, 1.0].iter().map(|&f| member(f)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        // With k = 64 the chance of never sampling index 1 is (2/3)^64.
        assert_eq!(tournament_select(&pop, 64, &mut rng), 1);
    }

    #[test]
    fn tournament_ties_go_to_first_sample() {
        let pop = vec![member(1.0), member(1.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut rng2 = rng.clone();
        for _ in 0..100 {
            let first = rng2.random_range(0..2usize);
            let _ = rng2.random_range(0..2usize);
            assert_eq!(tournament_select(&pop, 2, &mut rng), first);
        }
    }
}
