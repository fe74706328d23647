//! The MAP-Elites grid.
//!
//! Two dimensions, each split into `bins` equally wide bins: behavioral
//! (action entropy) first, structural (simplified depth) second.

use std::fmt;
use std::str::FromStr;

use super::Individual;
use crate::eval::Descriptor;
use crate::grammar::Genotype;
use crate::Error;

/// What to do with descriptors outside the grid bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OobPolicy {
    #[default]
    Discard,
    Clamp,
}

impl fmt::Display for OobPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OobPolicy::Discard => "discard",
            OobPolicy::Clamp => "clamp",
        })
    }
}

impl FromStr for OobPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "discard" => Ok(OobPolicy::Discard),
            "clamp" => Ok(OobPolicy::Clamp),
            other => Err(Error::Config(format!("oob must be discard or clamp, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub bins: usize,
    pub behavioral: (f64, f64),
    pub structural: (f64, f64),
    pub oob: OobPolicy,
}

impl GridSpec {
    pub fn cartpole() -> Self {
        Self { bins: 10, behavioral: (0.8, 1.0), structural: (1.0, 10.0), oob: OobPolicy::Discard }
    }

    pub fn mountain_car() -> Self {
        Self { behavioral: (0.0, 1.0), ..Self::cartpole() }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.bins == 0 {
            return Err(Error::Config("bins_per_dim must be positive".into()));
        }
        for (name, (lo, hi)) in [("behavioral", self.behavioral), ("structural", self.structural)] {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::Config(format!("{name} bounds must satisfy min < max")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutOfBounds;

impl fmt::Display for OutOfBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("descriptor outside the archive bounds")
    }
}

impl std::error::Error for OutOfBounds {}

fn bin(value: f64, (lo, hi): (f64, f64), bins: usize, oob: OobPolicy) -> Result<usize, OutOfBounds> {
    let value = match oob {
        OobPolicy::Clamp if !value.is_nan() => value.clamp(lo, hi),
        _ => value,
    };
    if !(lo..=hi).contains(&value) {
        return Err(OutOfBounds);
    }
    if value == hi {
        return Ok(bins - 1);
    }
    let width = (hi - lo) / bins as f64;
    Ok((((value - lo) / width).floor() as usize).min(bins - 1))
}

/// Grid cell `(entropy_bin, depth_bin)` of a descriptor.
pub fn coords(descriptor: &Descriptor, grid: &GridSpec) -> Result<(usize, usize), OutOfBounds> {
    Ok((
        bin(descriptor.entropy, grid.behavioral, grid.bins, grid.oob)?,
        bin(descriptor.depth as f64, grid.structural, grid.bins, grid.oob)?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Elite {
    pub genotype: Genotype,
    pub fitness: f64,
    pub descriptor: Descriptor,
    pub eval_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    grid: GridSpec,
    cells: Vec<Option<Elite>>,
}

impl Archive {
    pub fn new(grid: GridSpec) -> Self {
        Self { grid, cells: vec![None; grid.bins * grid.bins] }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn capacity(&self) -> usize {
        self.cells.len()
    }

    pub fn get(&self, cell: (usize, usize)) -> Option<&Elite> {
        self.cells.get(self.slot(cell)?)?.as_ref()
    }

    fn slot(&self, (e, d): (usize, usize)) -> Option<usize> {
        (e < self.grid.bins && d < self.grid.bins).then_some(e * self.grid.bins + d)
    }

    /// Stores `elite` at `cell` if the cell is empty or `elite` is strictly
    /// fitter than the incumbent.
    pub fn insert(&mut self, cell: (usize, usize), elite: Elite) -> bool {
        let slot = self.slot(cell).expect("cell outside the grid");
        match &self.cells[slot] {
            Some(inc) if elite.fitness <= inc.fitness => false,
            _ => {
                self.cells[slot] = Some(elite);
                true
            }
        }
    }

    /// Inserts an evaluated individual. Invalid individuals and descriptors
    /// out of bounds are dropped.
    pub fn add(&mut self, ind: &Individual) -> bool {
        let Some(descriptor) = ind.descriptor else {
            return false;
        };
        let Ok(cell) = coords(&descriptor, &self.grid) else {
            return false;
        };
        self.insert(
            cell,
            Elite { genotype: ind.genotype.clone(), fitness: ind.fitness, descriptor, eval_seed: ind.eval_seed },
        )
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(Option::is_none)
    }

    pub fn coverage(&self) -> f64 {
        self.len() as f64 / self.capacity() as f64
    }

    /// Occupied cells in `(entropy_bin, depth_bin)` order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &Elite)> + '_ {
        let m = self.grid.bins;
        self.cells.iter().enumerate().filter_map(move |(i, c)| c.as_ref().map(|e| ((i / m, i % m), e)))
    }

    /// Fittest elite; the first in cell order on ties.
    pub fn best(&self) -> Option<((usize, usize), &Elite)> {
        self.iter().fold(None, |acc, (cell, e)| match acc {
            Some((_, b)) if b.fitness >= e.fitness => acc,
            _ => Some((cell, e)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(entropy: f64, depth: usize) -> Descriptor {
        Descriptor { entropy, depth }
    }

    fn elite(fitness: f64) -> Elite {
        Elite { genotype: Genotype::new(vec![1, 2], 10).unwrap(), fitness, descriptor: d(0.5, 1), eval_seed: 0 }
    }

    #[test]
    fn entropy_binning() {
        let g = GridSpec::cartpole();
        assert_eq!(coords(&d(0.85, 1), &g), Ok((2, 0)));
        assert_eq!(coords(&d(0.8, 1), &g), Ok((0, 0)));
        assert_eq!(coords(&d(1.0, 1), &g), Ok((9, 0)));
        assert_eq!(coords(&d(0.79, 1), &g), Err(OutOfBounds));
        let mc = GridSpec::mountain_car();
        assert_eq!(coords(&d(2f64.ln() / 3f64.ln(), 1), &mc), Ok((6, 0)));
        assert_eq!(coords(&d(0.0, 1), &mc), Ok((0, 0)));
    }

    #[test]
    fn depth_binning_is_depth_minus_one() {
        let g = GridSpec::mountain_car();
        for depth in 1..=10 {
            assert_eq!(coords(&d(0.5, depth), &g).unwrap().1, depth - 1);
        }
        assert_eq!(coords(&d(0.5, 0), &g), Err(OutOfBounds));
        assert_eq!(coords(&d(0.5, 11), &g), Err(OutOfBounds));
    }

    #[test]
    fn clamp_policy() {
        let g = GridSpec { oob: OobPolicy::Clamp, ..GridSpec::cartpole() };
        assert_eq!(coords(&d(0.3, 0), &g), Ok((0, 0)));
        assert_eq!(coords(&d(0.9, 40), &g), Ok((5, 9)));
    }

    #[test]
    fn strict_improvement_rule() {
        let mut a = Archive::new(GridSpec::cartpole());
        assert!(a.insert((3, 4), elite(400.0)));
        assert!(!a.insert((3, 4), elite(400.0)));
        assert!(!a.insert((3, 4), elite(10.0)));
        assert!(a.insert((3, 4), elite(475.0)));
        assert_eq!(a.get((3, 4)).unwrap().fitness, 475.0);
        assert_eq!(a.len(), 1);
        assert_eq!(a.coverage(), 0.01);
        assert!(a.get((10, 0)).is_none());
    }

    #[test]
    fn best_and_iteration_order() {
        let mut a = Archive::new(GridSpec::cartpole());
        a.insert((9, 0), elite(5.0));
        a.insert((0, 9), elite(5.0));
        a.insert((4, 4), elite(1.0));
        let cells: Vec<_> = a.iter().map(|(c, _)| c).collect();
        assert_eq!(cells, vec![(0, 9), (4, 4), (9, 0)]);
        assert_eq!(a.best().unwrap().0, (0, 9));
    }
}
