//! Seedable classic-control tasks.
//!
//! Dynamics, thresholds and reset distributions follow the reference
//! CartPole-v1 and MountainCar-v0 definitions; every constant is listed in
//! [`cartpole::consts`] and [`mountain_car::consts`].

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::Error;

pub mod cartpole;
pub mod mountain_car;

pub use cartpole::CartPole;
pub use mountain_car::MountainCar;

/// Largest observation width of any supported task.
pub const MAX_INPUTS: usize = 4;

/// Fixed-capacity observation vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    values: [f64; MAX_INPUTS],
    len: usize,
}

impl Observation {
    pub fn new(values: &[f64]) -> Self {
        assert!(values.len() <= MAX_INPUTS);
        let mut buf = [0.0; MAX_INPUTS];
        buf[..values.len()].copy_from_slice(values);
        Self { values: buf, len: values.len() }
    }
}

impl Deref for Observation {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values[..self.len]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
}

pub trait Environment {
    fn n_inputs(&self) -> usize;
    fn n_actions(&self) -> usize;
    /// Starts a new episode; the initial state is a pure function of `seed`.
    fn reset(&mut self, seed: u64) -> Observation;
    /// Advances one timestep. Panics if the episode has already ended.
    fn step(&mut self, action: usize) -> StepResult;
}

/// Scales each component to `[0, 1]` with `(x - min) / (max - min)`.
pub fn normalize_observation(raw: &[f64], bounds: &[(f64, f64)]) -> Observation {
    assert_eq!(raw.len(), bounds.len());
    let mut out = [0.0; MAX_INPUTS];
    for (o, (x, (lo, hi))) in out.iter_mut().zip(raw.iter().zip(bounds)) {
        debug_assert!(lo < hi);
        *o = (x - lo) / (hi - lo);
    }
    Observation { values: out, len: raw.len() }
}

/// Task selector used by configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvKind {
    CartPole,
    MountainCar,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::CartPole => "cartpole",
            EnvKind::MountainCar => "mountaincar",
        }
    }

    pub fn n_inputs(self) -> usize {
        match self {
            EnvKind::CartPole => 4,
            EnvKind::MountainCar => 2,
        }
    }

    pub fn n_actions(self) -> usize {
        match self {
            EnvKind::CartPole => 2,
            EnvKind::MountainCar => 3,
        }
    }

    pub fn action_names(self) -> &'static [&'static str] {
        match self {
            EnvKind::CartPole => &["Push Left", "Push Right"],
            EnvKind::MountainCar => &["Accelerate Left", "Not Accelerate", "Accelerate Right"],
        }
    }

    /// Lowest possible episode return, used as the fitness of invalid genotypes.
    pub fn worst_return(self) -> f64 {
        match self {
            EnvKind::CartPole => 0.0,
            EnvKind::MountainCar => -(mountain_car::consts::MAX_STEPS as f64),
        }
    }

    /// Mean return over 100 episodes at which the task counts as solved.
    pub fn solved_threshold(self) -> f64 {
        match self {
            EnvKind::CartPole => 475.0,
            EnvKind::MountainCar => -110.0,
        }
    }

    /// Observation bounds applied before routing, if the task normalizes.
    pub fn normalization(self) -> Option<&'static [(f64, f64)]> {
        match self {
            EnvKind::CartPole => None,
            EnvKind::MountainCar => Some(&mountain_car::consts::NORMALIZATION),
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "cartpole" => Ok(EnvKind::CartPole),
            "mountaincar" => Ok(EnvKind::MountainCar),
            other => Err(Error::Config(format!("unknown environment {other:?} (expected cartpole or mountaincar)"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_examples() {
        let b = mountain_car::consts::NORMALIZATION;
        assert_eq!(normalize_observation(&[-1.2, 0.0], &b)[0], 0.0);
        assert_eq!(normalize_observation(&[-1.2, 0.0], &b)[1], 0.5);
        let goal = normalize_observation(&[0.5, 0.07], &b);
        assert!((goal[0] - 1.7 / 1.8).abs() < 1e-12);
        assert!((goal[0] - 0.9444).abs() < 1e-4);
        assert_eq!(goal[1], 1.0);
    }

    #[test]
    fn task_shapes() {
        assert_eq!((EnvKind::CartPole.n_inputs(), EnvKind::CartPole.n_actions()), (4, 2));
        assert_eq!((EnvKind::MountainCar.n_inputs(), EnvKind::MountainCar.n_actions()), (2, 3));
        assert_eq!(CartPole::new().n_inputs(), 4);
        assert_eq!(MountainCar::new().n_actions(), 3);
        assert_eq!("mountaincar".parse::<EnvKind>().unwrap(), EnvKind::MountainCar);
        assert!("lunarlander".parse::<EnvKind>().is_err());
    }
}
