//! Under-powered car in a valley, MountainCar-v0 rules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Environment, Observation, StepResult};

pub mod consts {
    pub const MIN_POSITION: f64 = -1.2;
    pub const MAX_POSITION: f64 = 0.6;
    pub const MAX_SPEED: f64 = 0.07;
    pub const GOAL_POSITION: f64 = 0.5;
    pub const FORCE: f64 = 0.001;
    pub const GRAVITY: f64 = 0.0025;
    pub const MAX_STEPS: u32 = 200;
    /// Initial position is uniform in `[RESET_LOW, RESET_HIGH)`, velocity 0.
    pub const RESET_LOW: f64 = -0.6;
    pub const RESET_HIGH: f64 = -0.4;
    /// Bounds used to scale (position, velocity) into `[0, 1]`.
    pub const NORMALIZATION: [(f64, f64); 2] = [(MIN_POSITION, MAX_POSITION), (-MAX_SPEED, MAX_SPEED)];
}

use consts::*;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MountainCarState {
    pub position: f64,
    pub velocity: f64,
    pub steps: u32,
}

#[derive(Debug, Clone, Default)]
pub struct MountainCar {
    state: MountainCarState,
    done: bool,
}

impl MountainCar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> MountainCarState {
        self.state
    }

    pub fn set_state(&mut self, state: MountainCarState) {
        self.state = state;
        self.done = false;
    }

    fn observation(&self) -> Observation {
        Observation::new(&[self.state.position, self.state.velocity])
    }
}

impl Environment for MountainCar {
    fn n_inputs(&self) -> usize {
        2
    }

    fn n_actions(&self) -> usize {
        3
    }

    fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.state = MountainCarState { position: rng.random_range(RESET_LOW..RESET_HIGH), velocity: 0.0, steps: 0 };
        self.done = false;
        self.observation()
    }

    fn step(&mut self, action: usize) -> StepResult {
        assert!(!self.done, "step called on a finished mountain-car episode");
        assert!(action < 3, "mountain-car action must be 0, 1 or 2, got {action}");
        let s = &mut self.state;
        s.velocity += (action as f64 - 1.0) * FORCE - (3.0 * s.position).cos() * GRAVITY;
        s.velocity = s.velocity.clamp(-MAX_SPEED, MAX_SPEED);
        s.position += s.velocity;
        s.position = s.position.clamp(MIN_POSITION, MAX_POSITION);
        if s.position == MIN_POSITION && s.velocity < 0.0 {
            s.velocity = 0.0;
        }
        s.steps += 1;
        self.done = s.position >= GOAL_POSITION || s.steps >= MAX_STEPS;
        StepResult { observation: self.observation(), reward: -1.0, done: self.done }
    }
}
