//! Pole balancing on a cart, CartPole-v1 rules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Environment, Observation, StepResult};

pub mod consts {
    pub const GRAVITY: f64 = 9.8;
    pub const MASS_CART: f64 = 1.0;
    pub const MASS_POLE: f64 = 0.1;
    pub const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
    /// Half the pole length.
    pub const HALF_LENGTH: f64 = 0.5;
    pub const POLE_MASS_LENGTH: f64 = MASS_POLE * HALF_LENGTH;
    pub const FORCE_MAG: f64 = 10.0;
    /// Euler step, seconds.
    pub const TAU: f64 = 0.02;
    /// 12 degrees in radians.
    pub const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
    pub const X_THRESHOLD: f64 = 2.4;
    pub const MAX_STEPS: u32 = 500;
    /// Every state variable starts uniform in `[-RESET_BOUND, RESET_BOUND)`.
    pub const RESET_BOUND: f64 = 0.05;
}

use consts::*;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub steps: u32,
}

#[derive(Debug, Clone, Default)]
pub struct CartPole {
    state: CartPoleState,
    done: bool,
}

impl CartPole {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> CartPoleState {
        self.state
    }

    /// Places the system in an arbitrary live state.
    pub fn set_state(&mut self, state: CartPoleState) {
        self.state = state;
        self.done = false;
    }

    fn observation(&self) -> Observation {
        let s = &self.state;
        Observation::new(&[s.x, s.x_dot, s.theta, s.theta_dot])
    }
}

impl Environment for CartPole {
    fn n_inputs(&self) -> usize {
        4
    }

    fn n_actions(&self) -> usize {
        2
    }

    fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || rng.random_range(-RESET_BOUND..RESET_BOUND);
        self.state = CartPoleState { x: draw(), x_dot: draw(), theta: draw(), theta_dot: draw(), steps: 0 };
        self.done = false;
        self.observation()
    }

    fn step(&mut self, action: usize) -> StepResult {
        assert!(!self.done, "step called on a finished cart-pole episode");
        assert!(action < 2, "cart-pole action must be 0 or 1, got {action}");
        let s = &mut self.state;
        let force = if action == 1 { FORCE_MAG } else { -FORCE_MAG };
        let (sin, cos) = s.theta.sin_cos();

        let temp = (force + POLE_MASS_LENGTH * s.theta_dot * s.theta_dot * sin) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin - cos * temp) / (HALF_LENGTH * (4.0 / 3.0 - MASS_POLE * cos * cos / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos / TOTAL_MASS;

        s.x += TAU * s.x_dot;
        s.x_dot += TAU * x_acc;
        s.theta += TAU * s.theta_dot;
        s.theta_dot += TAU * theta_acc;
        s.steps += 1;

        let fell = s.x.abs() > X_THRESHOLD || s.theta.abs() > THETA_THRESHOLD;
        self.done = fell || s.steps >= MAX_STEPS;
        StepResult { observation: self.observation(), reward: 1.0, done: self.done }
    }
}
