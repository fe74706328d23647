//! Fitness and descriptor evaluation of a genotype.
//!
//! An evaluation translates the genotype, draws the leaf Q tables once, then
//! plays `n_episodes` episodes with learning switched on. Fitness is the mean
//! episode return; the descriptor is the entropy of the pooled action counts
//! together with the depth of the tree after pruning unvisited nodes.
//!
//! Seeds: episode `e` resets the task with `seed::mix(eval_seed, e)`; Q
//! initialization and exploration draw from one stream seeded with
//! `seed::mix(eval_seed, LEARNER_STREAM)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dtree::{DecisionTree, NodeId, RlParams};
use crate::envs::{normalize_observation, CartPole, EnvKind, Environment, MountainCar, Observation};
use crate::grammar::{Genotype, ObliqueGrammar};
use crate::seed;

const LEARNER_STREAM: u64 = u64::MAX;

/// Location of an individual in the feature space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptor {
    pub entropy: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationDetail {
    pub action_counts: Vec<u64>,
    pub entropy: f64,
    /// Depth after simplification.
    pub tree_depth: usize,
    pub simplified_tree: DecisionTree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    /// Mean episode return, or the task's worst return for invalid genotypes.
    pub fitness: f64,
    pub eval_seed: u64,
    /// `None` when the genotype failed to translate.
    pub detail: Option<EvaluationDetail>,
}

impl EvaluationResult {
    pub fn is_valid(&self) -> bool {
        self.detail.is_some()
    }

    /// `(entropy, depth)`, absent for invalid individuals.
    pub fn descriptor(&self) -> Option<Descriptor> {
        self.detail.as_ref().map(|d| Descriptor { entropy: d.entropy, depth: d.tree_depth })
    }
}

/// Normalized Shannon entropy of an action histogram, log base `counts.len()`.
///
/// Zero counts contribute nothing. Panics when every count is zero.
pub fn entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    assert!(total > 0, "entropy of an empty action histogram");
    let n = counts.len();
    if n < 2 {
        return 0.0;
    }
    let total_f = total as f64;
    // Σ c_i ln(N / c_i) / (N ln n); exact for uniform histograms.
    let sum: f64 = counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 * (total_f / c as f64).ln()).sum();
    (sum / (total_f * (n as f64).ln())).clamp(0.0, 1.0)
}

/// Per-step record of one rollout, for replay checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub observations: Vec<Observation>,
    pub leaves: Vec<NodeId>,
    pub actions: Vec<usize>,
}

/// Outcome of playing a fixed tree for a number of episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub returns: Vec<f64>,
    pub action_counts: Vec<u64>,
    pub per_episode_counts: Vec<Vec<u64>>,
}

impl Rollout {
    pub fn mean_return(&self) -> f64 {
        self.returns.iter().sum::<f64>() / self.returns.len() as f64
    }
}

/// Plays `tree` for `n_episodes`, learning online.
///
/// Q values are used as they are; call [`DecisionTree::init_q`] first for a
/// fresh tree. `rng` drives exploration.
pub fn rollout(
    tree: &mut DecisionTree,
    env: EnvKind,
    params: &RlParams,
    n_episodes: usize,
    eval_seed: u64,
    rng: &mut ChaCha8Rng,
    trace: Option<&mut Trace>,
) -> Rollout {
    match env {
        EnvKind::CartPole => play(tree, &mut CartPole::new(), None, params, n_episodes, eval_seed, rng, trace),
        EnvKind::MountainCar => {
            play(tree, &mut MountainCar::new(), env.normalization(), params, n_episodes, eval_seed, rng, trace)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn play<E: Environment>(
    tree: &mut DecisionTree,
    env: &mut E,
    bounds: Option<&[(f64, f64)]>,
    params: &RlParams,
    n_episodes: usize,
    eval_seed: u64,
    rng: &mut ChaCha8Rng,
    mut trace: Option<&mut Trace>,
) -> Rollout {
    assert!(n_episodes >= 1);
    assert_eq!(tree.n_inputs(), env.n_inputs());
    assert_eq!(tree.n_actions(), env.n_actions());
    let prepare = |obs: Observation| match bounds {
        Some(b) => normalize_observation(&obs, b),
        None => obs,
    };
    let mut returns = Vec::with_capacity(n_episodes);
    let mut per_episode_counts = Vec::with_capacity(n_episodes);
    let mut pooled = vec![0u64; env.n_actions()];

    for episode in 0..n_episodes {
        let mut counts = vec![0u64; env.n_actions()];
        let mut ret = 0.0;
        let mut obs = prepare(env.reset(seed::mix(eval_seed, episode as u64)));
        let mut leaf = tree.route(&obs);
        loop {
            let action = tree.select_action(leaf, params.epsilon, rng);
            if let Some(t) = trace.as_deref_mut() {
                t.observations.push(obs);
                t.leaves.push(leaf);
                t.actions.push(action);
            }
            let step = env.step(action);
            counts[action] += 1;
            ret += step.reward;
            if step.done {
                tree.q_update(leaf, action, step.reward, None, params);
                break;
            }
            obs = prepare(step.observation);
            let next = tree.route(&obs);
            tree.q_update(leaf, action, step.reward, Some(next), params);
            leaf = next;
        }
        for (p, c) in pooled.iter_mut().zip(&counts) {
            *p += c;
        }
        returns.push(ret);
        per_episode_counts.push(counts);
    }
    Rollout { returns, action_counts: pooled, per_episode_counts }
}

/// Scores a decision tree whose Q values are already set.
pub fn evaluate_tree(
    mut tree: DecisionTree,
    env: EnvKind,
    params: &RlParams,
    n_episodes: usize,
    eval_seed: u64,
    rng: &mut ChaCha8Rng,
) -> EvaluationResult {
    let roll = rollout(&mut tree, env, params, n_episodes, eval_seed, rng, None);
    let simplified = tree.simplify();
    EvaluationResult {
        fitness: roll.mean_return(),
        eval_seed,
        detail: Some(EvaluationDetail {
            entropy: entropy(&roll.action_counts),
            action_counts: roll.action_counts,
            tree_depth: simplified.depth(),
            simplified_tree: simplified,
        }),
    }
}

/// Everything needed to score genotypes on one task.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub grammar: ObliqueGrammar,
    pub env: EnvKind,
    pub rl: RlParams,
    pub n_episodes: usize,
}

impl Evaluator {
    pub fn new(env: EnvKind, rl: RlParams, n_episodes: usize) -> Self {
        Self { grammar: ObliqueGrammar::oblique(env.n_inputs(), env.n_actions()), env, rl, n_episodes }
    }

    pub fn learner_rng(eval_seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed::mix(eval_seed, LEARNER_STREAM))
    }

    pub fn evaluate(&self, genotype: &Genotype, eval_seed: u64) -> EvaluationResult {
        let Ok(mut tree) = self.grammar.translate(genotype) else {
            return EvaluationResult { fitness: self.env.worst_return(), eval_seed, detail: None };
        };
        let mut rng = Self::learner_rng(eval_seed);
        tree.init_q(&self.rl, &mut rng);
        evaluate_tree(tree, self.env, &self.rl, self.n_episodes, eval_seed, &mut rng)
    }
}
