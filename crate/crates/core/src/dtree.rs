//! Oblique decision trees with tabular Q-learning on the leaves.
//!
//! A tree partitions observation space; every leaf is one tabular state
//! holding a Q value per action. Nodes live in an arena indexed by
//! [`NodeId`], with the root at index 0 and nodes stored in pre-order
//! (true branch before false branch).

use std::fmt::Write as _;

use rand::Rng;

use crate::{Error, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Tests `dot(weights, observation) < threshold`.
    Condition {
        weights: Vec<f64>,
        threshold: f64,
        on_true: NodeId,
        on_false: NodeId,
    },
    Leaf {
        q_values: Vec<f64>,
    },
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }
}

/// Q-learning settings for the leaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlParams {
    pub epsilon: f64,
    pub learning_rate: f64,
    /// Not given by the published setup; 0.9 by default.
    pub discount: f64,
    pub q_init_low: f64,
    pub q_init_high: f64,
}

impl RlParams {
    pub const DEFAULT_DISCOUNT: f64 = 0.9;

    pub fn cartpole() -> Self {
        Self {
            epsilon: 0.05,
            learning_rate: 0.001,
            discount: Self::DEFAULT_DISCOUNT,
            q_init_low: -1.0,
            q_init_high: 1.0,
        }
    }

    pub fn mountain_car() -> Self {
        Self { epsilon: 0.01, ..Self::cartpole() }
    }

    /// Greedy policy with learning switched off.
    pub fn frozen() -> Self {
        Self { epsilon: 0.0, learning_rate: 0.0, discount: 0.0, q_init_low: 0.0, q_init_high: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be > 0");
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return bad("discount must lie in [0, 1]");
        }
        if !self.q_init_low.is_finite() || !self.q_init_high.is_finite() || self.q_init_low > self.q_init_high {
            return bad("q_init_low must not exceed q_init_high");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    visited: Vec<bool>,
    n_inputs: usize,
    n_actions: usize,
}

impl DecisionTree {
    pub(crate) fn from_nodes(nodes: Vec<Node>, n_inputs: usize, n_actions: usize) -> Self {
        let visited = vec![false; nodes.len()];
        Self { nodes, visited, n_inputs, n_actions }
    }

    /// A single leaf with the given Q values.
    pub fn leaf(n_inputs: usize, q_values: Vec<f64>) -> Self {
        assert!(!q_values.is_empty(), "a leaf needs at least one action");
        let n_actions = q_values.len();
        Self::from_nodes(vec![Node::Leaf { q_values }], n_inputs, n_actions)
    }

    /// Joins two subtrees under a new root condition.
    pub fn condition(weights: Vec<f64>, threshold: f64, on_true: Self, on_false: Self) -> Self {
        assert_eq!(weights.len(), on_true.n_inputs, "weight count must match n_inputs");
        assert_eq!(on_true.n_inputs, on_false.n_inputs);
        assert_eq!(on_true.n_actions, on_false.n_actions);
        let (n_inputs, n_actions) = (on_true.n_inputs, on_true.n_actions);
        let true_len = on_true.nodes.len();
        let shift = |node: Node, by: usize| match node {
            Node::Condition { weights, threshold, on_true, on_false } => {
                Node::Condition { weights, threshold, on_true: on_true + by, on_false: on_false + by }
            }
            leaf => leaf,
        };
        let mut nodes = Vec::with_capacity(1 + true_len + on_false.nodes.len());
        nodes.push(Node::Condition { weights, threshold, on_true: 1, on_false: 1 + true_len });
        nodes.extend(on_true.nodes.into_iter().map(|n| shift(n, 1)));
        nodes.extend(on_false.nodes.into_iter().map(|n| shift(n, 1 + true_len)));
        Self::from_nodes(nodes, n_inputs, n_actions)
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn condition_count(&self) -> usize {
        self.nodes.len() - self.leaf_count()
    }

    pub fn is_visited(&self, id: NodeId) -> bool {
        self.visited[id]
    }

    pub fn clear_visits(&mut self) {
        self.visited.iter_mut().for_each(|v| *v = false);
    }

    /// Leaf reached by `observation`, without touching visit flags.
    pub fn leaf_for(&self, observation: &[f64]) -> NodeId {
        let mut id = self.root();
        loop {
            match &self.nodes[id] {
                Node::Condition { weights, threshold, on_true, on_false } => {
                    id = if dot(weights, observation) < *threshold { *on_true } else { *on_false };
                }
                Node::Leaf { .. } => return id,
            }
        }
    }

    /// Descends from the root to a leaf, marking every node on the path as visited.
    pub fn route(&mut self, observation: &[f64]) -> NodeId {
        debug_assert_eq!(observation.len(), self.n_inputs);
        let mut id = self.root();
        loop {
            self.visited[id] = true;
            match &self.nodes[id] {
                Node::Condition { weights, threshold, on_true, on_false } => {
                    id = if dot(weights, observation) < *threshold { *on_true } else { *on_false };
                }
                Node::Leaf { .. } => return id,
            }
        }
    }

    /// Draws every leaf's Q values uniformly from `[q_init_low, q_init_high]`.
    pub fn init_q<R: Rng + ?Sized>(&mut self, params: &RlParams, rng: &mut R) {
        let (lo, hi) = (params.q_init_low, params.q_init_high);
        for node in &mut self.nodes {
            if let Node::Leaf { q_values } = node {
                for q in q_values.iter_mut() {
                    *q = if lo == hi { lo } else { rng.random_range(lo..=hi) };
                }
            }
        }
    }

    pub fn q_values(&self, leaf: NodeId) -> &[f64] {
        match &self.nodes[leaf] {
            Node::Leaf { q_values } => q_values,
            Node::Condition { .. } => panic!("node {leaf} is not a leaf"),
        }
    }

    pub fn q_values_mut(&mut self, leaf: NodeId) -> &mut [f64] {
        match &mut self.nodes[leaf] {
            Node::Leaf { q_values } => q_values,
            Node::Condition { .. } => panic!("node {leaf} is not a leaf"),
        }
    }

    /// Argmax of the leaf's Q values, lowest index on ties.
    pub fn greedy_action(&self, leaf: NodeId) -> usize {
        argmax(self.q_values(leaf))
    }

    /// ε-greedy choice: uniform random action with probability `epsilon`,
    /// otherwise the greedy one.
    pub fn select_action<R: Rng + ?Sized>(&self, leaf: NodeId, epsilon: f64, rng: &mut R) -> usize {
        if epsilon > 0.0 && rng.random::<f64>() < epsilon {
            rng.random_range(0..self.n_actions)
        } else {
            self.greedy_action(leaf)
        }
    }

    /// One-step Q-learning update of `leaf`'s value for `action`.
    ///
    /// `next` is the leaf reached after the transition, or `None` when the
    /// episode ended (bootstrap 0).
    pub fn q_update(&mut self, leaf: NodeId, action: usize, reward: f64, next: Option<NodeId>, params: &RlParams) {
        if params.learning_rate == 0.0 {
            return;
        }
        let bootstrap = match next {
            Some(n) => self.q_values(n).iter().copied().fold(f64::NEG_INFINITY, f64::max),
            None => 0.0,
        };
        let q = &mut self.q_values_mut(leaf)[action];
        *q += params.learning_rate * (reward + params.discount * bootstrap - *q);
    }

    /// Follows single-visited-child conditions down to the node that
    /// replaces `id` in the simplified tree.
    fn collapse(&self, mut id: NodeId) -> NodeId {
        while let Node::Condition { on_true, on_false, .. } = &self.nodes[id] {
            match (self.visited[*on_true], self.visited[*on_false]) {
                (true, false) => id = *on_true,
                (false, true) => id = *on_false,
                _ => break,
            }
        }
        id
    }

    /// Copy of the tree with unvisited subtrees removed.
    ///
    /// A condition with exactly one visited child is replaced by that child.
    /// Q values and visit flags of the surviving nodes are kept. A tree whose
    /// root was never visited is returned unchanged.
    pub fn simplify(&self) -> DecisionTree {
        if !self.visited[self.root()] {
            return self.clone();
        }
        let mut nodes: Vec<Node> = Vec::new();
        let mut visited: Vec<bool> = Vec::new();
        let mut stack: Vec<(NodeId, Option<(NodeId, bool)>)> = vec![(self.collapse(self.root()), None)];
        while let Some((old, parent)) = stack.pop() {
            let new_id = nodes.len();
            let copy = match &self.nodes[old] {
                Node::Condition { weights, threshold, on_true, on_false } => {
                    stack.push((self.collapse(*on_false), Some((new_id, false))));
                    stack.push((self.collapse(*on_true), Some((new_id, true))));
                    Node::Condition {
                        weights: weights.clone(),
                        threshold: *threshold,
                        on_true: NodeId::MAX,
                        on_false: NodeId::MAX,
                    }
                }
                leaf => leaf.clone(),
            };
            nodes.push(copy);
            visited.push(self.visited[old]);
            if let Some((p, branch)) = parent {
                if let Node::Condition { on_true, on_false, .. } = &mut nodes[p] {
                    if branch {
                        *on_true = new_id;
                    } else {
                        *on_false = new_id;
                    }
                }
            }
        }
        DecisionTree { nodes, visited, n_inputs: self.n_inputs, n_actions: self.n_actions }
    }

    /// Number of conditions on the longest root-to-leaf path. A single leaf
    /// has depth 0; one condition over two leaves has depth 1.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root(), 0usize)];
        while let Some((id, d)) = stack.pop() {
            match &self.nodes[id] {
                Node::Condition { on_true, on_false, .. } => {
                    stack.push((*on_true, d + 1));
                    stack.push((*on_false, d + 1));
                }
                Node::Leaf { .. } => best = best.max(d),
            }
        }
        best
    }

    /// Indented text form. Conditions print as
    /// `if w0*x0 + w1*x1 ... < t:` with three decimals, leaves as the name of
    /// their greedy action.
    pub fn render(&self, action_names: &[&str]) -> String {
        enum Item {
            Node(NodeId, usize),
            Else(usize),
        }
        let mut out = String::new();
        let mut stack = vec![Item::Node(self.root(), 0)];
        while let Some(item) = stack.pop() {
            match item {
                Item::Else(indent) => {
                    let _ = writeln!(out, "{:indent$}else:", "", indent = indent * 4);
                }
                Item::Node(id, indent) => match &self.nodes[id] {
                    Node::Condition { weights, threshold, on_true, on_false } => {
                        let _ = writeln!(
                            out,
                            "{:pad$}if {} < {:.3}:",
                            "",
                            format_linear(weights),
                            threshold,
                            pad = indent * 4
                        );
                        stack.push(Item::Node(*on_false, indent + 1));
                        stack.push(Item::Else(indent));
                        stack.push(Item::Node(*on_true, indent + 1));
                    }
                    Node::Leaf { q_values } => {
                        let a = argmax(q_values);
                        let _ = match action_names.get(a) {
                            Some(name) => writeln!(out, "{:pad$}{name}", "", pad = indent * 4),
                            None => writeln!(out, "{:pad$}action {a}", "", pad = indent * 4),
                        };
                    }
                },
            }
        }
        out
    }
}

fn format_linear(weights: &[f64]) -> String {
    let mut s = String::new();
    for (i, w) in weights.iter().enumerate() {
        if i == 0 {
            let _ = write!(s, "{w:.3}*x{i}");
        } else if *w < 0.0 {
            let _ = write!(s, " - {:.3}*x{i}", -w);
        } else {
            let _ = write!(s, " + {w:.3}*x{i}");
        }
    }
    s
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
