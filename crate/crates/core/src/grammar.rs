//! Integer genotypes and their translation into oblique decision trees.
//!
//! The grammar is fixed:
//!
//! ```text
//! Root      -> If
//! If        -> if Condition then Action else Action
//! Condition -> const·input_0 + ... + const·input_{n-1} < const
//! Action    -> leaf | If
//! const     -> one of an evenly spaced set of coefficients
//! ```
//!
//! Genes are read left to right along the leftmost derivation: the
//! condition's coefficients (weights, then threshold), the true-branch
//! action and everything it expands into, then the false-branch action.
//! Each choice among `l` alternatives takes alternative `gene mod l`.

use std::fmt;

use rand::Rng;

use crate::dtree::{DecisionTree, Node, NodeId};
use crate::{Error, Result};

/// Alternatives of the `Action` rule: `leaf` (0) or `If` (1).
pub const ACTION_ALTERNATIVES: u32 = 2;

/// Fixed-length integer genome.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genotype {
    genes: Vec<u32>,
    max_value: u32,
}

impl Genotype {
    pub fn new(genes: Vec<u32>, max_value: u32) -> Result<Self> {
        if let Some((index, &value)) = genes.iter().enumerate().find(|(_, &g)| g > max_value) {
            return Err(Error::GeneOutOfRange { index, value, max_value });
        }
        Ok(Self { genes, max_value })
    }

    /// Uniform random genotype with genes in `[0, max_value]`.
    pub fn random<R: Rng + ?Sized>(size: usize, max_value: u32, rng: &mut R) -> Self {
        let genes = (0..size).map(|_| rng.random_range(0..=max_value)).collect();
        Self { genes, max_value }
    }

    /// Parses the semicolon-separated text form, e.g. `5;2;0;8`.
    pub fn parse(text: &str, max_value: u32) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::GenotypeText("empty genotype".into()));
        }
        let genes = text
            .split(';')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<u32>().map_err(|e| Error::GenotypeText(format!("{tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(genes, max_value)
    }

    pub fn genes(&self) -> &[u32] {
        &self.genes
    }

    pub(crate) fn genes_mut(&mut self) -> &mut [u32] {
        &mut self.genes
    }

    pub fn max_value(&self) -> u32 {
        self.max_value
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.genes.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// The oblique grammar, parameterized by the task's input and action counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ObliqueGrammar {
    n_inputs: usize,
    n_actions: usize,
    consts: Vec<f64>,
}

impl ObliqueGrammar {
    /// Coefficients from -1 to +1 with step 0.001 (2001 values).
    pub fn oblique(n_inputs: usize, n_actions: usize) -> Self {
        Self::with_const_range(n_inputs, n_actions, -1.0, 1.0, 2000)
    }

    /// `steps + 1` evenly spaced coefficients from `low` to `high` inclusive.
    pub fn with_const_range(n_inputs: usize, n_actions: usize, low: f64, high: f64, steps: usize) -> Self {
        assert!(n_inputs >= 1 && n_actions >= 1, "grammar needs inputs and actions");
        assert!(steps >= 1 && low < high, "const range must be non-degenerate");
        let span = high - low;
        let consts =
            (0..=steps).map(|i| if i == steps { high } else { low + span * i as f64 / steps as f64 }).collect();
        Self { n_inputs, n_actions, consts }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn consts(&self) -> &[f64] {
        &self.consts
    }

    /// Largest alternative count of any rule. Genotype max values must exceed it.
    pub fn max_alternatives(&self) -> usize {
        self.consts.len().max(ACTION_ALTERNATIVES as usize)
    }

    /// Genes consumed by one `If` expansion, excluding the subtrees it spawns.
    pub fn genes_per_condition(&self) -> usize {
        self.n_inputs + 1 + 2
    }

    /// Decodes a genotype into a tree with zeroed, uninitialized Q tables.
    ///
    /// Fails with [`Error::InvalidGenotype`] when the genes run out before
    /// the derivation completes. There is no wrap-around.
    pub fn translate(&self, genotype: &Genotype) -> Result<DecisionTree> {
        self.translate_counted(genotype).map(|(tree, _)| tree)
    }

    /// Like [`translate`](Self::translate), also returning the number of
    /// genes consumed.
    pub fn translate_counted(&self, genotype: &Genotype) -> Result<(DecisionTree, usize)> {
        let mut reader = GeneReader { genes: genotype.genes(), pos: 0 };
        let mut nodes: Vec<Node> = Vec::new();
        // Pending action slots: (parent condition, is_true_branch). The true
        // branch is pushed last so it is expanded first.
        let mut pending: Vec<(NodeId, bool)> = Vec::new();

        let root = self.push_condition(&mut nodes, &mut reader)?;
        pending.push((root, false));
        pending.push((root, true));

        while let Some((parent, branch)) = pending.pop() {
            let choice = reader.choose(ACTION_ALTERNATIVES)?;
            let child = if choice == 0 {
                nodes.push(Node::Leaf { q_values: vec![0.0; self.n_actions] });
                nodes.len() - 1
            } else {
                let id = self.push_condition(&mut nodes, &mut reader)?;
                pending.push((id, false));
                pending.push((id, true));
                id
            };
            if let Node::Condition { on_true, on_false, .. } = &mut nodes[parent] {
                if branch {
                    *on_true = child;
                } else {
                    *on_false = child;
                }
            }
        }

        let consumed = reader.pos;
        Ok((DecisionTree::from_nodes(nodes, self.n_inputs, self.n_actions), consumed))
    }

    fn push_condition(&self, nodes: &mut Vec<Node>, reader: &mut GeneReader<'_>) -> Result<NodeId> {
        let l = self.consts.len() as u32;
        let weights = (0..self.n_inputs)
            .map(|_| reader.choose(l).map(|c| self.consts[c as usize]))
            .collect::<Result<Vec<_>>>()?;
        let threshold = self.consts[reader.choose(l)? as usize];
        nodes.push(Node::Condition {
            weights,
            threshold,
            // Patched once the branches are expanded.
            on_true: NodeId::MAX,
            on_false: NodeId::MAX,
        });
        Ok(nodes.len() - 1)
    }
}

struct GeneReader<'a> {
    genes: &'a [u32],
    pos: usize,
}

impl GeneReader<'_> {
    fn choose(&mut self, alternatives: u32) -> Result<u32> {
        let g =
            *self.genes.get(self.pos).ok_or(Error::InvalidGenotype { consumed: self.pos, len: self.genes.len() })?;
        self.pos += 1;
        Ok(g % alternatives)
    }
}
