//! Quality-diversity search over interpretable control policies.
//!
//! Policies are oblique decision trees whose leaves learn their action with
//! ε-greedy Q-learning while the tree structure is evolved. Two optimizers
//! share the same genotype encoding and variation operators:
//!
//! * an elitist grammatical-evolution loop ([`evo::run_ge`]), and
//! * MAP-Elites over a (action entropy × simplified depth) grid
//!   ([`evo::run_map_elites`]).
//!
//! The [`experiment`] module wraps both in a reproducible harness that writes
//! trend, archive and tree files; the `qdtree` binary exposes it on the
//! command line.

pub mod dtree;
pub mod envs;
pub mod error;
pub mod eval;
pub mod evo;
pub mod experiment;
pub mod grammar;
pub mod seed;

pub use error::{Error, Result};
