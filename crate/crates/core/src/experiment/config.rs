//! Experiment configuration and its `key = value` text form.
//!
//! ```text
//! # Cart Pole, MAP-Elites
//! algo = me
//! env = cartpole
//! total_pop = 10000
//! ```
//!
//! One key per line, `#` starts a comment, unknown or repeated keys are
//! errors. Unset keys take the defaults of the chosen (algorithm, task) pair.

use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::dtree::RlParams;
use crate::envs::EnvKind;
use crate::eval::Evaluator;
use crate::evo::{GeConfig, GridSpec, MeConfig, OobPolicy};
use crate::grammar::ObliqueGrammar;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Ge,
    Me,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Ge => "ge",
            Algorithm::Me => "me",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ge" => Ok(Algorithm::Ge),
            "me" => Ok(Algorithm::Me),
            other => Err(Error::Config(format!("unknown algorithm {other:?} (expected ge or me)"))),
        }
    }
}

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Splits config text into entries. Syntax only; keys are not checked here.
pub fn parse_entries(text: &str, origin: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |msg: String| Error::ConfigSyntax { path: origin.to_string(), line, msg };
        let (key, value) =
            content.split_once('=').ok_or_else(|| syntax(format!("expected key = value, got {content:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(syntax("empty key".into()));
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(syntax(format!("key {key:?} already set on line {}", prev.line)));
        }
        out.push(Entry { key: key.to_string(), value: value.to_string(), line });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub env: EnvKind,
    pub ge: GeConfig,
    /// Also supplies the grid used to project GE runs.
    pub me: MeConfig,
    pub rl: RlParams,
    pub n_episodes: usize,
    pub n_runs: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub log_all_evals: bool,
}

/// Every recognised key, in snapshot order.
pub const KEYS: &[&str] = &[
    "algo",
    "env",
    "seed",
    "runs",
    "out",
    "log_all_evals",
    "total_pop",
    "genotype_size",
    "max_value",
    "mutation_rate",
    "n_pop",
    "tournament_size",
    "p_cx",
    "p_mu",
    "bins_per_dim",
    "behavioral_min",
    "behavioral_max",
    "structural_min",
    "structural_max",
    "oob",
    "batch_n",
    "init_pop",
    "epsilon",
    "learning_rate",
    "discount",
    "q_init_low",
    "q_init_high",
    "n_episodes",
];

/// Keys that may legitimately differ between replicates of one experiment.
pub const RUN_KEYS: &[&str] = &["seed", "runs", "out", "log_all_evals"];

impl ExperimentConfig {
    /// Published defaults for an (algorithm, task) pair.
    pub fn defaults(algorithm: Algorithm, env: EnvKind) -> Self {
        let (ge, me, rl) = match env {
            EnvKind::CartPole => (GeConfig::cartpole(), MeConfig::cartpole(), RlParams::cartpole()),
            EnvKind::MountainCar => (GeConfig::mountain_car(), MeConfig::mountain_car(), RlParams::mountain_car()),
        };
        Self {
            algorithm,
            env,
            ge,
            me,
            rl,
            n_episodes: 100,
            n_runs: 5,
            seed: 0,
            out: PathBuf::from("results"),
            log_all_evals: false,
        }
    }

    /// Builds a config from file entries with `overrides` (CLI flags) on top.
    pub fn from_entries(file: &[Entry], overrides: &[(String, String)]) -> Result<Self> {
        let mut merged: Vec<(String, String)> = file.iter().map(|e| (e.key.clone(), e.value.clone())).collect();
        for (k, v) in overrides {
            merged.retain(|(mk, _)| mk != k);
            merged.push((k.clone(), v.clone()));
        }
        let lookup = |key: &str| merged.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let algorithm: Algorithm =
            lookup("algo").ok_or_else(|| Error::Config("algorithm not set (algo = ge | me)".into()))?.parse()?;
        let env: EnvKind = lookup("env")
            .ok_or_else(|| Error::Config("environment not set (env = cartpole | mountaincar)".into()))?
            .parse()?;
        let mut config = Self::defaults(algorithm, env);
        for (k, v) in &merged {
            config.set(k, v)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_entries(&parse_entries(text, "<config>")?, &[])
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            value.parse().map_err(|e| Error::Config(format!("{key} = {value:?}: {e}")))
        }
        match key {
            "algo" => self.algorithm = value.parse()?,
            "env" => self.env = value.parse()?,
            "seed" => self.seed = num(key, value)?,
            "runs" => self.n_runs = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "log_all_evals" => self.log_all_evals = num(key, value)?,
            "total_pop" => {
                self.ge.total_pop = num(key, value)?;
                self.me.total_pop = self.ge.total_pop;
            }
            "genotype_size" => {
                self.ge.genotype_size = num(key, value)?;
                self.me.genotype_size = self.ge.genotype_size;
            }
            "max_value" => {
                self.ge.max_value = num(key, value)?;
                self.me.max_value = self.ge.max_value;
            }
            "mutation_rate" => {
                self.ge.mutation_rate = num(key, value)?;
                self.me.mutation_rate = self.ge.mutation_rate;
            }
            "n_pop" => self.ge.n_pop = num(key, value)?,
            "tournament_size" => self.ge.tournament_size = num(key, value)?,
            "p_cx" => self.ge.p_cx = num(key, value)?,
            "p_mu" => self.ge.p_mu = num(key, value)?,
            "bins_per_dim" => self.me.grid.bins = num(key, value)?,
            "behavioral_min" => self.me.grid.behavioral.0 = num(key, value)?,
            "behavioral_max" => self.me.grid.behavioral.1 = num(key, value)?,
            "structural_min" => self.me.grid.structural.0 = num(key, value)?,
            "structural_max" => self.me.grid.structural.1 = num(key, value)?,
            "oob" => self.me.grid.oob = value.parse::<OobPolicy>()?,
            "batch_n" => self.me.batch_n = num(key, value)?,
            "init_pop" => self.me.init_pop = num(key, value)?,
            "epsilon" => self.rl.epsilon = num(key, value)?,
            "learning_rate" => self.rl.learning_rate = num(key, value)?,
            "discount" => self.rl.discount = num(key, value)?,
            "q_init_low" => self.rl.q_init_low = num(key, value)?,
            "q_init_high" => self.rl.q_init_high = num(key, value)?,
            "n_episodes" => self.n_episodes = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    fn value_of(&self, key: &str) -> String {
        let g = &self.me.grid;
        match key {
            "algo" => self.algorithm.to_string(),
            "env" => self.env.to_string(),
            "seed" => self.seed.to_string(),
            "runs" => self.n_runs.to_string(),
            "out" => self.out.display().to_string(),
            "log_all_evals" => self.log_all_evals.to_string(),
            "total_pop" => self.ge.total_pop.to_string(),
            "genotype_size" => self.ge.genotype_size.to_string(),
            "max_value" => self.ge.max_value.to_string(),
            "mutation_rate" => self.ge.mutation_rate.to_string(),
            "n_pop" => self.ge.n_pop.to_string(),
            "tournament_size" => self.ge.tournament_size.to_string(),
            "p_cx" => self.ge.p_cx.to_string(),
            "p_mu" => self.ge.p_mu.to_string(),
            "bins_per_dim" => g.bins.to_string(),
            "behavioral_min" => g.behavioral.0.to_string(),
            "behavioral_max" => g.behavioral.1.to_string(),
            "structural_min" => g.structural.0.to_string(),
            "structural_max" => g.structural.1.to_string(),
            "oob" => g.oob.to_string(),
            "batch_n" => self.me.batch_n.to_string(),
            "init_pop" => self.me.init_pop.to_string(),
            "epsilon" => self.rl.epsilon.to_string(),
            "learning_rate" => self.rl.learning_rate.to_string(),
            "discount" => self.rl.discount.to_string(),
            "q_init_low" => self.rl.q_init_low.to_string(),
            "q_init_high" => self.rl.q_init_high.to_string(),
            "n_episodes" => self.n_episodes.to_string(),
            _ => unreachable!("unlisted key {key}"),
        }
    }

    /// Full text form; parsing it back yields an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.value_of(key));
        }
        s
    }

    /// Text form without the per-replicate keys, for comparing experiments.
    pub fn experiment_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS.iter().filter(|k| !RUN_KEYS.contains(k)) {
            let _ = writeln!(s, "{key} = {}", self.value_of(key));
        }
        s
    }

    pub fn grammar(&self) -> ObliqueGrammar {
        ObliqueGrammar::oblique(self.env.n_inputs(), self.env.n_actions())
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator::new(self.env, self.rl, self.n_episodes)
    }

    pub fn grid(&self) -> GridSpec {
        self.me.grid
    }

    pub fn validate(&self) -> Result<()> {
        let alternatives = self.grammar().max_alternatives();
        match self.algorithm {
            Algorithm::Ge => {
                self.ge.validate(alternatives)?;
                self.me.grid.validate()?;
            }
            Algorithm::Me => self.me.validate(alternatives)?,
        }
        self.rl.validate()?;
        if self.n_episodes == 0 {
            return Err(Error::Config("n_episodes must be positive".into()));
        }
        if self.n_runs == 0 {
            return Err(Error::Config("runs must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_published_tables() {
        let c = ExperimentConfig::defaults(Algorithm::Ge, EnvKind::MountainCar);
        assert_eq!((c.ge.n_pop, c.ge.total_pop, c.ge.tournament_size), (200, 200_000, 2));
        assert_eq!((c.ge.p_cx, c.ge.p_mu, c.ge.genotype_size, c.ge.max_value), (0.1, 1.0, 100, 40_000));
        assert_eq!(c.rl.epsilon, 0.01);
        assert_eq!(c.n_episodes, 100);
        let c = ExperimentConfig::defaults(Algorithm::Me, EnvKind::CartPole);
        assert_eq!(c.me.grid.behavioral, (0.8, 1.0));
        assert_eq!(c.me.grid.structural, (1.0, 10.0));
        assert_eq!((c.me.batch_n, c.me.init_pop, c.me.total_pop), (20, 200, 10_000));
        assert_eq!((c.rl.epsilon, c.rl.learning_rate), (0.05, 0.001));
        assert_eq!((c.rl.q_init_low, c.rl.q_init_high), (-1.0, 1.0));
    }

    #[test]
    fn parse_with_comments_and_overrides() {
        let text = "# experiment\nalgo = me\nenv=mountaincar # trailing\n\n total_pop = 400 \n";
        let entries = parse_entries(text, "x.cfg").unwrap();
        assert_eq!(entries.len(), 3);
        let c = ExperimentConfig::from_entries(&entries, &[("total_pop".into(), "600".into())]).unwrap();
        assert_eq!(c.me.total_pop, 600);
        assert_eq!(c.env, EnvKind::MountainCar);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_entries("algo = me\nnonsense\n", "f").unwrap_err();
        assert!(err.to_string().contains("f:2"), "{err}");
        assert!(parse_entries("a = 1\na = 2\n", "f").is_err());
        assert!(parse_entries(" = 2\n", "f").is_err());
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        assert!(ExperimentConfig::from_text("algo = me\nenv = cartpole\nlunar = 1\n").is_err());
        assert!(ExperimentConfig::from_text("algo = me\nenv = cartpole\nbatch_n = x\n").is_err());
        assert!(ExperimentConfig::from_text("env = cartpole\n").is_err());
        assert!(ExperimentConfig::from_text("algo = ge\nenv = cartpole\nn_pop = 7\n").is_err());
        assert!(ExperimentConfig::from_text("algo = me\nenv = cartpole\nmax_value = 2000\n").is_err());
    }

    #[test]
    fn snapshot_round_trips() {
        let mut c = ExperimentConfig::defaults(Algorithm::Me, EnvKind::CartPole);
        c.rl.discount = 0.1 + 0.2;
        c.me.grid.oob = OobPolicy::Clamp;
        c.seed = u64::MAX;
        let back = ExperimentConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert!(!c.experiment_text().contains("seed"));
    }
}
