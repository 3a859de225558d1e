//! Evolutionary symbolic regression: tournament GP over expression trees,
//! hill-climbed constants and a complexity/loss Pareto archive.

mod archive;
mod constants;
mod evolve;
mod generate;
mod variation;

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use archive::{FrontierRecord, ParetoEntry, ParetoFrontier};
pub use constants::optimize_constants;
pub use evolve::{evolve, evolve_with, pareto_update};
pub use generate::random_expression;
pub use variation::{apply_move, crossover, mutate, Move, MutationWeights, MAX_RETRIES};

use crate::expr::{Compiled, EvalStack};
use crate::flowgen::FlowRecord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SrError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training data is empty")]
    EmptyData,
    #[error("training data contains non-finite values")]
    NonFiniteData,
    #[error("column lengths differ")]
    LengthMismatch,
}

/// Search settings. The operator set is fixed to `+ - * /`, square and cube.
#[derive(Debug, Clone, PartialEq)]
pub struct SrConfig {
    pub n_iterations: usize,
    pub max_size: usize,
    pub population_size: usize,
    pub tournament_size: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    /// Hill-climbing steps spent on each new candidate.
    pub constant_optimizer_steps: usize,
    pub rng_seed: u64,
    pub constant_range: (f64, f64),
    pub mutation_weights: MutationWeights,
    /// Training points used during search; `None` uses all of them.
    pub max_samples: Option<usize>,
    /// Extra hill-climbing steps for each frontier entry after the last generation.
    pub polish_steps: usize,
}

impl Default for SrConfig {
    fn default() -> Self {
        Self {
            n_iterations: 100,
            max_size: 25,
            population_size: 512,
            tournament_size: 5,
            p_crossover: 0.7,
            p_mutation: 0.3,
            constant_optimizer_steps: 32,
            rng_seed: 42,
            constant_range: (-10.0, 10.0),
            mutation_weights: MutationWeights::default(),
            max_samples: Some(2000),
            polish_steps: 2000,
        }
    }
}

impl SrConfig {
    pub fn validate(&self) -> Result<(), SrError> {
        let bad = |m: &str| Err(SrError::Config(m.to_string()));
        if self.max_size < 1 {
            return bad("max_size must be at least 1");
        }
        if self.tournament_size < 2 || self.population_size < self.tournament_size {
            return bad("need population_size >= tournament_size >= 2");
        }
        for (name, p) in [("p_crossover", self.p_crossover), ("p_mutation", self.p_mutation)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        if self.p_crossover + self.p_mutation > 1.0 + 1e-12 {
            return bad("p_crossover + p_mutation must not exceed 1");
        }
        let (lo, hi) = self.constant_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return bad("constant_range must be a finite interval");
        }
        let w = &self.mutation_weights;
        if [
            w.replace_subtree,
            w.perturb_constant,
            w.change_operator,
            w.insert_delete,
        ]
        .iter()
        .any(|v| !v.is_finite() || *v < 0.0)
        {
            return bad("mutation weights must be finite and non-negative");
        }
        if self.max_samples == Some(0) {
            return bad("max_samples must be positive");
        }
        Ok(())
    }
}

/// Which column of a flow record is regressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    U,
    P,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::U => "u",
            Target::P => "p",
        }
    }

    pub fn of(self, r: &FlowRecord) -> f64 {
        match self {
            Target::U => r.u,
            Target::P => r.p,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "u" => Ok(Target::U),
            "p" => Ok(Target::P),
            other => Err(format!("unknown target `{other}` (expected u or p)")),
        }
    }
}

/// Columnar training data: inputs `[x, y, z, re]` and the target.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    columns: [Vec<f64>; 4],
    target: Vec<f64>,
}

impl Samples {
    /// Panics if the lengths differ; see [`Samples::try_new`].
    pub fn new(columns: [Vec<f64>; 4], target: Vec<f64>) -> Self {
        Self::try_new(columns, target).expect("columns and target must have equal length")
    }

    pub fn try_new(columns: [Vec<f64>; 4], target: Vec<f64>) -> Result<Self, SrError> {
        if columns.iter().any(|c| c.len() != target.len()) {
            return Err(SrError::LengthMismatch);
        }
        Ok(Self { columns, target })
    }

    pub fn from_records(records: &[FlowRecord], target: Target) -> Self {
        let col = |f: fn(&FlowRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
        Self {
            columns: [col(|r| r.x), col(|r| r.y), col(|r| r.z), col(|r| r.re)],
            target: records.iter().map(|r| target.of(r)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn columns(&self) -> [&[f64]; 4] {
        [&self.columns[0], &self.columns[1], &self.columns[2], &self.columns[3]]
    }

    pub(crate) fn check(&self) -> Result<(), SrError> {
        if self.is_empty() {
            return Err(SrError::EmptyData);
        }
        if !self.columns.iter().flatten().chain(&self.target).all(|v| v.is_finite()) {
            return Err(SrError::NonFiniteData);
        }
        Ok(())
    }

    /// At most `max` rows chosen without replacement, kept in original order.
    pub fn subsample(&self, max: usize, seed: u64) -> Samples {
        if self.len() <= max {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a3b_1e00_0000);
        let mut idx = sample(&mut rng, self.len(), max).into_vec();
        idx.sort_unstable();
        let pick = |v: &Vec<f64>| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Samples {
            columns: [
                pick(&self.columns[0]),
                pick(&self.columns[1]),
                pick(&self.columns[2]),
                pick(&self.columns[3]),
            ],
            target: pick(&self.target),
        }
    }

    pub fn mse(&self, program: &Compiled, constants: &[f64], stack: &mut EvalStack) -> f64 {
        program.mse(constants, self.columns(), &self.target, stack)
    }
}
