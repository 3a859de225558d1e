//! Constraint filter over candidate equations: a small fact language, a
//! key-value constraint program and a solver returning the maximal admissible
//! selection.

mod facts;
mod program;
mod solve;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use facts::{parse_facts_file, write_facts};
pub use program::ConstraintProgram;
pub use solve::{eligible, explain, solve, Selection, SelectionStatus, Verdict};

use crate::expr::{extract_features, ExprFeatures, Var};
use crate::sr::ParetoFrontier;

/// Names usable in `contains_<name>` facts and in `forbid`/`require` lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Re,
    X,
    Y,
    Z,
    X2,
    Y2,
    Z2,
    X3,
    Y3,
    Z3,
    X4,
    Y4,
    Z4,
    Nested,
}

impl Feature {
    pub const ALL: [Feature; 14] = [
        Feature::Re,
        Feature::X,
        Feature::Y,
        Feature::Z,
        Feature::X2,
        Feature::Y2,
        Feature::Z2,
        Feature::X3,
        Feature::Y3,
        Feature::Z3,
        Feature::X4,
        Feature::Y4,
        Feature::Z4,
        Feature::Nested,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Re => "re",
            Feature::X => "x",
            Feature::Y => "y",
            Feature::Z => "z",
            Feature::X2 => "x2",
            Feature::Y2 => "y2",
            Feature::Z2 => "z2",
            Feature::X3 => "x3",
            Feature::Y3 => "y3",
            Feature::Z3 => "z3",
            Feature::X4 => "x4",
            Feature::Y4 => "y4",
            Feature::Z4 => "z4",
            Feature::Nested => "nested",
        }
    }

    /// Features allowed in a `require` list.
    pub fn is_variable(self) -> bool {
        matches!(self, Feature::Re | Feature::X | Feature::Y | Feature::Z)
    }

    /// Features allowed in a `forbid` list.
    pub fn is_term(self) -> bool {
        !self.is_variable()
    }

    pub fn present_in(self, f: &ExprFeatures) -> bool {
        match self {
            Feature::Re => f.contains(Var::Re),
            Feature::X => f.contains(Var::X),
            Feature::Y => f.contains(Var::Y),
            Feature::Z => f.contains(Var::Z),
            Feature::X2 => f.has_power(Var::X, 2),
            Feature::Y2 => f.has_power(Var::Y, 2),
            Feature::Z2 => f.has_power(Var::Z, 2),
            Feature::X3 => f.has_power(Var::X, 3),
            Feature::Y3 => f.has_power(Var::Y, 3),
            Feature::Z3 => f.has_power(Var::Z, 3),
            Feature::X4 => f.has_power(Var::X, 4),
            Feature::Y4 => f.has_power(Var::Y, 4),
            Feature::Z4 => f.has_power(Var::Z, 4),
            Feature::Nested => f.nested,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Feature::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown feature `{s}`"))
    }
}

/// One candidate equation as seen by the filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationFact {
    pub id: u64,
    pub complexity: u64,
    /// Rounded loss.
    pub loss: i64,
    pub expression_text: String,
    pub features: ExprFeatures,
}

impl EquationFact {
    pub fn has(&self, f: Feature) -> bool {
        f.present_in(&self.features)
    }

    /// Present features in vocabulary order.
    pub fn feature_list(&self) -> Vec<Feature> {
        Feature::ALL.iter().copied().filter(|f| self.has(*f)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: `contains_{feature}({id})` refers to unknown equation id {id}")]
    UnknownId { line: usize, id: u64, feature: Feature },
    #[error("line {line}: duplicate equation id {id}")]
    DuplicateId { line: usize, id: u64 },
    #[error("line {line}: equation {id} is declared to contain `{feature}` but its expression does not")]
    Contradiction { line: usize, id: u64, feature: Feature },
}

impl FilterError {
    pub fn line(&self) -> usize {
        match self {
            FilterError::Syntax { line, .. }
            | FilterError::UnknownId { line, .. }
            | FilterError::DuplicateId { line, .. }
            | FilterError::Contradiction { line, .. } => *line,
        }
    }
}

/// Half away from zero, e.g. 44.5 -> 45 and -0.5 -> -1.
pub fn round_loss(loss: f64) -> i64 {
    loss.round() as i64
}

/// One fact per frontier entry, keeping the frontier's ids.
pub fn facts_from_frontier(frontier: &ParetoFrontier) -> Vec<EquationFact> {
    frontier
        .entries()
        .iter()
        .map(|e| EquationFact {
            id: e.id as u64,
            complexity: e.complexity as u64,
            loss: round_loss(e.loss),
            expression_text: e.expression.to_string(),
            features: extract_features(&e.expression),
        })
        .collect()
}
