use serde::{Deserialize, Serialize};

use crate::expr::{parse, Expr, ParseError};

/// One member of a complexity/loss trade-off curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoEntry {
    pub id: usize,
    pub complexity: usize,
    /// Training MSE.
    pub loss: f64,
    pub expression: Expr,
}

impl ParetoEntry {
    pub fn new(expression: Expr, loss: f64) -> Self {
        Self {
            id: 0,
            complexity: expression.complexity(),
            loss,
            expression,
        }
    }

    /// `self` is at least as good on both axes and strictly better on one.
    pub fn dominates(&self, other: &ParetoEntry) -> bool {
        self.complexity <= other.complexity
            && self.loss <= other.loss
            && (self.complexity < other.complexity || self.loss < other.loss)
    }
}

/// Non-dominated set ordered by strictly increasing complexity and strictly
/// decreasing loss.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoFrontier {
    entries: Vec<ParetoEntry>,
}

impl ParetoFrontier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[ParetoEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best_loss(&self) -> Option<f64> {
        self.entries.last().map(|e| e.loss)
    }

    pub fn get(&self, id: usize) -> Option<&ParetoEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Offers a candidate; returns whether it was admitted.
    ///
    /// A candidate tying an entry on both complexity and loss replaces it
    /// only if its printed form sorts first.
    pub fn update(&mut self, mut candidate: ParetoEntry) -> bool {
        if !candidate.loss.is_finite() {
            return false;
        }
        candidate.complexity = candidate.expression.complexity();
        let blocker = self
            .entries
            .iter()
            .position(|e| e.complexity <= candidate.complexity && e.loss <= candidate.loss);
        if let Some(i) = blocker {
            let e = &self.entries[i];
            let tie = e.complexity == candidate.complexity && e.loss == candidate.loss;
            if tie && candidate.expression.to_string() < e.expression.to_string() {
                self.entries[i] = candidate;
                self.renumber();
                return true;
            }
            return false;
        }
        self.entries
            .retain(|e| !(candidate.complexity <= e.complexity && candidate.loss <= e.loss));
        let at = self.entries.partition_point(|e| e.complexity < candidate.complexity);
        self.entries.insert(at, candidate);
        self.renumber();
        true
    }

    fn renumber(&mut self) {
        for (i, e) in self.entries.iter_mut().enumerate() {
            e.id = i;
        }
    }

    /// Checks the strict monotonicity invariants.
    pub fn is_well_formed(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| w[0].complexity < w[1].complexity && w[0].loss > w[1].loss)
            && self
                .entries
                .iter()
                .enumerate()
                .all(|(i, e)| e.id == i && e.loss.is_finite())
    }

    pub fn to_records(&self) -> Vec<FrontierRecord> {
        self.entries
            .iter()
            .map(|e| FrontierRecord {
                id: e.id,
                complexity: e.complexity,
                loss: e.loss,
                expression: e.expression.to_string(),
            })
            .collect()
    }

    /// Pretty JSON array of `{id, complexity, loss, expression}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_records()).expect("frontier records always serialize")
    }
}

impl FromIterator<ParetoEntry> for ParetoFrontier {
    fn from_iter<T: IntoIterator<Item = ParetoEntry>>(iter: T) -> Self {
        let mut f = ParetoFrontier::new();
        for e in iter {
            f.update(e);
        }
        f
    }
}

/// Serialized form of a frontier member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRecord {
    pub id: usize,
    pub complexity: usize,
    pub loss: f64,
    pub expression: String,
}

impl FrontierRecord {
    pub fn parse_expression(&self) -> Result<Expr, ParseError> {
        parse(&self.expression)
    }
}
