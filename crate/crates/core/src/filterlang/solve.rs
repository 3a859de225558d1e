use std::fmt::Write as _;

use serde::Serialize;

use super::{ConstraintProgram, EquationFact, Feature};

/// True iff the fact is within both thresholds and has no forbidden feature.
pub fn eligible(fact: &EquationFact, program: &ConstraintProgram) -> bool {
    program.max_complexity.is_none_or(|m| fact.complexity <= m)
        && program.max_loss.is_none_or(|m| fact.loss <= m)
        && !program.forbidden_features.iter().any(|f| fact.has(*f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SelectionStatus {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Ascending id.
    pub selected: Vec<EquationFact>,
    pub status: SelectionStatus,
    pub violation: Option<String>,
}

#[derive(Serialize)]
struct SelectedJson<'a> {
    id: u64,
    complexity: u64,
    loss: i64,
    expression: &'a str,
}

#[derive(Serialize)]
struct SelectionJson<'a> {
    status: SelectionStatus,
    selected: Vec<SelectedJson<'a>>,
    violations: Vec<&'a str>,
}

impl Selection {
    pub fn is_sat(&self) -> bool {
        self.status == SelectionStatus::Sat
    }

    pub fn ids(&self) -> Vec<u64> {
        self.selected.iter().map(|f| f.id).collect()
    }

    /// `{status, selected: [{id, complexity, loss, expression}], violations}`.
    pub fn to_json(&self) -> String {
        let doc = SelectionJson {
            status: self.status,
            selected: self
                .selected
                .iter()
                .map(|f| SelectedJson {
                    id: f.id,
                    complexity: f.complexity,
                    loss: f.loss,
                    expression: &f.expression_text,
                })
                .collect(),
            violations: self.violation.iter().map(String::as_str).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("selection always serializes")
    }

    /// Human-readable block listing the selected equations.
    pub fn render(&self) -> String {
        let mut out = String::from("SELECTED EQUATIONS\n------------------\n");
        if let Some(v) = &self.violation {
            let _ = write!(out, "\nUNSATISFIABLE: {v}\n");
            return out;
        }
        for f in &self.selected {
            let _ = write!(
                out,
                "\nID {}: {}\nComplexity: {}, Loss: {}\n",
                f.id, f.expression_text, f.complexity, f.loss
            );
        }
        out
    }
}

/// Selects every eligible fact; unsatisfiable when a required feature has
/// no eligible carrier.
pub fn solve(facts: &[EquationFact], program: &ConstraintProgram) -> Selection {
    let mut selected: Vec<EquationFact> = facts.iter().filter(|f| eligible(f, program)).cloned().collect();
    selected.sort_by_key(|f| f.id);
    let unmet = program
        .required_features
        .iter()
        .find(|r| !selected.iter().any(|f| f.has(**r)));
    match unmet {
        Some(r) => Selection {
            selected: Vec::new(),
            status: SelectionStatus::Unsat,
            violation: Some(format!("no eligible equation contains `{r}` (required: contains_{r})")),
        },
        None => Selection {
            selected,
            status: SelectionStatus::Sat,
            violation: None,
        },
    }
}

/// Per-equation outcome of [`explain`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub id: u64,
    pub eligible: bool,
    /// Failed threshold or forbidden-feature predicates.
    pub failed: Vec<String>,
    /// Required features this equation lacks.
    pub missing: Vec<Feature>,
    /// Required features this equation would supply if selected.
    pub contributes: Vec<Feature>,
}

impl Verdict {
    pub fn describe(&self) -> String {
        let mut parts = self.failed.clone();
        parts.extend(self.missing.iter().map(|f| format!("missing contains_{f}")));
        if self.eligible {
            let mut s = String::from("eligible");
            if !self.contributes.is_empty() {
                let names: Vec<&str> = self.contributes.iter().map(|f| f.name()).collect();
                s += &format!(", contributes {}", names.join(", "));
            }
            for p in parts {
                s += &format!(", {p}");
            }
            s
        } else {
            format!("rejected: {}", parts.join(", "))
        }
    }
}

/// Verdict for every fact, ordered by id.
pub fn explain(facts: &[EquationFact], program: &ConstraintProgram) -> Vec<Verdict> {
    let mut out: Vec<Verdict> = facts
        .iter()
        .map(|f| {
            let mut failed = Vec::new();
            if let Some(m) = program.max_complexity.filter(|m| f.complexity > *m) {
                failed.push(format!("complexity {} > {m}", f.complexity));
            }
            if let Some(m) = program.max_loss.filter(|m| f.loss > *m) {
                failed.push(format!("loss {} > {m}", f.loss));
            }
            for feat in &program.forbidden_features {
                if f.has(*feat) {
                    failed.push(format!("forbidden contains_{feat}"));
                }
            }
            let (contributes, missing): (Vec<Feature>, Vec<Feature>) =
                program.required_features.iter().partition(|r| f.has(**r));
            Verdict {
                id: f.id,
                eligible: failed.is_empty(),
                failed,
                missing,
                contributes,
            }
        })
        .collect();
    out.sort_by_key(|v| v.id);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{extract_features, parse};

    fn fact(id: u64, c: u64, l: i64, s: &str) -> EquationFact {
        EquationFact {
            id,
            complexity: c,
            loss: l,
            expression_text: s.into(),
            features: extract_features(&parse(s).unwrap()),
        }
    }

    fn program() -> ConstraintProgram {
        ConstraintProgram::parse("max_complexity = 20\nmax_loss = 100\nforbid = x3, y3, x4\nrequire = re").unwrap()
    }

    #[test]
    fn eligibility_rows() {
        let p = program();
        assert!(eligible(&fact(9, 17, 45, "Re*(2.18-8.46*Y**2)*(1-3.89*Z**2)"), &p));
        assert!(!eligible(
            &fact(11, 22, 25, "(2.15-8.45*Y**2+Z**2)*(Re-3.98*Re*Z**2+0.53)-0.41"),
            &p
        ));
        let loose = ConstraintProgram {
            max_complexity: Some(30),
            ..p
        };
        assert!(!eligible(
            &fact(12, 24, 25, "(2.15-8.45*Y**2+Z**2)*(Re-3.98*Re*Z**2+Y**2)-Y**3"),
            &loose
        ));
    }

    #[test]
    fn empty_base() {
        let s = solve(&[], &program());
        assert_eq!(s.status, SelectionStatus::Unsat);
        assert!(s.violation.unwrap().contains("`re`"));
        let s = solve(&[], &ConstraintProgram::default());
        assert!(s.is_sat() && s.selected.is_empty());
    }

    #[test]
    fn render_block() {
        let facts = vec![
            fact(10, 20, 25, "(2.15-8.45*Y**2+Z**2)*(Re-3.98*Re*Z**2)+0.35"),
            fact(9, 17, 45, "Re*(2.18-8.46*Y**2)*(1-3.89*Z**2)"),
        ];
        let s = solve(&facts, &program());
        assert_eq!(s.ids(), vec![9, 10]);
        assert_eq!(
            s.render(),
            "SELECTED EQUATIONS\n------------------\n\nID 9: Re*(2.18-8.46*Y**2)*(1-3.89*Z**2)\nComplexity: 17, Loss: 45\n\n\
             ID 10: (2.15-8.45*Y**2+Z**2)*(Re-3.98*Re*Z**2)+0.35\nComplexity: 20, Loss: 25\n"
        );
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["status"], "SAT");
        assert_eq!(v["selected"][1]["id"], 10);
        assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn verdict_text() {
        let v = explain(
            &[
                fact(0, 1, 37396, "X"),
                fact(9, 17, 45, "Re*(2.18-8.46*Y**2)*(1-3.89*Z**2)"),
            ],
            &program(),
        );
        assert_eq!(v[0].describe(), "rejected: loss 37396 > 100, missing contains_re");
        assert_eq!(v[1].describe(), "eligible, contributes re");
        let all = explain(&[fact(0, 1, 37396, "X")], &ConstraintProgram::default());
        assert!(all[0].eligible);
    }
}
