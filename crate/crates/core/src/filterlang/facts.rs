use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{EquationFact, Feature, FilterError};
use crate::expr::{extract_features, parse};

enum Line {
    Eq {
        id: u64,
        complexity: u64,
        loss: i64,
        text: String,
    },
    Contains {
        feature: Feature,
        id: u64,
    },
}

// drops a `%` comment, ignoring `%` inside a quoted string
fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_string = !in_string,
            '%' if !in_string => return &line[..i],
            _ => {}
        }
    }
    line
}

fn int<T: std::str::FromStr>(s: &str, what: &str, line: usize) -> Result<T, FilterError> {
    s.trim().parse().map_err(|_| FilterError::Syntax {
        line,
        message: format!("{what} must be an integer, got `{}`", s.trim()),
    })
}

fn parse_line(text: &str, line: usize) -> Result<Line, FilterError> {
    let syntax = |message: String| FilterError::Syntax { line, message };
    let body = text
        .strip_suffix('.')
        .ok_or_else(|| syntax("fact must end with `.`".into()))?
        .trim_end();
    let open = body.find('(').ok_or_else(|| syntax("expected `(`".into()))?;
    let name = body[..open].trim();
    let args = body[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| syntax("expected `)` before `.`".into()))?;
    if name == "eq" {
        // id, complexity and loss come first; the expression is the quoted rest
        let mut parts = args.splitn(4, ',');
        let id = int(parts.next().unwrap_or(""), "id", line)?;
        let complexity: u64 = int(parts.next().unwrap_or(""), "complexity", line)?;
        let loss: i64 = int(parts.next().unwrap_or(""), "loss", line)?;
        let quoted = parts
            .next()
            .ok_or_else(|| syntax("eq/4 needs four arguments".into()))?
            .trim();
        let text = quoted
            .strip_prefix('"')
            .and_then(|q| q.strip_suffix('"'))
            .filter(|t| !t.contains('"'))
            .ok_or_else(|| syntax("expression must be a double-quoted string".into()))?;
        if complexity < 1 {
            return Err(syntax("complexity must be at least 1".into()));
        }
        if loss < 0 {
            return Err(syntax("loss must be non-negative".into()));
        }
        Ok(Line::Eq {
            id,
            complexity,
            loss,
            text: text.to_string(),
        })
    } else if let Some(feat) = name.strip_prefix("contains_") {
        let feature = feat.parse::<Feature>().map_err(syntax)?;
        let id = int(args, "id", line)?;
        Ok(Line::Contains { feature, id })
    } else {
        Err(syntax(format!("unknown predicate `{name}`")))
    }
}

/// Parses `eq(ID, C, L, "expr").` and `contains_<feature>(ID).` lines, with
/// `%` comments. Facts are returned in ascending id order.
///
/// Features are recomputed from each expression; a `contains_*` line must
/// agree with them.
pub fn parse_facts_file(text: &str) -> Result<Vec<EquationFact>, FilterError> {
    let mut facts: BTreeMap<u64, EquationFact> = BTreeMap::new();
    let mut claims = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        match parse_line(content, line)? {
            Line::Eq {
                id,
                complexity,
                loss,
                text,
            } => {
                let expr = parse(&text).map_err(|e| FilterError::Syntax {
                    line,
                    message: format!("in expression: {e}"),
                })?;
                if facts.contains_key(&id) {
                    return Err(FilterError::DuplicateId { line, id });
                }
                let fact = EquationFact {
                    id,
                    complexity,
                    loss,
                    expression_text: text,
                    features: extract_features(&expr),
                };
                facts.insert(id, fact);
            }
            Line::Contains { feature, id } => claims.push((line, feature, id)),
        }
    }
    for (line, feature, id) in claims {
        let fact = facts.get(&id).ok_or(FilterError::UnknownId { line, id, feature })?;
        if !fact.has(feature) {
            return Err(FilterError::Contradiction { line, id, feature });
        }
    }
    Ok(facts.into_values().collect())
}

/// Renders facts in the format read by [`parse_facts_file`], one `eq` line
/// followed by a `contains_*` line per present feature.
pub fn write_facts(facts: &[EquationFact]) -> String {
    let mut out = String::new();
    for (k, f) in facts.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "eq({}, {}, {}, \"{}\").",
            f.id, f.complexity, f.loss, f.expression_text
        );
        for feat in f.feature_list() {
            let _ = writeln!(out, "contains_{}({}).", feat, f.id);
        }
    }
    out
}
