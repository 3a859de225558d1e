use std::collections::BTreeSet;

use serde::Serialize;

use super::{Feature, FilterError};

/// Thresholds and feature rules. Missing thresholds are unbounded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConstraintProgram {
    pub max_complexity: Option<u64>,
    pub max_loss: Option<i64>,
    pub forbidden_features: BTreeSet<Feature>,
    /// Each needs at least one selected equation carrying it.
    pub required_features: BTreeSet<Feature>,
}

impl ConstraintProgram {
    /// Parses `key = value` lines (`:` also accepted) with `#` comments.
    /// Keys: `max_complexity`, `max_loss`, `forbid`, `require`; lists are
    /// comma separated and repeated keys accumulate.
    pub fn parse(text: &str) -> Result<Self, FilterError> {
        let mut p = ConstraintProgram::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let syntax = |message: String| FilterError::Syntax { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .or_else(|| content.split_once(':'))
                .ok_or_else(|| syntax(format!("expected `key = value`, got `{content}`")))?;
            let value = value.trim();
            match key.trim() {
                "max_complexity" => {
                    p.max_complexity =
                        Some(value.parse().map_err(|_| {
                            syntax(format!("max_complexity must be a non-negative integer, got `{value}`"))
                        })?)
                }
                "max_loss" => {
                    let v: i64 = value
                        .parse()
                        .map_err(|_| syntax(format!("max_loss must be an integer, got `{value}`")))?;
                    if v < 0 {
                        return Err(syntax("max_loss must be non-negative".into()));
                    }
                    p.max_loss = Some(v);
                }
                k @ ("forbid" | "require") => {
                    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let f: Feature = item.parse().map_err(syntax)?;
                        if k == "forbid" {
                            if !f.is_term() {
                                return Err(syntax(format!(
                                    "`{f}` cannot be forbidden; use one of x2..z4 or nested"
                                )));
                            }
                            p.forbidden_features.insert(f);
                        } else {
                            if !f.is_variable() {
                                return Err(syntax(format!("`{f}` cannot be required; use re, x, y or z")));
                            }
                            p.required_features.insert(f);
                        }
                    }
                }
                other => return Err(syntax(format!("unknown key `{other}`"))),
            }
        }
        Ok(p)
    }

    /// Back to the key-value form accepted by [`ConstraintProgram::parse`].
    pub fn to_text(&self) -> String {
        let join = |s: &BTreeSet<Feature>| s.iter().map(|f| f.name()).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        if let Some(c) = self.max_complexity {
            out += &format!("max_complexity = {c}\n");
        }
        if let Some(l) = self.max_loss {
            out += &format!("max_loss = {l}\n");
        }
        if !self.forbidden_features.is_empty() {
            out += &format!("forbid = {}\n", join(&self.forbidden_features));
        }
        if !self.required_features.is_empty() {
            out += &format!("require = {}\n", join(&self.required_features));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_program() {
        let p = ConstraintProgram::parse(
            "# plausibility rules\nmax_complexity = 20\nmax_loss: 100\nforbid = x3, y3\nforbid = x4 # also\nrequire = re\n",
        )
        .unwrap();
        assert_eq!(p.max_complexity, Some(20));
        assert_eq!(p.max_loss, Some(100));
        assert_eq!(
            p.forbidden_features,
            [Feature::X3, Feature::Y3, Feature::X4].into_iter().collect()
        );
        assert_eq!(p.required_features, [Feature::Re].into_iter().collect());
        assert_eq!(ConstraintProgram::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn empty_is_vacuous() {
        assert_eq!(ConstraintProgram::parse("").unwrap(), ConstraintProgram::default());
    }

    #[test]
    fn errors_have_lines() {
        for (src, line) in [
            ("max_loss = -1", 1),
            ("\nmax_complexity = big", 2),
            ("forbid = re", 1),
            ("require = x3", 1),
            ("forbid = q7", 1),
            ("speed = 3", 1),
            ("just words", 1),
        ] {
            assert_eq!(ConstraintProgram::parse(src).unwrap_err().line(), line, "{src}");
        }
    }
}
