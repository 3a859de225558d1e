use thiserror::Error;

use super::{BinOp, Expr, Var};

/// Parse failure; `position` is a 0-based byte offset into the input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { position: usize, name: String },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. } | ParseError::UnknownIdentifier { position, .. } => *position,
        }
    }

    fn syntax(position: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Pow,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Pow => "`**`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            b'*' if bytes.get(i + 1) == Some(&b'*') => {
                out.push((i, Tok::Pow));
                i += 2;
            }
            b'*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            b'/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // optional exponent, e.g. 1.5e-3
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| ParseError::syntax(start, format!("malformed number `{text}`")))?;
                if !v.is_finite() {
                    return Err(ParseError::syntax(start, format!("number `{text}` is not finite")));
                }
                out.push((start, Tok::Num(v)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::syntax(i, format!("unexpected character `{ch}`")));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.power()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while let Some(Tok::Pow) = self.peek() {
            self.pos += 1;
            let at = self.offset();
            match self.bump() {
                Some((_, Tok::Num(n))) if n == 2.0 => base = Expr::square(base),
                Some((_, Tok::Num(n))) if n == 3.0 => base = Expr::cube(base),
                Some((_, Tok::Num(n))) if n == 4.0 => base = Expr::square(Expr::square(base)),
                Some((_, t)) => {
                    return Err(ParseError::syntax(
                        at,
                        format!("exponent must be 2, 3 or 4, found {}", t.describe()),
                    ))
                }
                None => return Err(ParseError::syntax(at, "expected exponent after `**`")),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Some((_, Tok::Num(v))) => Ok(Expr::constant(v)),
            Some((_, Tok::Minus)) => match self.bump() {
                Some((_, Tok::Num(v))) => Ok(Expr::constant(-v)),
                _ => Err(ParseError::syntax(at, "unary minus is only allowed before a number")),
            },
            Some((_, Tok::Ident(name))) => match name.to_ascii_lowercase().as_str() {
                "x" => Ok(Expr::var(Var::X)),
                "y" => Ok(Expr::var(Var::Y)),
                "z" => Ok(Expr::var(Var::Z)),
                "re" => Ok(Expr::var(Var::Re)),
                _ => Err(ParseError::UnknownIdentifier { position: at, name }),
            },
            Some((_, Tok::LParen)) => {
                let inner = self.expr()?;
                let close = self.offset();
                match self.bump() {
                    Some((_, Tok::RParen)) => Ok(inner),
                    Some((_, t)) => Err(ParseError::syntax(
                        close,
                        format!("expected `)`, found {}", t.describe()),
                    )),
                    None => Err(ParseError::syntax(close, "expected `)`, found end of input")),
                }
            }
            Some((_, t)) => Err(ParseError::syntax(
                at,
                format!("expected operand, found {}", t.describe()),
            )),
            None => Err(ParseError::syntax(at, "expected operand, found end of input")),
        }
    }
}

/// Parses infix text: `+ - * /`, `**2`/`**3`/`**4` exponents, parentheses,
/// decimal literals and the variables `X`, `Y`, `Z`, `Re` (any case).
/// `**4` becomes `square(square(..))`.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = p.expr()?;
    if let Some((at, t)) = p.toks.get(p.pos) {
        return Err(ParseError::syntax(
            *at,
            format!("unexpected {} after expression", t.describe()),
        ));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn velocity_equation_tree() {
        let got = parse("Re*(2.18-8.46*Y**2)*(1-3.89*Z**2)").unwrap();
        let want = Expr::mul(
            Expr::mul(
                Expr::var(Var::Re),
                Expr::sub(
                    Expr::constant(2.18),
                    Expr::mul(Expr::constant(8.46), Expr::square(Expr::var(Var::Y))),
                ),
            ),
            Expr::sub(
                Expr::constant(1.0),
                Expr::mul(Expr::constant(3.89), Expr::square(Expr::var(Var::Z))),
            ),
        );
        assert!(got.same_structure(&want));
    }

    #[test]
    fn single_variable_and_case() {
        assert_eq!(parse("X").unwrap(), Expr::var(Var::X));
        assert_eq!(parse("rE").unwrap(), Expr::var(Var::Re));
        assert_eq!(parse(" z ").unwrap(), Expr::var(Var::Z));
    }

    #[test]
    fn left_associative() {
        let e = parse("X-Y-Z").unwrap();
        assert!(e.same_structure(&Expr::sub(
            Expr::sub(Expr::var(Var::X), Expr::var(Var::Y)),
            Expr::var(Var::Z)
        )));
        let e = parse("X/Y*Z").unwrap();
        assert!(e.same_structure(&Expr::mul(
            Expr::div(Expr::var(Var::X), Expr::var(Var::Y)),
            Expr::var(Var::Z)
        )));
    }

    #[test]
    fn exponent_binds_tightest() {
        let e = parse("2*Y**2").unwrap();
        assert!(e.same_structure(&Expr::mul(Expr::constant(2.0), Expr::square(Expr::var(Var::Y)))));
        let e = parse("X**4").unwrap();
        assert!(e.same_structure(&Expr::square(Expr::square(Expr::var(Var::X)))));
    }

    #[test]
    fn negative_literals_and_exponent_notation() {
        assert_eq!(parse("(-3.5)").unwrap(), Expr::constant(-3.5));
        assert_eq!(
            parse("X*-2").unwrap(),
            Expr::mul(Expr::var(Var::X), Expr::constant(-2.0))
        );
        assert_eq!(parse("1.5e-3").unwrap(), Expr::constant(1.5e-3));
    }

    #[test]
    fn errors_carry_position() {
        let err = parse("X+*Y").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { position: 2, .. }), "{err:?}");
        let err = parse("X + W").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                position: 4,
                name: "W".into()
            }
        );
        assert_eq!(parse("(X+Y").unwrap_err().position(), 4);
        assert_eq!(parse("X**5").unwrap_err().position(), 3);
        assert_eq!(parse("").unwrap_err().position(), 0);
        assert_eq!(parse("X Y").unwrap_err().position(), 2);
        assert_eq!(parse("-X").unwrap_err().position(), 0);
        assert_eq!(parse("X$").unwrap_err().position(), 1);
    }

    #[test]
    fn implicit_multiplication_rejected() {
        assert!(parse("2X").is_err());
        assert!(parse("(X)(Y)").is_err());
    }
}
