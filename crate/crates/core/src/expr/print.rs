use std::fmt::{self, Write};

use super::Expr;

const ATOM: u8 = 4;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Unary(..) => 3,
        Expr::Var(_) | Expr::Const(_) => ATOM,
    }
}

fn write_const(out: &mut impl Write, c: f64) -> fmt::Result {
    // `{}` on f64 is the shortest string that parses back to the same bits
    if c.is_sign_negative() {
        write!(out, "(-{})", -c)
    } else {
        write!(out, "{c}")
    }
}

fn write_expr(out: &mut impl Write, e: &Expr) -> fmt::Result {
    match e {
        Expr::Var(v) => out.write_str(v.name()),
        Expr::Const(c) => write_const(out, *c),
        Expr::Unary(op, child) => {
            if level(child) < ATOM {
                out.write_char('(')?;
                write_expr(out, child)?;
                out.write_char(')')?;
            } else {
                write_expr(out, child)?;
            }
            write!(out, "**{}", op.exponent())
        }
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            // left-associative grammar: the left operand may share the level,
            // the right operand must bind strictly tighter
            let wrap_left = level(l) < p;
            let wrap_right = level(r) <= p;
            write_side(out, l, wrap_left)?;
            out.write_char(op.symbol())?;
            write_side(out, r, wrap_right)
        }
    }
}

fn write_side(out: &mut impl Write, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        out.write_char('(')?;
        write_expr(out, e)?;
        out.write_char(')')
    } else {
        write_expr(out, e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Var};

    #[test]
    fn simple_forms() {
        assert_eq!(Expr::var(Var::X).to_string(), "X");
        assert_eq!(Expr::square(Expr::var(Var::Y)).to_string(), "Y**2");
        assert_eq!(
            Expr::cube(Expr::add(Expr::var(Var::Y), Expr::constant(1.0))).to_string(),
            "(Y+1)**3"
        );
        assert_eq!(Expr::constant(-2.5).to_string(), "(-2.5)");
        assert_eq!(Expr::square(Expr::constant(-2.0)).to_string(), "(-2)**2");
    }

    #[test]
    fn frontier_strings_print_verbatim() {
        for s in [
            "Re*(2.18-8.46*Y**2)*(1-3.89*Z**2)",
            "1.41*Re-5.62*Re*Z**2-1.41*Y**2",
            "(2.15-8.45*Y**2+Z**2)*(Re-3.98*Re*Z**2)+0.35",
            "X**3",
        ] {
            assert_eq!(parse(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn right_operands_keep_parentheses() {
        let e = Expr::sub(Expr::var(Var::X), Expr::sub(Expr::var(Var::Y), Expr::var(Var::Z)));
        assert_eq!(e.to_string(), "X-(Y-Z)");
        let e = Expr::div(Expr::var(Var::X), Expr::mul(Expr::var(Var::Y), Expr::var(Var::Z)));
        assert_eq!(e.to_string(), "X/(Y*Z)");
        let e = Expr::mul(Expr::add(Expr::var(Var::X), Expr::var(Var::Y)), Expr::var(Var::Z));
        assert_eq!(e.to_string(), "(X+Y)*Z");
    }
}
