use serde::{Deserialize, Serialize};

use super::{Expr, UnOp, Var};

/// Syntactic features of an equation, as consumed by the constraint filter.
///
/// Detection is purely structural: `Y*Y` does not set `has_y2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExprFeatures {
    pub contains_x: bool,
    pub contains_y: bool,
    pub contains_z: bool,
    pub contains_re: bool,
    pub has_x2: bool,
    pub has_y2: bool,
    pub has_z2: bool,
    pub has_x3: bool,
    pub has_y3: bool,
    pub has_z3: bool,
    pub has_x4: bool,
    pub has_y4: bool,
    pub has_z4: bool,
    /// A power node directly under another power node.
    pub nested: bool,
}

impl ExprFeatures {
    pub fn contains(&self, v: Var) -> bool {
        match v {
            Var::X => self.contains_x,
            Var::Y => self.contains_y,
            Var::Z => self.contains_z,
            Var::Re => self.contains_re,
        }
    }

    /// `power` is 2, 3 or 4. `Re` powers are not tracked.
    pub fn has_power(&self, v: Var, power: u8) -> bool {
        match (v, power) {
            (Var::X, 2) => self.has_x2,
            (Var::Y, 2) => self.has_y2,
            (Var::Z, 2) => self.has_z2,
            (Var::X, 3) => self.has_x3,
            (Var::Y, 3) => self.has_y3,
            (Var::Z, 3) => self.has_z3,
            (Var::X, 4) => self.has_x4,
            (Var::Y, 4) => self.has_y4,
            (Var::Z, 4) => self.has_z4,
            _ => false,
        }
    }

    fn set_contains(&mut self, v: Var) {
        match v {
            Var::X => self.contains_x = true,
            Var::Y => self.contains_y = true,
            Var::Z => self.contains_z = true,
            Var::Re => self.contains_re = true,
        }
    }

    fn set_power(&mut self, v: Var, power: u8) {
        match (v, power) {
            (Var::X, 2) => self.has_x2 = true,
            (Var::Y, 2) => self.has_y2 = true,
            (Var::Z, 2) => self.has_z2 = true,
            (Var::X, 3) => self.has_x3 = true,
            (Var::Y, 3) => self.has_y3 = true,
            (Var::Z, 3) => self.has_z3 = true,
            (Var::X, 4) => self.has_x4 = true,
            (Var::Y, 4) => self.has_y4 = true,
            (Var::Z, 4) => self.has_z4 = true,
            _ => {}
        }
    }
}

pub fn extract_features(e: &Expr) -> ExprFeatures {
    let mut f = ExprFeatures::default();
    e.visit(&mut |node| match node {
        Expr::Var(v) => f.set_contains(*v),
        Expr::Unary(op, child) => {
            match (op, child.as_ref()) {
                (UnOp::Square, Expr::Var(v)) => f.set_power(*v, 2),
                (UnOp::Cube, Expr::Var(v)) => f.set_power(*v, 3),
                (UnOp::Square, Expr::Unary(UnOp::Square, inner)) => {
                    if let Expr::Var(v) = inner.as_ref() {
                        f.set_power(*v, 4);
                    }
                }
                _ => {}
            }
            if child.is_unary() {
                f.nested = true;
            }
        }
        _ => {}
    });
    f
}
