//! Expression trees over the duct-flow input variables.
//!
//! Trees are built from the four inputs `X`, `Y`, `Z`, `Re`, real constants,
//! the binary operators `+ - * /` and the unary power operators `square` and
//! `cube`. Text uses the `**2` / `**3` exponent notation for the unary nodes.

mod eval;
mod features;
mod parse;
mod print;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use eval::{Compiled, EvalStack, Point};
pub use features::{extract_features, ExprFeatures};
pub use parse::{parse, ParseError};

/// Input variable of a candidate equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
    Z,
    Re,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X, Var::Y, Var::Z, Var::Re];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "X",
            Var::Y => "Y",
            Var::Z => "Z",
            Var::Re => "Re",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub const ALL: [BinOp; 4] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div];

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Square,
    Cube,
}

impl UnOp {
    pub const ALL: [UnOp; 2] = [UnOp::Square, UnOp::Cube];

    pub fn apply(self, a: f64) -> f64 {
        match self {
            UnOp::Square => a * a,
            UnOp::Cube => a * a * a,
        }
    }

    pub fn exponent(self) -> u8 {
        match self {
            UnOp::Square => 2,
            UnOp::Cube => 3,
        }
    }
}

/// A node of a candidate equation.
///
/// Constants are always finite. The nesting restriction (no power node
/// directly under another power node) is not enforced by the type because
/// externally supplied text may contain `**4`; see [`Expr::violates_nesting`].
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(Var),
    Const(f64),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
}

impl Expr {
    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    /// Panics on a non-finite value; trees never store NaN or infinities.
    pub fn constant(value: f64) -> Self {
        assert!(value.is_finite(), "non-finite constant {value}");
        Expr::Const(value)
    }

    pub fn binary(op: BinOp, left: Expr, right: Expr) -> Self {
        Expr::Binary(op, Box::new(left), Box::new(right))
    }

    pub fn unary(op: UnOp, child: Expr) -> Self {
        Expr::Unary(op, Box::new(child))
    }

    pub fn add(l: Expr, r: Expr) -> Self {
        Self::binary(BinOp::Add, l, r)
    }

    pub fn sub(l: Expr, r: Expr) -> Self {
        Self::binary(BinOp::Sub, l, r)
    }

    pub fn mul(l: Expr, r: Expr) -> Self {
        Self::binary(BinOp::Mul, l, r)
    }

    pub fn div(l: Expr, r: Expr) -> Self {
        Self::binary(BinOp::Div, l, r)
    }

    pub fn square(e: Expr) -> Self {
        Self::unary(UnOp::Square, e)
    }

    pub fn cube(e: Expr) -> Self {
        Self::unary(UnOp::Cube, e)
    }

    /// Node count: every variable, constant, binary and unary node counts 1.
    pub fn complexity(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Binary(_, l, r) => 1 + l.complexity() + r.complexity(),
            Expr::Unary(_, c) => 1 + c.complexity(),
        }
    }

    /// True when some power node has another power node as its direct child.
    pub fn violates_nesting(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::Const(_) => false,
            Expr::Binary(_, l, r) => l.violates_nesting() || r.violates_nesting(),
            Expr::Unary(_, c) => matches!(**c, Expr::Unary(..)) || c.violates_nesting(),
        }
    }

    /// Admissible as a search candidate under the given size limit.
    pub fn is_valid_candidate(&self, max_size: usize) -> bool {
        self.complexity() <= max_size && !self.violates_nesting() && self.constants_finite()
    }

    fn constants_finite(&self) -> bool {
        match self {
            Expr::Var(_) => true,
            Expr::Const(c) => c.is_finite(),
            Expr::Binary(_, l, r) => l.constants_finite() && r.constants_finite(),
            Expr::Unary(_, c) => c.constants_finite(),
        }
    }

    pub fn is_unary(&self) -> bool {
        matches!(self, Expr::Unary(..))
    }

    pub fn count_constants(&self) -> usize {
        match self {
            Expr::Var(_) => 0,
            Expr::Const(_) => 1,
            Expr::Binary(_, l, r) => l.count_constants() + r.count_constants(),
            Expr::Unary(_, c) => c.count_constants(),
        }
    }

    /// Constants in preorder.
    pub fn constants(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Const(c) = e {
                out.push(*c);
            }
        });
        out
    }

    /// Replaces constants in preorder. `values` must hold exactly
    /// [`Expr::count_constants`] finite entries.
    pub fn with_constants(&self, values: &[f64]) -> Expr {
        let mut it = values.iter().copied();
        let out = self.map_constants(&mut it);
        debug_assert!(it.next().is_none(), "too many constants supplied");
        out
    }

    fn map_constants(&self, it: &mut impl Iterator<Item = f64>) -> Expr {
        match self {
            Expr::Var(v) => Expr::Var(*v),
            Expr::Const(_) => Expr::constant(it.next().expect("too few constants supplied")),
            Expr::Binary(op, l, r) => {
                let l = l.map_constants(it);
                let r = r.map_constants(it);
                Expr::binary(*op, l, r)
            }
            Expr::Unary(op, c) => Expr::unary(*op, c.map_constants(it)),
        }
    }

    /// Preorder traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Var(_) | Expr::Const(_) => {}
            Expr::Binary(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Expr::Unary(_, c) => c.visit(f),
        }
    }

    /// Subtree at a preorder index (`0` is the root).
    pub fn node(&self, index: usize) -> Option<&Expr> {
        let mut i = index;
        self.node_inner(&mut i)
    }

    fn node_inner(&self, remaining: &mut usize) -> Option<&Expr> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        match self {
            Expr::Var(_) | Expr::Const(_) => None,
            Expr::Binary(_, l, r) => l.node_inner(remaining).or_else(|| r.node_inner(remaining)),
            Expr::Unary(_, c) => c.node_inner(remaining),
        }
    }

    /// Parent of the node at a preorder index, `None` for the root.
    pub fn parent_of(&self, index: usize) -> Option<&Expr> {
        fn walk<'a>(e: &'a Expr, parent: Option<&'a Expr>, pos: &mut usize, target: usize) -> Option<Option<&'a Expr>> {
            if *pos == target {
                return Some(parent);
            }
            *pos += 1;
            match e {
                Expr::Var(_) | Expr::Const(_) => None,
                Expr::Binary(_, l, r) => walk(l, Some(e), pos, target).or_else(|| walk(r, Some(e), pos, target)),
                Expr::Unary(_, c) => walk(c, Some(e), pos, target),
            }
        }
        let mut pos = 0;
        walk(self, None, &mut pos, index).flatten()
    }

    /// Copy of the tree with the subtree at `index` replaced.
    pub fn replace_node(&self, index: usize, replacement: Expr) -> Expr {
        let mut i = index;
        let mut slot = Some(replacement);
        self.replace_inner(&mut i, &mut slot)
    }

    fn replace_inner(&self, remaining: &mut usize, slot: &mut Option<Expr>) -> Expr {
        if slot.is_none() {
            return self.clone();
        }
        if *remaining == 0 {
            return slot.take().expect("checked above");
        }
        *remaining -= 1;
        match self {
            Expr::Var(_) | Expr::Const(_) => self.clone(),
            Expr::Binary(op, l, r) => {
                let l = l.replace_inner(remaining, slot);
                let r = r.replace_inner(remaining, slot);
                Expr::binary(*op, l, r)
            }
            Expr::Unary(op, c) => Expr::unary(*op, c.replace_inner(remaining, slot)),
        }
    }

    /// Exact structural equality, comparing constants bit for bit.
    pub fn same_structure(&self, other: &Expr) -> bool {
        match (self, other) {
            (Expr::Var(a), Expr::Var(b)) => a == b,
            (Expr::Const(a), Expr::Const(b)) => a.to_bits() == b.to_bits(),
            (Expr::Binary(o1, l1, r1), Expr::Binary(o2, l2, r2)) => {
                o1 == o2 && l1.same_structure(l2) && r1.same_structure(r2)
            }
            (Expr::Unary(o1, c1), Expr::Unary(o2, c2)) => o1 == o2 && c1.same_structure(c2),
            _ => false,
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Var(w) if *w == v));
        found
    }

    pub fn evaluate(&self, point: &Point) -> Option<f64> {
        eval::evaluate(self, point)
    }
}
