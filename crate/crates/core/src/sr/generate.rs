use rand::Rng;

use super::SrConfig;
use crate::expr::{BinOp, Expr, UnOp, Var};

// share of interior nodes that are power operators
const UNARY_PROBABILITY: f64 = 0.25;

pub(crate) fn random_leaf<R: Rng + ?Sized>(config: &SrConfig, rng: &mut R) -> Expr {
    // five equally likely leaf kinds: the four variables and a constant
    let k = rng.random_range(0..5);
    if k < 4 {
        Expr::var(Var::ALL[k])
    } else {
        let (lo, hi) = config.constant_range;
        Expr::constant(rng.random_range(lo..=hi))
    }
}

pub(crate) fn random_binop<R: Rng + ?Sized>(rng: &mut R) -> BinOp {
    BinOp::ALL[rng.random_range(0..BinOp::ALL.len())]
}

pub(crate) fn random_unop<R: Rng + ?Sized>(rng: &mut R) -> UnOp {
    UnOp::ALL[rng.random_range(0..UnOp::ALL.len())]
}

/// Grows a tree of exactly `size` nodes, or `size - 1` when the only shape
/// of that size would break the nesting rule.
fn grow<R: Rng + ?Sized>(config: &SrConfig, rng: &mut R, size: usize, allow_unary: bool) -> Expr {
    match size {
        0 | 1 => random_leaf(config, rng),
        2 if allow_unary => Expr::unary(random_unop(rng), random_leaf(config, rng)),
        2 => random_leaf(config, rng),
        _ => {
            // a unary child of size 2 would itself have to be unary
            if allow_unary && size != 3 && rng.random_bool(UNARY_PROBABILITY) {
                Expr::unary(random_unop(rng), grow(config, rng, size - 1, false))
            } else {
                let left = rng.random_range(1..=size - 2);
                let right = size - 1 - left;
                Expr::binary(
                    random_binop(rng),
                    grow(config, rng, left, true),
                    grow(config, rng, right, true),
                )
            }
        }
    }
}

/// Random valid tree with complexity at most `size_budget`; the target size
/// is drawn uniformly from `1..=size_budget`.
pub fn random_expression<R: Rng + ?Sized>(config: &SrConfig, rng: &mut R, size_budget: usize) -> Expr {
    let budget = size_budget.max(1);
    let target = rng.random_range(1..=budget);
    grow(config, rng, target, true)
}

/// Like [`random_expression`] but never returns a power node at the root,
/// for slots directly under a power operator.
pub(crate) fn random_non_unary<R: Rng + ?Sized>(config: &SrConfig, rng: &mut R, size_budget: usize) -> Expr {
    let budget = size_budget.max(1);
    let target = rng.random_range(1..=budget);
    grow(config, rng, target, false)
}
