use rand::Rng;
use rand_distr::StandardNormal;

use super::generate::{random_binop, random_expression, random_leaf, random_non_unary, random_unop};
use super::SrConfig;
use crate::expr::{BinOp, Expr, UnOp};

/// Bounded retries before a variation operator gives up and returns its input.
pub const MAX_RETRIES: usize = 16;

/// Relative weights of the mutation moves. All zero disables mutation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationWeights {
    pub replace_subtree: f64,
    pub perturb_constant: f64,
    pub change_operator: f64,
    pub insert_delete: f64,
}

impl Default for MutationWeights {
    fn default() -> Self {
        Self {
            replace_subtree: 1.0,
            perturb_constant: 2.0,
            change_operator: 1.0,
            insert_delete: 1.5,
        }
    }
}

impl MutationWeights {
    fn total(&self) -> f64 {
        self.replace_subtree + self.perturb_constant + self.change_operator + self.insert_delete
    }

    fn is_valid(&self) -> bool {
        [
            self.replace_subtree,
            self.perturb_constant,
            self.change_operator,
            self.insert_delete,
        ]
        .iter()
        .all(|w| w.is_finite() && *w >= 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    ReplaceSubtree,
    PerturbConstant,
    ChangeOperator,
    InsertDelete,
}

fn pick_move<R: Rng + ?Sized>(w: &MutationWeights, rng: &mut R) -> Move {
    let mut r = rng.random_range(0.0..w.total());
    for (m, weight) in [
        (Move::ReplaceSubtree, w.replace_subtree),
        (Move::PerturbConstant, w.perturb_constant),
        (Move::ChangeOperator, w.change_operator),
        (Move::InsertDelete, w.insert_delete),
    ] {
        if r < weight {
            return m;
        }
        r -= weight;
    }
    Move::InsertDelete
}

/// Applies one random mutation move. Invalid results are retried up to
/// [`MAX_RETRIES`] times; after that the input is returned unchanged.
pub fn mutate<R: Rng + ?Sized>(e: &Expr, config: &SrConfig, rng: &mut R) -> Expr {
    let w = &config.mutation_weights;
    if !w.is_valid() || w.total() <= 0.0 {
        return e.clone();
    }
    for _ in 0..MAX_RETRIES {
        let mv = pick_move(w, rng);
        if let Some(out) = apply_move(e, mv, config, rng) {
            if out.is_valid_candidate(config.max_size) && !out.same_structure(e) {
                return out;
            }
        }
    }
    e.clone()
}

/// One specific move, `None` when it does not apply (e.g. no constants).
pub fn apply_move<R: Rng + ?Sized>(e: &Expr, mv: Move, config: &SrConfig, rng: &mut R) -> Option<Expr> {
    match mv {
        Move::ReplaceSubtree => replace_subtree(e, config, rng),
        Move::PerturbConstant => perturb_constant(e, rng),
        Move::ChangeOperator => change_operator(e, rng),
        Move::InsertDelete => {
            if rng.random_bool(0.5) {
                insert_node(e, config, rng)
            } else {
                delete_node(e, rng)
            }
        }
    }
}

fn replace_subtree<R: Rng + ?Sized>(e: &Expr, config: &SrConfig, rng: &mut R) -> Option<Expr> {
    let size = e.complexity();
    let idx = rng.random_range(0..size);
    let old = e.node(idx)?.complexity();
    let budget = config.max_size.checked_sub(size - old)?.max(1);
    let under_power = e.parent_of(idx).is_some_and(Expr::is_unary);
    let fresh = if under_power {
        random_non_unary(config, rng, budget)
    } else {
        random_expression(config, rng, budget)
    };
    Some(e.replace_node(idx, fresh))
}

fn perturb_constant<R: Rng + ?Sized>(e: &Expr, rng: &mut R) -> Option<Expr> {
    let mut cs = e.constants();
    if cs.is_empty() {
        return None;
    }
    let i = rng.random_range(0..cs.len());
    let old = cs[i];
    let g: f64 = rng.sample(StandardNormal);
    let mut new = if old == 0.0 { g } else { old * (0.5 * g).exp() };
    if rng.random_bool(0.1) {
        new = -new;
    }
    if !new.is_finite() || new == old {
        return None;
    }
    cs[i] = new;
    Some(e.with_constants(&cs))
}

fn internal_nodes(e: &Expr) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    e.visit(&mut |n| {
        if matches!(n, Expr::Binary(..) | Expr::Unary(..)) {
            out.push(i);
        }
        i += 1;
    });
    out
}

fn change_operator<R: Rng + ?Sized>(e: &Expr, rng: &mut R) -> Option<Expr> {
    let internal = internal_nodes(e);
    if internal.is_empty() {
        return None;
    }
    let idx = internal[rng.random_range(0..internal.len())];
    let replacement = match e.node(idx)? {
        Expr::Binary(op, l, r) => {
            let others: Vec<BinOp> = BinOp::ALL.iter().copied().filter(|o| o != op).collect();
            Expr::binary(others[rng.random_range(0..others.len())], (**l).clone(), (**r).clone())
        }
        Expr::Unary(op, c) => {
            let other = if *op == UnOp::Square { UnOp::Cube } else { UnOp::Square };
            Expr::unary(other, (**c).clone())
        }
        _ => return None,
    };
    Some(e.replace_node(idx, replacement))
}

fn insert_node<R: Rng + ?Sized>(e: &Expr, config: &SrConfig, rng: &mut R) -> Option<Expr> {
    let idx = rng.random_range(0..e.complexity());
    let target = e.node(idx)?.clone();
    let wrapped = if rng.random_bool(0.3) {
        Expr::unary(random_unop(rng), target)
    } else {
        let leaf = random_leaf(config, rng);
        if rng.random_bool(0.5) {
            Expr::binary(random_binop(rng), target, leaf)
        } else {
            Expr::binary(random_binop(rng), leaf, target)
        }
    };
    Some(e.replace_node(idx, wrapped))
}

fn delete_node<R: Rng + ?Sized>(e: &Expr, rng: &mut R) -> Option<Expr> {
    let internal = internal_nodes(e);
    if internal.is_empty() {
        return None;
    }
    let idx = internal[rng.random_range(0..internal.len())];
    let child = match e.node(idx)? {
        Expr::Binary(_, l, r) => {
            if rng.random_bool(0.5) {
                (**l).clone()
            } else {
                (**r).clone()
            }
        }
        Expr::Unary(_, c) => (**c).clone(),
        _ => return None,
    };
    Some(e.replace_node(idx, child))
}

/// Replaces a random subtree of `a` by a random subtree of `b`; falls back
/// to `a` when no valid child is found within [`MAX_RETRIES`] attempts.
pub fn crossover<R: Rng + ?Sized>(a: &Expr, b: &Expr, config: &SrConfig, rng: &mut R) -> Expr {
    let na = a.complexity();
    let nb = b.complexity();
    for _ in 0..MAX_RETRIES {
        let i = rng.random_range(0..na);
        let j = rng.random_range(0..nb);
        let donor = b.node(j).expect("index within tree").clone();
        let child = a.replace_node(i, donor);
        if child.is_valid_candidate(config.max_size) {
            return child;
        }
    }
    a.clone()
}
