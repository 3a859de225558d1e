use rand::Rng;
use rand_distr::StandardNormal;

use super::Samples;
use crate::expr::{Compiled, EvalStack, Expr};

const GROW: f64 = 2.0;
const SHRINK: f64 = 0.84;

/// Coordinate-wise stochastic hill climbing on the constants of `e`.
///
/// Each step perturbs one randomly chosen constant by a Gaussian scaled by
/// that constant's own step size; improvements are kept and widen the step,
/// failures narrow it. Returns the refined tree and its MSE, which is never
/// worse than the starting loss.
pub fn optimize_constants<R: Rng + ?Sized>(e: &Expr, data: &Samples, steps: usize, rng: &mut R) -> (Expr, f64) {
    let mut stack = EvalStack::new();
    optimize_with_stack(e, data, steps, rng, &mut stack)
}

pub(crate) fn optimize_with_stack<R: Rng + ?Sized>(
    e: &Expr,
    data: &Samples,
    steps: usize,
    rng: &mut R,
    stack: &mut EvalStack,
) -> (Expr, f64) {
    let program = Compiled::new(e);
    let mut consts = program.constants().to_vec();
    let mut best = data.mse(&program, &consts, stack);
    if consts.is_empty() || steps == 0 || !best.is_finite() {
        return (e.clone(), best);
    }
    let mut sigma: Vec<f64> = consts.iter().map(|c| 0.5 * c.abs().max(0.5)).collect();
    let mut trial = consts.clone();
    for _ in 0..steps {
        let i = rng.random_range(0..consts.len());
        let g: f64 = rng.sample(StandardNormal);
        let proposal = consts[i] + sigma[i] * g;
        if !proposal.is_finite() || proposal == consts[i] {
            sigma[i] *= SHRINK;
            continue;
        }
        trial[i] = proposal;
        let loss = data.mse(&program, &trial, stack);
        if loss < best {
            best = loss;
            consts[i] = proposal;
            sigma[i] *= GROW;
        } else {
            trial[i] = consts[i];
            sigma[i] *= SHRINK;
        }
        // keep steps meaningful relative to the value
        let floor = 1e-15 * consts[i].abs().max(1e-300);
        if sigma[i] < floor {
            sigma[i] = 0.1 * consts[i].abs().max(0.1);
        }
    }
    (e.with_constants(&consts), best)
}
