use super::{BinOp, Expr, UnOp, Var};

/// One sample of the four inputs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub re: f64,
}

impl Point {
    pub fn new(x: f64, y: f64, z: f64, re: f64) -> Self {
        Self { x, y, z, re }
    }

    pub fn get(&self, v: Var) -> f64 {
        match v {
            Var::X => self.x,
            Var::Y => self.y,
            Var::Z => self.z,
            Var::Re => self.re,
        }
    }
}

/// Recursive evaluation. `None` is the non-finite flag: some intermediate
/// value was NaN or infinite.
pub(super) fn evaluate(e: &Expr, p: &Point) -> Option<f64> {
    let v = match e {
        Expr::Var(v) => p.get(*v),
        Expr::Const(c) => *c,
        Expr::Binary(op, l, r) => op.apply(evaluate(l, p)?, evaluate(r, p)?),
        Expr::Unary(op, c) => op.apply(evaluate(c, p)?),
    };
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Instr {
    Var(Var),
    Const(usize),
    Bin(BinOp),
    Un(UnOp),
}

/// Postfix form of an expression for evaluation over whole columns with
/// swappable constants, the hot path of fitness scoring.
#[derive(Debug, Clone)]
pub struct Compiled {
    code: Vec<Instr>,
    constants: Vec<f64>,
    max_depth: usize,
}

impl Compiled {
    pub fn new(e: &Expr) -> Self {
        let mut code = Vec::with_capacity(e.complexity());
        let mut constants = Vec::new();
        emit(e, &mut code, &mut constants);
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        for ins in &code {
            match ins {
                Instr::Var(_) | Instr::Const(_) => depth += 1,
                Instr::Bin(_) => depth -= 1,
                Instr::Un(_) => {}
            }
            max_depth = max_depth.max(depth);
        }
        Self {
            code,
            constants,
            max_depth,
        }
    }

    /// Constants in the same preorder as [`Expr::constants`].
    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    /// Evaluates over columns ordered `[x, y, z, re]`, all the same length.
    /// Returns `None` if any intermediate value is non-finite.
    pub fn eval_columns<'a>(
        &self,
        constants: &[f64],
        columns: [&[f64]; 4],
        stack: &'a mut EvalStack,
    ) -> Option<&'a [f64]> {
        debug_assert_eq!(constants.len(), self.constants.len());
        let n = columns[0].len();
        stack.prepare(self.max_depth, n);
        let mut top = 0usize;
        for ins in &self.code {
            match *ins {
                Instr::Var(v) => {
                    stack.bufs[top].copy_from_slice(columns[v.index()]);
                    top += 1;
                }
                Instr::Const(i) => {
                    stack.bufs[top].fill(constants[i]);
                    top += 1;
                }
                Instr::Bin(op) => {
                    let (lo, hi) = stack.bufs.split_at_mut(top - 1);
                    let a = &mut lo[top - 2];
                    let b = &hi[0];
                    match op {
                        BinOp::Add => a.iter_mut().zip(b).for_each(|(a, b)| *a += b),
                        BinOp::Sub => a.iter_mut().zip(b).for_each(|(a, b)| *a -= b),
                        BinOp::Mul => a.iter_mut().zip(b).for_each(|(a, b)| *a *= b),
                        BinOp::Div => {
                            // x / inf is finite, so a non-finite divisor must be caught here
                            if !b.iter().all(|v| v.is_finite()) {
                                return None;
                            }
                            a.iter_mut().zip(b).for_each(|(a, b)| *a /= b)
                        }
                    }
                    top -= 1;
                }
                Instr::Un(op) => {
                    let a = &mut stack.bufs[top - 1];
                    match op {
                        UnOp::Square => a.iter_mut().for_each(|v| *v *= *v),
                        UnOp::Cube => a.iter_mut().for_each(|v| *v = *v * *v * *v),
                    }
                }
            }
        }
        debug_assert_eq!(top, 1);
        let out = &stack.bufs[0][..n];
        out.iter().all(|v| v.is_finite()).then_some(out)
    }

    /// Mean squared error against `target`; `+inf` when evaluation is non-finite.
    pub fn mse(&self, constants: &[f64], columns: [&[f64]; 4], target: &[f64], stack: &mut EvalStack) -> f64 {
        match self.eval_columns(constants, columns, stack) {
            Some(pred) if !pred.is_empty() => {
                let s: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
                let m = s / pred.len() as f64;
                if m.is_finite() {
                    m
                } else {
                    f64::INFINITY
                }
            }
            _ => f64::INFINITY,
        }
    }
}

fn emit(e: &Expr, code: &mut Vec<Instr>, constants: &mut Vec<f64>) {
    // constants are numbered in preorder so they line up with Expr::constants
    match e {
        Expr::Var(v) => code.push(Instr::Var(*v)),
        Expr::Const(c) => {
            code.push(Instr::Const(constants.len()));
            constants.push(*c);
        }
        Expr::Binary(op, l, r) => {
            emit(l, code, constants);
            emit(r, code, constants);
            code.push(Instr::Bin(*op));
        }
        Expr::Unary(op, c) => {
            emit(c, code, constants);
            code.push(Instr::Un(*op));
        }
    }
}

/// Reusable scratch buffers for [`Compiled::eval_columns`].
#[derive(Debug, Default)]
pub struct EvalStack {
    bufs: Vec<Vec<f64>>,
}

impl EvalStack {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, depth: usize, n: usize) {
        if self.bufs.len() < depth {
            self.bufs.resize_with(depth, Vec::new);
        }
        for b in &mut self.bufs[..depth] {
            b.resize(n, 0.0);
        }
    }
}
