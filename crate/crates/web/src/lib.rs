//! Browser bindings for the static demo in `www/`.
//!
//! Each exported function is a thin wrapper over a plain Rust function that
//! returns `Result<_, String>`, so the logic is testable off the browser.

use ductsr::expr::{parse, Point};
use ductsr::filterlang::{explain, parse_facts_file, solve, ConstraintProgram};
use ductsr::flowgen::{solve_cross_section, DuctGeometry};
use ductsr::metrics::MetricReport;
use wasm_bindgen::prelude::*;

const TOL: f64 = 1e-8;
const MAX_N: usize = 201;

/// One solved cross-section, row-major `values[iy * n + iz]`.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Section {
    n: usize,
    values: Vec<f64>,
    re: f64,
    u_max: f64,
    iterations: usize,
}

#[wasm_bindgen]
impl Section {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }
    #[wasm_bindgen(getter)]
    pub fn re(&self) -> f64 {
        self.re
    }
    #[wasm_bindgen(getter)]
    pub fn u_max(&self) -> f64 {
        self.u_max
    }
    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

fn check_grid(n: usize) -> Result<(), String> {
    if !(17..=MAX_N).contains(&n) || n % 2 == 0 {
        return Err(format!("grid size must be odd and between 17 and {MAX_N}, got {n}"));
    }
    Ok(())
}

pub fn section(c: f64, n: usize, aspect: f64) -> Result<Section, String> {
    check_grid(n)?;
    let g = DuctGeometry::new(5.0, 1.0, aspect).map_err(|e| e.to_string())?;
    let cs = solve_cross_section(c, &g, n, n, TOL).map_err(|e| e.to_string())?;
    Ok(Section {
        n,
        values: cs.u,
        re: cs.re,
        u_max: cs.u_max,
        iterations: cs.iterations,
    })
}

/// Equation against the solver on one cross-section at `x = L/2`.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Comparison {
    n: usize,
    solver: Vec<f64>,
    predicted: Vec<f64>,
    re: f64,
    mse: f64,
    mae: f64,
    nmae: f64,
}

#[wasm_bindgen]
impl Comparison {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }
    #[wasm_bindgen(getter)]
    pub fn re(&self) -> f64 {
        self.re
    }
    #[wasm_bindgen(getter)]
    pub fn mse(&self) -> f64 {
        self.mse
    }
    #[wasm_bindgen(getter)]
    pub fn mae(&self) -> f64 {
        self.mae
    }
    /// Percent of the solver's velocity range.
    #[wasm_bindgen(getter)]
    pub fn nmae(&self) -> f64 {
        self.nmae
    }
    pub fn solver(&self) -> Vec<f64> {
        self.solver.clone()
    }
    pub fn predicted(&self) -> Vec<f64> {
        self.predicted.clone()
    }
    /// Absolute pointwise error.
    pub fn error(&self) -> Vec<f64> {
        self.solver
            .iter()
            .zip(&self.predicted)
            .map(|(a, b)| (a - b).abs())
            .collect()
    }
}

pub fn comparison(equation: &str, c: f64, n: usize) -> Result<Comparison, String> {
    let e = parse(equation).map_err(|e| e.to_string())?;
    check_grid(n)?;
    let g = DuctGeometry::default();
    let cs = solve_cross_section(c, &g, n, n, TOL).map_err(|e| e.to_string())?;
    let mut predicted = Vec::with_capacity(cs.u.len());
    for &y in &cs.ys {
        for &z in &cs.zs {
            let v = e
                .evaluate(&Point::new(g.length / 2.0, y, z, cs.re))
                .ok_or_else(|| format!("`{equation}` is not finite at y = {y}, z = {z}"))?;
            predicted.push(v);
        }
    }
    let m = MetricReport::compute(&cs.u, &predicted).map_err(|e| e.to_string())?;
    Ok(Comparison {
        n,
        solver: cs.u,
        predicted,
        re: cs.re,
        mse: m.mse,
        mae: m.mae,
        nmae: m.nmae_percent.unwrap_or(f64::NAN),
    })
}

/// Selection block followed by one verdict line per equation.
pub fn filter_text(facts: &str, constraints: &str) -> Result<String, String> {
    let facts = parse_facts_file(facts).map_err(|e| format!("facts: {e}"))?;
    let program = ConstraintProgram::parse(constraints).map_err(|e| format!("constraints: {e}"))?;
    let mut out = solve(&facts, &program).render();
    out.push_str("\nVERDICTS\n");
    for v in explain(&facts, &program) {
        out.push_str(&format!("ID {}: {}\n", v.id, v.describe()));
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn solve_section(c: f64, n: usize, aspect: f64) -> Result<Section, JsValue> {
    section(c, n, aspect).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn compare_equation(equation: &str, c: f64, n: usize) -> Result<Comparison, JsValue> {
    comparison(equation, c, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn run_filter(facts: &str, constraints: &str) -> Result<String, JsValue> {
    filter_text(facts, constraints).map_err(|e| JsValue::from_str(&e))
}
