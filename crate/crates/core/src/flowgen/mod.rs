//! Fully developed laminar flow in a rectangular duct.
//!
//! With zero transverse velocities the momentum balance reduces to a 2D
//! Poisson problem `u_yy + u_zz = c` on the cross-section with `u = 0` on the
//! walls, plus a linear pressure drop `dp/dx = c` with `p(L) = 0`. Each
//! pressure gradient `c` yields one case; the Reynolds number is the
//! cross-sectional integral of `u`.

mod dataset;
mod series;
mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{
    assemble_dataset, export_csv, read_case_table, read_records, write_case_table, write_records, CaseRow, FlowDataset,
    FlowRecord, CASES_FILE, TEST_FILE, TRAIN_FILE,
};
pub use series::series_reference;
pub use solver::{compute_re, solve_cross_section, solve_cross_section_capped, CrossSection, MAX_ITERATIONS};

/// Pressure gradients of the training cases.
pub const TRAIN_GRADIENTS: [f64; 5] = [-1000.0, -3000.0, -5000.0, -6000.0, -8000.0];
/// Pressure gradients of the testing cases; `-6000` is shared with training.
pub const TEST_GRADIENTS: [f64; 4] = [-2000.0, -4000.0, -6000.0, -7000.0];

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("pressure gradient must be negative and finite, got {0}")]
    Gradient(f64),
    #[error("grid {ny}x{nz} invalid: both sizes must be odd and at least 17")]
    Grid { ny: usize, nz: usize },
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e}, target {target:e})")]
    Divergence {
        iterations: usize,
        residual: f64,
        target: f64,
    },
    #[error("x = {x} lies outside the duct [0, {length}]")]
    Domain { x: f64, length: f64 },
    #[error("dataset needs at least one case and two axial stations")]
    EmptyDataset,
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
}

/// Duct box `(0, L) x (-H/2, H/2) x (-W/2, W/2)` in non-dimensional units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuctGeometry {
    pub length: f64,
    pub height: f64,
    pub width: f64,
}

impl Default for DuctGeometry {
    fn default() -> Self {
        Self {
            length: 5.0,
            height: 1.0,
            width: 1.0,
        }
    }
}

impl DuctGeometry {
    pub fn new(length: f64, height: f64, width: f64) -> Result<Self, FlowError> {
        let g = Self { length, height, width };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        for (name, v) in [("length", self.length), ("height", self.height), ("width", self.width)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(FlowError::Geometry(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Linear pressure `p(x) = c (x - L)`, zero at the outlet.
pub fn pressure_field(c: f64, geometry: &DuctGeometry, x: f64) -> Result<f64, FlowError> {
    if !(0.0..=geometry.length).contains(&x) {
        return Err(FlowError::Domain {
            x,
            length: geometry.length,
        });
    }
    Ok(c * (x - geometry.length))
}
