use serde::{Deserialize, Serialize};

use super::{DuctGeometry, FlowError};

/// Iteration cap of the relaxation solver.
pub const MAX_ITERATIONS: usize = 1_000_000;

// residual is checked every this many sweeps
const CHECK_EVERY: usize = 10;

/// Fully developed axial velocity on the cross-section grid for one
/// pressure gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub c: f64,
    pub ny: usize,
    pub nz: usize,
    /// Node coordinates along the height, `-H/2 ..= H/2`.
    pub ys: Vec<f64>,
    /// Node coordinates along the width, `-W/2 ..= W/2`.
    pub zs: Vec<f64>,
    /// Row-major `u[iy * nz + iz]`.
    pub u: Vec<f64>,
    pub re: f64,
    pub u_max: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl CrossSection {
    pub fn at(&self, iy: usize, iz: usize) -> f64 {
        self.u[iy * self.nz + iz]
    }

    /// Indices of the node nearest the duct axis.
    pub fn center(&self) -> (usize, usize) {
        (self.ny / 2, self.nz / 2)
    }
}

/// Nodes `-half ..= half`, exactly mirror-symmetric with `0` at the middle.
fn centered_nodes(half: f64, n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n).map(|i| half * (2.0 * i as f64 - m) / m).collect()
}

/// Solves `u_yy + u_zz = c` with homogeneous Dirichlet walls using the
/// 5-point stencil and red-black successive over-relaxation, until the
/// max-norm residual is at most `tol * |c|`.
pub fn solve_cross_section(
    c: f64,
    geometry: &DuctGeometry,
    ny: usize,
    nz: usize,
    tol: f64,
) -> Result<CrossSection, FlowError> {
    solve_cross_section_capped(c, geometry, ny, nz, tol, MAX_ITERATIONS)
}

pub fn solve_cross_section_capped(
    c: f64,
    geometry: &DuctGeometry,
    ny: usize,
    nz: usize,
    tol: f64,
    max_iterations: usize,
) -> Result<CrossSection, FlowError> {
    geometry.validate()?;
    if !(c.is_finite() && c < 0.0) {
        return Err(FlowError::Gradient(c));
    }
    if ny < 17 || nz < 17 || ny % 2 == 0 || nz % 2 == 0 {
        return Err(FlowError::Grid { ny, nz });
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(FlowError::Tolerance(tol));
    }

    let hy = geometry.height / (ny - 1) as f64;
    let hz = geometry.width / (nz - 1) as f64;
    let ay = 1.0 / (hy * hy);
    let az = 1.0 / (hz * hz);
    let diag = 2.0 * (ay + az);

    // optimal relaxation factor for the model problem on a rectangle
    let pi = std::f64::consts::PI;
    let rho = (ay * (pi / (ny - 1) as f64).cos() + az * (pi / (nz - 1) as f64).cos()) / (ay + az);
    let omega = 2.0 / (1.0 + (1.0 - rho * rho).sqrt());

    let mut u = vec![0.0f64; ny * nz];
    let target = tol * c.abs();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    while iterations < max_iterations {
        for color in 0..2 {
            for i in 1..ny - 1 {
                let row = i * nz;
                let start = 1 + (i + 1 + color) % 2;
                let mut j = start;
                while j < nz - 1 {
                    let k = row + j;
                    let gs = (ay * (u[k - nz] + u[k + nz]) + az * (u[k - 1] + u[k + 1]) - c) / diag;
                    u[k] += omega * (gs - u[k]);
                    j += 2;
                }
            }
        }
        iterations += 1;
        if iterations % CHECK_EVERY == 0 || iterations == max_iterations {
            residual = max_residual(&u, ny, nz, ay, az, c);
            if residual <= target {
                break;
            }
        }
    }
    if residual > target {
        return Err(FlowError::Divergence {
            iterations,
            residual,
            target,
        });
    }

    let ys = centered_nodes(geometry.height / 2.0, ny);
    let zs = centered_nodes(geometry.width / 2.0, nz);
    let u_max = u.iter().copied().fold(0.0, f64::max);
    let mut cs = CrossSection {
        c,
        ny,
        nz,
        ys,
        zs,
        u,
        re: 0.0,
        u_max,
        iterations,
        residual,
    };
    cs.re = compute_re(&cs);
    Ok(cs)
}

fn max_residual(u: &[f64], ny: usize, nz: usize, ay: f64, az: f64, c: f64) -> f64 {
    let mut r = 0.0f64;
    for i in 1..ny - 1 {
        for j in 1..nz - 1 {
            let k = i * nz + j;
            let lap = ay * (u[k - nz] - 2.0 * u[k] + u[k + nz]) + az * (u[k - 1] - 2.0 * u[k] + u[k + 1]);
            r = r.max((lap - c).abs());
        }
    }
    r
}

/// Composite trapezoidal integral of `u` over the cross-section.
pub fn compute_re(cs: &CrossSection) -> f64 {
    let wy = trapezoid_weights(&cs.ys);
    let wz = trapezoid_weights(&cs.zs);
    let mut total = 0.0;
    for (i, wyi) in wy.iter().enumerate() {
        let row = &cs.u[i * cs.nz..(i + 1) * cs.nz];
        let inner: f64 = row.iter().zip(&wz).map(|(u, w)| u * w).sum();
        total += wyi * inner;
    }
    total
}

fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = nodes[i + 1] - nodes[i];
        w[i] += h / 2.0;
        w[i + 1] += h / 2.0;
    }
    w
}
