use std::f64::consts::PI;

use super::DuctGeometry;

/// `cosh(x) / cosh(b)` for `|x| <= b` without overflow.
fn cosh_ratio(x: f64, b: f64) -> f64 {
    let x = x.abs();
    (x - b).exp() * (1.0 + (-2.0 * x).exp()) / (1.0 + (-2.0 * b).exp())
}

/// Classical single-series solution of fully developed laminar flow in a
/// rectangular duct driven by pressure gradient `c < 0`, truncated after
/// `n_terms` odd-index terms.
///
/// With half-height `a` and half-width `b`:
///
/// ```text
/// u = (G a^2 / 2) [1 - (y/a)^2 - 32/pi^3 sum_k (-1)^k / n^3
///                  cosh(n pi z / 2a) / cosh(n pi b / 2a) cos(n pi y / 2a)],
/// n = 2k + 1,  G = -c
/// ```
pub fn series_reference(c: f64, geometry: &DuctGeometry, y: f64, z: f64, n_terms: usize) -> f64 {
    let g = -c;
    let a = geometry.height / 2.0;
    let b = geometry.width / 2.0;
    let mut sum = 0.0;
    for k in 0..n_terms {
        let n = (2 * k + 1) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let w = n * PI / (2.0 * a);
        sum += sign / (n * n * n) * cosh_ratio(w * z, w * b) * (w * y).cos();
    }
    g * a * a / 2.0 * (1.0 - (y / a).powi(2) - 32.0 / PI.powi(3) * sum)
}
