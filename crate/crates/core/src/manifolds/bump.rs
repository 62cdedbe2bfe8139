//! Conformally flat chart manifolds: the non-symmetric bump metric and the
//! stereographic chart of the round sphere.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::chart::{conformal_christoffel, ChartBounds, ChartConnection, ChartSpace};
use crate::geometry::{Point, TangentVector};

/// `g = e^{2f}(dx² + dy²)` with `f(x, y) = β x²` on the box `|x|, |y| ≤ 1`.
///
/// Gauss curvature `K = −e^{−2f} Δf = −2β e^{−2βx²}` is not constant for
/// `β ≠ 0`, so `∇R ≠ 0`.
pub fn bump_metric(beta: f64) -> ChartSpace {
    let conn = ChartConnection::new(
        2,
        Arc::new(move |x: &[f64]| conformal_christoffel(&[2.0 * beta * x[0], 0.0])),
    )
    .with_bounds(ChartBounds::cube(2, 1.0));
    ChartSpace::new("bump2d", conn, Point::from_slice(&[0.3, 0.1]))
        .with_metric(Arc::new(move |x: &[f64]| {
            DMatrix::identity(2, 2) * (2.0 * beta * x[0] * x[0]).exp()
        }))
        .with_validity_radius(0.5)
        .locally_symmetric(beta == 0.0)
}

/// Gauss curvature of [`bump_metric`] at `(x, y)`.
pub fn bump_gauss_curvature(beta: f64, x: f64) -> f64 {
    -2.0 * beta * (-2.0 * beta * x * x).exp()
}

/// `∂K/∂x` of [`bump_metric`] (`∂K/∂y = 0`).
pub fn bump_gauss_curvature_dx(beta: f64, x: f64) -> f64 {
    8.0 * beta * beta * x * (-2.0 * beta * x * x).exp()
}

/// The unit sphere `Sⁿ` in the stereographic chart from the south pole:
/// `g = 4/(1+|x|²)² δ`, chart origin at the north pole.
pub fn stereographic_sphere(n: usize, half_width: f64) -> ChartSpace {
    let conn = ChartConnection::new(
        n,
        Arc::new(|x: &[f64]| {
            let s = 1.0 + x.iter().map(|c| c * c).sum::<f64>();
            let grad: Vec<f64> = x.iter().map(|c| -2.0 * c / s).collect();
            conformal_christoffel(&grad)
        }),
    )
    .with_bounds(ChartBounds::cube(n, half_width));
    let mut reference = vec![0.0; n];
    reference[0] = 0.2;
    ChartSpace::new(format!("sphere-chart-{n}"), conn, Point::from_slice(&reference))
        .with_metric(Arc::new(move |x: &[f64]| {
            let s = 1.0 + x.iter().map(|c| c * c).sum::<f64>();
            DMatrix::identity(n, n) * (4.0 / (s * s))
        }))
        .with_validity_radius(1.0)
        .with_injectivity_radius(Some(PI))
        .locally_symmetric(true)
}

/// Chart point to embedded unit vector in `ℝⁿ⁺¹`.
pub fn stereographic_to_sphere(x: &[f64]) -> DVector<f64> {
    let n = x.len();
    let s = x.iter().map(|c| c * c).sum::<f64>();
    DVector::from_fn(n + 1, |i, _| {
        if i < n {
            2.0 * x[i] / (1.0 + s)
        } else {
            (1.0 - s) / (1.0 + s)
        }
    })
}

/// Embedded unit vector (not the south pole) to chart point.
pub fn sphere_to_stereographic(y: &DVector<f64>) -> Vec<f64> {
    let n = y.len() - 1;
    (0..n).map(|i| y[i] / (1.0 + y[n])).collect()
}

/// Differential of [`stereographic_to_sphere`] applied to a chart vector.
pub fn stereographic_push_forward(u: &TangentVector) -> DVector<f64> {
    let x = u.base.as_slice();
    let n = x.len();
    let s = x.iter().map(|c| c * c).sum::<f64>();
    let d = 1.0 + s;
    let xu: f64 = x.iter().zip(u.as_slice()).map(|(a, b)| a * b).sum();
    DVector::from_fn(n + 1, |i, _| {
        if i < n {
            2.0 * u.components[i] / d - 4.0 * x[i] * xu / (d * d)
        } else {
            -4.0 * xu / (d * d)
        }
    })
}
