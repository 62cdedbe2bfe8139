//! Series evaluators, error meters and convergence fits.

mod bch;
mod convergence;
mod pole_error;

pub use bch::{bch_numeric, bch_series, BchTerm, BchTruncation};
pub use convergence::{
    check_scales, convergence_order, convergence_order_with_floor, fit_line, log_spaced_scales,
    noise_floor, running_slopes, ConvergenceReport, NOISE_FACTOR,
};
pub use pole_error::{
    alt_error_predicted, centred_step, ladder_error_measured, pole_error_measured, pole_error_predicted,
    predicted_error, CentredStep,
};

use rand::RngCore;

use crate::error::Result;
use crate::geometry::{ConnectionSpace, Point, TangentVector};
use crate::ladders::SchemeKind;

/// Largest `|cos|` accepted between the two directions of a generic pair.
pub const MAX_PAIR_COSINE: f64 = 0.99;

/// Cosine of the angle between `a` and `b` in the declared inner product
/// (component inner product without a metric).
pub fn cosine(space: &dyn ConnectionSpace, a: &TangentVector, b: &TangentVector) -> f64 {
    let ab = space
        .inner(a, b)
        .unwrap_or_else(|| a.components.dot(&b.components));
    ab / (space.norm(a) * space.norm(b))
}

/// Two unit directions at `m` that are neither near-parallel
/// (`|cos| ≤ 0.99`) nor orthogonal to within `1e-2`.
pub fn sample_generic_pair(
    space: &dyn ConnectionSpace,
    m: &Point,
    rng: &mut dyn RngCore,
) -> (TangentVector, TangentVector) {
    loop {
        let a = space.sample_unit_tangent(m, rng);
        let b = space.sample_unit_tangent(m, rng);
        let c = cosine(space, &a, &b).abs();
        if c <= MAX_PAIR_COSINE && c >= 1e-2 {
            return (a, b);
        }
    }
}

/// One row of a one-step sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub h: f64,
    /// Component norm of the measured error at `m`.
    pub error: f64,
    /// Component norm of the predicted leading error, when defined.
    pub predicted: Option<f64>,
    /// `‖measured − predicted‖ / ‖predicted‖`, when defined.
    pub predictor_defect: Option<f64>,
}

/// Measured one-step errors of `kind` with `u = h·dir_u`, `v = h·dir_v`
/// at every scale.
pub fn one_step_sweep(
    space: &dyn ConnectionSpace,
    m: &Point,
    dir_u: &TangentVector,
    dir_v: &TangentVector,
    scales: &[f64],
    kind: SchemeKind,
) -> Result<Vec<SweepPoint>> {
    let want_prediction = space.capabilities().has_curvature;
    scales
        .iter()
        .map(|&h| {
            let u = dir_u.scale(h);
            let v = dir_v.scale(h);
            let measured = pole_error_measured(space, m, &u, &v, kind)?;
            let pred = if want_prediction {
                predicted_error(space, kind, m, &u, &v)?
            } else {
                None
            };
            let predicted = pred.as_ref().map(|p| p.component_norm());
            let predictor_defect = pred.as_ref().and_then(|p| {
                let n = p.component_norm();
                (n > 0.0).then(|| measured.sub(p).component_norm() / n)
            });
            Ok(SweepPoint {
                h,
                error: measured.component_norm(),
                predicted,
                predictor_defect,
            })
        })
        .collect()
}

/// `‖bch_numeric − bch_series(order)‖` for `u = h·dir_u`, `v = h·dir_v`.
pub fn bch_residuals(
    space: &dyn ConnectionSpace,
    x: &Point,
    dir_v: &TangentVector,
    dir_u: &TangentVector,
    scales: &[f64],
    order: usize,
) -> Result<Vec<f64>> {
    scales
        .iter()
        .map(|&h| {
            let v = dir_v.scale(h);
            let u = dir_u.scale(h);
            let num = bch_numeric(space, x, &v, &u)?;
            let series = bch_series(space, x, &v, &u, order)?.value();
            Ok(num.sub(&series).component_norm())
        })
        .collect()
}
