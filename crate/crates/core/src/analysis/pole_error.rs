//! Leading-order error predictors for one pole ladder step and the measured
//! error obtained by comparing with the transport at the midpoint.
//!
//! The step is centred at `m`: it runs from `p = exp_m(−v)` to `q = exp_m(v)`
//! on the transport `u_p` of `u ∈ T_m M`, and the result is carried back to
//! `m` along the same geodesic before subtracting `u`.

use crate::error::{GeometryError, Result};
use crate::geometry::{self, ConnectionSpace, Point, TangentVector};
use crate::ladders::{transport_along_geodesic, LadderScheme, SchemeKind};

fn nabla_r(
    space: &dyn ConnectionSpace,
    m: &Point,
    dir: &TangentVector,
    u: &TangentVector,
    v: &TangentVector,
    w: &TangentVector,
) -> Result<TangentVector> {
    geometry::nabla_curvature(space, m, dir, u, v, w)
}

/// `1/12 (∇_vR(u,v)(5u − 2v) + ∇_uR(u,v)(v − 2u))`, the leading error of
/// pole ladder (symmetry at `m` then at `q`).
pub fn pole_error_predicted(
    space: &dyn ConnectionSpace,
    m: &Point,
    u: &TangentVector,
    v: &TangentVector,
) -> Result<TangentVector> {
    let a = nabla_r(space, m, v, u, v, &u.scale(5.0).axpy(-2.0, v))?;
    let b = nabla_r(space, m, u, u, v, &v.axpy(-2.0, u))?;
    Ok(a.add(&b).scale(1.0 / 12.0))
}

/// `−1/12 (∇_vR(u,v)(5u + 2v) + ∇_uR(u,v)(v + 2u))`, the leading error of
/// the variant with the symmetry at `p` first.
pub fn alt_error_predicted(
    space: &dyn ConnectionSpace,
    m: &Point,
    u: &TangentVector,
    v: &TangentVector,
) -> Result<TangentVector> {
    let a = nabla_r(space, m, v, u, v, &u.scale(5.0).axpy(2.0, v))?;
    let b = nabla_r(space, m, u, u, v, &v.axpy(2.0, u))?;
    Ok(a.add(&b).scale(-1.0 / 12.0))
}

/// Leading predicted error of `kind`; `None` for Schild's ladder, whose
/// leading term is not of this form.
pub fn predicted_error(
    space: &dyn ConnectionSpace,
    kind: SchemeKind,
    m: &Point,
    u: &TangentVector,
    v: &TangentVector,
) -> Result<Option<TangentVector>> {
    Ok(match kind {
        SchemeKind::Schild => None,
        SchemeKind::PoleV1 | SchemeKind::PoleV2 => Some(pole_error_predicted(space, m, u, v)?),
        SchemeKind::PoleAlt => Some(alt_error_predicted(space, m, u, v)?),
        SchemeKind::PoleAvg => {
            let a = pole_error_predicted(space, m, u, v)?;
            let b = alt_error_predicted(space, m, u, v)?;
            Some(a.add(&b).scale(0.5))
        }
    })
}

/// The geodesic `[p, q]` centred at `m` and the transported input `u_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentredStep {
    pub p: Point,
    pub q: Point,
    pub u_p: TangentVector,
    /// Velocity of the base geodesic at `q`.
    pub v_q: TangentVector,
}

pub fn centred_step(
    space: &dyn ConnectionSpace,
    m: &Point,
    u: &TangentVector,
    v: &TangentVector,
) -> Result<CentredStep> {
    if v.is_zero() {
        return Err(GeometryError::InvalidArgument(
            "the half-segment vector v must be non-zero".into(),
        ));
    }
    let p = geometry::exp(space, m, &v.neg())?;
    let q = geometry::exp(space, m, v)?;
    let u_p = rebase(space.transport_along(u, &v.neg())?, &p);
    let v_q = rebase(space.transport_along(v, v)?, &q);
    Ok(CentredStep { p, q, u_p, v_q })
}

fn rebase(t: TangentVector, base: &Point) -> TangentVector {
    TangentVector::new(base.clone(), t.components)
}

/// Runs `kind` on the centred step and returns `Π_q^m(result) − u` at `m`.
pub fn pole_error_measured(
    space: &dyn ConnectionSpace,
    m: &Point,
    u: &TangentVector,
    v: &TangentVector,
    kind: SchemeKind,
) -> Result<TangentVector> {
    ladder_error_measured(space, m, u, v, &LadderScheme::new(kind), 1)
}

/// As [`pole_error_measured`], with `n_rungs` rungs between `p` and `q`.
pub fn ladder_error_measured(
    space: &dyn ConnectionSpace,
    m: &Point,
    u: &TangentVector,
    v: &TangentVector,
    scheme: &LadderScheme,
    n_rungs: usize,
) -> Result<TangentVector> {
    let step = centred_step(space, m, u, v)?;
    let out = if n_rungs == 1 {
        scheme.kind.step(space, &step.p, &step.q, &step.u_p.scale(scheme.vector_scaling))?
            .scale(1.0 / scheme.vector_scaling)
    } else {
        transport_along_geodesic(space, &step.p, &step.q, &step.u_p, n_rungs, scheme)?.vector
    };
    let back = space.transport_along(&out, &step.v_q.neg())?;
    Ok(TangentVector::new(m.clone(), &back.components - &u.components))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{bump_metric, Euclidean, Sphere};

    #[test]
    fn flat_errors_vanish() {
        let e = Euclidean::new(2);
        let m = Point::from_slice(&[0.3, 0.1]);
        let u = TangentVector::from_slice(&m, &[0.1, 0.05]);
        let v = TangentVector::from_slice(&m, &[-0.02, 0.1]);
        assert!(pole_error_predicted(&e, &m, &u, &v).unwrap().is_zero());
        assert!(alt_error_predicted(&e, &m, &u, &v).unwrap().is_zero());
        for kind in SchemeKind::ALL {
            let err = pole_error_measured(&e, &m, &u, &v, kind).unwrap();
            assert!(err.component_norm() < 1e-15, "{kind}");
        }
    }

    #[test]
    fn sphere_measured_error_is_exact_zero() {
        let s = Sphere::new(2);
        let m = Point::from_slice(&[0.0, 0.0, 1.0]);
        let u = TangentVector::from_slice(&m, &[0.2, 0.1, 0.0]);
        let v = TangentVector::from_slice(&m, &[0.05, 0.3, 0.0]);
        for kind in SchemeKind::POLE {
            let err = pole_error_measured(&s, &m, &u, &v, kind).unwrap();
            assert!(err.component_norm() < 1e-12, "{kind}");
        }
        assert!(pole_error_predicted(&s, &m, &u, &v).unwrap().component_norm() < 1e-8);
    }

    #[test]
    fn parallel_inputs_predict_zero() {
        let b = bump_metric(1.0);
        let m = Point::from_slice(&[0.3, 0.1]);
        let v = TangentVector::from_slice(&m, &[0.06, 0.08]);
        let u = v.scale(0.7);
        assert!(pole_error_predicted(&b, &m, &u, &v).unwrap().component_norm() < 1e-12);
        assert!(alt_error_predicted(&b, &m, &u, &v).unwrap().component_norm() < 1e-12);
    }

    #[test]
    fn zero_half_segment_is_rejected() {
        let e = Euclidean::new(2);
        let m = Point::from_slice(&[0.0, 0.0]);
        let u = TangentVector::from_slice(&m, &[1.0, 0.0]);
        let v = TangentVector::zero(&m);
        assert!(pole_error_measured(&e, &m, &u, &v, SchemeKind::PoleV2).is_err());
    }
}
