//! Geodesic ladder schemes: Schild's ladder, pole ladder (two formulations),
//! the alternative symmetry order, their average, and the multi-rung driver.
//!
//! Every one-step scheme takes the segment end points `p`, `q` and a vector
//! `u` based at `p`, and returns its approximate parallel transport at `q`.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::RngCore;

use crate::error::{GeometryError, Result};
use crate::geometry::{self, Capabilities, ConnectionSpace, Point, TangentVector};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Schild,
    PoleV1,
    PoleV2,
    PoleAlt,
    PoleAvg,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Schild,
        SchemeKind::PoleV1,
        SchemeKind::PoleV2,
        SchemeKind::PoleAlt,
        SchemeKind::PoleAvg,
    ];

    /// The four pole ladder variants.
    pub const POLE: [SchemeKind; 4] = [
        SchemeKind::PoleV1,
        SchemeKind::PoleV2,
        SchemeKind::PoleAlt,
        SchemeKind::PoleAvg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Schild => "schild",
            SchemeKind::PoleV1 => "pole_v1",
            SchemeKind::PoleV2 => "pole_v2",
            SchemeKind::PoleAlt => "pole_alt",
            SchemeKind::PoleAvg => "pole_avg",
        }
    }

    /// Runs one rung of this scheme.
    pub fn step(
        self,
        space: &dyn ConnectionSpace,
        p: &Point,
        q: &Point,
        u: &TangentVector,
    ) -> Result<TangentVector> {
        match self {
            SchemeKind::Schild => schild_step(space, p, q, u),
            SchemeKind::PoleV1 => pole_step_v1(space, p, q, u),
            SchemeKind::PoleV2 => pole_step_v2(space, p, q, u),
            SchemeKind::PoleAlt => pole_step_alt(space, p, q, u),
            SchemeKind::PoleAvg => pole_step_averaged(space, p, q, u),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| {
                GeometryError::InvalidArgument(format!(
                    "unknown scheme {s:?}; expected schild, pole_v1, pole_v2, pole_alt or pole_avg"
                ))
            })
    }
}

/// A scheme together with the factor applied to `u` before transport and
/// removed afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderScheme {
    pub kind: SchemeKind,
    pub vector_scaling: f64,
}

impl LadderScheme {
    pub fn new(kind: SchemeKind) -> Self {
        Self {
            kind,
            vector_scaling: 1.0,
        }
    }

    /// Default for multi-rung runs: `u` is shrunk by `1/n_rungs`.
    pub fn for_rungs(kind: SchemeKind, n_rungs: usize) -> Self {
        Self {
            kind,
            vector_scaling: 1.0 / n_rungs.max(1) as f64,
        }
    }

    pub fn with_scaling(mut self, vector_scaling: f64) -> Self {
        self.vector_scaling = vector_scaling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.vector_scaling > 0.0 && self.vector_scaling <= 1.0) {
            return Err(GeometryError::InvalidArgument(format!(
                "vector_scaling must lie in (0, 1], got {}",
                self.vector_scaling
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RungDiagnostics {
    /// `‖log_m(a) + log_m(b)‖` for the rung end points `a`, `b` and midpoint `m`.
    pub midpoint_residual: f64,
    /// Coordinate distance between `s_m(a)` and `b`.
    pub symmetry_residual: f64,
    /// Shooting iterations spent inside the rung.
    pub log_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderResult {
    pub vector: TangentVector,
    pub rungs: Vec<RungDiagnostics>,
}

/// `log_q(x₁)` with `x₁ = exp_p(2·log_p(midpoint(exp_p(u), q)))`.
pub fn schild_step(
    space: &dyn ConnectionSpace,
    p: &Point,
    q: &Point,
    u: &TangentVector,
) -> Result<TangentVector> {
    if u.is_zero() {
        return Ok(TangentVector::zero(q));
    }
    let p1 = geometry::exp(space, p, u)?;
    let m1 = geometry::midpoint(space, &p1, q)?;
    let diag = geometry::log(space, p, &m1)?;
    let x1 = geometry::exp(space, p, &diag.scale(2.0))?;
    geometry::log(space, q, &x1)
}

/// Pole ladder by shooting: `q′ = exp_{p′}(2·log_{p′}(m))`, returns `−log_q(q′)`.
pub fn pole_step_v1(
    space: &dyn ConnectionSpace,
    p: &Point,
    q: &Point,
    u: &TangentVector,
) -> Result<TangentVector> {
    if u.is_zero() {
        return Ok(TangentVector::zero(q));
    }
    let m = geometry::midpoint(space, p, q)?;
    let p1 = geometry::exp(space, p, u)?;
    let to_m = geometry::log(space, &p1, &m)?;
    let q1 = geometry::exp(space, &p1, &to_m.scale(2.0))?;
    Ok(geometry::log(space, q, &q1)?.neg())
}

/// Pole ladder by symmetries: `q″ = s_q(s_m(p′))`, returns `log_q(q″)`.
pub fn pole_step_v2(
    space: &dyn ConnectionSpace,
    p: &Point,
    q: &Point,
    u: &TangentVector,
) -> Result<TangentVector> {
    if u.is_zero() {
        return Ok(TangentVector::zero(q));
    }
    let m = geometry::midpoint(space, p, q)?;
    let p1 = geometry::exp(space, p, u)?;
    let q1 = geometry::geodesic_symmetry(space, &m, &p1)?;
    let q2 = geometry::geodesic_symmetry(space, q, &q1)?;
    geometry::log(space, q, &q2)
}

/// Symmetry at `p` first, then at `m`: returns `log_q(s_m(s_p(p′)))`.
pub fn pole_step_alt(
    space: &dyn ConnectionSpace,
    p: &Point,
    q: &Point,
    u: &TangentVector,
) -> Result<TangentVector> {
    if u.is_zero() {
        return Ok(TangentVector::zero(q));
    }
    let m = geometry::midpoint(space, p, q)?;
    let reflected = geometry::exp(space, p, &u.neg())?;
    let q1 = geometry::geodesic_symmetry(space, &m, &reflected)?;
    geometry::log(space, q, &q1)
}

/// Mean at `q` of [`pole_step_v2`] and [`pole_step_alt`].
pub fn pole_step_averaged(
    space: &dyn ConnectionSpace,
    p: &Point,
    q: &Point,
    u: &TangentVector,
) -> Result<TangentVector> {
    let a = pole_step_v2(space, p, q, u)?;
    let b = pole_step_alt(space, p, q, u)?;
    Ok(a.add(&b).scale(0.5))
}

/// Transports `u` from `p` to `q` by folding `scheme` over `n_rungs` equal
/// affine-parameter sub-segments of the geodesic `[p, q]`.
pub fn transport_along_geodesic(
    space: &dyn ConnectionSpace,
    p: &Point,
    q: &Point,
    u: &TangentVector,
    n_rungs: usize,
    scheme: &LadderScheme,
) -> Result<LadderResult> {
    if n_rungs == 0 {
        return Err(GeometryError::InvalidArgument("n_rungs must be at least 1".into()));
    }
    scheme.validate()?;
    let chord = geometry::log(space, p, q)?;
    let mut nodes = Vec::with_capacity(n_rungs + 1);
    nodes.push(p.clone());
    for i in 1..n_rungs {
        let t = i as f64 / n_rungs as f64;
        let node = geometry::exp(space, p, &chord.scale(t))
            .map_err(|e| rung_error(i - 1, e))?;
        nodes.push(node);
    }
    nodes.push(q.clone());

    let counted = CountingSpace::new(space);
    let mut current = u.scale(scheme.vector_scaling);
    let mut rungs = Vec::with_capacity(n_rungs);
    for (i, pair) in nodes.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        counted.reset();
        let wrap = |e| rung_error(i, e);
        current = scheme.kind.step(&counted, a, b, &current).map_err(wrap)?;
        let log_iterations = counted.iterations();
        let m = geometry::midpoint(space, a, b).map_err(wrap)?;
        let midpoint_residual = geometry::barycenter_residual(space, &m, a, b).map_err(wrap)?;
        let symmetry_residual = geometry::geodesic_symmetry(space, &m, a)
            .map_err(wrap)?
            .coord_distance(b);
        rungs.push(RungDiagnostics {
            midpoint_residual,
            symmetry_residual,
            log_iterations,
        });
    }
    Ok(LadderResult {
        vector: current.scale(1.0 / scheme.vector_scaling),
        rungs,
    })
}

fn rung_error(index: usize, source: GeometryError) -> GeometryError {
    GeometryError::RungFailed {
        index,
        source: Box::new(source),
    }
}

/// Delegating space that counts shooting iterations of the logs it serves.
struct CountingSpace<'a> {
    inner: &'a dyn ConnectionSpace,
    iters: AtomicUsize,
}

impl<'a> CountingSpace<'a> {
    fn new(inner: &'a dyn ConnectionSpace) -> Self {
        Self {
            inner,
            iters: AtomicUsize::new(0),
        }
    }

    fn reset(&self) {
        self.iters.store(0, Ordering::Relaxed);
    }

    fn iterations(&self) -> usize {
        self.iters.load(Ordering::Relaxed)
    }
}

impl ConnectionSpace for CountingSpace<'_> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn capabilities(&self) -> Capabilities {
        self.inner.capabilities()
    }

    fn coord_len(&self) -> usize {
        self.inner.coord_len()
    }

    fn tolerances(&self) -> &ToleranceConfig {
        self.inner.tolerances()
    }

    fn membership_residual(&self, p: &Point) -> f64 {
        self.inner.membership_residual(p)
    }

    fn tangency_residual(&self, u: &TangentVector) -> f64 {
        self.inner.tangency_residual(u)
    }

    fn exp(&self, v: &TangentVector) -> Result<Point> {
        self.inner.exp(v)
    }

    fn log_counted(&self, p: &Point, q: &Point) -> Result<(TangentVector, usize)> {
        let (v, n) = self.inner.log_counted(p, q)?;
        self.iters.fetch_add(n, Ordering::Relaxed);
        Ok((v, n))
    }

    fn transport(&self, u: &TangentVector, q: &Point) -> Result<TangentVector> {
        self.inner.transport(u, q)
    }

    fn transport_along(&self, u: &TangentVector, velocity: &TangentVector) -> Result<TangentVector> {
        self.inner.transport_along(u, velocity)
    }

    fn curvature(
        &self,
        u: &TangentVector,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<TangentVector> {
        self.inner.curvature(u, v, w)
    }

    fn nabla_curvature(
        &self,
        x: &TangentVector,
        u: &TangentVector,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<TangentVector> {
        self.inner.nabla_curvature(x, u, v, w)
    }

    fn inner(&self, u: &TangentVector, v: &TangentVector) -> Option<f64> {
        self.inner.inner(u, v)
    }

    fn symmetry(&self, m: &Point, p: &Point) -> Result<Point> {
        if self.inner.capabilities().has_closed_form_transport {
            self.inner.symmetry(m, p)
        } else {
            let v = self.log(m, p)?;
            self.inner.exp(&v.neg())
        }
    }

    fn reference_point(&self) -> Point {
        self.inner.reference_point()
    }

    fn sample_point(&self, rng: &mut dyn RngCore, spread: f64) -> Point {
        self.inner.sample_point(rng, spread)
    }

    fn sample_unit_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> TangentVector {
        self.inner.sample_unit_tangent(p, rng)
    }

    fn validity_radius(&self) -> f64 {
        self.inner.validity_radius()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{bump_metric, Euclidean, Sphere};

    fn close(a: &TangentVector, b: &TangentVector, tol: f64) -> bool {
        (&a.components - &b.components).norm() <= tol
    }

    #[test]
    fn scheme_names_round_trip() {
        for kind in SchemeKind::ALL {
            assert_eq!(kind.as_str().parse::<SchemeKind>().unwrap(), kind);
        }
        assert_eq!("pole-v2".parse::<SchemeKind>().unwrap(), SchemeKind::PoleV2);
        assert!("pole".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn euclidean_schemes_are_exact() {
        let e = Euclidean::new(3);
        let p = Point::from_slice(&[0.1, -0.4, 2.0]);
        let q = Point::from_slice(&[1.3, 0.2, -0.5]);
        let u = TangentVector::from_slice(&p, &[0.7, -0.2, 0.9]);
        for kind in SchemeKind::ALL {
            let out = kind.step(&e, &p, &q, &u).unwrap();
            assert_eq!(out.base, q);
            assert!(close(&out, &u, 1e-14), "{kind}");
        }
    }

    #[test]
    fn zero_vector_maps_to_zero() {
        let s = Sphere::new(2);
        let p = Point::from_slice(&[1.0, 0.0, 0.0]);
        let q = Point::from_slice(&[0.0, 1.0, 0.0]);
        for kind in SchemeKind::ALL {
            let out = kind.step(&s, &p, &q, &TangentVector::zero(&p)).unwrap();
            assert!(out.is_zero());
            assert_eq!(out.base, q);
        }
    }

    #[test]
    fn sphere_quarter_turn_pole_is_exact() {
        let s = Sphere::new(2);
        let p = Point::from_slice(&[1.0, 0.0, 0.0]);
        let q = Point::from_slice(&[0.0, 1.0, 0.0]);
        let u = TangentVector::from_slice(&p, &[0.0, 0.18, 0.24]);
        let oracle = s.transport(&u, &q).unwrap();
        for kind in SchemeKind::POLE {
            let out = kind.step(&s, &p, &q, &u).unwrap();
            assert!(close(&out, &oracle, 1e-12), "{kind}");
        }
    }

    #[test]
    fn sphere_schild_error_is_small_but_nonzero() {
        let s = Sphere::new(2);
        let p = Point::from_slice(&[1.0, 0.0, 0.0]);
        let q = s.exp(&TangentVector::from_slice(&p, &[0.0, 0.2, 0.0])).unwrap();
        let u = TangentVector::from_slice(&p, &[0.0, 0.0, 0.2]);
        let oracle = s.transport(&u, &q).unwrap();
        let out = schild_step(&s, &p, &q, &u).unwrap();
        let err = s.norm(&out.sub(&oracle));
        assert!(err > 1e-8, "{err}");
        assert!(err < 0.2f64.powi(3), "{err}");
    }

    #[test]
    fn single_rung_matches_one_step() {
        let s = bump_metric(1.0);
        let p = Point::from_slice(&[0.2, 0.0]);
        let q = Point::from_slice(&[0.35, 0.12]);
        let u = TangentVector::from_slice(&p, &[0.05, 0.08]);
        let one = pole_step_v2(&s, &p, &q, &u).unwrap();
        let run = transport_along_geodesic(&s, &p, &q, &u, 1, &LadderScheme::new(SchemeKind::PoleV2))
            .unwrap();
        assert!(close(&one, &run.vector, 1e-14));
        assert_eq!(run.rungs.len(), 1);
        assert!(run.rungs[0].log_iterations > 0);
        assert!(run.rungs[0].midpoint_residual < 1e-9);
    }

    #[test]
    fn euclidean_multi_rung_is_exact() {
        let e = Euclidean::new(2);
        let p = Point::from_slice(&[0.0, 0.0]);
        let q = Point::from_slice(&[3.0, -1.0]);
        let u = TangentVector::from_slice(&p, &[0.5, 2.0]);
        for n in [1, 3, 8] {
            let run = transport_along_geodesic(&e, &p, &q, &u, n, &LadderScheme::for_rungs(SchemeKind::Schild, n))
                .unwrap();
            assert!(close(&run.vector, &u, 1e-13));
            assert_eq!(run.rungs.len(), n);
        }
    }

    #[test]
    fn failing_rung_is_reported() {
        let s = Sphere::new(2);
        let p = Point::from_slice(&[1.0, 0.0, 0.0]);
        let q = Point::from_slice(&[-1.0, 0.0, 0.0]);
        let u = TangentVector::from_slice(&p, &[0.0, 0.1, 0.0]);
        let err = transport_along_geodesic(&s, &p, &q, &u, 2, &LadderScheme::new(SchemeKind::PoleV2))
            .unwrap_err();
        assert_eq!(err.kind(), "CutLocus");
    }

    #[test]
    fn invalid_arguments() {
        let e = Euclidean::new(2);
        let p = Point::from_slice(&[0.0, 0.0]);
        let u = TangentVector::zero(&p);
        let scheme = LadderScheme::new(SchemeKind::PoleV1);
        assert!(transport_along_geodesic(&e, &p, &p, &u, 0, &scheme).is_err());
        let bad = scheme.with_scaling(0.0);
        assert!(transport_along_geodesic(&e, &p, &p, &u, 1, &bad).is_err());
    }
}
