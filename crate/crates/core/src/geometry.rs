//! Point/tangent data model and the connection-space contract.
//!
//! Every manifold in the crate, closed-form or chart-based, implements
//! [`ConnectionSpace`]. Ladder schemes and the analysis tools only ever talk
//! to this trait. Tangent vectors carry their base point; comparisons between
//! vectors at different base points must go through
//! [`ConnectionSpace::transport`].

use nalgebra::DVector;
use rand::RngCore;

use crate::error::{GeometryError, Result};
use crate::tolerance::ToleranceConfig;

/// A location on a manifold, in chart or embedding coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: DVector<f64>,
}

impl Point {
    pub fn new(coords: DVector<f64>) -> Self {
        Self { coords }
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Euclidean distance between coordinate vectors.
    pub fn coord_distance(&self, other: &Point) -> f64 {
        (&self.coords - &other.coords).norm()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }
}

/// A tangent vector together with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub components: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: Point, components: DVector<f64>) -> Self {
        Self { base, components }
    }

    pub fn from_slice(base: &Point, components: &[f64]) -> Self {
        Self::new(base.clone(), DVector::from_column_slice(components))
    }

    pub fn zero(base: &Point) -> Self {
        Self::new(base.clone(), DVector::zeros(base.len()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.base.clone(), &self.components * factor)
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Sum of two vectors at the same base point. The base of `self` is kept.
    pub fn add(&self, other: &TangentVector) -> Self {
        Self::new(self.base.clone(), &self.components + &other.components)
    }

    pub fn sub(&self, other: &TangentVector) -> Self {
        Self::new(self.base.clone(), &self.components - &other.components)
    }

    pub fn axpy(&self, alpha: f64, other: &TangentVector) -> Self {
        Self::new(self.base.clone(), &self.components + &other.components * alpha)
    }

    /// Euclidean norm of the component vector.
    pub fn component_norm(&self) -> f64 {
        self.components.norm()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| *c == 0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        self.components.as_slice()
    }
}

/// A geodesic segment encoded by its end points and initial velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSegment {
    pub start: Point,
    pub end: Point,
    pub initial_velocity: TangentVector,
}

impl GeodesicSegment {
    pub fn from_velocity(space: &dyn ConnectionSpace, velocity: TangentVector) -> Result<Self> {
        let end = space.exp(&velocity)?;
        Ok(Self {
            start: velocity.base.clone(),
            end,
            initial_velocity: velocity,
        })
    }

    pub fn between(space: &dyn ConnectionSpace, start: &Point, end: &Point) -> Result<Self> {
        let initial_velocity = space.log(start, end)?;
        Ok(Self {
            start: start.clone(),
            end: end.clone(),
            initial_velocity,
        })
    }
}

/// Capability record of a connection space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capabilities {
    /// Intrinsic dimension of the manifold.
    pub dim: usize,
    pub has_metric: bool,
    pub has_closed_form_transport: bool,
    pub has_curvature: bool,
    /// Injectivity radius in the metric's units; `None` when unknown,
    /// `Some(f64::INFINITY)` when there is no cut locus.
    pub injectivity_radius: Option<f64>,
    /// Torsion-free with covariantly constant curvature.
    pub locally_symmetric: bool,
}

/// A manifold with a torsion-free affine connection.
///
/// Implementations must be immutable after construction; every method is a
/// pure function of its inputs.
pub trait ConnectionSpace: Send + Sync {
    /// Registry name, e.g. `"sphere-2"` or `"bump2d"`.
    fn name(&self) -> String;

    fn capabilities(&self) -> Capabilities;

    /// Number of coordinates of a point (ambient or chart dimension).
    fn coord_len(&self) -> usize;

    fn tolerances(&self) -> &ToleranceConfig;

    /// Distance of raw coordinates from the manifold (zero for charts).
    fn membership_residual(&self, _p: &Point) -> f64 {
        0.0
    }

    /// Distance of the components from the tangent space at the base point.
    fn tangency_residual(&self, _u: &TangentVector) -> f64 {
        0.0
    }

    /// Geodesic endpoint at time 1 from `v.base` with initial velocity `v`.
    fn exp(&self, v: &TangentVector) -> Result<Point>;

    /// Initial velocity of the geodesic from `p` to `q`.
    fn log(&self, p: &Point, q: &Point) -> Result<TangentVector> {
        self.log_counted(p, q).map(|(v, _)| v)
    }

    /// `log` together with the number of solver iterations it needed
    /// (zero for closed forms).
    fn log_counted(&self, p: &Point, q: &Point) -> Result<(TangentVector, usize)>;

    /// Parallel transport of `u` along the geodesic from `u.base` to `q`.
    fn transport(&self, u: &TangentVector, q: &Point) -> Result<TangentVector> {
        let velocity = self.log(&u.base, q)?;
        self.transport_along(u, &velocity)
    }

    /// Parallel transport of `u` along `t ↦ exp(t·velocity)`, `t ∈ [0, 1]`.
    fn transport_along(&self, u: &TangentVector, velocity: &TangentVector) -> Result<TangentVector>;

    /// `R(u,v)w = ∇_u∇_v w − ∇_v∇_u w − ∇_[u,v] w`.
    fn curvature(
        &self,
        _u: &TangentVector,
        _v: &TangentVector,
        _w: &TangentVector,
    ) -> Result<TangentVector> {
        Err(GeometryError::Unsupported(format!(
            "{} has no curvature capability",
            self.name()
        )))
    }

    /// `(∇_x R)(u,v)w`.
    ///
    /// The default differentiates the transported curvature along the geodesic
    /// through the base point in direction `x` (central differences).
    fn nabla_curvature(
        &self,
        x: &TangentVector,
        u: &TangentVector,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<TangentVector> {
        if !self.capabilities().has_curvature {
            return Err(GeometryError::Unsupported(format!(
                "{} has no curvature capability",
                self.name()
            )));
        }
        nabla_curvature_by_transport(self, x, u, v, w, 1e-4)
    }

    /// Inner product at the common base point; `None` without a metric.
    fn inner(&self, _u: &TangentVector, _v: &TangentVector) -> Option<f64> {
        None
    }

    /// Declared norm: the metric norm when a metric exists, the Euclidean
    /// component norm otherwise.
    fn norm(&self, u: &TangentVector) -> f64 {
        match self.inner(u, u) {
            Some(sq) => sq.max(0.0).sqrt(),
            None => u.component_norm(),
        }
    }

    /// Geodesic symmetry `s_m(p) = exp_m(−log_m(p))`.
    fn symmetry(&self, m: &Point, p: &Point) -> Result<Point> {
        let v = self.log(m, p)?;
        self.exp(&v.neg())
    }

    /// Point used as the default base for convergence sweeps.
    fn reference_point(&self) -> Point;

    /// Random point; `spread` controls the distance from the reference point.
    fn sample_point(&self, rng: &mut dyn RngCore, spread: f64) -> Point;

    /// Random tangent vector at `p` with unit declared norm.
    fn sample_unit_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> TangentVector;

    /// Radius (declared norm) below which exp/log are expected to round-trip.
    fn validity_radius(&self) -> f64;
}

fn check_point(space: &dyn ConnectionSpace, p: &Point) -> Result<()> {
    if p.len() != space.coord_len() {
        return Err(GeometryError::DimensionMismatch {
            expected: space.coord_len(),
            actual: p.len(),
        });
    }
    Ok(())
}

fn check_vector(space: &dyn ConnectionSpace, v: &TangentVector) -> Result<()> {
    check_point(space, &v.base)?;
    if v.components.len() != space.coord_len() {
        return Err(GeometryError::DimensionMismatch {
            expected: space.coord_len(),
            actual: v.components.len(),
        });
    }
    Ok(())
}

fn check_base(space: &dyn ConnectionSpace, p: &Point, v: &TangentVector) -> Result<()> {
    check_point(space, p)?;
    check_vector(space, v)?;
    let offset = p.coord_distance(&v.base);
    if offset > space.tolerances().membership_tol {
        return Err(GeometryError::InvalidBase { offset });
    }
    Ok(())
}

/// Checked `exp_p(v)`: the zero vector short-circuits to `p`.
pub fn exp(space: &dyn ConnectionSpace, p: &Point, v: &TangentVector) -> Result<Point> {
    check_base(space, p, v)?;
    if v.is_zero() {
        return Ok(p.clone());
    }
    space.exp(v)
}

/// Checked `log_p(q)`; `log_p(p)` is the zero vector.
pub fn log(space: &dyn ConnectionSpace, p: &Point, q: &Point) -> Result<TangentVector> {
    check_point(space, p)?;
    check_point(space, q)?;
    if p == q {
        return Ok(TangentVector::zero(p));
    }
    space.log(p, q)
}

pub fn transport_oracle(
    space: &dyn ConnectionSpace,
    u: &TangentVector,
    q: &Point,
) -> Result<TangentVector> {
    check_vector(space, u)?;
    check_point(space, q)?;
    if &u.base == q {
        return Ok(u.clone());
    }
    space.transport(u, q)
}

/// Midpoint `exp_p(½ log_p(q))` of the geodesic segment `[p, q]`.
pub fn midpoint(space: &dyn ConnectionSpace, p: &Point, q: &Point) -> Result<Point> {
    let v = log(space, p, q)?;
    if v.is_zero() {
        return Ok(p.clone());
    }
    space.exp(&v.scale(0.5))
}

/// `s_m(p) = exp_m(−log_m(p))`.
pub fn geodesic_symmetry(space: &dyn ConnectionSpace, m: &Point, p: &Point) -> Result<Point> {
    check_point(space, m)?;
    check_point(space, p)?;
    if m == p {
        return Ok(m.clone());
    }
    space.symmetry(m, p)
}

pub fn curvature(
    space: &dyn ConnectionSpace,
    p: &Point,
    u: &TangentVector,
    v: &TangentVector,
    w: &TangentVector,
) -> Result<TangentVector> {
    for t in [u, v, w] {
        check_base(space, p, t)?;
    }
    space.curvature(u, v, w)
}

pub fn nabla_curvature(
    space: &dyn ConnectionSpace,
    p: &Point,
    x: &TangentVector,
    u: &TangentVector,
    v: &TangentVector,
    w: &TangentVector,
) -> Result<TangentVector> {
    for t in [x, u, v, w] {
        check_base(space, p, t)?;
    }
    space.nabla_curvature(x, u, v, w)
}

/// `‖log_m(p) + log_m(q)‖`, the exponential-barycenter residual of `m`.
pub fn barycenter_residual(
    space: &dyn ConnectionSpace,
    m: &Point,
    p: &Point,
    q: &Point,
) -> Result<f64> {
    let a = log(space, m, p)?;
    let b = log(space, m, q)?;
    Ok(space.norm(&a.add(&b)))
}

/// Covariant derivative of the curvature by transport conjugation:
/// `d/dt Π_{γ(t)→p} R_{γ(t)}(Πu, Πv, Πw)` at `t = 0`, with `γ(t) = exp_p(t x)`,
/// evaluated by a central difference of step `step` (relative to `‖x‖`).
pub fn nabla_curvature_by_transport<S: ConnectionSpace + ?Sized>(
    space: &S,
    x: &TangentVector,
    u: &TangentVector,
    v: &TangentVector,
    w: &TangentVector,
    step: f64,
) -> Result<TangentVector> {
    let xn = x.component_norm();
    if xn == 0.0 {
        return Ok(TangentVector::zero(&x.base));
    }
    let t = step / xn.max(1.0);
    let sample = |sign: f64| -> Result<TangentVector> {
        let vel = x.scale(sign * t);
        let y = space.exp(&vel)?;
        let uy = space.transport_along(u, &vel)?;
        let vy = space.transport_along(v, &vel)?;
        let wy = space.transport_along(w, &vel)?;
        let r = space.curvature(&uy, &vy, &wy)?;
        // back along the same geodesic: velocity at y reversed
        let vel_y = space.transport_along(&vel, &vel)?;
        debug_assert!(vel_y.base.coord_distance(&y) < 1e-6);
        space.transport_along(&r, &vel_y.neg())
    };
    let plus = sample(1.0)?;
    let minus = sample(-1.0)?;
    Ok(TangentVector::new(
        x.base.clone(),
        (&plus.components - &minus.components) / (2.0 * t),
    ))
}
