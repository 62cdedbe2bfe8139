use std::f64::consts::PI;

use nalgebra::{DVector, Matrix3, Vector3};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::Result;
use crate::geometry::{Capabilities, ConnectionSpace, Point, TangentVector};
use crate::linalg::{hat, so3_exp, so3_log, vee};
use crate::tolerance::ToleranceConfig;

/// The rotation group with the symmetric Cartan–Schouten connection
/// `∇_X Y = ½[X,Y]` on left-invariant fields.
///
/// Points are row-major 3×3 rotation matrices; a tangent vector at `g` is the
/// ambient matrix `g·Ω` with `Ω` skew. The declared metric is the bi-invariant
/// `⟨U,V⟩ = ½ tr(UᵀV)`, for which the norm of `g·hat(ω)` is `|ω|` and the
/// injectivity radius is π. Its Levi-Civita connection coincides with the
/// Cartan–Schouten one.
#[derive(Debug, Clone)]
pub struct So3 {
    tol: ToleranceConfig,
    branch_tol: f64,
}

impl Default for So3 {
    fn default() -> Self {
        Self::new()
    }
}

pub fn to_mat3(coords: &DVector<f64>) -> Matrix3<f64> {
    Matrix3::from_row_slice(coords.as_slice())
}

pub fn from_mat3(m: &Matrix3<f64>) -> DVector<f64> {
    DVector::from_fn(9, |idx, _| m[(idx / 3, idx % 3)])
}

impl So3 {
    pub fn new() -> Self {
        Self {
            tol: ToleranceConfig::default(),
            branch_tol: 1e-7,
        }
    }

    pub fn with_tolerances(mut self, tol: ToleranceConfig) -> Self {
        self.tol = tol;
        self
    }

    pub fn point(&self, m: &Matrix3<f64>) -> Point {
        Point::new(from_mat3(m))
    }

    /// Left-trivialized (body) rotation vector of a tangent vector.
    pub fn body_vector(&self, u: &TangentVector) -> Vector3<f64> {
        let g = to_mat3(&u.base.coords);
        vee(&(g.transpose() * to_mat3(&u.components)))
    }

    pub fn tangent(&self, g: &Point, body: &Vector3<f64>) -> TangentVector {
        let gm = to_mat3(&g.coords);
        TangentVector::new(g.clone(), from_mat3(&(gm * hat(body))))
    }

    /// Rotation angle between `g` and `h`.
    pub fn distance(&self, g: &Point, h: &Point) -> f64 {
        let rel = to_mat3(&g.coords).transpose() * to_mat3(&h.coords);
        let c = (0.5 * (rel.trace() - 1.0)).clamp(-1.0, 1.0);
        let s = 0.5 * vee(&(rel - rel.transpose())).norm();
        s.atan2(c)
    }
}

impl ConnectionSpace for So3 {
    fn name(&self) -> String {
        "so3".into()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            dim: 3,
            has_metric: true,
            has_closed_form_transport: true,
            has_curvature: true,
            injectivity_radius: Some(PI),
            locally_symmetric: true,
        }
    }

    fn coord_len(&self) -> usize {
        9
    }

    fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    fn membership_residual(&self, p: &Point) -> f64 {
        let g = to_mat3(&p.coords);
        (g.transpose() * g - Matrix3::identity()).norm() + (g.determinant() - 1.0).abs()
    }

    fn tangency_residual(&self, u: &TangentVector) -> f64 {
        let g = to_mat3(&u.base.coords);
        let body = g.transpose() * to_mat3(&u.components);
        (body + body.transpose()).norm()
    }

    fn exp(&self, v: &TangentVector) -> Result<Point> {
        let g = to_mat3(&v.base.coords);
        let w = self.body_vector(v);
        Ok(self.point(&(g * so3_exp(&w))))
    }

    fn log_counted(&self, p: &Point, q: &Point) -> Result<(TangentVector, usize)> {
        let g = to_mat3(&p.coords);
        let h = to_mat3(&q.coords);
        let w = so3_log(&(g.transpose() * h), self.branch_tol)?;
        Ok((self.tangent(p, &w), 0))
    }

    fn transport_along(&self, u: &TangentVector, velocity: &TangentVector) -> Result<TangentVector> {
        // Π(U) = g·exp(X/2)·(gᵀU)·exp(X/2), X the body velocity
        let g = to_mat3(&velocity.base.coords);
        let x = self.body_vector(velocity);
        let half = so3_exp(&(x * 0.5));
        let body_u = g.transpose() * to_mat3(&u.components);
        let end = g * half * half;
        let moved = g * half * body_u * half;
        Ok(TangentVector::new(self.point(&end), from_mat3(&moved)))
    }

    fn curvature(
        &self,
        u: &TangentVector,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<TangentVector> {
        // R(X,Y)Z = −¼[[X,Y],Z] on left-invariant fields
        let (a, b, c) = (self.body_vector(u), self.body_vector(v), self.body_vector(w));
        let r = a.cross(&b).cross(&c) * -0.25;
        Ok(self.tangent(&u.base, &r))
    }

    fn inner(&self, u: &TangentVector, v: &TangentVector) -> Option<f64> {
        Some(0.5 * u.components.dot(&v.components))
    }

    fn symmetry(&self, m: &Point, p: &Point) -> Result<Point> {
        let g = to_mat3(&m.coords);
        let h = to_mat3(&p.coords);
        Ok(self.point(&(g * h.transpose() * g)))
    }

    fn reference_point(&self) -> Point {
        self.point(&Matrix3::identity())
    }

    fn sample_point(&self, rng: &mut dyn RngCore, spread: f64) -> Point {
        let base = self.reference_point();
        let dir = self.sample_unit_tangent(&base, rng);
        let radius: f64 = Uniform::new(0.0, 1.0).unwrap().sample(&mut *rng);
        self.exp(&dir.scale(radius * spread.min(PI)))
            .expect("SO(3) exp is total")
    }

    fn sample_unit_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> TangentVector {
        let raw = Vector3::from_fn(|_, _| StandardNormal.sample(&mut *rng));
        let body: Vector3<f64> = raw.normalize();
        self.tangent(p, &body)
    }

    fn validity_radius(&self) -> f64 {
        0.9 * PI
    }
}
