use std::f64::consts::PI;

use nalgebra::DVector;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{GeometryError, Result};
use crate::geometry::{Capabilities, ConnectionSpace, Point, TangentVector};
use crate::tolerance::ToleranceConfig;

/// Unit sphere `Sⁿ ⊂ ℝⁿ⁺¹` with the round metric.
#[derive(Debug, Clone)]
pub struct Sphere {
    n: usize,
    tol: ToleranceConfig,
}

impl Sphere {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "sphere dimension must be at least 1");
        Self {
            n,
            tol: ToleranceConfig::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: ToleranceConfig) -> Self {
        self.tol = tol;
        self
    }

    /// Great-circle distance.
    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let c = p.coords.dot(&q.coords);
        let s = (&q.coords - &p.coords * c).norm();
        s.atan2(c)
    }

    fn project_tangent(p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        v - p * p.dot(v)
    }
}

impl ConnectionSpace for Sphere {
    fn name(&self) -> String {
        format!("sphere-{}", self.n)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            dim: self.n,
            has_metric: true,
            has_closed_form_transport: true,
            has_curvature: true,
            injectivity_radius: Some(PI),
            locally_symmetric: true,
        }
    }

    fn coord_len(&self) -> usize {
        self.n + 1
    }

    fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    fn membership_residual(&self, p: &Point) -> f64 {
        (p.coords.norm() - 1.0).abs()
    }

    fn tangency_residual(&self, u: &TangentVector) -> f64 {
        u.base.coords.dot(&u.components).abs()
    }

    fn exp(&self, v: &TangentVector) -> Result<Point> {
        let theta = v.components.norm();
        if theta == 0.0 {
            return Ok(v.base.clone());
        }
        let x = &v.base.coords * theta.cos() + &v.components * (theta.sin() / theta);
        // renormalize to stay on the sphere
        let norm = x.norm();
        Ok(Point::new(x / norm))
    }

    fn log_counted(&self, p: &Point, q: &Point) -> Result<(TangentVector, usize)> {
        let c = p.coords.dot(&q.coords);
        let u = &q.coords - &p.coords * c;
        let s = u.norm();
        let theta = s.atan2(c);
        if s == 0.0 {
            if c > 0.0 {
                return Ok((TangentVector::zero(p), 0));
            }
            return Err(GeometryError::CutLocus("points are antipodal".into()));
        }
        if PI - theta < 1e-8 {
            return Err(GeometryError::CutLocus(format!(
                "points are {theta:.10} apart, at the antipodal cut locus"
            )));
        }
        Ok((TangentVector::new(p.clone(), u * (theta / s)), 0))
    }

    fn transport(&self, u: &TangentVector, q: &Point) -> Result<TangentVector> {
        let x = &u.base.coords;
        let y = &q.coords;
        let c = x.dot(y);
        if 1.0 + c < 1e-12 {
            return Err(GeometryError::CutLocus(
                "transport between antipodal points is undefined".into(),
            ));
        }
        let coef = y.dot(&u.components) / (1.0 + c);
        Ok(TangentVector::new(q.clone(), &u.components - (x + y) * coef))
    }

    fn transport_along(&self, u: &TangentVector, velocity: &TangentVector) -> Result<TangentVector> {
        // rotation in the plane spanned by x and the unit velocity
        let theta = velocity.components.norm();
        let end = self.exp(velocity)?;
        if theta == 0.0 {
            return Ok(TangentVector::new(end, u.components.clone()));
        }
        let x = &velocity.base.coords;
        let e = &velocity.components / theta;
        let a = e.dot(&u.components);
        let moved = &u.components + (e * (theta.cos() - 1.0) - x * theta.sin()) * a;
        Ok(TangentVector::new(end, moved))
    }

    fn curvature(
        &self,
        u: &TangentVector,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<TangentVector> {
        let vw = v.components.dot(&w.components);
        let uw = u.components.dot(&w.components);
        Ok(TangentVector::new(
            u.base.clone(),
            &u.components * vw - &v.components * uw,
        ))
    }

    fn inner(&self, u: &TangentVector, v: &TangentVector) -> Option<f64> {
        Some(u.components.dot(&v.components))
    }

    fn symmetry(&self, m: &Point, p: &Point) -> Result<Point> {
        // reflection through the axis of m: 2⟨m,p⟩m − p
        let x = &m.coords * (2.0 * m.coords.dot(&p.coords)) - &p.coords;
        let norm = x.norm();
        Ok(Point::new(x / norm))
    }

    fn reference_point(&self) -> Point {
        let mut x = DVector::zeros(self.n + 1);
        x[0] = 1.0;
        Point::new(x)
    }

    fn sample_point(&self, rng: &mut dyn RngCore, spread: f64) -> Point {
        let base = self.reference_point();
        let dir = self.sample_unit_tangent(&base, rng);
        let radius: f64 = Uniform::new(0.0, 1.0).unwrap().sample(&mut *rng);
        self.exp(&dir.scale(radius * spread.min(PI)))
            .expect("sphere exp is total")
    }

    fn sample_unit_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> TangentVector {
        loop {
            let raw = DVector::from_fn(self.n + 1, |_, _| StandardNormal.sample(&mut *rng));
            let t = Self::project_tangent(&p.coords, &raw);
            let len = t.norm();
            if len > 1e-6 {
                return TangentVector::new(p.clone(), t / len);
            }
        }
    }

    fn validity_radius(&self) -> f64 {
        0.9 * PI
    }
}
