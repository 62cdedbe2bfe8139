use nalgebra::DVector;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::geometry::{Capabilities, ConnectionSpace, Point, TangentVector};
use crate::tolerance::ToleranceConfig;

/// Flat `ℝⁿ`.
#[derive(Debug, Clone)]
pub struct Euclidean {
    n: usize,
    tol: ToleranceConfig,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            tol: ToleranceConfig::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: ToleranceConfig) -> Self {
        self.tol = tol;
        self
    }
}

impl ConnectionSpace for Euclidean {
    fn name(&self) -> String {
        format!("euclidean-{}", self.n)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            dim: self.n,
            has_metric: true,
            has_closed_form_transport: true,
            has_curvature: true,
            injectivity_radius: Some(f64::INFINITY),
            locally_symmetric: true,
        }
    }

    fn coord_len(&self) -> usize {
        self.n
    }

    fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    fn exp(&self, v: &TangentVector) -> Result<Point> {
        Ok(Point::new(&v.base.coords + &v.components))
    }

    fn log_counted(&self, p: &Point, q: &Point) -> Result<(TangentVector, usize)> {
        Ok((TangentVector::new(p.clone(), &q.coords - &p.coords), 0))
    }

    fn transport(&self, u: &TangentVector, q: &Point) -> Result<TangentVector> {
        Ok(TangentVector::new(q.clone(), u.components.clone()))
    }

    fn transport_along(&self, u: &TangentVector, velocity: &TangentVector) -> Result<TangentVector> {
        let end = self.exp(velocity)?;
        Ok(TangentVector::new(end, u.components.clone()))
    }

    fn curvature(
        &self,
        u: &TangentVector,
        _v: &TangentVector,
        _w: &TangentVector,
    ) -> Result<TangentVector> {
        Ok(TangentVector::zero(&u.base))
    }

    fn nabla_curvature(
        &self,
        x: &TangentVector,
        _u: &TangentVector,
        _v: &TangentVector,
        _w: &TangentVector,
    ) -> Result<TangentVector> {
        Ok(TangentVector::zero(&x.base))
    }

    fn inner(&self, u: &TangentVector, v: &TangentVector) -> Option<f64> {
        Some(u.components.dot(&v.components))
    }

    fn symmetry(&self, m: &Point, p: &Point) -> Result<Point> {
        Ok(Point::new(&m.coords * 2.0 - &p.coords))
    }

    fn reference_point(&self) -> Point {
        Point::new(DVector::zeros(self.n))
    }

    fn sample_point(&self, rng: &mut dyn RngCore, spread: f64) -> Point {
        Point::new(DVector::from_fn(self.n, |_, _| {
            let z: f64 = StandardNormal.sample(&mut *rng);
            z * spread
        }))
    }

    fn sample_unit_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> TangentVector {
        let dir = DVector::from_fn(self.n, |_, _| StandardNormal.sample(&mut *rng));
        TangentVector::new(p.clone(), dir.normalize())
    }

    fn validity_radius(&self) -> f64 {
        10.0
    }
}
