use nalgebra::DVector;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::Result;
use crate::geometry::{Capabilities, ConnectionSpace, Point, TangentVector};
use crate::tolerance::ToleranceConfig;

/// Hyperbolic space `Hⁿ` as the upper sheet `⟨x,x⟩_L = −1, x₀ > 0` of the
/// hyperboloid in Minkowski space `ℝ¹'ⁿ`.
#[derive(Debug, Clone)]
pub struct Hyperbolic {
    n: usize,
    tol: ToleranceConfig,
}

/// `⟨a,b⟩_L = −a₀b₀ + Σ aᵢbᵢ`.
pub fn minkowski(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b) - 2.0 * a[0] * b[0]
}

impl Hyperbolic {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "hyperbolic dimension must be at least 1");
        Self {
            n,
            tol: ToleranceConfig::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: ToleranceConfig) -> Self {
        self.tol = tol;
        self
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let alpha = -minkowski(&p.coords, &q.coords);
        let u = &q.coords - &p.coords * alpha;
        minkowski(&u, &u).max(0.0).sqrt().asinh()
    }

    fn normalize_point(x: DVector<f64>) -> Point {
        let sq = -minkowski(&x, &x);
        Point::new(x / sq.sqrt())
    }
}

impl ConnectionSpace for Hyperbolic {
    fn name(&self) -> String {
        format!("hyperbolic-{}", self.n)
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
        self.n + 1
    }

    fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    fn membership_residual(&self, p: &Point) -> f64 {
        let r = (minkowski(&p.coords, &p.coords) + 1.0).abs();
        if p.coords[0] > 0.0 {
            r
        } else {
            r.max(1.0)
        }
    }

    fn tangency_residual(&self, u: &TangentVector) -> f64 {
        minkowski(&u.base.coords, &u.components).abs()
    }

    fn exp(&self, v: &TangentVector) -> Result<Point> {
        let theta = minkowski(&v.components, &v.components).max(0.0).sqrt();
        if theta == 0.0 {
            return Ok(v.base.clone());
        }
        let x = &v.base.coords * theta.cosh() + &v.components * (theta.sinh() / theta);
        Ok(Self::normalize_point(x))
    }

    fn log_counted(&self, p: &Point, q: &Point) -> Result<(TangentVector, usize)> {
        let alpha = -minkowski(&p.coords, &q.coords);
        let u = &q.coords - &p.coords * alpha;
        let s = minkowski(&u, &u).max(0.0).sqrt();
        if s == 0.0 {
            return Ok((TangentVector::zero(p), 0));
        }
        let d = s.asinh();
        Ok((TangentVector::new(p.clone(), u * (d / s)), 0))
    }

    fn transport(&self, u: &TangentVector, q: &Point) -> Result<TangentVector> {
        let x = &u.base.coords;
        let y = &q.coords;
        let alpha = -minkowski(x, y);
        let coef = minkowski(y, &u.components) / (alpha + 1.0);
        Ok(TangentVector::new(q.clone(), &u.components + (x + y) * coef))
    }

    fn transport_along(&self, u: &TangentVector, velocity: &TangentVector) -> Result<TangentVector> {
        let theta = minkowski(&velocity.components, &velocity.components)
            .max(0.0)
            .sqrt();
        let end = self.exp(velocity)?;
        if theta == 0.0 {
            return Ok(TangentVector::new(end, u.components.clone()));
        }
        let x = &velocity.base.coords;
        let e = &velocity.components / theta;
        let a = minkowski(&e, &u.components);
        let moved = &u.components + (e * (theta.cosh() - 1.0) + x * theta.sinh()) * a;
        Ok(TangentVector::new(end, moved))
    }

    fn curvature(
        &self,
        u: &TangentVector,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<TangentVector> {
        let vw = minkowski(&v.components, &w.components);
        let uw = minkowski(&u.components, &w.components);
        Ok(TangentVector::new(
            u.base.clone(),
            &v.components * uw - &u.components * vw,
        ))
    }

    fn inner(&self, u: &TangentVector, v: &TangentVector) -> Option<f64> {
        Some(minkowski(&u.components, &v.components))
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
        self.exp(&dir.scale(radius * spread))
            .expect("hyperbolic exp is total")
    }

    fn sample_unit_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> TangentVector {
        loop {
            let raw = DVector::from_fn(self.n + 1, |_, _| StandardNormal.sample(&mut *rng));
            let t = &raw + &p.coords * minkowski(&p.coords, &raw);
            let len = minkowski(&t, &t).max(0.0).sqrt();
            if len > 1e-6 {
                return TangentVector::new(p.clone(), t / len);
            }
        }
    }

    fn validity_radius(&self) -> f64 {
        3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transported_vector_is_tangent() {
        let h = Hyperbolic::new(2);
        let o = h.reference_point();
        let v = TangentVector::from_slice(&o, &[0.0, 0.8, -0.3]);
        let q = h.exp(&v).unwrap();
        assert!(h.membership_residual(&q) < 1e-14);
        let u = TangentVector::from_slice(&o, &[0.0, 0.1, 0.7]);
        let moved = h.transport(&u, &q).unwrap();
        assert!(h.tangency_residual(&moved) < 1e-14);
        let along = h.transport_along(&u, &v).unwrap();
        assert!((along.components - moved.components).norm() < 1e-13);
    }
}
