use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::Result;
use crate::geometry::{Capabilities, ConnectionSpace, Point, TangentVector};
use crate::linalg::{check_spd, commutator, from_matrix, sym_apply, sym_eigenvalues, symmetrize, to_matrix};
use crate::tolerance::ToleranceConfig;

/// Symmetric positive definite `n×n` matrices with the affine-invariant
/// metric `⟨U,V⟩_P = tr(P⁻¹ U P⁻¹ V)`. Points and tangent vectors are stored
/// as row-major `n²` vectors.
#[derive(Debug, Clone)]
pub struct Spd {
    n: usize,
    tol: ToleranceConfig,
}

/// `P^{1/2}` and `P^{-1/2}`.
fn sqrt_pair(p: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    (sym_apply(p, f64::sqrt), sym_apply(p, |x| 1.0 / x.sqrt()))
}

impl Spd {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "SPD dimension must be at least 2");
        Self {
            n,
            tol: ToleranceConfig::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: ToleranceConfig) -> Self {
        self.tol = tol;
        self
    }

    pub fn matrix(&self, coords: &DVector<f64>) -> DMatrix<f64> {
        to_matrix(self.n, coords)
    }

    pub fn point(&self, m: &DMatrix<f64>) -> Point {
        Point::new(from_matrix(m))
    }

    fn checked(&self, p: &Point) -> Result<DMatrix<f64>> {
        let m = self.matrix(&p.coords);
        check_spd(&m, 1e-9)?;
        Ok(m)
    }

    /// Affine-invariant distance `‖log(P^{-1/2} Q P^{-1/2})‖_F`.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        let (_, pinv_half) = sqrt_pair(&self.checked(p)?);
        let inner = &pinv_half * self.checked(q)? * &pinv_half;
        Ok(sym_eigenvalues(&inner)
            .iter()
            .map(|l| l.ln().powi(2))
            .sum::<f64>()
            .sqrt())
    }

    fn whiten(pinv_half: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(pinv_half * v * pinv_half))
    }
}

impl ConnectionSpace for Spd {
    fn name(&self) -> String {
        format!("spd-{}", self.n)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            dim: self.n * (self.n + 1) / 2,
            has_metric: true,
            has_closed_form_transport: true,
            has_curvature: true,
            injectivity_radius: Some(f64::INFINITY),
            locally_symmetric: true,
        }
    }

    fn coord_len(&self) -> usize {
        self.n * self.n
    }

    fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    fn membership_residual(&self, p: &Point) -> f64 {
        let m = self.matrix(&p.coords);
        let asym = (&m - m.transpose()).abs().max();
        let lowest = sym_eigenvalues(&m)[0];
        asym + (-lowest).max(0.0)
    }

    fn tangency_residual(&self, u: &TangentVector) -> f64 {
        let m = self.matrix(&u.components);
        (&m - m.transpose()).abs().max()
    }

    fn exp(&self, v: &TangentVector) -> Result<Point> {
        let p = self.checked(&v.base)?;
        let (half, inv_half) = sqrt_pair(&p);
        let w = Self::whiten(&inv_half, &self.matrix(&v.components));
        let q = &half * sym_apply(&w, f64::exp) * &half;
        Ok(self.point(&symmetrize(&q)))
    }

    fn log_counted(&self, p: &Point, q: &Point) -> Result<(TangentVector, usize)> {
        let pm = self.checked(p)?;
        let qm = self.checked(q)?;
        let (half, inv_half) = sqrt_pair(&pm);
        let inner = Self::whiten(&inv_half, &qm);
        let v = &half * sym_apply(&inner, f64::ln) * &half;
        Ok((TangentVector::new(p.clone(), from_matrix(&symmetrize(&v))), 0))
    }

    fn transport(&self, u: &TangentVector, q: &Point) -> Result<TangentVector> {
        let pm = self.checked(&u.base)?;
        let qm = self.checked(q)?;
        let (half, inv_half) = sqrt_pair(&pm);
        let inner = Self::whiten(&inv_half, &qm);
        let e = &half * sym_apply(&inner, f64::sqrt) * &inv_half;
        let moved = &e * self.matrix(&u.components) * e.transpose();
        Ok(TangentVector::new(q.clone(), from_matrix(&symmetrize(&moved))))
    }

    fn transport_along(&self, u: &TangentVector, velocity: &TangentVector) -> Result<TangentVector> {
        let pm = self.checked(&velocity.base)?;
        let (half, inv_half) = sqrt_pair(&pm);
        let w = Self::whiten(&inv_half, &self.matrix(&velocity.components));
        let half_step = sym_apply(&w, |x| (0.5 * x).exp());
        let end = &half * &half_step * &half_step * &half;
        let e = &half * half_step * &inv_half;
        let moved = &e * self.matrix(&u.components) * e.transpose();
        Ok(TangentVector::new(
            self.point(&symmetrize(&end)),
            from_matrix(&symmetrize(&moved)),
        ))
    }

    fn curvature(
        &self,
        u: &TangentVector,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<TangentVector> {
        let pm = self.checked(&u.base)?;
        let (half, inv_half) = sqrt_pair(&pm);
        let a = Self::whiten(&inv_half, &self.matrix(&u.components));
        let b = Self::whiten(&inv_half, &self.matrix(&v.components));
        let c = Self::whiten(&inv_half, &self.matrix(&w.components));
        let r = commutator(&commutator(&a, &b), &c) * -0.25;
        let out = &half * r * &half;
        Ok(TangentVector::new(u.base.clone(), from_matrix(&symmetrize(&out))))
    }

    fn inner(&self, u: &TangentVector, v: &TangentVector) -> Option<f64> {
        let pm = self.matrix(&u.base.coords);
        let pinv = pm.try_inverse()?;
        let a = &pinv * self.matrix(&u.components);
        let b = &pinv * self.matrix(&v.components);
        Some((a * b).trace())
    }

    fn reference_point(&self) -> Point {
        self.point(&DMatrix::identity(self.n, self.n))
    }

    fn sample_point(&self, rng: &mut dyn RngCore, spread: f64) -> Point {
        let base = self.reference_point();
        let dir = self.sample_unit_tangent(&base, rng);
        let radius: f64 = Uniform::new(0.0, 1.0).unwrap().sample(&mut *rng);
        self.exp(&dir.scale(radius * spread))
            .expect("exp at the identity is total")
    }

    fn sample_unit_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> TangentVector {
        let raw = DMatrix::from_fn(self.n, self.n, |_, _| StandardNormal.sample(&mut *rng));
        let s = symmetrize(&raw);
        let t = TangentVector::new(p.clone(), from_matrix(&s));
        let len = self.norm(&t);
        t.scale(1.0 / len)
    }

    fn validity_radius(&self) -> f64 {
        3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::GeometryError;

    #[test]
    fn exp_at_identity_of_diagonal() {
        let spd = Spd::new(2);
        let i = spd.reference_point();
        let v = TangentVector::from_slice(&i, &[0.3, 0.0, 0.0, -0.7]);
        let q = spd.exp(&v).unwrap();
        let expect = [0.3f64.exp(), 0.0, 0.0, (-0.7f64).exp()];
        for (a, b) in q.as_slice().iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn non_spd_input_is_rejected() {
        let spd = Spd::new(2);
        let bad = Point::from_slice(&[1.0, 2.0, 2.0, 1.0]);
        let i = spd.reference_point();
        assert!(matches!(spd.log(&i, &bad), Err(GeometryError::NotSpd(_))));
    }
}
