//! Connections given by Christoffel symbols in a single chart.
//!
//! Geodesics solve `ẍ^k + Γ^k_ij ẋ^i ẋ^j = 0`; parallel transport along them
//! solves `u̇^k + Γ^k_ij ẋ^i u^j = 0`. Both are integrated jointly so that a
//! transported vector sees exactly the same discrete curve as the point.
//! `log` is a damped Newton shooting on `exp_p(v) − q`, and the curvature
//! tensor and its covariant derivative come from central differences of Γ.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{GeometryError, Result};
use crate::geometry::{Capabilities, ConnectionSpace, GeodesicSegment, Point, TangentVector};
use crate::ode::{integrate, OdeSolverConfig};
use crate::tolerance::ToleranceConfig;

/// Christoffel symbols `Γ^k_ij` at one chart point, stored `[k][i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.dim + i) * self.dim + j
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[self.idx(k, i, j)]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        let idx = self.idx(k, i, j);
        self.data[idx] = value;
    }

    /// Replaces Γ by its symmetric part in `(i, j)` and returns the largest
    /// asymmetry that was removed.
    pub fn symmetrize(&mut self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    let a = self.get(k, i, j);
                    let b = self.get(k, j, i);
                    worst = worst.max((a - b).abs());
                    let s = 0.5 * (a + b);
                    self.set(k, i, j, s);
                    self.set(k, j, i, s);
                }
            }
        }
        worst
    }

    /// `out^k = Γ^k_ij a^i b^j`.
    pub fn contract_into(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for (k, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for i in 0..n {
                if a[i] == 0.0 {
                    continue;
                }
                let row = self.idx(k, i, 0);
                let mut inner = 0.0;
                for j in 0..n {
                    inner += self.data[row + j] * b[j];
                }
                acc += a[i] * inner;
            }
            *o = acc;
        }
    }
}

/// Christoffel symbols of the conformal metric `e^{2f} δ` given `∇f`:
/// `Γ^k_ij = δ_ki ∂_j f + δ_kj ∂_i f − δ_ij ∂_k f`.
pub fn conformal_christoffel(grad_f: &[f64]) -> Christoffel {
    let n = grad_f.len();
    let mut gamma = Christoffel::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut value = 0.0;
                if k == i {
                    value += grad_f[j];
                }
                if k == j {
                    value += grad_f[i];
                }
                if i == j {
                    value -= grad_f[k];
                }
                gamma.set(k, i, j, value);
            }
        }
    }
    gamma
}

pub type ChristoffelFn = Arc<dyn Fn(&[f64]) -> Christoffel + Send + Sync>;
pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Axis-aligned box the chart is valid in.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ChartBounds {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self {
            lower: vec![-half_width; dim],
            upper: vec![half_width; dim],
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    pub max_iters: usize,
    /// Newton iterates until the endpoint residual reaches this target.
    pub residual_tol: f64,
    /// A stalled iteration is still accepted below this residual.
    pub accept_tol: f64,
    /// Newton step multiplier in `(0, 1]`.
    pub damping: f64,
    /// Relative step of the finite-difference Jacobian.
    pub jacobian_fd_step: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            residual_tol: 1e-14,
            accept_tol: 1e-11,
            damping: 1.0,
            jacobian_fd_step: 1e-6,
        }
    }
}

impl ShootingConfig {
    pub fn from_tolerances(tol: &ToleranceConfig) -> Self {
        Self {
            max_iters: tol.max_shooting_iters,
            accept_tol: (tol.ode_rel_tol.max(tol.ode_abs_tol) * 10.0).max(1e-11),
            ..Self::default()
        }
    }
}

/// Riemann tensor components `R^l_ijk`, stored `[l][i][j][k]`, with
/// `R(u,v)w = R^l_ijk u^i v^j w^k e_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannComponents {
    dim: usize,
    data: Vec<f64>,
}

impl RiemannComponents {
    fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    #[inline]
    fn idx(&self, l: usize, i: usize, j: usize, k: usize) -> usize {
        ((l * self.dim + i) * self.dim + j) * self.dim + k
    }

    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(l, i, j, k)]
    }

    fn add(&mut self, l: usize, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.idx(l, i, j, k);
        self.data[idx] += value;
    }

    pub fn contract(&self, u: &[f64], v: &[f64], w: &[f64]) -> DVector<f64> {
        let n = self.dim;
        DVector::from_fn(n, |l, _| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let uv = u[i] * v[j];
                    if uv == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        acc += self.get(l, i, j, k) * uv * w[k];
                    }
                }
            }
            acc
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Covariant derivative components `∇_m R^l_ijk`, stored `[m][l][i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NablaRiemannComponents {
    dim: usize,
    data: Vec<f64>,
}

impl NablaRiemannComponents {
    #[inline]
    fn idx(&self, m: usize, l: usize, i: usize, j: usize, k: usize) -> usize {
        (((m * self.dim + l) * self.dim + i) * self.dim + j) * self.dim + k
    }

    pub fn get(&self, m: usize, l: usize, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(m, l, i, j, k)]
    }

    pub fn contract(&self, x: &[f64], u: &[f64], v: &[f64], w: &[f64]) -> DVector<f64> {
        let n = self.dim;
        DVector::from_fn(n, |l, _| {
            let mut acc = 0.0;
            for m in 0..n {
                if x[m] == 0.0 {
                    continue;
                }
                for i in 0..n {
                    for j in 0..n {
                        let c = x[m] * u[i] * v[j];
                        if c == 0.0 {
                            continue;
                        }
                        for k in 0..n {
                            acc += self.get(m, l, i, j, k) * c * w[k];
                        }
                    }
                }
            }
            acc
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// A torsion-free affine connection given numerically by its Christoffel
/// symbols on one chart.
#[derive(Clone)]
pub struct ChartConnection {
    dim: usize,
    christoffel: ChristoffelFn,
    bounds: Option<ChartBounds>,
    ode: OdeSolverConfig,
}

impl fmt::Debug for ChartConnection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartConnection")
            .field("dim", &self.dim)
            .field("bounds", &self.bounds)
            .field("ode", &self.ode)
            .finish_non_exhaustive()
    }
}

impl ChartConnection {
    pub fn new(dim: usize, christoffel: ChristoffelFn) -> Self {
        Self {
            dim,
            christoffel,
            bounds: None,
            ode: OdeSolverConfig::default(),
        }
    }

    pub fn flat(dim: usize) -> Self {
        Self::new(dim, Arc::new(move |_| Christoffel::zeros(dim)))
    }

    pub fn with_bounds(mut self, bounds: ChartBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn with_ode(mut self, ode: OdeSolverConfig) -> Self {
        self.ode = ode;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ode(&self) -> &OdeSolverConfig {
        &self.ode
    }

    pub fn bounds(&self) -> Option<&ChartBounds> {
        self.bounds.as_ref()
    }

    fn inside(&self, x: &[f64]) -> bool {
        self.bounds.as_ref().is_none_or(|b| b.contains(x))
    }

    /// Symmetrized Christoffel symbols at `x`.
    pub fn christoffel_at(&self, x: &[f64]) -> Result<Christoffel> {
        if x.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        if !self.inside(x) {
            return Err(GeometryError::DomainEscape(format!(
                "point {x:?} is outside the chart"
            )));
        }
        let mut gamma = (self.christoffel)(x);
        let asym = gamma.symmetrize();
        if asym > 1e-12 {
            log::warn!("Christoffel symbols at {x:?} were not symmetric (max asymmetry {asym:.3e}); symmetrized");
        }
        Ok(gamma)
    }

    fn raw_gamma(&self, x: &[f64]) -> Christoffel {
        let mut gamma = (self.christoffel)(x);
        gamma.symmetrize();
        gamma
    }

    /// Integrates the geodesic from `p` with velocity `v` together with the
    /// transport of `carried` along it, up to time `t`.
    pub fn flow_with_transport(
        &self,
        p: &[f64],
        v: &[f64],
        carried: &[&[f64]],
        t: f64,
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.dim;
        if !self.inside(p) {
            return Err(GeometryError::DomainEscape(format!(
                "start point {p:?} is outside the chart"
            )));
        }
        let m = carried.len();
        let mut y0 = Vec::with_capacity((2 + m) * n);
        y0.extend_from_slice(p);
        y0.extend_from_slice(v);
        for c in carried {
            y0.extend_from_slice(c);
        }
        let rhs = |y: &[f64], dy: &mut [f64]| {
            let (x, rest) = y.split_at(n);
            let (xdot, vecs) = rest.split_at(n);
            let gamma = self.raw_gamma(x);
            dy[..n].copy_from_slice(xdot);
            let (_, dtail) = dy.split_at_mut(n);
            let (dxdot, dvecs) = dtail.split_at_mut(n);
            gamma.contract_into(xdot, xdot, dxdot);
            for d in dxdot.iter_mut() {
                *d = -*d;
            }
            for c in 0..m {
                let u = &vecs[c * n..(c + 1) * n];
                let du = &mut dvecs[c * n..(c + 1) * n];
                gamma.contract_into(xdot, u, du);
                for d in du.iter_mut() {
                    *d = -*d;
                }
            }
        };
        let y = integrate(&self.ode, &y0, t, rhs, |y| self.inside(&y[..n]))?;
        let x = y[..n].to_vec();
        let xdot = y[n..2 * n].to_vec();
        let vecs = (0..m).map(|c| y[(2 + c) * n..(3 + c) * n].to_vec()).collect();
        Ok((x, xdot, vecs))
    }

    /// Position and velocity at time `t` of the geodesic from `p` with
    /// initial velocity `v`.
    pub fn geodesic_flow(&self, v: &TangentVector, t: f64) -> Result<(Point, TangentVector)> {
        let (x, xdot, _) = self.flow_with_transport(v.base.as_slice(), v.as_slice(), &[], t)?;
        let end = Point::from_slice(&x);
        let vel = TangentVector::from_slice(&end, &xdot);
        Ok((end, vel))
    }

    fn shoot_residual(&self, p: &[f64], v: &DVector<f64>, q: &[f64]) -> Result<DVector<f64>> {
        let (x, _, _) = self.flow_with_transport(p, v.as_slice(), &[], 1.0)?;
        Ok(DVector::from_iterator(
            self.dim,
            x.iter().zip(q).map(|(a, b)| a - b),
        ))
    }

    /// Initial velocity `v` with `exp_p(v) = q`, by damped Newton shooting.
    /// Returns the velocity and the number of Newton iterations used.
    pub fn log_shooting(
        &self,
        p: &Point,
        q: &Point,
        cfg: &ShootingConfig,
    ) -> Result<(TangentVector, usize)> {
        let n = self.dim;
        let (ps, qs) = (p.as_slice(), q.as_slice());
        let mut v = &q.coords - &p.coords;
        let mut r = self.shoot_residual(ps, &v, qs)?;
        let mut rn = r.norm();
        let mut iters = 0;
        loop {
            if rn <= cfg.residual_tol {
                break;
            }
            if iters >= cfg.max_iters {
                if rn <= cfg.accept_tol {
                    break;
                }
                return Err(GeometryError::NoConvergence {
                    iterations: iters,
                    residual: rn,
                });
            }
            iters += 1;
            let jac = self.shooting_jacobian(ps, &v, qs, cfg)?;
            let delta = match jac.lu().solve(&r) {
                Some(d) if d.iter().all(|x| x.is_finite()) => d,
                _ => {
                    return Err(GeometryError::NoConvergence {
                        iterations: iters,
                        residual: rn,
                    })
                }
            };
            let mut step = cfg.damping;
            let mut accepted = false;
            let tries = if rn <= cfg.accept_tol { 3 } else { 30 };
            for _ in 0..tries {
                let trial = &v - &delta * step;
                if let Ok(rt) = self.shoot_residual(ps, &trial, qs) {
                    let rtn = rt.norm();
                    if rtn < rn {
                        v = trial;
                        r = rt;
                        rn = rtn;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                if rn <= cfg.accept_tol {
                    break;
                }
                return Err(GeometryError::NoConvergence {
                    iterations: iters,
                    residual: rn,
                });
            }
        }
        // A converged shot through a conjugate point is not a valid log.
        if n > 0 && v.norm() > 0.0 {
            let jac = self.shooting_jacobian(ps, &v, qs, cfg)?;
            let sv = jac.singular_values();
            let (smin, smax) = sv
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(*s), hi.max(*s)));
            if !(smin > 1e-6 * smax) {
                return Err(GeometryError::NoConvergence {
                    iterations: iters,
                    residual: rn,
                });
            }
        }
        Ok((TangentVector::new(p.clone(), v), iters))
    }

    fn shooting_jacobian(
        &self,
        p: &[f64],
        v: &DVector<f64>,
        q: &[f64],
        cfg: &ShootingConfig,
    ) -> Result<DMatrix<f64>> {
        let n = self.dim;
        let delta = cfg.jacobian_fd_step * v.norm().max(1.0);
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut plus = v.clone();
            plus[j] += delta;
            let mut minus = v.clone();
            minus[j] -= delta;
            let col = (self.shoot_residual(p, &plus, q)? - self.shoot_residual(p, &minus, q)?)
                / (2.0 * delta);
            jac.set_column(j, &col);
        }
        Ok(jac)
    }

    /// Parallel transport of `u` along `geodesic`.
    pub fn transport_ode(&self, u: &TangentVector, geodesic: &GeodesicSegment) -> Result<TangentVector> {
        let offset = u.base.coord_distance(&geodesic.start);
        if offset > 1e-9 {
            return Err(GeometryError::InvalidBase { offset });
        }
        let (x, _, vecs) = self.flow_with_transport(
            geodesic.start.as_slice(),
            geodesic.initial_velocity.as_slice(),
            &[u.as_slice()],
            1.0,
        )?;
        Ok(TangentVector::from_slice(&Point::from_slice(&x), &vecs[0]))
    }

    fn default_fd_steps(x: &[f64], base: f64) -> Vec<f64> {
        x.iter().map(|c| base * c.abs().max(1.0)).collect()
    }

    /// `∂_i Γ^k_jl` by central differences, stored as one `Christoffel` per `i`.
    fn christoffel_derivatives(&self, x: &[f64], steps: &[f64]) -> Result<Vec<Christoffel>> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += steps[i];
                xm[i] -= steps[i];
                if !self.inside(&xp) || !self.inside(&xm) {
                    return Err(GeometryError::DomainEscape(format!(
                        "finite-difference stencil around {x:?} leaves the chart"
                    )));
                }
                let gp = self.raw_gamma(&xp);
                let gm = self.raw_gamma(&xm);
                let mut d = Christoffel::zeros(n);
                for (slot, (a, b)) in d.data.iter_mut().zip(gp.data.iter().zip(&gm.data)) {
                    *slot = (a - b) / (2.0 * steps[i]);
                }
                Ok(d)
            })
            .collect()
    }

    /// Riemann components at `p` with the default finite-difference step
    /// `cbrt(ε)·max(1, |x_i|)`.
    pub fn curvature_components(&self, p: &Point) -> Result<RiemannComponents> {
        self.curvature_components_with_step(p, f64::EPSILON.cbrt())
    }

    /// Riemann components with a finite-difference step `step·max(1, |x_i|)`:
    /// `R^l_ijk = ∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik`.
    pub fn curvature_components_with_step(&self, p: &Point, step: f64) -> Result<RiemannComponents> {
        let n = self.dim;
        let x = p.as_slice();
        let gamma = self.christoffel_at(x)?;
        let steps = Self::default_fd_steps(x, step);
        let dgamma = self.christoffel_derivatives(x, &steps)?;
        let mut r = RiemannComponents::zeros(n);
        for l in 0..n {
            for i in 0..n {
                // antisymmetric in (i, j): fill j > i and mirror
                for j in (i + 1)..n {
                    for k in 0..n {
                        let mut value = dgamma[i].get(l, j, k) - dgamma[j].get(l, i, k);
                        for m in 0..n {
                            value += gamma.get(l, i, m) * gamma.get(m, j, k)
                                - gamma.get(l, j, m) * gamma.get(m, i, k);
                        }
                        r.add(l, i, j, k, value);
                        r.add(l, j, i, k, -value);
                    }
                }
            }
        }
        Ok(r)
    }

    /// `∇_m R^l_ijk = ∂_m R^l_ijk + Γ^l_mp R^p_ijk − Γ^p_mi R^l_pjk
    /// − Γ^p_mj R^l_ipk − Γ^p_mk R^l_ijp`, with `∂_m R` from central
    /// differences of step `ε^{1/5}·max(1, |x_m|)`.
    pub fn nabla_curvature_components(&self, p: &Point) -> Result<NablaRiemannComponents> {
        let n = self.dim;
        let x = p.as_slice();
        let gamma = self.christoffel_at(x)?;
        let r = self.curvature_components(p)?;
        let steps = Self::default_fd_steps(x, f64::EPSILON.powf(0.2));
        let mut out = NablaRiemannComponents {
            dim: n,
            data: vec![0.0; n.pow(5)],
        };
        for m in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[m] += steps[m];
            xm[m] -= steps[m];
            let rp = self.curvature_components(&Point::from_slice(&xp))?;
            let rm = self.curvature_components(&Point::from_slice(&xm))?;
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let mut value =
                                (rp.get(l, i, j, k) - rm.get(l, i, j, k)) / (2.0 * steps[m]);
                            for q in 0..n {
                                value += gamma.get(l, m, q) * r.get(q, i, j, k)
                                    - gamma.get(q, m, i) * r.get(l, q, j, k)
                                    - gamma.get(q, m, j) * r.get(l, i, q, k)
                                    - gamma.get(q, m, k) * r.get(l, i, j, q);
                            }
                            let idx = out.idx(m, l, i, j, k);
                            out.data[idx] = value;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// A [`ConnectionSpace`] backed by a [`ChartConnection`].
#[derive(Clone)]
pub struct ChartSpace {
    name: String,
    conn: ChartConnection,
    metric: Option<MetricFn>,
    tol: ToleranceConfig,
    shooting: ShootingConfig,
    reference: Point,
    validity_radius: f64,
    injectivity_radius: Option<f64>,
    locally_symmetric: bool,
}

impl fmt::Debug for ChartSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartSpace")
            .field("name", &self.name)
            .field("conn", &self.conn)
            .field("reference", &self.reference)
            .finish_non_exhaustive()
    }
}

impl ChartSpace {
    pub fn new(name: impl Into<String>, conn: ChartConnection, reference: Point) -> Self {
        let tol = ToleranceConfig::default();
        Self {
            name: name.into(),
            conn: conn.with_ode(OdeSolverConfig::adaptive(tol.ode_rel_tol, tol.ode_abs_tol)),
            metric: None,
            tol,
            shooting: ShootingConfig::from_tolerances(&tol),
            reference,
            validity_radius: 0.5,
            injectivity_radius: None,
            locally_symmetric: false,
        }
    }

    pub fn with_metric(mut self, metric: MetricFn) -> Self {
        self.metric = Some(metric);
        self
    }

    pub fn with_tolerances(mut self, tol: ToleranceConfig) -> Self {
        let method_fixed = self.conn.ode().method == crate::ode::OdeMethod::FixedRk4;
        self.tol = tol;
        self.shooting = ShootingConfig::from_tolerances(&tol);
        if !method_fixed {
            let ode = OdeSolverConfig::adaptive(tol.ode_rel_tol, tol.ode_abs_tol);
            self.conn = self.conn.with_ode(ode);
        }
        self
    }

    pub fn with_ode(mut self, ode: OdeSolverConfig) -> Self {
        self.conn = self.conn.with_ode(ode);
        self
    }

    pub fn with_shooting(mut self, shooting: ShootingConfig) -> Self {
        self.shooting = shooting;
        self
    }

    pub fn with_validity_radius(mut self, radius: f64) -> Self {
        self.validity_radius = radius;
        self
    }

    pub fn with_injectivity_radius(mut self, radius: Option<f64>) -> Self {
        self.injectivity_radius = radius;
        self
    }

    pub fn locally_symmetric(mut self, flag: bool) -> Self {
        self.locally_symmetric = flag;
        self
    }

    pub fn connection(&self) -> &ChartConnection {
        &self.conn
    }

    pub fn shooting(&self) -> &ShootingConfig {
        &self.shooting
    }

    pub fn metric_at(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.metric.as_ref().map(|g| g(x))
    }
}

impl ConnectionSpace for ChartSpace {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            dim: self.conn.dim(),
            has_metric: self.metric.is_some(),
            has_closed_form_transport: false,
            has_curvature: true,
            injectivity_radius: self.injectivity_radius,
            locally_symmetric: self.locally_symmetric,
        }
    }

    fn coord_len(&self) -> usize {
        self.conn.dim()
    }

    fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    fn exp(&self, v: &TangentVector) -> Result<Point> {
        if v.is_zero() {
            return Ok(v.base.clone());
        }
        Ok(self.conn.geodesic_flow(v, 1.0)?.0)
    }

    fn log_counted(&self, p: &Point, q: &Point) -> Result<(TangentVector, usize)> {
        if p == q {
            return Ok((TangentVector::zero(p), 0));
        }
        let (v, iters) = self.conn.log_shooting(p, q, &self.shooting)?;
        if let Some(inj) = self.injectivity_radius {
            let len = self.norm(&v);
            if len >= inj {
                return Err(GeometryError::CutLocus(format!(
                    "geodesic length {len:.6} reaches the injectivity radius {inj:.6}"
                )));
            }
        }
        Ok((v, iters))
    }

    fn transport_along(&self, u: &TangentVector, velocity: &TangentVector) -> Result<TangentVector> {
        let (x, _, vecs) = self.conn.flow_with_transport(
            velocity.base.as_slice(),
            velocity.as_slice(),
            &[u.as_slice()],
            1.0,
        )?;
        Ok(TangentVector::from_slice(&Point::from_slice(&x), &vecs[0]))
    }

    fn curvature(
        &self,
        u: &TangentVector,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<TangentVector> {
        let r = self.conn.curvature_components(&u.base)?;
        Ok(TangentVector::new(
            u.base.clone(),
            r.contract(u.as_slice(), v.as_slice(), w.as_slice()),
        ))
    }

    fn nabla_curvature(
        &self,
        x: &TangentVector,
        u: &TangentVector,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<TangentVector> {
        let nr = self.conn.nabla_curvature_components(&x.base)?;
        Ok(TangentVector::new(
            x.base.clone(),
            nr.contract(x.as_slice(), u.as_slice(), v.as_slice(), w.as_slice()),
        ))
    }

    fn inner(&self, u: &TangentVector, v: &TangentVector) -> Option<f64> {
        let g = self.metric_at(u.base.as_slice())?;
        Some(u.components.dot(&(g * &v.components)))
    }

    fn reference_point(&self) -> Point {
        self.reference.clone()
    }

    fn sample_point(&self, rng: &mut dyn RngCore, spread: f64) -> Point {
        let n = self.conn.dim();
        let dir = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut *rng));
        let radius: f64 = Uniform::new(0.0, 1.0).unwrap().sample(&mut *rng);
        let dir = dir.normalize();
        Point::new(&self.reference.coords + dir * (radius * spread))
    }

    fn sample_unit_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> TangentVector {
        let n = self.conn.dim();
        let dir = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut *rng));
        let u = TangentVector::new(p.clone(), dir);
        let len = self.norm(&u);
        u.scale(1.0 / len)
    }

    fn validity_radius(&self) -> f64 {
        self.validity_radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conformal_christoffel_layout() {
        // f_x = a, f_y = b
        let g = conformal_christoffel(&[0.7, -0.2]);
        assert_eq!(g.get(0, 0, 0), 0.7);
        assert_eq!(g.get(0, 0, 1), -0.2);
        assert_eq!(g.get(0, 1, 1), -0.7);
        assert_eq!(g.get(1, 0, 0), 0.2);
        assert_eq!(g.get(1, 0, 1), 0.7);
        assert_eq!(g.get(1, 1, 1), -0.2);
    }

    #[test]
    fn symmetrize_reports_asymmetry() {
        let mut g = Christoffel::zeros(2);
        g.set(0, 0, 1, 1.0);
        g.set(0, 1, 0, 0.0);
        let asym = g.symmetrize();
        assert_eq!(asym, 1.0);
        assert_eq!(g.get(0, 0, 1), 0.5);
        assert_eq!(g.get(0, 1, 0), 0.5);
    }

    #[test]
    fn flat_chart_flow_and_log() {
        let conn = ChartConnection::flat(2);
        let p = Point::from_slice(&[1.0, 2.0]);
        let v = TangentVector::from_slice(&p, &[3.0, 4.0]);
        let (x, xdot) = conn.geodesic_flow(&v, 1.0).unwrap();
        assert!((x.coords - DVector::from_column_slice(&[4.0, 6.0])).norm() < 1e-14);
        assert!((xdot.components - DVector::from_column_slice(&[3.0, 4.0])).norm() < 1e-14);

        let origin = Point::from_slice(&[0.0, 0.0]);
        let q = Point::from_slice(&[1.0, 1.0]);
        let (lv, _) = conn
            .log_shooting(&origin, &q, &ShootingConfig::default())
            .unwrap();
        assert!((lv.components - DVector::from_column_slice(&[1.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn flat_chart_curvature_vanishes() {
        let conn = ChartConnection::flat(3);
        let p = Point::from_slice(&[0.1, 0.2, 0.3]);
        assert_eq!(conn.curvature_components(&p).unwrap().max_abs(), 0.0);
        assert_eq!(conn.nabla_curvature_components(&p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn stencil_outside_chart_is_domain_escape() {
        let conn = ChartConnection::flat(2).with_bounds(ChartBounds::cube(2, 1.0));
        let p = Point::from_slice(&[1.0, 0.0]);
        assert!(matches!(
            conn.curvature_components(&p),
            Err(GeometryError::DomainEscape(_))
        ));
    }

    #[test]
    fn flow_leaving_chart_is_domain_escape() {
        let conn = ChartConnection::flat(2).with_bounds(ChartBounds::cube(2, 1.0));
        let p = Point::from_slice(&[0.0, 0.0]);
        let v = TangentVector::from_slice(&p, &[3.0, 0.0]);
        assert!(matches!(
            conn.geodesic_flow(&v, 1.0),
            Err(GeometryError::DomainEscape(_))
        ));
    }
}
