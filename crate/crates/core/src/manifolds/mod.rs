//! Closed-form and chart-based manifolds, and the name registry.

mod bump;
mod euclidean;
mod hyperbolic;
mod so3;
mod spd;
mod sphere;

pub use bump::{
    bump_gauss_curvature, bump_gauss_curvature_dx, bump_metric, sphere_to_stereographic,
    stereographic_push_forward, stereographic_sphere, stereographic_to_sphere,
};
pub use euclidean::Euclidean;
pub use hyperbolic::{minkowski, Hyperbolic};
pub use so3::{from_mat3, to_mat3, So3};
pub use spd::Spd;
pub use sphere::Sphere;

use crate::error::{GeometryError, Result};
use crate::geometry::ConnectionSpace;
use crate::ode::OdeSolverConfig;
use crate::tolerance::ToleranceConfig;

/// Registry name patterns; `n` stands for the dimension.
pub const REGISTRY_NAMES: &[&str] = &[
    "euclidean-n",
    "sphere-n",
    "hyperbolic-n",
    "spd-n",
    "so3",
    "bump2d",
];

/// The locally symmetric fleet used for exactness sweeps.
pub const SYMMETRIC_FLEET: &[&str] = &["sphere-2", "hyperbolic-2", "spd-3", "so3"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceOptions {
    pub tolerances: ToleranceConfig,
    /// Fixed RK4 step for chart integrators; adaptive when `None`.
    pub fixed_step: Option<f64>,
    /// Bump height for `bump2d`.
    pub beta: f64,
}

impl Default for SpaceOptions {
    fn default() -> Self {
        Self {
            tolerances: ToleranceConfig::default(),
            fixed_step: None,
            beta: 1.0,
        }
    }
}

/// Default fixed step used when reproducible (fixed-step) integration is
/// requested.
pub const DEFAULT_FIXED_STEP: f64 = 1.0 / 256.0;

fn parse_dim(name: &str, prefix: &str, min: usize) -> Result<Option<usize>> {
    let Some(rest) = name.strip_prefix(prefix) else {
        return Ok(None);
    };
    let n: usize = rest
        .parse()
        .map_err(|_| GeometryError::InvalidArgument(format!("bad dimension in manifold name {name:?}")))?;
    if n < min {
        return Err(GeometryError::InvalidArgument(format!(
            "{name}: dimension must be at least {min}"
        )));
    }
    Ok(Some(n))
}

/// Builds a space from its registry name with the given options.
pub fn build(name: &str, opts: &SpaceOptions) -> Result<Box<dyn ConnectionSpace>> {
    opts.tolerances.validate()?;
    let tol = opts.tolerances;
    if let Some(n) = parse_dim(name, "euclidean-", 1)? {
        return Ok(Box::new(Euclidean::new(n).with_tolerances(tol)));
    }
    if let Some(n) = parse_dim(name, "sphere-", 1)? {
        return Ok(Box::new(Sphere::new(n).with_tolerances(tol)));
    }
    if let Some(n) = parse_dim(name, "hyperbolic-", 1)? {
        return Ok(Box::new(Hyperbolic::new(n).with_tolerances(tol)));
    }
    if let Some(n) = parse_dim(name, "spd-", 2)? {
        return Ok(Box::new(Spd::new(n).with_tolerances(tol)));
    }
    match name {
        "so3" => Ok(Box::new(So3::new().with_tolerances(tol))),
        "bump2d" => {
            let mut space = bump_metric(opts.beta).with_tolerances(tol);
            if let Some(step) = opts.fixed_step {
                space = space.with_ode(OdeSolverConfig::fixed(step));
            }
            Ok(Box::new(space))
        }
        _ => Err(GeometryError::InvalidArgument(format!(
            "unknown manifold {name:?}; expected one of {}",
            REGISTRY_NAMES.join(", ")
        ))),
    }
}

/// Builds a space with default options.
pub fn from_name(name: &str) -> Result<Box<dyn ConnectionSpace>> {
    build(name, &SpaceOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_resolve() {
        for name in ["euclidean-3", "sphere-2", "hyperbolic-2", "spd-3", "so3", "bump2d"] {
            let space = from_name(name).unwrap();
            assert_eq!(space.name(), name);
        }
    }

    #[test]
    fn capability_flags() {
        for name in SYMMETRIC_FLEET {
            assert!(from_name(name).unwrap().capabilities().locally_symmetric, "{name}");
        }
        assert!(!from_name("bump2d").unwrap().capabilities().locally_symmetric);
        let sphere = from_name("sphere-2").unwrap().capabilities();
        assert_eq!(sphere.injectivity_radius, Some(std::f64::consts::PI));
        assert_eq!(
            from_name("spd-3").unwrap().capabilities().injectivity_radius,
            Some(f64::INFINITY)
        );
    }

    #[test]
    fn bad_names_are_rejected() {
        for name in ["torus-2", "spd-1", "sphere-x", "sphere-0"] {
            assert!(from_name(name).is_err(), "{name}");
        }
    }
}
