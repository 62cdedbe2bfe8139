use crate::error::{GeometryError, Result};

/// Numerical tolerances shared by every space and scheme.
///
/// Defaults sit about two orders of magnitude above double-precision noise
/// accumulated over ~10³ floating point operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Residual allowed for manifold membership and tangency checks.
    pub membership_tol: f64,
    /// Accuracy of `log` (exp/log round trip).
    pub log_tol: f64,
    /// Ladder-vs-oracle threshold in symmetric spaces.
    pub exactness_tol: f64,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    pub max_shooting_iters: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            membership_tol: 1e-9,
            log_tol: 1e-10,
            exactness_tol: 1e-10,
            ode_rel_tol: 1e-12,
            ode_abs_tol: 1e-12,
            max_shooting_iters: 100,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("membership_tol", self.membership_tol),
            ("log_tol", self.log_tol),
            ("exactness_tol", self.exactness_tol),
            ("ode_rel_tol", self.ode_rel_tol),
            ("ode_abs_tol", self.ode_abs_tol),
        ];
        for (name, value) in named {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GeometryError::InvalidArgument(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        if self.max_shooting_iters == 0 {
            return Err(GeometryError::InvalidArgument(
                "max_shooting_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }
}
