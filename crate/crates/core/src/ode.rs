//! Explicit Runge–Kutta integrators for autonomous systems `y' = f(y)`.

use crate::error::{GeometryError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeMethod {
    /// Classical 4th-order Runge–Kutta with a fixed step.
    FixedRk4,
    /// Dormand–Prince 5(4) embedded pair with step-size control.
    AdaptiveDp45,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSolverConfig {
    pub method: OdeMethod,
    /// Fixed step for `FixedRk4`, first trial step for `AdaptiveDp45`.
    pub initial_step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for OdeSolverConfig {
    fn default() -> Self {
        Self::adaptive(1e-12, 1e-12)
    }
}

impl OdeSolverConfig {
    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            method: OdeMethod::AdaptiveDp45,
            initial_step: 0.05,
            rel_tol,
            abs_tol,
            max_steps: 100_000,
        }
    }

    pub fn fixed(step: f64) -> Self {
        Self {
            method: OdeMethod::FixedRk4,
            initial_step: step,
            rel_tol: 0.0,
            abs_tol: 0.0,
            max_steps: 1_000_000,
        }
    }
}

/// Integrates from time 0 to `t_end` (either sign). `inside` is checked after
/// every accepted step; returning `false` aborts with `DomainEscape`.
pub fn integrate<F, G>(
    cfg: &OdeSolverConfig,
    y0: &[f64],
    t_end: f64,
    rhs: F,
    inside: G,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
    G: Fn(&[f64]) -> bool,
{
    if !(cfg.initial_step > 0.0) {
        return Err(GeometryError::InvalidArgument(
            "ODE initial_step must be positive".into(),
        ));
    }
    if t_end == 0.0 {
        return Ok(y0.to_vec());
    }
    match cfg.method {
        OdeMethod::FixedRk4 => rk4(cfg, y0, t_end, rhs, inside),
        OdeMethod::AdaptiveDp45 => dp45(cfg, y0, t_end, rhs, inside),
    }
}

fn escape_check<G: Fn(&[f64]) -> bool>(y: &[f64], inside: &G) -> Result<()> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::DomainEscape(
            "integration produced a non-finite state".into(),
        ));
    }
    if !inside(y) {
        return Err(GeometryError::DomainEscape(
            "integration left the chart".into(),
        ));
    }
    Ok(())
}

fn rk4<F, G>(cfg: &OdeSolverConfig, y0: &[f64], t_end: f64, rhs: F, inside: G) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
    G: Fn(&[f64]) -> bool,
{
    let n = y0.len();
    let steps = (t_end.abs() / cfg.initial_step).ceil().max(1.0) as usize;
    if steps > cfg.max_steps {
        return Err(GeometryError::MaxStepsExceeded(steps));
    }
    let h = t_end / steps as f64;
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for _ in 0..steps {
        rhs(&y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        escape_check(&y, &inside)?;
    }
    Ok(y)
}

// Dormand–Prince 5(4) tableau (autonomous form, nodes unused).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded 4th-order error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn dp45<F, G>(cfg: &OdeSolverConfig, y0: &[f64], t_end: f64, rhs: F, inside: G) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
    G: Fn(&[f64]) -> bool,
{
    let n = y0.len();
    let dir = t_end.signum();
    let span = t_end.abs();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut t = 0.0;
    let mut h = cfg.initial_step.min(span);
    let mut steps = 0usize;
    rhs(&y, &mut k[0]);
    while t < span {
        if steps >= cfg.max_steps {
            return Err(GeometryError::MaxStepsExceeded(steps));
        }
        let last = t + h >= span * (1.0 - 1e-15);
        if last {
            h = span - t;
        }
        let hs = dir * h;
        let stage = |coeffs: &[(usize, f64)], k: &Vec<Vec<f64>>, tmp: &mut Vec<f64>| {
            for i in 0..n {
                let mut acc = y[i];
                for &(j, a) in coeffs {
                    acc += hs * a * k[j][i];
                }
                tmp[i] = acc;
            }
        };
        stage(&[(0, A21)], &k, &mut tmp);
        rhs(&tmp, &mut k[1]);
        stage(&[(0, A31), (1, A32)], &k, &mut tmp);
        rhs(&tmp, &mut k[2]);
        stage(&[(0, A41), (1, A42), (2, A43)], &k, &mut tmp);
        rhs(&tmp, &mut k[3]);
        stage(&[(0, A51), (1, A52), (2, A53), (3, A54)], &k, &mut tmp);
        rhs(&tmp, &mut k[4]);
        stage(&[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], &k, &mut tmp);
        rhs(&tmp, &mut k[5]);
        for i in 0..n {
            y_new[i] = y[i]
                + hs * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        rhs(&y_new, &mut k[6]);
        let mut err_sq = 0.0;
        for i in 0..n {
            let e = hs
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                    + E7 * k[6][i]);
            let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / n as f64).sqrt();
        steps += 1;
        if err <= 1.0 {
            t = if last { span } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            escape_check(&y, &inside)?;
        }
        let factor = if err == 0.0 {
            5.0
        } else if err.is_finite() {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            0.1
        };
        h *= factor;
        if t < span && h < 1e-14 * span.max(1.0) {
            return Err(GeometryError::DomainEscape(
                "step size underflow during integration".into(),
            ));
        }
    }
    Ok(y)
}
