//! Small dense-matrix helpers used by the matrix manifolds.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{GeometryError, Result};

pub fn to_matrix(n: usize, coords: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, coords.as_slice())
}

pub fn from_matrix(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    DVector::from_fn(n * n, |idx, _| m[(idx / n, idx % n)])
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `V f(Λ) Vᵀ` for a symmetric matrix.
pub fn sym_apply(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = symmetrize(m).symmetric_eigen();
    let vals = eig.eigenvalues.map(f);
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&vals) * v.transpose()
}

/// Eigenvalues of the symmetric part, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = symmetrize(m).symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Checks that `m` is symmetric positive definite.
pub fn check_spd(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    let asym = (m - m.transpose()).abs().max();
    if asym > tol * m.abs().max().max(1.0) {
        return Err(GeometryError::NotSpd(format!(
            "matrix is not symmetric (asymmetry {asym:.3e})"
        )));
    }
    let smallest = sym_eigenvalues(m)[0];
    if !(smallest > 0.0) {
        return Err(GeometryError::NotSpd(format!(
            "matrix has non-positive eigenvalue {smallest:.6e}"
        )));
    }
    Ok(())
}

pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Rodrigues formula for `exp(hat(w))`.
pub fn so3_exp(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta_sq = w.norm_squared();
    let theta = theta_sq.sqrt();
    let k = hat(w);
    let (a, b) = if theta < 1e-4 {
        (
            1.0 - theta_sq / 6.0 + theta_sq * theta_sq / 120.0,
            0.5 - theta_sq / 24.0 + theta_sq * theta_sq / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta_sq)
    };
    Matrix3::identity() + k * a + k * k * b
}

/// Rotation vector of `r`; fails within `branch_tol` of angle π.
pub fn so3_log(r: &Matrix3<f64>, branch_tol: f64) -> Result<Vector3<f64>> {
    let axis2 = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    let s = 0.5 * axis2.norm();
    let c = 0.5 * (r.trace() - 1.0);
    let theta = s.atan2(c);
    if std::f64::consts::PI - theta < branch_tol {
        return Err(GeometryError::LogBranch { angle: theta });
    }
    let factor = if theta < 1e-4 {
        0.5 * (1.0 + theta * theta / 6.0 + 7.0 * theta.powi(4) / 360.0)
    } else {
        0.5 * theta / theta.sin()
    };
    Ok(axis2 * factor)
}

pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rodrigues_round_trip() {
        for w in [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1e-6, -2e-6, 3e-7),
            Vector3::new(0.3, -0.5, 1.1),
            Vector3::new(2.0, 1.0, -1.5),
        ] {
            let r = so3_exp(&w);
            assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-14);
            let back = so3_log(&r, 1e-9).unwrap();
            assert!((back - w).norm() < 1e-12, "{w:?} -> {back:?}");
        }
    }

    #[test]
    fn log_at_pi_is_branch_error() {
        let r = so3_exp(&Vector3::new(0.0, 0.0, std::f64::consts::PI));
        assert!(matches!(so3_log(&r, 1e-7), Err(GeometryError::LogBranch { .. })));
    }

    #[test]
    fn sym_apply_exp_log() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let l = sym_apply(&m, f64::ln);
        let back = sym_apply(&l, f64::exp);
        assert!((back - m).norm() < 1e-13);
    }

    #[test]
    fn spd_check() {
        let good = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        check_spd(&good, 1e-12).unwrap();
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(check_spd(&bad, 1e-12), Err(GeometryError::NotSpd(_))));
    }
}
