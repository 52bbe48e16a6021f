//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;

/// How the spectral radius was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusMethod {
    PowerIteration,
    DenseEigen,
}

/// Spectral radius of a square matrix.
///
/// Power iteration is accepted only once the eigen-residual
/// `‖Ax − λx‖ / ‖x‖` drops below `POWER_TOL · |λ|`; matrices whose dominant
/// eigenvalues form a complex pair (or a `±λ` pair) never pass that test and
/// are handed to a dense Schur decomposition instead.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<(f64, RadiusMethod)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "spectral radius",
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("spectral radius input"));
    }
    if let Some(r) = power_iteration(m, POWER_TOL, POWER_MAX_ITER) {
        return Ok((r, RadiusMethod::PowerIteration));
    }
    Ok((dense_spectral_radius(m), RadiusMethod::DenseEigen))
}

/// Largest eigenvalue modulus from the real Schur form.
pub fn dense_spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn power_iteration(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> Option<f64> {
    let n = m.nrows();
    if n == 0 {
        return Some(0.0);
    }
    // deterministic, generic start vector
    let mut x = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
    x /= x.norm();
    let mut y = DVector::zeros(n);
    for _ in 0..max_iter {
        m.mul_to(&x, &mut y);
        let norm = y.norm();
        if norm == 0.0 {
            return None;
        }
        let lambda = x.dot(&y);
        let residual = (&y - lambda * &x).norm();
        if lambda != 0.0 && residual <= tol * lambda.abs() {
            return Some(lambda.abs());
        }
        x.copy_from(&y);
        x /= norm;
    }
    None
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}
