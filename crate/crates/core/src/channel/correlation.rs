use ndarray::Array2;

use crate::error::{param, Result};
use crate::linalg::{kron, psd_sqrt};
use crate::scalar::Real;

/// Spatial correlation matrix together with its symmetric square root.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlation<T> {
    pub matrix: Array2<T>,
    /// Symmetric factor with `sqrt · sqrtᵀ = matrix`.
    pub sqrt: Array2<T>,
}

impl<T: Real> Correlation<T> {
    pub fn identity(n: usize) -> Self {
        let eye = Array2::from_shape_fn((n, n), |(i, j)| if i == j { T::one() } else { T::zero() });
        Self { matrix: eye.clone(), sqrt: eye }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_identity(&self) -> bool {
        self.matrix
            .indexed_iter()
            .all(|((i, j), v)| *v == if i == j { T::one() } else { T::zero() })
    }
}

fn check_coeff(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(param(format!("correlation coefficient {r} outside [0, 1)")));
    }
    Ok(())
}

/// Exponential correlation `Φ(i, j) = r^|i−j|`.
pub fn correlation_matrix<T: Real>(r: f64, n: usize) -> Result<Correlation<T>> {
    check_coeff(r)?;
    if n == 0 {
        return Err(param("correlation matrix dimension must be positive"));
    }
    if r == 0.0 {
        return Ok(Correlation::identity(n));
    }
    let matrix = Array2::from_shape_fn((n, n), |(i, j)| T::of(r.powi(i.abs_diff(j) as i32)));
    let sqrt = psd_sqrt(&matrix);
    Ok(Correlation { matrix, sqrt })
}

/// Planar-array correlation `Φ_h ⊗ Φ_v` for an `nh × nv` panel. Element
/// `(h, v)` sits at flat index `h·nv + v`.
pub fn irs_correlation<T: Real>(r_h: f64, r_v: f64, nh: usize, nv: usize) -> Result<Correlation<T>> {
    let h = correlation_matrix::<T>(r_h, nh)?;
    let v = correlation_matrix::<T>(r_v, nv)?;
    Ok(Correlation {
        matrix: kron(&h.matrix, &v.matrix),
        sqrt: kron(&h.sqrt, &v.sqrt),
    })
}

/// Amplitude path-loss factor `sqrt(C0 · d^−α)`.
pub fn path_loss<T: Real>(distance: f64, exponent: f64, c0: f64) -> Result<T> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(param(format!("link distance must be positive, got {distance}")));
    }
    if !(c0 > 0.0) {
        return Err(param(format!("path-loss reference C0 must be positive, got {c0}")));
    }
    Ok(T::of((c0 * distance.powf(-exponent)).sqrt()))
}
