//! Small dense kernels: symmetric eigensolver, square roots, Kronecker products.
//!
//! Every matrix here is at most a few dozen rows, so plain loops over
//! `ndarray` storage are used throughout.

use ndarray::{Array1, Array2};

use crate::scalar::{Cx, Real};

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Array1<T>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: Array2<T>,
}

/// Cyclic Jacobi eigen-decomposition. Only the lower and upper triangles'
/// average is used, so slightly asymmetric input is tolerated.
pub fn symmetric_eigen<T: Real>(a: &Array2<T>) -> SymmetricEigen<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "symmetric_eigen needs a square matrix");
    let half = T::of(0.5);
    let mut m = Array2::from_shape_fn((n, n), |(i, j)| (a[[i, j]] + a[[j, i]]) * half);
    let mut v = Array2::from_shape_fn((n, n), |(i, j)| if i == j { T::one() } else { T::zero() });

    let fro2: T = m.iter().map(|x| *x * *x).sum();
    let tol2 = fro2 * T::epsilon() * T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut off2 = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off2 += m[[p, q]] * m[[p, q]];
            }
        }
        if off2 + off2 <= tol2 || off2 == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = c * kp - s * kq;
                    m[[k, q]] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = c * pk - s * qk;
                    m[[q, k]] = s * pk + c * qk;
                }
                m[[p, q]] = T::zero();
                m[[q, p]] = T::zero();
                for k in 0..n {
                    let (kp, kq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * kp - s * kq;
                    v[[k, q]] = s * kp + c * kq;
                }
            }
        }
    }

    SymmetricEigen {
        values: Array1::from_shape_fn(n, |i| m[[i, i]]),
        vectors: v,
    }
}

/// Symmetric square root `V diag(sqrt(max(λ, 0))) Vᵀ` of a PSD matrix.
pub fn psd_sqrt<T: Real>(a: &Array2<T>) -> Array2<T> {
    let eig = symmetric_eigen(a);
    let n = a.nrows();
    let roots: Vec<T> = eig.values.iter().map(|l| l.max(T::zero()).sqrt()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| {
        (0..n).map(|k| eig.vectors[[i, k]] * roots[k] * eig.vectors[[j, k]]).sum()
    })
}

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &Array2<T>, b: &Array2<T>) -> Array2<T> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| {
        a[[i / br, j / bc]] * b[[i % br, j % bc]]
    })
}

/// Real matrix times complex matrix.
pub fn real_mul_complex<T: Real>(a: &Array2<T>, b: &Array2<Cx<T>>) -> Array2<Cx<T>> {
    assert_eq!(a.ncols(), b.nrows());
    Array2::from_shape_fn((a.nrows(), b.ncols()), |(i, j)| {
        (0..a.ncols()).map(|k| b[[k, j]].scale(a[[i, k]])).sum()
    })
}

/// Complex matrix times real matrix.
pub fn complex_mul_real<T: Real>(a: &Array2<Cx<T>>, b: &Array2<T>) -> Array2<Cx<T>> {
    assert_eq!(a.ncols(), b.nrows());
    Array2::from_shape_fn((a.nrows(), b.ncols()), |(i, j)| {
        (0..a.ncols()).map(|k| a[[i, k]].scale(b[[k, j]])).sum()
    })
}

/// Real matrix times complex vector.
pub fn real_mul_vec<T: Real>(a: &Array2<T>, x: &Array1<Cx<T>>) -> Array1<Cx<T>> {
    assert_eq!(a.ncols(), x.len());
    Array1::from_shape_fn(a.nrows(), |i| {
        (0..a.ncols()).map(|k| x[k].scale(a[[i, k]])).sum()
    })
}

/// Squared Frobenius norm of a complex matrix.
pub fn fro_norm_sqr<T: Real>(a: &Array2<Cx<T>>) -> T {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Real symmetric `2n × 2n` embedding `[[X, -Y], [Y, X]]` of a Hermitian
/// `A = X + jY`. A complex vector `p + jq` maps to `[p; q]`.
pub fn hermitian_embedding<T: Real>(a: &Array2<Cx<T>>) -> Array2<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    Array2::from_shape_fn((2 * n, 2 * n), |(i, j)| {
        let z = a[[i % n, j % n]];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}
