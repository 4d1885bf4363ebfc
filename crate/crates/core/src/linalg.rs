//! Small dense-matrix helpers: induced norms, `vec`, Kronecker products and
//! the spectral norm.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::scalar::Real;

/// Induced ∞-norm: the largest absolute row sum.
pub fn norm_inf<T: Real>(a: &ArrayView2<'_, T>) -> T {
    a.axis_iter(Axis(0))
        .map(|row| row.iter().fold(T::zero(), |acc, v| acc + v.abs()))
        .fold(T::zero(), T::max)
}

/// Absolute row sums `|e_i' A|_1`.
pub fn row_abs_sums<T: Real>(a: &ArrayView2<'_, T>) -> Array1<T> {
    a.map_axis(Axis(1), |row| row.iter().fold(T::zero(), |acc, v| acc + v.abs()))
}

/// Maximum entrywise absolute value.
pub fn max_abs<T: Real>(a: &ArrayView2<'_, T>) -> T {
    a.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Column-stacking `vec` operator.
pub fn vec<T: Real>(a: &ArrayView2<'_, T>) -> Array1<T> {
    a.t().iter().copied().collect()
}

/// Inverse of [`vec`] for an `rows x cols` matrix.
pub fn unvec<T: Real>(v: &Array1<T>, rows: usize, cols: usize) -> Array2<T> {
    assert_eq!(v.len(), rows * cols);
    Array2::from_shape_fn((rows, cols), |(i, j)| v[i + j * rows])
}

/// Kronecker product `A ⊗ B`.
pub fn kron<T: Real>(a: &ArrayView2<'_, T>, b: &ArrayView2<'_, T>) -> Array2<T> {
    ndarray::linalg::kron(a, b)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<T: Real>(a: &ArrayView2<'_, T>) -> Vec<T> {
    let n = a.nrows();
    let mut m = a.to_owned();
    let tol = T::epsilon() * T::lit(1e-2);
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag = diag + m[[i, i]] * m[[i, i]];
            for j in 0..n {
                if i != j {
                    off = off + m[[i, j]] * m[[i, j]];
                }
            }
        }
        if off <= tol * tol * diag.max(T::min_positive_value()) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (T::lit(2.0) * apq);
                let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[[i, i]]).collect()
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(a: &ArrayView2<'_, T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    let gram = a.t().dot(a);
    symmetric_eigenvalues(&gram.view())
        .into_iter()
        .fold(T::zero(), T::max)
        .max(T::zero())
        .sqrt()
}
