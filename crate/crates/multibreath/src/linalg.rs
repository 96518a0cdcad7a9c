//! Thin bridge between `ndarray` containers and `nalgebra` factorizations.
//!
//! All SVD/eigenvalue work in the crate funnels through here so that
//! tolerance conventions stay in one place.

use nalgebra::{Complex, DMatrix};
use ndarray::Array2;

pub(crate) fn to_na(m: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_row_iterator(m.nrows(), m.ncols(), m.iter().copied())
}

pub(crate) fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Singular values in descending order.
pub(crate) fn singular_values(m: &Array2<f64>) -> Vec<f64> {
    to_na(m).singular_values().iter().copied().collect()
}

/// Moore-Penrose pseudoinverse with singular values below
/// `rel_cutoff * sigma_max` treated as zero.
pub(crate) fn pseudo_inverse(m: &Array2<f64>, rel_cutoff: f64) -> Array2<f64> {
    let na = to_na(m);
    let svd = nalgebra::SVD::new(na, true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = if sigma_max > 0.0 {
        rel_cutoff * sigma_max
    } else {
        rel_cutoff
    };
    let pinv = svd
        .pseudo_inverse(eps)
        .expect("pseudo_inverse: eps must be non-negative");
    from_na(&pinv)
}

/// Least-squares solve `argmin_x |A x - b|` via SVD.
pub(crate) fn lstsq(a: &Array2<f64>, b: &Array2<f64>, rel_cutoff: f64) -> Array2<f64> {
    let svd = nalgebra::SVD::new(to_na(a), true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = if sigma_max > 0.0 {
        rel_cutoff * sigma_max
    } else {
        rel_cutoff
    };
    let sol = svd
        .solve(&to_na(b), eps)
        .expect("lstsq: eps must be non-negative");
    from_na(&sol)
}

/// Numerical rank with tolerance `rel_cutoff * sigma_max`.
pub(crate) fn numerical_rank(m: &Array2<f64>, rel_cutoff: f64) -> usize {
    let sv = singular_values(m);
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_cutoff * sigma_max).count()
}

/// Complex eigenvalues of a square real matrix (via Schur decomposition).
pub(crate) fn complex_eigenvalues(m: &Array2<f64>) -> Vec<Complex<f64>> {
    to_na(m).complex_eigenvalues().iter().copied().collect()
}

/// Orthonormal basis for the column space of `m` (thin QR).
pub(crate) fn orthonormalize(m: &Array2<f64>) -> Array2<f64> {
    let qr = to_na(m).qr();
    from_na(&qr.q())
}
