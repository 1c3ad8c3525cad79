//! Small dense linear-algebra helpers shared by the solver.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Full symmetric eigendecomposition with eigenvalues in ascending order and
/// matching eigenvector columns.
pub fn symmetric_eigen_ascending(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000).ok_or_else(|| {
        let max_abs = m.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        Error::Eigendecomposition(format!("no convergence for {n}x{n} matrix, max |entry| = {max_abs:.3e}"))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Moore-Penrose pseudo-inverse together with the 2-norm condition number
/// (largest over smallest singular value; infinite when rank-deficient).
pub fn pinv_with_condition(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let tol = f64::EPSILON * m.nrows().max(m.ncols()) as f64 * smax.max(1.0);
    let pinv = svd
        .pseudo_inverse(tol)
        .expect("svd computed with u and v_t");
    (pinv, cond)
}
