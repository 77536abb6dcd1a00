//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

/// Symmetric eigendecomposition, eigenvalues ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let se = sym.symmetric_eigen();
    // nalgebra does not order eigenvalues; sort ascending for stable output.
    let n = se.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals = DVector::from_iterator(n, idx.iter().map(|&i| se.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Symmetric square root of a symmetric positive-definite matrix.
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen(m);
    let d = DMatrix::from_diagonal(&vals.map(|v| v.max(0.0).sqrt()));
    &vecs * d * vecs.transpose()
}

/// Symmetric inverse square root of a symmetric positive-definite matrix.
pub fn sym_inv_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen(m);
    let d = DMatrix::from_diagonal(&vals.map(|v| 1.0 / v.max(f64::MIN_POSITIVE).sqrt()));
    &vecs * d * vecs.transpose()
}

/// Inverse of a symmetric positive-definite matrix via eigendecomposition,
/// together with its condition number.
pub fn sym_inv_with_cond(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64)> {
    let (vals, vecs) = sym_eigen(m);
    let max = vals.max();
    let min = vals.min();
    if !(min > 0.0) {
        return None;
    }
    let d = DMatrix::from_diagonal(&vals.map(|v| 1.0 / v));
    Some((&vecs * d * vecs.transpose(), max / min))
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky_lower(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    nalgebra::Cholesky::new(sym).map(|c| c.l())
}

/// Quadratic form `x^T M x`.
pub fn quad_form(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    (m * x).dot(x)
}

/// Basis of the space of symmetric n×n matrices: first the n diagonal units
/// `e_i e_i^T`, then the off-diagonal units `e_i e_j^T + e_j e_i^T` (i > j).
pub fn sym_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        let mut e = DMatrix::zeros(n, n);
        e[(i, i)] = 1.0;
        basis.push(e);
    }
    for i in 0..n {
        for j in 0..i {
            let mut e = DMatrix::zeros(n, n);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            basis.push(e);
        }
    }
    basis
}

/// Row-major nested vectors from a matrix (JSON-facing).
pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Matrix from row-major nested vectors; `None` when rows are ragged or empty.
pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let nr = rows.len();
    if nr == 0 {
        return None;
    }
    let nc = rows[0].len();
    if nc == 0 || rows.iter().any(|r| r.len() != nc) {
        return None;
    }
    Some(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sym_sqrt_squares_back() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let s = sym_sqrt(&m);
        assert_relative_eq!(&s * &s, m, epsilon = 1e-12);
    }

    #[test]
    fn inv_sqrt_matches_inverse() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let is = sym_inv_sqrt(&m);
        let inv = (&is) * (&is);
        assert_relative_eq!(&inv * m, DMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn sym_basis_spans_expected_count() {
        assert_eq!(sym_basis(3).len(), 6);
        assert_eq!(sym_basis(8).len(), 36);
    }

    #[test]
    fn cond_number_of_identity_is_one() {
        let (inv, cond) = sym_inv_with_cond(&DMatrix::identity(4, 4)).unwrap();
        assert_relative_eq!(inv, DMatrix::identity(4, 4), epsilon = 1e-14);
        assert_relative_eq!(cond, 1.0, epsilon = 1e-14);
    }
}
