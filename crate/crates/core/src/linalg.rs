//! Small dense linear-algebra helpers shared by the analysis modules.
//!
//! Everything here works on `nalgebra` dynamic matrices. Subspaces are
//! represented by matrices whose *rows* span them.

use nalgebra::{DMatrix, DVector};

/// Singular values of `a`, sorted descending. Empty matrices yield an empty list.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Number of singular values strictly above `tol`.
pub fn numerical_rank(a: &DMatrix<f64>, tol: f64) -> usize {
    singular_values(a).into_iter().filter(|s| *s > tol).count()
}

/// Modified Gram-Schmidt (two passes) on the rows of `span`.
///
/// Rows that collapse below `tol` after orthogonalization are dropped, so the
/// result has `rank` rows. Sign and order of the input rows are preserved,
/// which keeps the identity span mapped to the identity.
pub fn orthonormal_rows(span: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = span.ncols();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(span.nrows());
    for row in span.row_iter() {
        let mut v: DVector<f64> = row.transpose();
        let norm0 = v.norm();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm > tol && norm > 1e-12 * norm0 {
            out.push(v / norm);
        }
    }
    rows_to_matrix(&out, n)
}

/// Same as [`orthonormal_rows`] but orthonormal with respect to the inner
/// product `u^T gram v`.
pub fn gram_orthonormal_columns(vectors: &[DVector<f64>], gram: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v0 in vectors {
        let mut v = v0.clone();
        for _ in 0..2 {
            for q in &out {
                let c = inner(q, gram, &v);
                v.axpy(-c, q, 1.0);
            }
        }
        let norm = inner(&v, gram, &v).max(0.0).sqrt();
        if norm > tol {
            out.push(v / norm);
        }
    }
    out
}

/// `u^T gram v`.
pub fn inner(u: &DVector<f64>, gram: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    u.dot(&(gram * v))
}

/// Stacks vectors as rows of an `len × n` matrix.
pub fn rows_to_matrix(rows: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j])
}

/// Canonical row basis of the null space `{x : a x = 0}`.
///
/// The null space is found from the SVD (singular values `<= tol` count as
/// zero) and then brought into reduced row echelon form, so the returned basis
/// only depends on the subspace itself.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad to at least n rows so the thin SVD exposes the full right basis.
    let rows = a.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let kernel: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    rref(&rows_to_matrix(&kernel, n), 1e-12)
}

/// Reduced row echelon form with partial pivoting; zero rows are removed.
pub fn rref(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut lead = 0;
    for c in 0..cols {
        if lead == rows {
            break;
        }
        let (piv, best) = (lead..rows)
            .map(|r| (r, a[(r, c)].abs()))
            .fold((lead, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            for r in lead..rows {
                a[(r, c)] = 0.0;
            }
            continue;
        }
        a.swap_rows(piv, lead);
        let p = a[(lead, c)];
        for j in 0..cols {
            a[(lead, j)] /= p;
        }
        for r in 0..rows {
            if r != lead {
                let f = a[(r, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        a[(r, j)] -= f * a[(lead, j)];
                    }
                }
            }
        }
        lead += 1;
    }
    let mut out = a.rows(0, lead).into_owned();
    out.iter_mut().for_each(|x| {
        if x.abs() <= tol {
            *x = 0.0;
        }
    });
    out
}

/// Result of a minimum-norm least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: DVector<f64>,
    /// `a x - b`.
    pub residual: DVector<f64>,
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `a x = b`.
///
/// Singular values at or below `rel_tol * sigma_max` are treated as zero.
pub fn min_norm_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> LeastSquares {
    let cols = a.ncols();
    if cols == 0 || a.nrows() == 0 {
        return LeastSquares {
            solution: DVector::zeros(cols),
            residual: -b.clone(),
            rank: 0,
        };
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cut = rel_tol * smax;
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut x = DVector::zeros(cols);
    let mut rank = 0;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > cut && *s > 0.0 {
            rank += 1;
            let coef = u.column(i).dot(b) / s;
            x.axpy(coef, &v_t.row(i).transpose(), 1.0);
        }
    }
    let residual = a * &x - b;
    LeastSquares { solution: x, residual, rank }
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Largest absolute entry of a vector.
pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Degree of the Taylor polynomial used by [`expm`].
pub const EXPM_DEGREE: usize = 16;

/// Scaled matrices are brought below this norm before the series is applied.
const EXPM_SCALED_NORM: f64 = 0.5;

/// Matrix exponential by scaling and squaring with a fixed-degree Taylor
/// series.
///
/// The matrix is scaled by `2^-s` until its 1-norm is at most 0.5, the degree-16
/// series is evaluated by Horner's rule and the result is squared `s` times.
/// The truncation bound for the scaled series is below 1e-19.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    let norm = a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm > EXPM_SCALED_NORM {
        squarings = (norm / EXPM_SCALED_NORM).log2().ceil() as u32;
    }
    let scaled = a / 2f64.powi(squarings as i32);
    let id = DMatrix::<f64>::identity(n, n);
    let mut acc = id.clone();
    for k in (1..=EXPM_DEGREE).rev() {
        acc = &id + (&scaled * acc) / k as f64;
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

/// Upper bound on the Taylor tail `sum_{k > m} x^k / k!` for `0 <= x < m + 2`.
pub fn taylor_tail_bound(x: f64, m: usize) -> f64 {
    let mut term = 1.0;
    for k in 1..=m + 1 {
        term *= x / k as f64;
    }
    term / (1.0 - x / (m as f64 + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_is_canonical() {
        let a = DMatrix::from_row_slice(1, 3, &[-2.0, 0.0, 0.0]);
        let ns = null_space(&a, 1e-9);
        assert_eq!(ns.nrows(), 2);
        assert!((ns - DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0])).abs().max() < 1e-14);
    }

    #[test]
    fn null_space_of_empty_constraints_is_everything() {
        let a = DMatrix::<f64>::zeros(0, 2);
        assert_eq!(null_space(&a, 1e-9), DMatrix::identity(2, 2));
    }

    #[test]
    fn lstsq_picks_minimum_norm() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0]);
        let ls = min_norm_lstsq(&a, &b, 1e-9);
        assert!((ls.solution - DVector::from_vec(vec![1.0, 1.0])).norm() < 1e-12);
        assert_eq!(ls.rank, 1);
    }

    #[test]
    fn lstsq_without_unknowns_reports_rhs() {
        let a = DMatrix::<f64>::zeros(2, 0);
        let b = DVector::from_vec(vec![1.0, -3.0]);
        let ls = min_norm_lstsq(&a, &b, 1e-9);
        assert_eq!(ls.solution.len(), 0);
        assert_eq!(max_abs_vec(&ls.residual), 3.0);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 1.234;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&a);
        let expected = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert!((e - expected).abs().max() < 1e-13);
    }

    #[test]
    fn expm_of_nilpotent_is_polynomial() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 3.0, 1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
        let expected = DMatrix::<f64>::identity(3, 3) + &a + &a * &a / 2.0;
        assert!((expm(&a) - expected).abs().max() < 1e-12);
    }

    #[test]
    fn tail_bound_is_tiny_after_scaling() {
        assert!(taylor_tail_bound(EXPM_SCALED_NORM, EXPM_DEGREE) < 1e-13);
    }

    #[test]
    fn gram_schmidt_keeps_identity() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(orthonormal_rows(&id, 1e-9), id);
    }
}
