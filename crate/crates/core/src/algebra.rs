//! Finite-dimensional real Lie algebras given by structure constants.
//!
//! Basis indices are 0-based here; file formats shift them by one.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::linalg;

/// Coordinates of an algebra element in the fixed basis `e_0, ..., e_{n-1}`.
pub type AlgVector = DVector<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("bracket record [e{i}, e{i}] is identically zero and cannot be assigned")]
    DiagonalBracket { i: usize },
    #[error("structure tensor of dimension {dim} needs {expected} coefficients, got {found}")]
    BadTensorLength { dim: usize, expected: usize, found: usize },
    #[error("subspace '{label}' has rank {rank} but {rows} spanning rows (eps_rank {eps_rank:e})")]
    RankDeficient { label: String, rows: usize, rank: usize, eps_rank: f64 },
    #[error("dimension must be positive")]
    ZeroDimension,
}

pub(crate) fn check_len(v: &AlgVector, n: usize) -> Result<(), AlgebraError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(AlgebraError::DimensionMismatch { expected: n, found: v.len() })
    }
}

/// Bracket coefficients `[e_i, e_j] = sum_k c[i][j][k] e_k`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensor {
    dim: usize,
    coeffs: Vec<f64>,
}

/// A yes/no structural test together with the residual it was decided on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub holds: bool,
    pub residual: f64,
}

impl Check {
    pub fn within(residual: f64, tol: f64) -> Self {
        Self { holds: residual <= tol, residual }
    }
}

/// Residuals of the Lie-algebra axioms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationVerdict {
    pub antisymmetry_residual: f64,
    pub jacobi_residual: f64,
    pub eps_struct: f64,
    pub passed: bool,
}

/// Kernel of `X -> trace(ad_X)`.
#[derive(Debug, Clone)]
pub struct UnimodularKernel {
    pub subspace: Subspace,
    /// `trace(ad_{e_i})` for every basis vector.
    pub traces: Vec<f64>,
    pub ideal: Check,
}

impl StructureTensor {
    /// The abelian algebra of dimension `dim`.
    pub fn abelian(dim: usize) -> Result<Self, AlgebraError> {
        if dim == 0 {
            return Err(AlgebraError::ZeroDimension);
        }
        Ok(Self { dim, coeffs: vec![0.0; dim * dim * dim] })
    }

    /// Builds a tensor from sparse records `(i, j, k, c)` meaning
    /// `[e_i, e_j] += c e_k`; the antisymmetric partner is filled in.
    pub fn from_brackets(dim: usize, records: &[(usize, usize, usize, f64)]) -> Result<Self, AlgebraError> {
        let mut t = Self::abelian(dim)?;
        for &(i, j, k, c) in records {
            for index in [i, j, k] {
                if index >= dim {
                    return Err(AlgebraError::IndexOutOfRange { index, dim });
                }
            }
            if i == j {
                return Err(AlgebraError::DiagonalBracket { i });
            }
            let a = t.idx(i, j, k);
            let b = t.idx(j, i, k);
            t.coeffs[a] += c;
            t.coeffs[b] -= c;
        }
        Ok(t)
    }

    /// Builds a tensor from a dense row-major `c[i][j][k]` array without
    /// enforcing antisymmetry (use [`StructureTensor::validate_structure`]).
    pub fn from_dense(dim: usize, coeffs: Vec<f64>) -> Result<Self, AlgebraError> {
        if dim == 0 {
            return Err(AlgebraError::ZeroDimension);
        }
        let expected = dim * dim * dim;
        if coeffs.len() != expected {
            return Err(AlgebraError::BadTensorLength { dim, expected, found: coeffs.len() });
        }
        Ok(Self { dim, coeffs })
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        self.coeffs[self.idx(i, j, k)]
    }

    /// Nonzero records `(i, j, k, c)` with `i < j`.
    pub fn records(&self) -> Vec<(usize, usize, usize, f64)> {
        let n = self.dim;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let c = self.coeff(i, j, k);
                    if c != 0.0 {
                        out.push((i, j, k, c));
                    }
                }
            }
        }
        out
    }

    pub fn basis_vector(&self, i: usize) -> AlgVector {
        let mut v = AlgVector::zeros(self.dim);
        v[i] = 1.0;
        v
    }

    /// Direct sum `self ⊕ other`, with `other`'s basis appended after ours.
    pub fn direct_sum(&self, other: &StructureTensor) -> StructureTensor {
        let (n1, n2) = (self.dim, other.dim);
        let n = n1 + n2;
        let mut coeffs = vec![0.0; n * n * n];
        for i in 0..n1 {
            for j in 0..n1 {
                for k in 0..n1 {
                    coeffs[(i * n + j) * n + k] = self.coeff(i, j, k);
                }
            }
        }
        for i in 0..n2 {
            for j in 0..n2 {
                for k in 0..n2 {
                    coeffs[((i + n1) * n + j + n1) * n + k + n1] = other.coeff(i, j, k);
                }
            }
        }
        StructureTensor { dim: n, coeffs }
    }

    pub(crate) fn br(&self, x: &AlgVector, y: &AlgVector) -> AlgVector {
        let n = self.dim;
        let mut out = AlgVector::zeros(n);
        for i in 0..n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = xi * y[j];
                if w == 0.0 {
                    continue;
                }
                let base = self.idx(i, j, 0);
                for k in 0..n {
                    out[k] += w * self.coeffs[base + k];
                }
            }
        }
        out
    }

    /// `[x, y]`.
    pub fn bracket(&self, x: &AlgVector, y: &AlgVector) -> Result<AlgVector, AlgebraError> {
        check_len(x, self.dim)?;
        check_len(y, self.dim)?;
        Ok(self.br(x, y))
    }

    /// Antisymmetry and Jacobi residuals over all basis triples.
    pub fn validate_structure(&self, eps_struct: f64) -> ValidationVerdict {
        let n = self.dim;
        let mut anti: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    anti = anti.max((self.coeff(i, j, k) + self.coeff(j, i, k)).abs());
                }
            }
        }
        let basis: Vec<AlgVector> = (0..n).map(|i| self.basis_vector(i)).collect();
        let mut jacobi: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let (a, b, c) = (&basis[i], &basis[j], &basis[l]);
                    let s = self.br(a, &self.br(b, c)) + self.br(b, &self.br(c, a)) + self.br(c, &self.br(a, b));
                    jacobi = jacobi.max(s.norm());
                }
            }
        }
        ValidationVerdict {
            antisymmetry_residual: anti,
            jacobi_residual: jacobi,
            eps_struct,
            passed: anti <= eps_struct && jacobi <= eps_struct,
        }
    }

    pub(crate) fn ad(&self, u: &AlgVector) -> DMatrix<f64> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let ui = u[i];
            if ui == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    m[(k, j)] += ui * self.coeff(i, j, k);
                }
            }
        }
        m
    }

    /// Matrix of `X -> [u, X]`; column `j` holds `[u, e_j]`.
    pub fn ad_matrix(&self, u: &AlgVector) -> Result<DMatrix<f64>, AlgebraError> {
        check_len(u, self.dim)?;
        Ok(self.ad(u))
    }

    /// Gram matrix `B_ab = trace(ad_{e_a} ad_{e_b})` of the Killing form.
    pub fn killing_matrix(&self) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |a, b| {
            let mut s = 0.0;
            for k in 0..n {
                for l in 0..n {
                    s += self.coeff(a, k, l) * self.coeff(b, l, k);
                }
            }
            s
        })
    }

    /// `B(x, y) = trace(ad_x ∘ ad_y)`.
    pub fn killing_form(&self, x: &AlgVector, y: &AlgVector) -> Result<f64, AlgebraError> {
        check_len(x, self.dim)?;
        check_len(y, self.dim)?;
        Ok(x.dot(&(self.killing_matrix() * y)))
    }

    /// `trace(ad_{e_i})` for each basis vector.
    pub fn trace_functional(&self) -> Vec<f64> {
        let n = self.dim;
        (0..n).map(|i| (0..n).map(|k| self.coeff(i, k, k)).sum()).collect()
    }

    pub fn trace_ad(&self, x: &AlgVector) -> Result<f64, AlgebraError> {
        check_len(x, self.dim)?;
        Ok(self.trace_functional().iter().zip(x.iter()).map(|(t, v)| t * v).sum())
    }

    /// The ideal `{X : trace(ad_X) = 0}`, which is all of the algebra exactly
    /// when it is unimodular.
    pub fn unimodular_kernel(&self, eps_struct: f64, eps_rank: f64) -> UnimodularKernel {
        let n = self.dim;
        let traces = self.trace_functional();
        let subspace = if traces.iter().all(|t| t.abs() <= eps_struct) {
            Subspace::full(n)
        } else {
            let row = DMatrix::from_row_slice(1, n, &traces);
            Subspace::from_orthogonalized("u", linalg::null_space(&row, eps_rank), eps_rank)
        };
        let ideal = self.is_ideal(&subspace, eps_rank);
        UnimodularKernel { subspace: subspace.with_label("u"), traces, ideal }
    }

    /// `[g, s] ⊂ s`, with the residual the largest distance of `[e_i, v]` to `s`.
    pub fn is_ideal(&self, s: &Subspace, eps_rank: f64) -> Check {
        let mut worst: f64 = 0.0;
        for v in s.spanning_vectors() {
            let ad_v = self.ad(&v);
            for i in 0..self.dim {
                // [e_i, v] = -[v, e_i]
                let w: AlgVector = -ad_v.column(i).into_owned();
                worst = worst.max(s.distance(&w));
            }
        }
        Check::within(worst, eps_rank)
    }

    /// All brackets between spanning vectors of `s` vanish.
    pub fn is_abelian(&self, s: &Subspace, eps_struct: f64) -> Check {
        let vs = s.spanning_vectors();
        let mut worst: f64 = 0.0;
        for (a, u) in vs.iter().enumerate() {
            for v in &vs[a + 1..] {
                worst = worst.max(self.br(u, v).norm());
            }
        }
        Check::within(worst, eps_struct)
    }

    /// `[s, s] ⊂ s`.
    pub fn is_subalgebra(&self, s: &Subspace, eps_rank: f64) -> Check {
        let vs = s.spanning_vectors();
        let mut worst: f64 = 0.0;
        for (a, u) in vs.iter().enumerate() {
            for v in &vs[a + 1..] {
                worst = worst.max(s.distance(&self.br(u, v)));
            }
        }
        Check::within(worst, eps_rank)
    }

    /// `exp(s · ad_v)`, the matrix of `Ad_{exp(s v)}`.
    pub fn ad_exponential(&self, v: &AlgVector, s: f64) -> Result<DMatrix<f64>, AlgebraError> {
        check_len(v, self.dim)?;
        Ok(linalg::expm(&(self.ad(v) * s)))
    }
}

/// A linear subspace of the algebra given by linearly independent spanning rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    label: String,
    span: DMatrix<f64>,
    orthonormal: DMatrix<f64>,
}

impl Subspace {
    /// Validates that the rows of `span` are independent (singular values
    /// above `eps_rank`).
    pub fn new(label: impl Into<String>, span: DMatrix<f64>, eps_rank: f64) -> Result<Self, AlgebraError> {
        let label = label.into();
        let rank = linalg::numerical_rank(&span, eps_rank);
        if rank != span.nrows() {
            return Err(AlgebraError::RankDeficient { label, rows: span.nrows(), rank, eps_rank });
        }
        Ok(Self::from_orthogonalized(label, span, eps_rank))
    }

    /// Builds from rows; convenience for literals.
    pub fn from_rows(label: impl Into<String>, dim: usize, rows: &[Vec<f64>], eps_rank: f64) -> Result<Self, AlgebraError> {
        for r in rows {
            if r.len() != dim {
                return Err(AlgebraError::DimensionMismatch { expected: dim, found: r.len() });
            }
        }
        let span = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
        Self::new(label, span, eps_rank)
    }

    fn from_orthogonalized(label: impl Into<String>, span: DMatrix<f64>, eps_rank: f64) -> Self {
        let orthonormal = linalg::orthonormal_rows(&span, eps_rank);
        Self { label: label.into(), span, orthonormal }
    }

    pub fn zero(dim: usize) -> Self {
        Self { label: "0".into(), span: DMatrix::zeros(0, dim), orthonormal: DMatrix::zeros(0, dim) }
    }

    pub fn full(dim: usize) -> Self {
        let id = DMatrix::identity(dim, dim);
        Self { label: "g".into(), span: id.clone(), orthonormal: id }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.span.nrows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.span.ncols()
    }

    /// Spanning rows (`dim × ambient_dim`).
    pub fn span(&self) -> &DMatrix<f64> {
        &self.span
    }

    /// Euclidean-orthonormal rows spanning the same subspace.
    pub fn orthonormal(&self) -> &DMatrix<f64> {
        &self.orthonormal
    }

    pub fn spanning_vectors(&self) -> Vec<AlgVector> {
        self.span.row_iter().map(|r| r.transpose()).collect()
    }

    /// Euclidean orthogonal projection onto the subspace.
    pub fn project(&self, v: &AlgVector) -> AlgVector {
        let q = &self.orthonormal;
        q.transpose() * (q * v)
    }

    /// Euclidean distance from `v` to the subspace.
    pub fn distance(&self, v: &AlgVector) -> f64 {
        (v - self.project(v)).norm()
    }

    pub fn contains(&self, v: &AlgVector, eps_rank: f64) -> bool {
        self.distance(v) <= eps_rank
    }

    /// Every spanning row of `other` lies in `self`; residual is the worst distance.
    pub fn contains_subspace(&self, other: &Subspace, eps_rank: f64) -> Check {
        let worst = other.spanning_vectors().iter().map(|v| self.distance(v)).fold(0.0, f64::max);
        Check::within(worst, eps_rank)
    }

    /// Embeds into a larger ambient space at column offset `offset`.
    pub fn embed(&self, ambient: usize, offset: usize) -> Subspace {
        let mut span = DMatrix::zeros(self.dim(), ambient);
        span.view_mut((0, offset), (self.dim(), self.ambient_dim())).copy_from(&self.span);
        let mut orthonormal = DMatrix::zeros(self.dim(), ambient);
        orthonormal.view_mut((0, offset), (self.dim(), self.ambient_dim())).copy_from(&self.orthonormal);
        Subspace { label: self.label.clone(), span, orthonormal }
    }

    /// Direct sum of two subspaces of the same ambient space; the rows are stacked.
    pub fn sum(&self, other: &Subspace, eps_rank: f64) -> Result<Subspace, AlgebraError> {
        let rows = self.dim() + other.dim();
        let mut span = DMatrix::zeros(rows, self.ambient_dim());
        span.view_mut((0, 0), (self.dim(), self.ambient_dim())).copy_from(&self.span);
        span.view_mut((self.dim(), 0), (other.dim(), self.ambient_dim())).copy_from(&other.span);
        Subspace::new(format!("{}+{}", self.label, other.label), span, eps_rank)
    }
}
