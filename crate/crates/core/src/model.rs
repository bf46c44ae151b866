//! Reductive models `g = h ⊕ m` with an invariant inner product on `m`.
//!
//! The metric lives on `m`-coordinates, i.e. coefficients with respect to the
//! spanning rows of the complement. It is never extended to the whole algebra.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{check_len, AlgVector, AlgebraError, Check, StructureTensor, Subspace, ValidationVerdict};
use crate::linalg;
use crate::tolerance::Tolerances;

/// Coordinates with respect to the spanning rows of the complement `m`.
pub type MVector = DVector<f64>;

/// Named invariants checked by [`build_model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    StructureAxioms,
    IsotropySubalgebra,
    Reductive,
    MetricSymmetric,
    MetricPositiveDefinite,
    MetricInvariant,
}

impl Invariant {
    /// Violations of these cannot be downgraded to warnings.
    fn is_hard(self) -> bool {
        matches!(self, Invariant::MetricSymmetric | Invariant::MetricPositiveDefinite)
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::StructureAxioms => "Lie algebra axioms (antisymmetry/Jacobi)",
            Invariant::IsotropySubalgebra => "isotropy is a subalgebra ([h,h] ⊂ h)",
            Invariant::Reductive => "reductivity ([h,m] ⊂ m)",
            Invariant::MetricSymmetric => "metric symmetric",
            Invariant::MetricPositiveDefinite => "metric positive definite (minimum eigenvalue)",
            Invariant::MetricInvariant => "metric ad(h)-skew (gA + A^T g = 0)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub invariant: Invariant,
    /// For positive definiteness this is the minimum eigenvalue.
    pub residual: f64,
    pub tolerance: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.invariant {
            Invariant::MetricPositiveDefinite => write!(
                f,
                "{} violated: minimum eigenvalue {} <= {:e}",
                self.invariant, self.residual, self.tolerance
            ),
            _ => write!(f, "{} violated: residual {} > {:e}", self.invariant, self.residual, self.tolerance),
        }
    }
}

fn list(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("metric must be {expected}×{expected}, got {rows}×{cols}")]
    MetricShape { expected: usize, rows: usize, cols: usize },
    #[error("isotropy and complement do not form a direct sum of the algebra: stacked rank {rank}, algebra dimension {dim}")]
    NotComplementary { rank: usize, dim: usize },
    #[error("complement required: the Killing form is degenerate, so no canonical complement exists")]
    ComplementRequired,
    #[error("invalid model: {}", list(.0))]
    Invalid(Vec<Violation>),
    #[error("subspace '{label}' is not contained in m (residual {residual})")]
    NotInComplement { label: String, residual: f64 },
    #[error("subspace '{label}' is not ad(h)-invariant (residual {residual})")]
    NotIsotropyInvariant { label: String, residual: f64 },
}

/// How the complement `m` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplementSource {
    User,
    KillingOrthogonal,
    WholeAlgebra,
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub tol: Tolerances,
    /// Reject invalid input (`true`) or keep it with warnings (`false`).
    pub strict: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), strict: true }
    }
}

/// Residuals recorded while building a model.
#[derive(Debug, Clone, Serialize)]
pub struct ModelValidation {
    pub structure: ValidationVerdict,
    pub isotropy_subalgebra: Check,
    pub reductive: Check,
    pub metric_symmetry_residual: f64,
    pub metric_min_eigenvalue: f64,
    pub metric_invariance: Check,
    pub complement_source: ComplementSource,
    /// Dimension of the largest ideal of the algebra inside `h`.
    pub ineffective_kernel_dim: usize,
    pub warnings: Vec<String>,
}

/// `(g, h, m, g)` with everything needed to project and measure.
#[derive(Debug, Clone)]
pub struct HomogeneousModel {
    name: String,
    algebra: StructureTensor,
    isotropy: Subspace,
    complement: Subspace,
    metric: DMatrix<f64>,
    tol: Tolerances,
    /// Maps algebra coordinates to stacked `[h; m]` span coordinates.
    split_inverse: DMatrix<f64>,
    /// Columns are `m`-coordinates of a g-orthonormal basis of `m`.
    onb: DMatrix<f64>,
    onb_alg: Vec<AlgVector>,
    validation: ModelValidation,
}

/// Assembles and validates a reductive model.
///
/// Without a complement, `m` is the Killing-orthogonal complement of `h`
/// (requires a nondegenerate Killing form) or the whole algebra when `h = 0`.
pub fn build_model(
    name: impl Into<String>,
    algebra: StructureTensor,
    isotropy: Subspace,
    metric: DMatrix<f64>,
    complement: Option<Subspace>,
    opts: &BuildOptions,
) -> Result<HomogeneousModel, ModelError> {
    let tol = opts.tol;
    let n = algebra.dim();
    for s in std::iter::once(&isotropy).chain(complement.as_ref()) {
        if s.ambient_dim() != n {
            return Err(AlgebraError::DimensionMismatch { expected: n, found: s.ambient_dim() }.into());
        }
    }
    let structure = algebra.validate_structure(tol.eps_struct);

    let (complement, complement_source) = match complement {
        Some(c) => (c.with_label("m"), ComplementSource::User),
        None if isotropy.dim() == 0 => (Subspace::full(n).with_label("m"), ComplementSource::WholeAlgebra),
        None => {
            let killing = algebra.killing_matrix();
            if linalg::numerical_rank(&killing, tol.eps_rank) < n {
                return Err(ModelError::ComplementRequired);
            }
            let constraints = isotropy.span() * &killing;
            let rows = linalg::null_space(&constraints, tol.eps_rank);
            (Subspace::new("m", rows, tol.eps_rank)?, ComplementSource::KillingOrthogonal)
        }
    };

    let (p, r) = (isotropy.dim(), complement.dim());
    if metric.nrows() != r || metric.ncols() != r {
        return Err(ModelError::MetricShape { expected: r, rows: metric.nrows(), cols: metric.ncols() });
    }
    // Columns: h basis then m basis.
    let mut stacked = DMatrix::zeros(n, p + r);
    stacked.view_mut((0, 0), (n, p)).copy_from(&isotropy.span().transpose());
    stacked.view_mut((0, p), (n, r)).copy_from(&complement.span().transpose());
    let rank = linalg::numerical_rank(&stacked, tol.eps_rank);
    if p + r != n || rank != n {
        return Err(ModelError::NotComplementary { rank, dim: n });
    }
    let split_inverse = stacked.try_inverse().ok_or(ModelError::NotComplementary { rank, dim: n })?;

    let isotropy_subalgebra = algebra.is_subalgebra(&isotropy, tol.eps_rank);
    let mut reductive_res: f64 = 0.0;
    for h in isotropy.spanning_vectors() {
        for m in complement.spanning_vectors() {
            reductive_res = reductive_res.max(complement.distance(&algebra.br(&h, &m)));
        }
    }
    let reductive = Check::within(reductive_res, tol.eps_rank);

    let metric_symmetry_residual = linalg::max_abs(&(&metric - metric.transpose()));
    let metric_min_eigenvalue = if r == 0 {
        f64::INFINITY
    } else {
        let sym = (&metric + metric.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    };

    let mut invariance: f64 = 0.0;
    for h in isotropy.spanning_vectors() {
        let a = m_block(&algebra, &split_inverse, p, r, &complement, &h);
        invariance = invariance.max(linalg::max_abs(&(&metric * &a + a.transpose() * &metric)));
    }
    let metric_invariance = Check::within(invariance, tol.eps_struct);

    let mut violations = Vec::new();
    let mut flag = |ok: bool, invariant, residual, tolerance| {
        if !ok {
            violations.push(Violation { invariant, residual, tolerance });
        }
    };
    flag(structure.passed, Invariant::StructureAxioms, structure.antisymmetry_residual.max(structure.jacobi_residual), tol.eps_struct);
    flag(isotropy_subalgebra.holds, Invariant::IsotropySubalgebra, isotropy_subalgebra.residual, tol.eps_rank);
    flag(reductive.holds, Invariant::Reductive, reductive.residual, tol.eps_rank);
    flag(metric_symmetry_residual <= tol.eps_struct, Invariant::MetricSymmetric, metric_symmetry_residual, tol.eps_struct);
    flag(metric_min_eigenvalue > tol.eps_rank, Invariant::MetricPositiveDefinite, metric_min_eigenvalue, tol.eps_rank);
    flag(metric_invariance.holds, Invariant::MetricInvariant, metric_invariance.residual, tol.eps_struct);

    if !violations.is_empty() && (opts.strict || violations.iter().any(|v| v.invariant.is_hard())) {
        return Err(ModelError::Invalid(violations));
    }
    let mut warnings: Vec<String> = violations.iter().map(|v| v.to_string()).collect();

    let ineffective_kernel_dim = largest_ideal_in(&algebra, &isotropy, tol.eps_rank);
    if ineffective_kernel_dim > 0 {
        warnings.push(format!(
            "action is not effective: h contains a nonzero ideal of the algebra (dimension {ineffective_kernel_dim})"
        ));
    }

    let chol = Cholesky::new(metric.clone()).ok_or_else(|| {
        ModelError::Invalid(vec![Violation {
            invariant: Invariant::MetricPositiveDefinite,
            residual: metric_min_eigenvalue,
            tolerance: tol.eps_rank,
        }])
    })?;
    // g = L L^T, so the columns of L^{-T} are g-orthonormal.
    let l_inv = chol.l().try_inverse().expect("Cholesky factor is invertible");
    let onb = l_inv.transpose();
    let onb_alg = (0..r).map(|i| complement.span().transpose() * onb.column(i)).collect();

    Ok(HomogeneousModel {
        name: name.into(),
        algebra,
        isotropy: isotropy.with_label("h"),
        complement,
        metric,
        tol,
        split_inverse,
        onb,
        onb_alg,
        validation: ModelValidation {
            structure,
            isotropy_subalgebra,
            reductive,
            metric_symmetry_residual,
            metric_min_eigenvalue,
            metric_invariance,
            complement_source,
            ineffective_kernel_dim,
            warnings,
        },
    })
}

/// `m`-block of `ad_h` in `m` span coordinates: column `b` is `[h, m_b]_m`.
fn m_block(
    algebra: &StructureTensor,
    split_inverse: &DMatrix<f64>,
    p: usize,
    r: usize,
    complement: &Subspace,
    h: &AlgVector,
) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(r, r);
    for (b, m) in complement.spanning_vectors().iter().enumerate() {
        let coords = split_inverse * algebra.br(h, m);
        a.column_mut(b).copy_from(&coords.rows(p, r));
    }
    a
}

/// Dimension of the largest ideal of the algebra contained in `h`.
fn largest_ideal_in(algebra: &StructureTensor, h: &Subspace, eps_rank: f64) -> usize {
    let n = algebra.dim();
    let mut q = h.orthonormal().clone();
    loop {
        let d = q.nrows();
        if d == 0 {
            return 0;
        }
        // X = Q^T c stays in the current space under every ad_{e_i}.
        let leak = DMatrix::<f64>::identity(n, n) - q.transpose() * &q;
        let mut constraints = DMatrix::zeros(n * n, d);
        for i in 0..n {
            let ad = algebra.ad(&algebra.basis_vector(i));
            constraints.view_mut((i * n, 0), (n, d)).copy_from(&(&leak * ad * q.transpose()));
        }
        let kernel = linalg::null_space(&constraints, eps_rank);
        if kernel.nrows() == d {
            return d;
        }
        let next = kernel * &q;
        q = linalg::orthonormal_rows(&next, eps_rank);
    }
}

/// Target space for [`HomogeneousModel::restricted_ad`]'s projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TargetKind {
    /// Inside `m`: project along `h`, then g-orthogonally.
    InComplement,
    /// Elsewhere: Euclidean-orthogonal projection in algebra coordinates.
    Ambient,
}

/// `m = m1 ⊕ m2` with `m1 ⊥_g m2`, both `ad(h)`-invariant.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub m1: Subspace,
    pub m2: Subspace,
    /// `m`-coordinates of the spanning rows of `m1` / `m2` (one row each).
    pub m1_coords: DMatrix<f64>,
    pub m2_coords: DMatrix<f64>,
    pub orthogonality_residual: f64,
    pub m2_invariance_residual: f64,
}

impl HomogeneousModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn algebra(&self) -> &StructureTensor {
        &self.algebra
    }

    pub fn isotropy(&self) -> &Subspace {
        &self.isotropy
    }

    pub fn complement(&self) -> &Subspace {
        &self.complement
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn validation(&self) -> &ModelValidation {
        &self.validation
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn isotropy_dim(&self) -> usize {
        self.isotropy.dim()
    }

    pub fn complement_dim(&self) -> usize {
        self.complement.dim()
    }

    /// `m`-coordinates of a g-orthonormal basis (as columns).
    pub fn orthonormal_basis(&self) -> &DMatrix<f64> {
        &self.onb
    }

    /// The g-orthonormal basis of `m` as algebra vectors.
    pub fn orthonormal_basis_alg(&self) -> &[AlgVector] {
        &self.onb_alg
    }

    /// Same model with a different (g-orthonormal) basis cached.
    ///
    /// The columns of `rotation` are taken in the current orthonormal basis;
    /// it must be orthogonal.
    pub fn with_rotated_basis(&self, rotation: &DMatrix<f64>) -> HomogeneousModel {
        let mut out = self.clone();
        out.onb = &self.onb * rotation;
        out.onb_alg = (0..self.complement_dim())
            .map(|i| self.complement.span().transpose() * out.onb.column(i))
            .collect();
        out
    }

    pub fn g(&self, u: &MVector, v: &MVector) -> f64 {
        linalg::inner(u, &self.metric, v)
    }

    pub fn g_norm(&self, u: &MVector) -> f64 {
        self.g(u, u).max(0.0).sqrt()
    }

    pub(crate) fn split_coords(&self, x: &AlgVector) -> DVector<f64> {
        &self.split_inverse * x
    }

    pub(crate) fn pm(&self, x: &AlgVector) -> MVector {
        let p = self.isotropy_dim();
        self.split_coords(x).rows(p, self.complement_dim()).into_owned()
    }

    pub(crate) fn ph(&self, x: &AlgVector) -> DVector<f64> {
        self.split_coords(x).rows(0, self.isotropy_dim()).into_owned()
    }

    /// `m`-component of `x` in the direct sum `h ⊕ m`, in `m`-coordinates.
    pub fn project_m(&self, x: &AlgVector) -> Result<MVector, ModelError> {
        check_len(x, self.dim())?;
        Ok(self.pm(x))
    }

    /// `h`-component of `x`, in coordinates of the isotropy spanning rows.
    pub fn project_h(&self, x: &AlgVector) -> Result<DVector<f64>, ModelError> {
        check_len(x, self.dim())?;
        Ok(self.ph(x))
    }

    /// Algebra vector with the given `m`-coordinates.
    pub fn m_to_alg(&self, c: &MVector) -> AlgVector {
        self.complement.span().transpose() * c
    }

    /// Algebra vector with the given `h`-coordinates.
    pub fn h_to_alg(&self, c: &DVector<f64>) -> AlgVector {
        self.isotropy.span().transpose() * c
    }

    /// `[x, y]_m` in `m`-coordinates.
    pub(crate) fn bracket_m(&self, x: &AlgVector, y: &AlgVector) -> MVector {
        self.pm(&self.algebra.br(x, y))
    }

    /// `m`-coordinates of the spanning rows of a subspace of `m`, after
    /// checking containment.
    pub fn coords_in_m(&self, s: &Subspace) -> Result<DMatrix<f64>, ModelError> {
        let inside = self.complement.contains_subspace(s, self.tol.eps_rank);
        if !inside.holds {
            return Err(ModelError::NotInComplement { label: s.label().to_string(), residual: inside.residual });
        }
        let r = self.complement_dim();
        let mut out = DMatrix::zeros(s.dim(), r);
        for (i, v) in s.spanning_vectors().iter().enumerate() {
            out.row_mut(i).copy_from(&self.pm(v).transpose());
        }
        Ok(out)
    }

    /// g-orthonormal basis (in `m`-coordinates) of a subspace of `m`.
    pub(crate) fn g_orthonormal_in(&self, coords: &DMatrix<f64>) -> Vec<MVector> {
        let vs: Vec<MVector> = coords.row_iter().map(|r| r.transpose()).collect();
        linalg::gram_orthonormal_columns(&vs, &self.metric, self.tol.eps_rank)
    }

    /// Matrix of `X -> [u, X]_s` in an orthonormal basis of `s`.
    ///
    /// For `s ⊂ m` the basis is g-orthonormal and the projection is along `h`
    /// followed by the g-orthogonal projection inside `m`. Any other `s` uses
    /// its Euclidean-orthonormal rows and Euclidean projection, so `s = g` with
    /// the standard basis returns `ad_u`.
    pub fn restricted_ad(&self, u: &AlgVector, s: &Subspace) -> Result<DMatrix<f64>, ModelError> {
        check_len(u, self.dim())?;
        if s.ambient_dim() != self.dim() {
            return Err(AlgebraError::DimensionMismatch { expected: self.dim(), found: s.ambient_dim() }.into());
        }
        let kind = if self.complement.contains_subspace(s, self.tol.eps_rank).holds {
            TargetKind::InComplement
        } else {
            TargetKind::Ambient
        };
        Ok(match kind {
            TargetKind::InComplement => {
                let basis = self.g_orthonormal_in(&self.coords_in_m(s)?);
                self.restricted_ad_in_m(u, &basis)
            }
            TargetKind::Ambient => {
                let q = s.orthonormal();
                let d = q.nrows();
                let ad = self.algebra.ad(u);
                let mut out = DMatrix::zeros(d, d);
                for j in 0..d {
                    let img = &ad * q.row(j).transpose();
                    for i in 0..d {
                        out[(i, j)] = q.row(i).transpose().dot(&img);
                    }
                }
                out
            }
        })
    }

    /// `restricted_ad` for a g-orthonormal basis of a subspace of `m`.
    pub(crate) fn restricted_ad_in_m(&self, u: &AlgVector, basis: &[MVector]) -> DMatrix<f64> {
        let d = basis.len();
        let mut out = DMatrix::zeros(d, d);
        for j in 0..d {
            let w = self.bracket_m(u, &self.m_to_alg(&basis[j]));
            for i in 0..d {
                out[(i, j)] = self.g(&basis[i], &w);
            }
        }
        out
    }

    /// Splits `m` into `m1` and its g-orthogonal complement `m2`.
    pub fn make_split(&self, m1: &Subspace) -> Result<SplitPair, ModelError> {
        let tol = self.tol;
        let m1_coords = self.coords_in_m(m1)?;
        let inv1 = self.isotropy_invariance(m1);
        if inv1 > tol.eps_rank {
            return Err(ModelError::NotIsotropyInvariant { label: m1.label().to_string(), residual: inv1 });
        }
        let r = self.complement_dim();
        let m2_coords = if m1.dim() == 0 {
            DMatrix::identity(r, r)
        } else {
            linalg::null_space(&(&m1_coords * &self.metric), tol.eps_rank)
        };
        let m2_span = m2_coords.clone() * self.complement.span();
        let m2 = Subspace::new(format!("{}^perp", m1.label()), m2_span, tol.eps_rank)?;
        let mut orth: f64 = 0.0;
        for a in m1_coords.row_iter() {
            for b in m2_coords.row_iter() {
                orth = orth.max(self.g(&a.transpose(), &b.transpose()).abs());
            }
        }
        let m2_invariance_residual = self.isotropy_invariance(&m2);
        Ok(SplitPair {
            m1: m1.clone(),
            m2,
            m1_coords,
            m2_coords,
            orthogonality_residual: orth,
            m2_invariance_residual,
        })
    }

    /// Largest distance of `[H, v]` to `s` over spanning vectors.
    pub fn isotropy_invariance(&self, s: &Subspace) -> f64 {
        let mut worst: f64 = 0.0;
        for h in self.isotropy.spanning_vectors() {
            for v in s.spanning_vectors() {
                worst = worst.max(s.distance(&self.algebra.br(&h, &v)));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn so3() -> StructureTensor {
        StructureTensor::from_brackets(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)]).unwrap()
    }

    fn e(n: usize, i: usize) -> AlgVector {
        let mut v = AlgVector::zeros(n);
        v[i] = 1.0;
        v
    }

    fn sphere() -> HomogeneousModel {
        let h = Subspace::from_rows("h", 3, &[vec![1.0, 0.0, 0.0]], 1e-9).unwrap();
        build_model("sphere", so3(), h, DMatrix::identity(2, 2), None, &BuildOptions::default()).unwrap()
    }

    #[test]
    fn sphere_complement_is_killing_orthogonal() {
        let m = sphere();
        assert_eq!(m.validation().complement_source, ComplementSource::KillingOrthogonal);
        let expected = DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((m.complement().span() - expected).abs().max() < 1e-14);
        assert!(m.validation().warnings.is_empty());
    }

    #[test]
    fn group_model_is_valid() {
        let m = build_model("g", so3(), Subspace::zero(3), DMatrix::from_diagonal_element(3, 3, 2.0), None, &BuildOptions::default()).unwrap();
        assert_eq!(m.validation().complement_source, ComplementSource::WholeAlgebra);
        assert_eq!(m.complement_dim(), 3);
    }

    #[test]
    fn non_invariant_metric_rejected_with_residual() {
        let h = Subspace::from_rows("h", 3, &[vec![1.0, 0.0, 0.0]], 1e-9).unwrap();
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let err = build_model("bad", so3(), h.clone(), g.clone(), None, &BuildOptions::default()).unwrap_err();
        match err {
            ModelError::Invalid(vs) => {
                assert_eq!(vs.len(), 1);
                assert_eq!(vs[0].invariant, Invariant::MetricInvariant);
                assert!((vs[0].residual - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        let lenient = BuildOptions { strict: false, ..Default::default() };
        let m = build_model("bad", so3(), h, g, None, &lenient).unwrap();
        assert_eq!(m.validation().warnings.len(), 1);
    }

    #[test]
    fn negative_metric_is_hard_error() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 1.0]));
        let lenient = BuildOptions { strict: false, ..Default::default() };
        let err = build_model("neg", so3(), Subspace::zero(3), g, None, &lenient).unwrap_err();
        let ModelError::Invalid(vs) = err else { panic!() };
        assert_eq!(vs[0].invariant, Invariant::MetricPositiveDefinite);
        assert!((vs[0].residual + 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_subalgebra_isotropy_rejected() {
        let h = Subspace::from_rows("h", 3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 1e-9).unwrap();
        let m = Subspace::from_rows("m", 3, &[vec![0.0, 0.0, 1.0]], 1e-9).unwrap();
        let err = build_model("x", so3(), h, DMatrix::identity(1, 1), Some(m), &BuildOptions::default()).unwrap_err();
        let ModelError::Invalid(vs) = err else { panic!() };
        assert!(vs.iter().any(|v| v.invariant == Invariant::IsotropySubalgebra));
        assert!(vs.iter().any(|v| v.invariant == Invariant::Reductive));
    }

    #[test]
    fn degenerate_killing_form_needs_complement() {
        let e2 = StructureTensor::from_brackets(3, &[(0, 1, 2, 1.0), (0, 2, 1, -1.0)]).unwrap();
        let h = Subspace::from_rows("h", 3, &[vec![1.0, 0.0, 0.0]], 1e-9).unwrap();
        let err = build_model("e2", e2, h, DMatrix::identity(2, 2), None, &BuildOptions::default()).unwrap_err();
        assert_eq!(err, ModelError::ComplementRequired);
    }

    #[test]
    fn overlapping_complement_rejected() {
        let h = Subspace::from_rows("h", 3, &[vec![1.0, 0.0, 0.0]], 1e-9).unwrap();
        let m = Subspace::from_rows("m", 3, &[vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]], 1e-9).unwrap();
        let err = build_model("x", so3(), h, DMatrix::identity(2, 2), Some(m), &BuildOptions::default()).unwrap_err();
        assert!(matches!(err, ModelError::NotComplementary { rank: 2, dim: 3 }));
    }

    #[test]
    fn non_effective_presentation_warns() {
        let t = StructureTensor::abelian(2).unwrap();
        let h = Subspace::from_rows("h", 2, &[vec![1.0, 0.0]], 1e-9).unwrap();
        let m = Subspace::from_rows("m", 2, &[vec![0.0, 1.0]], 1e-9).unwrap();
        let model = build_model("ne", t, h, DMatrix::identity(1, 1), Some(m), &BuildOptions::default()).unwrap();
        assert_eq!(model.validation().ineffective_kernel_dim, 1);
        assert_eq!(model.validation().warnings.len(), 1);
        assert_eq!(sphere().validation().ineffective_kernel_dim, 0);
    }

    #[test]
    fn projections() {
        let m = sphere();
        assert_eq!(m.project_m(&e(3, 0)).unwrap(), MVector::zeros(2));
        assert_eq!(m.project_m(&e(3, 1)).unwrap(), MVector::from_vec(vec![1.0, 0.0]));
        let x = e(3, 0) + e(3, 1);
        assert_eq!(m.project_m(&x).unwrap(), MVector::from_vec(vec![1.0, 0.0]));
        let back = m.m_to_alg(&m.project_m(&x).unwrap()) + m.h_to_alg(&m.project_h(&x).unwrap());
        assert!((back - x).norm() < 1e-12);
        assert!(m.project_m(&e(2, 0)).is_err());
    }

    #[test]
    fn restricted_ad_cases() {
        let m = sphere();
        let a = m.restricted_ad(&e(3, 1), m.complement()).unwrap();
        assert_eq!(a, DMatrix::zeros(2, 2));
        assert_eq!(m.restricted_ad(&AlgVector::zeros(3), m.complement()).unwrap(), DMatrix::zeros(2, 2));
        let g = build_model("g", so3(), Subspace::zero(3), DMatrix::identity(3, 3), None, &BuildOptions::default()).unwrap();
        let full = g.restricted_ad(&e(3, 0), &Subspace::full(3)).unwrap();
        assert_eq!(full, so3().ad_matrix(&e(3, 0)).unwrap());
    }

    #[test]
    fn splits() {
        let s = sphere();
        let p = s.make_split(s.complement()).unwrap();
        assert_eq!(p.m2.dim(), 0);

        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 2.0]));
        let sq = build_model("sq", so3(), Subspace::zero(3), g, None, &BuildOptions::default()).unwrap();
        let m1 = Subspace::from_rows("m1", 3, &[vec![0.0, 0.0, 1.0]], 1e-9).unwrap();
        let p = sq.make_split(&m1).unwrap();
        let expected = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!((p.m2.span() - expected).abs().max() < 1e-14);
        assert!(p.orthogonality_residual <= 1e-10);

        // span{e2} is not ad(e1)-invariant on the sphere
        let bad = Subspace::from_rows("x", 3, &[vec![0.0, 1.0, 0.0]], 1e-9).unwrap();
        assert!(matches!(s.make_split(&bad), Err(ModelError::NotIsotropyInvariant { .. })));
        let outside = Subspace::from_rows("y", 3, &[vec![1.0, 0.0, 0.0]], 1e-9).unwrap();
        assert!(matches!(s.make_split(&outside), Err(ModelError::NotInComplement { .. })));
    }
}
