//! Ricci curvature of a reductive homogeneous model and the comparison with
//! the compact quotient `K/H` built on a subalgebra `k ⊃ h`.
//!
//! For `X ∈ m` and a g-orthonormal basis `(X_i)` of `m`:
//!
//! ```text
//! Ric(X,X) = -1/2 B(X,X) - 1/2 Σ_i |[X,X_i]_m|^2
//!            + 1/4 Σ_{i,j} ([X_i,X_j]_m, X)^2 - ([Z,X]_m, X)
//! ```
//!
//! where `B` is the Killing form of the whole algebra and `Z ∈ m` is dual to
//! `X -> trace(ad_X)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{check_len, AlgVector, StructureTensor, Subspace};
use crate::model::{build_model, BuildOptions, HomogeneousModel, MVector, ModelError};

/// Ricci curvature along one direction, split into its four summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RicciResult {
    pub value: f64,
    /// `-1/2 B(X,X)`
    pub killing_term: f64,
    /// `-1/2 Σ |[X,X_i]_m|^2`
    pub bracket_term: f64,
    /// `1/4 Σ ([X_i,X_j]_m, X)^2`
    pub double_sum_term: f64,
    /// `-([Z,X]_m, X)`
    pub z_term: f64,
}

impl RicciResult {
    pub fn terms_sum(&self) -> f64 {
        self.killing_term + self.bracket_term + self.double_sum_term + self.z_term
    }
}

/// The vector `Z ∈ m` (in `m`-coordinates) with `g(Z, X) = trace(ad_X)` for `X ∈ m`.
pub fn z_vector(model: &HomogeneousModel) -> MVector {
    let traces = model.algebra().trace_functional();
    let onb = model.orthonormal_basis();
    let mut z = MVector::zeros(model.complement_dim());
    for (i, x) in model.orthonormal_basis_alg().iter().enumerate() {
        let t: f64 = traces.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        z.axpy(t, &onb.column(i).into_owned(), 1.0);
    }
    z
}

/// `Ric(X, X)` for `X` in `m`-coordinates.
pub fn ricci(model: &HomogeneousModel, x: &MVector) -> Result<RicciResult, ModelError> {
    check_len(x, model.complement_dim())?;
    let algebra = model.algebra();
    let xa = model.m_to_alg(x);
    let basis = model.orthonormal_basis_alg();

    let killing_term = -0.5 * xa.dot(&(algebra.killing_matrix() * &xa));

    let bracket_term = -0.5
        * basis
            .iter()
            .map(|xi| {
                let w = model.bracket_m(&xa, xi);
                model.g(&w, &w)
            })
            .sum::<f64>();

    let mut double = 0.0;
    for xi in basis {
        for xj in basis {
            let c = model.g(&model.bracket_m(xi, xj), x);
            double += c * c;
        }
    }
    let double_sum_term = 0.25 * double;

    let z = model.m_to_alg(&z_vector(model));
    let z_term = -model.g(&model.bracket_m(&z, &xa), x);

    Ok(RicciResult {
        value: killing_term + bracket_term + double_sum_term + z_term,
        killing_term,
        bracket_term,
        double_sum_term,
        z_term,
    })
}

/// Symmetric matrix `R` on `m`-coordinates with `x^T R x = Ric(x, x)`,
/// obtained by polarization.
pub fn ricci_matrix(model: &HomogeneousModel) -> DMatrix<f64> {
    let r = model.complement_dim();
    let unit = |i: usize| {
        let mut v = MVector::zeros(r);
        v[i] = 1.0;
        v
    };
    let ric = |v: &MVector| ricci(model, v).expect("length matches").value;
    let mut out = DMatrix::zeros(r, r);
    for a in 0..r {
        out[(a, a)] = ric(&unit(a));
        for b in a + 1..r {
            let (u, v) = (unit(a), unit(b));
            let val = 0.25 * (ric(&(&u + &v)) - ric(&(&u - &v)));
            out[(a, b)] = val;
            out[(b, a)] = val;
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("k is not a subalgebra (residual {0})")]
    NotSubalgebra(f64),
    #[error("k does not contain h (residual {0})")]
    MissingIsotropy(f64),
    #[error("k is not h ⊕ (k ∩ m): dim k = {k}, dim h = {h}, dim (k ∩ m) = {m1}")]
    NotAdapted { k: usize, h: usize, m1: usize },
    #[error("direction is not in m1 = k ∩ m (distance {0})")]
    NotInM1(f64),
}

/// Both sides of the comparison between `Ric*` on `K/H` and `Ric` on `G/H`.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub k_label: String,
    pub m1_dim: usize,
    pub m2_dim: usize,
    /// `Ric*(X,X)` from the auxiliary model `(k, h, m1)`.
    pub left: f64,
    pub left_terms: RicciResult,
    /// `Ric(X,X) - 1/2 Σ_{i<j} ([Y_i,Y_j]_{m1}, X)^2`.
    pub right: f64,
    pub ricci: f64,
    pub correction: f64,
    pub difference: f64,
}

/// Data shared by every evaluation of the identity for a fixed `k`.
#[derive(Debug, Clone)]
pub struct CompactQuotient {
    pub k_label: String,
    /// `m1 = k ∩ m`
    pub m1: Subspace,
    /// g-orthonormal bases (in `m`-coordinates) of `m1` and `m2 = m1^⊥`.
    pub m1_basis: Vec<MVector>,
    pub m2_basis: Vec<MVector>,
    /// `(k, h, m1)` with the restricted metric.
    pub auxiliary: HomogeneousModel,
    /// Columns: `h` basis then `m1` basis, as algebra vectors.
    k_basis: DMatrix<f64>,
    k_basis_pinv: DMatrix<f64>,
}

impl CompactQuotient {
    pub fn new(model: &HomogeneousModel, k: &Subspace) -> Result<Self, CurvatureError> {
        let tol = *model.tolerances();
        let algebra = model.algebra();
        let sub = algebra.is_subalgebra(k, tol.eps_rank);
        if !sub.holds {
            return Err(CurvatureError::NotSubalgebra(sub.residual));
        }
        let contains = k.contains_subspace(model.isotropy(), tol.eps_rank);
        if !contains.holds {
            return Err(CurvatureError::MissingIsotropy(contains.residual));
        }
        // k ∩ m: m-coordinates c with (I - Q^T Q) M^T c = 0
        let n = model.dim();
        let q = k.orthonormal();
        let leak = DMatrix::<f64>::identity(n, n) - q.transpose() * q;
        let m_span_t = model.complement().span().transpose();
        let m1_coords = crate::linalg::null_space(&(leak * &m_span_t), tol.eps_rank);
        let (p, r1) = (model.isotropy_dim(), m1_coords.nrows());
        if p + r1 != k.dim() {
            return Err(CurvatureError::NotAdapted { k: k.dim(), h: p, m1: r1 });
        }
        let m1 = Subspace::new("m1", &m1_coords * model.complement().span(), tol.eps_rank).map_err(ModelError::from)?;
        let split = model.make_split(&m1)?;
        let m1_basis = model.g_orthonormal_in(&split.m1_coords);
        let m2_basis = model.g_orthonormal_in(&split.m2_coords);

        let d = p + r1;
        let mut k_basis = DMatrix::zeros(n, d);
        k_basis.view_mut((0, 0), (n, p)).copy_from(&model.isotropy().span().transpose());
        k_basis.view_mut((0, p), (n, r1)).copy_from(&m1.span().transpose());
        let k_basis_pinv = (k_basis.transpose() * &k_basis)
            .try_inverse()
            .expect("independent k basis")
            * k_basis.transpose();

        // Brackets of k basis vectors, re-expressed in the k basis.
        let mut dense = vec![0.0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let b = algebra.br(&k_basis.column(i).into_owned(), &k_basis.column(j).into_owned());
                let c = &k_basis_pinv * b;
                for l in 0..d {
                    dense[(i * d + j) * d + l] = c[l];
                }
            }
        }
        let induced = StructureTensor::from_dense(d, dense).map_err(ModelError::from)?;
        let unit = |i: usize| {
            let mut v = vec![0.0; d];
            v[i] = 1.0;
            v
        };
        let h_rows: Vec<Vec<f64>> = (0..p).map(unit).collect();
        let m_rows: Vec<Vec<f64>> = (p..d).map(unit).collect();
        let iso = Subspace::from_rows("h", d, &h_rows, tol.eps_rank).map_err(ModelError::from)?;
        let comp = Subspace::from_rows("m1", d, &m_rows, tol.eps_rank).map_err(ModelError::from)?;
        let metric = &split.m1_coords * model.metric() * split.m1_coords.transpose();
        let auxiliary = build_model(
            format!("{}/{}", k.label(), model.name()),
            induced,
            iso,
            metric,
            Some(comp),
            &BuildOptions { tol, strict: true },
        )?;
        Ok(Self {
            k_label: k.label().to_string(),
            m1,
            m1_basis,
            m2_basis,
            auxiliary,
            k_basis,
            k_basis_pinv,
        })
    }

    /// Evaluates both sides at an algebra vector `x ∈ m1`.
    pub fn evaluate(&self, model: &HomogeneousModel, x: &AlgVector) -> Result<IdentityReport, CurvatureError> {
        check_len(x, model.dim()).map_err(ModelError::from)?;
        let dist = self.m1.distance(x);
        if dist > model.tolerances().eps_rank * (1.0 + x.norm()) {
            return Err(CurvatureError::NotInM1(dist));
        }
        let p = model.isotropy_dim();
        let coords: DVector<f64> = &self.k_basis_pinv * x;
        debug_assert!((&self.k_basis * &coords - x).norm() <= 1e-8 * (1.0 + x.norm()));
        let aux_x = coords.rows(p, self.m1.dim()).into_owned();
        let left_terms = ricci(&self.auxiliary, &aux_x)?;

        let xm = model.pm(x);
        let ric = ricci(model, &xm)?.value;
        let mut correction = 0.0;
        for (i, yi) in self.m2_basis.iter().enumerate() {
            for yj in &self.m2_basis[i + 1..] {
                let w = model.bracket_m(&model.m_to_alg(yi), &model.m_to_alg(yj));
                let w1 = self
                    .m1_basis
                    .iter()
                    .fold(MVector::zeros(model.complement_dim()), |acc, b| acc + b * model.g(b, &w));
                let c = model.g(&w1, &xm);
                correction += c * c;
            }
        }
        correction *= 0.5;
        let right = ric - correction;
        Ok(IdentityReport {
            k_label: self.k_label.clone(),
            m1_dim: self.m1.dim(),
            m2_dim: self.m2_basis.len(),
            left: left_terms.value,
            left_terms,
            right,
            ricci: ric,
            correction,
            difference: (left_terms.value - right).abs(),
        })
    }
}

/// One-shot form of [`CompactQuotient::new`] followed by `evaluate`.
pub fn ric_star_identity(model: &HomogeneousModel, k: &Subspace, x: &AlgVector) -> Result<IdentityReport, CurvatureError> {
    CompactQuotient::new(model, k)?.evaluate(model, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::StructureTensor;

    fn so3() -> StructureTensor {
        StructureTensor::from_brackets(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)]).unwrap()
    }

    fn group(t: StructureTensor, g: DMatrix<f64>) -> HomogeneousModel {
        let n = t.dim();
        build_model("g", t, Subspace::zero(n), g, None, &BuildOptions::default()).unwrap()
    }

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_vec(xs.to_vec())
    }

    #[test]
    fn bi_invariant_so3_terms() {
        let m = group(so3(), DMatrix::identity(3, 3));
        let r = ricci(&m, &v(&[1.0, 0.0, 0.0])).unwrap();
        assert!((r.killing_term - 1.0).abs() < 1e-14);
        assert!((r.bracket_term + 1.0).abs() < 1e-14);
        assert!((r.double_sum_term - 0.5).abs() < 1e-14);
        assert_eq!(r.z_term, 0.0);
        assert!((r.value - 0.5).abs() < 1e-14);
        assert!((r.value - r.terms_sum()).abs() < 1e-12);
    }

    #[test]
    fn sphere_terms() {
        let h = Subspace::from_rows("h", 3, &[vec![1.0, 0.0, 0.0]], 1e-9).unwrap();
        let m = build_model("s", so3(), h, DMatrix::identity(2, 2), None, &BuildOptions::default()).unwrap();
        let r = ricci(&m, &v(&[1.0, 0.0])).unwrap();
        assert!((r.killing_term - 1.0).abs() < 1e-14);
        assert_eq!((r.bracket_term, r.double_sum_term, r.z_term), (0.0, 0.0, 0.0));
        assert!((ricci_matrix(&m) - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn z_vector_of_affine_line() {
        let t = StructureTensor::from_brackets(2, &[(0, 1, 1, 1.0)]).unwrap();
        let m = group(t, DMatrix::identity(2, 2));
        assert!((z_vector(&m) - v(&[1.0, 0.0])).norm() < 1e-14);
        // hyperbolic plane of curvature -1
        assert!((ricci_matrix(&m) + DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn abelian_is_flat() {
        let m = group(StructureTensor::abelian(3).unwrap(), DMatrix::identity(3, 3));
        assert_eq!(ricci_matrix(&m), DMatrix::zeros(3, 3));
        assert_eq!(z_vector(&m), MVector::zeros(3));
    }

    #[test]
    fn wrong_length_direction_rejected() {
        let m = group(so3(), DMatrix::identity(3, 3));
        assert!(ricci(&m, &v(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn identity_for_circle_in_so3() {
        let m = group(so3(), DMatrix::identity(3, 3));
        let k = Subspace::from_rows("k", 3, &[vec![0.0, 0.0, 1.0]], 1e-9).unwrap();
        let rep = ric_star_identity(&m, &k, &v(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(rep.left, 0.0);
        assert!((rep.ricci - 0.5).abs() < 1e-14);
        assert!((rep.correction - 0.5).abs() < 1e-14);
        assert!(rep.difference < 1e-14);
        assert_eq!((rep.m1_dim, rep.m2_dim), (1, 2));
    }

    #[test]
    fn identity_errors() {
        let m = group(so3(), DMatrix::identity(3, 3));
        let k = Subspace::from_rows("k", 3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 1e-9).unwrap();
        assert!(matches!(ric_star_identity(&m, &k, &v(&[1.0, 0.0, 0.0])), Err(CurvatureError::NotSubalgebra(_))));
        let k = Subspace::from_rows("k", 3, &[vec![0.0, 0.0, 1.0]], 1e-9).unwrap();
        assert!(matches!(ric_star_identity(&m, &k, &v(&[1.0, 0.0, 0.0])), Err(CurvatureError::NotInM1(_))));

        let h = Subspace::from_rows("h", 3, &[vec![1.0, 0.0, 0.0]], 1e-9).unwrap();
        let s = build_model("s", so3(), h, DMatrix::identity(2, 2), None, &BuildOptions::default()).unwrap();
        assert!(matches!(ric_star_identity(&s, &k, &v(&[0.0, 0.0, 1.0])), Err(CurvatureError::MissingIsotropy(_))));
    }
}
