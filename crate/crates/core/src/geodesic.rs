//! Geodesic-orbit tests.
//!
//! A direction `X ∈ m` is a geodesic vector when some `H ∈ h` satisfies
//! `([H + X, Y]_m, X) = 0` for every `Y ∈ m`. This is a linear system in `H`;
//! it is solved by minimum-norm least squares and classified by its residual.
//! A model passes the survey when every probe direction is geodesic.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{check_len, Check};
use crate::linalg;
use crate::model::{HomogeneousModel, MVector, ModelError, SplitPair};

/// `Y` attaining the largest residual of the geodesic equations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// `m`-coordinates of the g-orthonormal basis vector `Y`.
    pub y: Vec<f64>,
    /// `([H_X + X, Y]_m, X)` with the least-squares `H_X`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoCertificate {
    /// `m`-coordinates of `X`.
    pub direction: Vec<f64>,
    /// `h`-coordinates of `H_X` when feasible.
    pub h_solution: Option<Vec<f64>>,
    /// Largest equation residual of the least-squares solution.
    pub residual: f64,
    /// The same quantity recomputed by substituting `H_X + X` into the brackets.
    pub substitution_residual: f64,
    /// `eps_rank · (1 + |X|^2)`.
    pub threshold: f64,
    pub feasible: bool,
    pub witness: Option<Witness>,
}

/// Solves the geodesic-vector equations for `x` (in `m`-coordinates).
pub fn go_certificate(model: &HomogeneousModel, x: &MVector) -> Result<GoCertificate, ModelError> {
    check_len(x, model.complement_dim())?;
    let eps = model.tolerances().eps_rank;
    let norm2 = model.g(x, x);
    let threshold = eps * (1.0 + norm2);
    if x.iter().all(|c| *c == 0.0) {
        return Ok(GoCertificate {
            direction: x.iter().copied().collect(),
            h_solution: Some(vec![0.0; model.isotropy_dim()]),
            residual: 0.0,
            substitution_residual: 0.0,
            threshold,
            feasible: true,
            witness: None,
        });
    }
    let xa = model.m_to_alg(x);
    let ys = model.orthonormal_basis_alg();
    let hs = model.isotropy().spanning_vectors();
    let (r, p) = (ys.len(), hs.len());

    let mut a = DMatrix::zeros(r, p);
    let mut b = DVector::zeros(r);
    for (j, y) in ys.iter().enumerate() {
        for (k, h) in hs.iter().enumerate() {
            a[(j, k)] = model.g(&model.bracket_m(h, y), x);
        }
        b[j] = -model.g(&model.bracket_m(&xa, y), x);
    }
    let ls = linalg::min_norm_lstsq(&a, &b, eps);
    let residual = linalg::max_abs_vec(&ls.residual);

    let hx = model.h_to_alg(&ls.solution);
    let shifted = &hx + &xa;
    let values: Vec<f64> = ys.iter().map(|y| model.g(&model.bracket_m(&shifted, y), x)).collect();
    let substitution_residual = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    let feasible = residual <= threshold;
    let witness = if feasible {
        None
    } else {
        let (j, value) = values
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (j, v)| if v.abs() > best.1.abs() { (j, *v) } else { best });
        Some(Witness { y: model.orthonormal_basis().column(j).iter().copied().collect(), value })
    };
    Ok(GoCertificate {
        direction: x.iter().copied().collect(),
        h_solution: feasible.then(|| ls.solution.iter().copied().collect()),
        residual,
        substitution_residual,
        threshold,
        feasible,
        witness,
    })
}

/// Probe battery for [`go_survey`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbePlan {
    pub random_count: usize,
    pub seed: u64,
}

impl Default for ProbePlan {
    fn default() -> Self {
        Self { random_count: 200, seed: 42 }
    }
}

impl ProbePlan {
    pub fn describe(&self) -> String {
        format!(
            "m-basis vectors, pairwise sums and differences of m-basis vectors, {} g-unit random directions (ChaCha8, seed {})",
            self.random_count, self.seed
        )
    }

    /// Probe directions in plan order, with labels.
    pub fn probes(&self, model: &HomogeneousModel) -> Vec<(String, MVector)> {
        let r = model.complement_dim();
        let unit = |i: usize| {
            let mut v = MVector::zeros(r);
            v[i] = 1.0;
            v
        };
        let mut out = Vec::new();
        for i in 0..r {
            out.push((format!("m_{}", i + 1), unit(i)));
        }
        for i in 0..r {
            for j in i + 1..r {
                out.push((format!("m_{}+m_{}", i + 1, j + 1), unit(i) + unit(j)));
                out.push((format!("m_{}-m_{}", i + 1, j + 1), unit(i) - unit(j)));
            }
        }
        if r > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for k in 0..self.random_count {
                let z: DVector<f64> = DVector::from_fn(r, |_, _| StandardNormal.sample(&mut rng));
                let z: DVector<f64> = &z / z.norm().max(f64::MIN_POSITIVE);
                out.push((format!("random_{}", k + 1), model.orthonormal_basis() * z));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurveyVerdict {
    /// Every probe is a geodesic vector.
    Pass,
    /// Some probe is not; see the witness.
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledCertificate {
    pub probe: String,
    #[serde(flatten)]
    pub certificate: GoCertificate,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoSurvey {
    pub verdict: SurveyVerdict,
    pub probe_plan: ProbePlan,
    pub probe_plan_description: String,
    /// Index of the first infeasible certificate.
    pub witness_index: Option<usize>,
    pub certificates: Vec<LabeledCertificate>,
}

impl GoSurvey {
    pub fn passed(&self) -> bool {
        self.verdict == SurveyVerdict::Pass
    }

    pub fn witness(&self) -> Option<&LabeledCertificate> {
        self.witness_index.map(|i| &self.certificates[i])
    }
}

/// Runs [`go_certificate`] over the probe battery.
pub fn go_survey(model: &HomogeneousModel, plan: &ProbePlan) -> GoSurvey {
    let probes = plan.probes(model);
    let certificates: Vec<LabeledCertificate> = probes
        .into_par_iter()
        .map(|(probe, x)| LabeledCertificate {
            probe,
            certificate: go_certificate(model, &x).expect("probe length matches m"),
        })
        .collect();
    let witness_index = certificates.iter().position(|c| !c.certificate.feasible);
    GoSurvey {
        verdict: if witness_index.is_some() { SurveyVerdict::Fail } else { SurveyVerdict::Pass },
        probe_plan: *plan,
        probe_plan_description: plan.describe(),
        witness_index,
        certificates,
    }
}

/// `([X_i, X_j]_m, X_k) + ([X_i, X_k]_m, X_j) = 0` on all triples of
/// `m`-basis vectors.
pub fn naturally_reductive_check(model: &HomogeneousModel) -> Check {
    let basis = model.complement().spanning_vectors();
    let r = basis.len();
    let coords: Vec<MVector> = (0..r)
        .map(|i| {
            let mut v = MVector::zeros(r);
            v[i] = 1.0;
            v
        })
        .collect();
    // t[i][j] = [X_i, X_j]_m
    let t: Vec<Vec<MVector>> = basis.iter().map(|xi| basis.iter().map(|xj| model.bracket_m(xi, xj)).collect()).collect();
    let mut worst: f64 = 0.0;
    for ti in &t {
        for j in 0..r {
            for k in j..r {
                let s = model.g(&ti[j], &coords[k]) + model.g(&ti[k], &coords[j]);
                worst = worst.max(s.abs());
            }
        }
    }
    Check::within(worst, model.tolerances().eps_struct)
}

#[derive(Debug, Clone, Serialize)]
pub struct SkewEntry {
    /// `m`-coordinates of the g-orthonormal `U ∈ m1`.
    pub u: Vec<f64>,
    /// `|A + A^T|_max` for `A = ad_U` restricted to `m2`.
    pub m2_residual: f64,
    /// Same on all of `m`, only when `[h, m1] = 0`.
    pub m_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkewAudit {
    pub m1_label: String,
    pub m1_dim: usize,
    pub m2_dim: usize,
    /// Whether the GO survey passed, i.e. whether skewness is predicted.
    pub go_hypothesis: bool,
    pub h_m1_commute: Check,
    pub entries: Vec<SkewEntry>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub skew: bool,
    /// Hypothesis holds but skewness fails.
    pub contradiction: bool,
}

/// Skewness of `ad_U` restricted to `m2` for `U ∈ m1` (and on `m` when `h`
/// commutes with `m1`).
pub fn skew_symmetry_audit(model: &HomogeneousModel, split: &SplitPair, go_hypothesis: bool) -> SkewAudit {
    let tol = model.tolerances().eps_rank;
    let m1_basis = model.g_orthonormal_in(&split.m1_coords);
    let m2_basis = model.g_orthonormal_in(&split.m2_coords);
    let m_basis: Vec<MVector> = model.orthonormal_basis().column_iter().map(|c| c.into_owned()).collect();

    let mut commute: f64 = 0.0;
    for h in model.isotropy().spanning_vectors() {
        for u in split.m1.spanning_vectors() {
            commute = commute.max(model.algebra().br(&h, &u).norm());
        }
    }
    let h_m1_commute = Check::within(commute, tol);

    let skew_residual = |a: DMatrix<f64>| linalg::max_abs(&(&a + a.transpose()));
    let entries: Vec<SkewEntry> = m1_basis
        .iter()
        .map(|u| {
            let ua = model.m_to_alg(u);
            SkewEntry {
                u: u.iter().copied().collect(),
                m2_residual: skew_residual(model.restricted_ad_in_m(&ua, &m2_basis)),
                m_residual: h_m1_commute.holds.then(|| skew_residual(model.restricted_ad_in_m(&ua, &m_basis))),
            }
        })
        .collect();
    let max_residual = entries
        .iter()
        .map(|e| e.m2_residual.max(e.m_residual.unwrap_or(0.0)))
        .fold(0.0, f64::max);
    let skew = max_residual <= tol;
    SkewAudit {
        m1_label: split.m1.label().to_string(),
        m1_dim: split.m1.dim(),
        m2_dim: split.m2.dim(),
        go_hypothesis,
        h_m1_commute,
        entries,
        max_residual,
        tolerance: tol,
        skew,
        contradiction: go_hypothesis && !skew,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnimodularityAudit {
    /// `max_i |trace(ad_{e_i})|`
    pub defect: f64,
    pub traces: Vec<f64>,
    pub kernel_dim: usize,
    pub kernel_is_ideal: Check,
    pub unimodular: bool,
    pub go_passed: Option<bool>,
    /// GO verdict passed but the algebra is not unimodular.
    pub contradiction: bool,
}

pub fn unimodularity_audit(model: &HomogeneousModel, go_passed: Option<bool>) -> UnimodularityAudit {
    let tol = model.tolerances();
    let kernel = model.algebra().unimodular_kernel(tol.eps_struct, tol.eps_rank);
    let defect = kernel.traces.iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
    let unimodular = defect <= tol.eps_rank;
    UnimodularityAudit {
        defect,
        traces: kernel.traces.clone(),
        kernel_dim: kernel.subspace.dim(),
        kernel_is_ideal: kernel.ideal,
        unimodular,
        go_passed,
        contradiction: go_passed == Some(true) && !unimodular,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{StructureTensor, Subspace};
    use crate::model::{build_model, BuildOptions};

    fn so3() -> StructureTensor {
        StructureTensor::from_brackets(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)]).unwrap()
    }

    fn group(t: StructureTensor, diag: &[f64]) -> HomogeneousModel {
        let n = t.dim();
        let g = DMatrix::from_diagonal(&DVector::from_vec(diag.to_vec()));
        build_model("g", t, Subspace::zero(n), g, None, &BuildOptions::default()).unwrap()
    }

    fn sphere() -> HomogeneousModel {
        let h = Subspace::from_rows("h", 3, &[vec![1.0, 0.0, 0.0]], 1e-9).unwrap();
        build_model("s", so3(), h, DMatrix::identity(2, 2), None, &BuildOptions::default()).unwrap()
    }

    fn v(xs: &[f64]) -> MVector {
        MVector::from_vec(xs.to_vec())
    }

    #[test]
    fn sphere_direction_is_geodesic() {
        let c = go_certificate(&sphere(), &v(&[1.0, 0.0])).unwrap();
        assert!(c.feasible);
        assert_eq!(c.residual, 0.0);
        assert_eq!(c.h_solution, Some(vec![0.0]));
    }

    #[test]
    fn squashed_witness() {
        let m = group(so3(), &[1.0, 1.0, 2.0]);
        let c = go_certificate(&m, &v(&[1.0, 0.0, 1.0])).unwrap();
        assert!(!c.feasible);
        let w = c.witness.unwrap();
        assert_eq!(w.y, vec![0.0, 1.0, 0.0]);
        assert!((w.value - 1.0).abs() < 1e-12);
        assert!(c.h_solution.is_none());
    }

    #[test]
    fn zero_direction_trivially_feasible() {
        let c = go_certificate(&sphere(), &v(&[0.0, 0.0])).unwrap();
        assert!(c.feasible);
        assert_eq!(c.h_solution, Some(vec![0.0]));
    }

    #[test]
    fn survey_verdicts() {
        let plan = ProbePlan { random_count: 20, seed: 42 };
        assert!(go_survey(&sphere(), &plan).passed());
        let bi = go_survey(&group(so3(), &[1.0, 1.0, 1.0]), &plan);
        assert!(bi.passed());
        assert!(bi.certificates.iter().all(|c| c.certificate.h_solution.as_deref() == Some(&[][..])));
        let sq = go_survey(&group(so3(), &[1.0, 1.0, 2.0]), &plan);
        assert_eq!(sq.verdict, SurveyVerdict::Fail);
        assert_eq!(sq.witness().unwrap().certificate.direction, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn natural_reductivity() {
        assert!(naturally_reductive_check(&group(so3(), &[1.0, 1.0, 1.0])).holds);
        let c = naturally_reductive_check(&group(so3(), &[1.0, 1.0, 2.0]));
        assert!(!c.holds);
        assert!((c.residual - 1.0).abs() < 1e-12);
        assert!(naturally_reductive_check(&group(StructureTensor::abelian(2).unwrap(), &[1.0, 1.0])).holds);
    }

    #[test]
    fn skew_audit_on_circle_split() {
        let m = group(so3(), &[1.0, 1.0, 1.0]);
        let m1 = Subspace::from_rows("m1", 3, &[vec![0.0, 0.0, 1.0]], 1e-9).unwrap();
        let split = m.make_split(&m1).unwrap();
        let a = skew_symmetry_audit(&m, &split, true);
        assert!(a.skew && !a.contradiction);
        assert_eq!(a.entries.len(), 1);
        assert!(a.entries[0].m_residual.is_some());

        let s = sphere();
        let split = s.make_split(s.complement()).unwrap();
        let a = skew_symmetry_audit(&s, &split, true);
        assert_eq!(a.m2_dim, 0);
        assert!(a.skew);
    }

    #[test]
    fn unimodularity() {
        let aff = group(StructureTensor::from_brackets(2, &[(0, 1, 1, 1.0)]).unwrap(), &[1.0, 1.0]);
        let survey = go_survey(&aff, &ProbePlan { random_count: 5, seed: 1 });
        assert!(!survey.passed());
        assert_eq!(survey.witness().unwrap().probe, "m_2");
        let a = unimodularity_audit(&aff, Some(survey.passed()));
        assert!((a.defect - 1.0).abs() < 1e-12);
        assert_eq!(a.kernel_dim, 1);
        assert!(!a.contradiction);
        assert_eq!(unimodularity_audit(&sphere(), Some(true)).defect, 0.0);
    }
}
