//! Catalog expectations against the implementation, plus two Ricci oracles
//! that share no code with the library's curvature formula.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use metriclie::algebra::{StructureTensor, Subspace};
use metriclie::catalog::{self, catalog_entries, symmetric_pair_check};
use metriclie::curvature::ricci_matrix;
use metriclie::geodesic::{go_survey, naturally_reductive_check, unimodularity_audit, ProbePlan, SurveyVerdict};
use metriclie::killing::{length_profile, LengthVerdict, OrbitPlan};
use metriclie::model::{build_model, BuildOptions, HomogeneousModel};

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[test]
fn catalog_expectations_hold() {
    let plan = OrbitPlan { random_words: 30, ..OrbitPlan::default() };
    for e in catalog_entries() {
        let m = &e.model;
        let x = &e.expected;
        let survey = go_survey(m, &ProbePlan::default());
        assert_eq!(survey.verdict, x.go_verdict, "{}", e.name);
        if let Some(w) = &x.go_witness {
            assert_eq!(&survey.witness().unwrap().certificate.direction, w, "{}", e.name);
        }
        let defect = unimodularity_audit(m, None).defect;
        assert!((defect - x.unimodular_defect).abs() <= 1e-12, "{}: defect {defect}", e.name);
        assert!(max_abs(&(ricci_matrix(m) - &x.ricci_matrix)) <= 1e-9, "{}: {}", e.name, ricci_matrix(m));
        assert_eq!(naturally_reductive_check(m).holds, x.naturally_reductive, "{}", e.name);
        assert_eq!(symmetric_pair_check(m).holds, x.symmetric_pair, "{}", e.name);
        for ideal in &x.ideals {
            let all_constant = ideal
                .ideal
                .subspace
                .spanning_vectors()
                .iter()
                .all(|v| length_profile(m, v, &plan).unwrap().verdict == LengthVerdict::Constant);
            assert_eq!(all_constant, ideal.constant_length, "{} / {}", e.name, ideal.ideal.name);
        }
    }
}

#[test]
fn squashed_sphere_natural_reductivity_residual_is_one() {
    let c = naturally_reductive_check(&catalog::so3_squashed().model);
    assert!(!c.holds);
    assert!((c.residual - 1.0).abs() < 1e-12);
}

fn so3() -> StructureTensor {
    StructureTensor::from_brackets(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)]).unwrap()
}

fn left_invariant(t: StructureTensor, g: DMatrix<f64>) -> HomogeneousModel {
    let n = t.dim();
    build_model("oracle", t, Subspace::zero(n), g, None, &BuildOptions::default()).unwrap()
}

/// Three-dimensional unimodular algebra in an orthonormal frame with
/// `[f2,f3] = l1 f1`, `[f3,f1] = l2 f2`, `[f1,f2] = l3 f3`:
/// `Ric(f_i) = 2 mu_j mu_k` with `mu_i = (l1+l2+l3)/2 - l_i`.
fn milnor_ricci(l: [f64; 3]) -> [f64; 3] {
    let h = (l[0] + l[1] + l[2]) / 2.0;
    let mu = [h - l[0], h - l[1], h - l[2]];
    [2.0 * mu[1] * mu[2], 2.0 * mu[0] * mu[2], 2.0 * mu[0] * mu[1]]
}

/// Ricci form of a left-invariant metric from the Levi-Civita connection.
fn levi_civita_ricci(t: &StructureTensor, g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = t.dim();
    let g_inv = g.clone().try_inverse().unwrap();
    let e = |i: usize| t.basis_vector(i);
    let br = |x: &DVector<f64>, y: &DVector<f64>| t.bracket(x, y).unwrap();
    // ad_X^* with respect to g
    let ad_star = |x: &DVector<f64>| -> DMatrix<f64> { &g_inv * t.ad_matrix(x).unwrap().transpose() * g };
    let nabla = |x: &DVector<f64>, y: &DVector<f64>| -> DVector<f64> { (br(x, y) - ad_star(x) * y - ad_star(y) * x) * 0.5 };
    let curv = |x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>| -> DVector<f64> {
        nabla(x, &nabla(y, z)) - nabla(y, &nabla(x, z)) - nabla(&br(x, y), z)
    };
    // g-orthonormal frame
    let l = g.clone().cholesky().unwrap().l();
    let frame = l.try_inverse().unwrap().transpose();
    let mut ric = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                let ei = frame.column(i).into_owned();
                s += (g * curv(&ei, &e(a), &e(b))).dot(&ei);
            }
            ric[(a, b)] = s;
        }
    }
    (&ric + ric.transpose()) * 0.5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn so3_diagonal_metrics_match_milnor(a in 0.2f64..5.0, b in 0.2f64..5.0, c in 0.2f64..5.0) {
        let m = left_invariant(so3(), DMatrix::from_diagonal(&DVector::from_vec(vec![a, b, c])));
        let l = [(a / (b * c)).sqrt(), (b / (c * a)).sqrt(), (c / (a * b)).sqrt()];
        let r = milnor_ricci(l);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![a * r[0], b * r[1], c * r[2]]));
        prop_assert!(max_abs(&(ricci_matrix(&m) - expected)) <= 1e-9);
    }

    #[test]
    fn heisenberg_diagonal_metrics_match_milnor(a in 0.2f64..5.0, b in 0.2f64..5.0, c in 0.2f64..5.0) {
        let t = StructureTensor::from_brackets(3, &[(0, 1, 2, 1.0)]).unwrap();
        let m = left_invariant(t, DMatrix::from_diagonal(&DVector::from_vec(vec![a, b, c])));
        // [f1,f2] = sqrt(c/(ab)) f3
        let r = milnor_ricci([0.0, 0.0, (c / (a * b)).sqrt()]);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![a * r[0], b * r[1], c * r[2]]));
        prop_assert!(max_abs(&(ricci_matrix(&m) - expected)) <= 1e-9);
    }

    #[test]
    fn left_invariant_ricci_matches_levi_civita(
        which in 0usize..4,
        raw in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let t = match which {
            0 => so3(),
            1 => StructureTensor::from_brackets(3, &[(0, 1, 2, 1.0)]).unwrap(),
            2 => StructureTensor::from_brackets(2, &[(0, 1, 1, 1.0)]).unwrap(),
            // solvable, non-unimodular: [e1,e2] = e2, [e1,e3] = 2 e3
            _ => StructureTensor::from_brackets(3, &[(0, 1, 1, 1.0), (0, 2, 2, 2.0)]).unwrap(),
        };
        let n = t.dim();
        let a = DMatrix::from_fn(n, n, |i, j| raw[i * 4 + j]);
        let g = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
        let m = left_invariant(t.clone(), g.clone());
        let err = max_abs(&(ricci_matrix(&m) - levi_civita_ricci(&t, &g)));
        prop_assert!(err <= 1e-8, "error {}", err);
    }
}

#[test]
fn squashed_catalog_entry_matches_milnor() {
    // g = diag(1,1,2)
    let r = milnor_ricci([(0.5f64).sqrt(), (0.5f64).sqrt(), (2.0f64).sqrt()]);
    let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![r[0], r[1], 2.0 * r[2]]));
    assert!(max_abs(&(ricci_matrix(&catalog::so3_squashed().model) - expected)) <= 1e-12);
    assert_eq!(catalog::so3_squashed().expected.go_verdict, SurveyVerdict::Fail);
}
