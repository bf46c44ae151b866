use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use metriclie::catalog::{catalog_entries, CatalogEntry};
use metriclie::curvature::{ricci, ricci_matrix};
use metriclie::format::{emit_document, parse_document, LoadOptions, ModelDocument};
use metriclie::geodesic::go_certificate;
use metriclie::killing::{critical_point_residual, length_at_origin, length_profile, OrbitPlan};

fn entries() -> Vec<CatalogEntry> {
    catalog_entries()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn vec_of(raw: &[f64], n: usize) -> DVector<f64> {
    DVector::from_fn(n, |i, _| raw[i])
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn bracket_is_bilinear_and_antisymmetric(k in 0usize..14, x in coords(), y in coords(), z in coords(), a in -3.0f64..3.0) {
        let e = &entries()[k];
        let t = e.model.algebra();
        let n = t.dim();
        let (x, y, z) = (vec_of(&x, n), vec_of(&y, n), vec_of(&z, n));
        let lhs = t.bracket(&(&x * a + &y), &z).unwrap();
        let rhs = t.bracket(&x, &z).unwrap() * a + t.bracket(&y, &z).unwrap();
        prop_assert!((lhs - rhs).amax() <= 1e-10);
        prop_assert!((t.bracket(&x, &y).unwrap() + t.bracket(&y, &x).unwrap()).amax() <= 1e-10);
        prop_assert!(t.bracket(&x, &x).unwrap().amax() <= 1e-10);
    }

    #[test]
    fn killing_form_is_ad_invariant(k in 0usize..14, x in coords(), y in coords(), z in coords()) {
        let t = entries()[k].model.algebra().clone();
        let n = t.dim();
        let (x, y, z) = (vec_of(&x, n), vec_of(&y, n), vec_of(&z, n));
        let s = t.killing_form(&t.bracket(&z, &x).unwrap(), &y).unwrap() + t.killing_form(&x, &t.bracket(&z, &y).unwrap()).unwrap();
        prop_assert!(s.abs() <= 1e-9);
        prop_assert!((t.killing_form(&x, &y).unwrap() - t.killing_form(&y, &x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn ad_exponential_is_a_one_parameter_group_of_automorphisms(
        k in 0usize..14, v in coords(), x in coords(), y in coords(), s in -1.0f64..1.0, u in -1.0f64..1.0,
    ) {
        let t = entries()[k].model.algebra().clone();
        let n = t.dim();
        let (v, x, y) = (vec_of(&v, n), vec_of(&x, n), vec_of(&y, n));
        let a = t.ad_exponential(&v, s).unwrap();
        let b = t.ad_exponential(&v, u).unwrap();
        prop_assert!(max_abs(&(&a * &b - t.ad_exponential(&v, s + u).unwrap())) <= 1e-10);
        prop_assert!(max_abs(&(&a * t.ad_exponential(&v, -s).unwrap() - DMatrix::identity(n, n))) <= 1e-10);
        let lhs = &a * t.bracket(&x, &y).unwrap();
        let rhs = t.bracket(&(&a * &x), &(&a * &y)).unwrap();
        prop_assert!((lhs - rhs).amax() <= 1e-9);
    }

    #[test]
    fn ricci_is_quadratic_and_matches_its_matrix(k in 0usize..14, x in coords(), c in -3.0f64..3.0) {
        let m = &entries()[k].model;
        let r = m.complement_dim();
        let x = vec_of(&x, r);
        let q = ricci(m, &x).unwrap();
        prop_assert!((q.value - q.terms_sum()).abs() <= 1e-10);
        prop_assert!((ricci(m, &(&x * c)).unwrap().value - c * c * q.value).abs() <= 1e-9 * (1.0 + q.value.abs()) * (1.0 + c * c));
        let form = (x.transpose() * ricci_matrix(m) * &x)[(0, 0)];
        prop_assert!((form - q.value).abs() <= 1e-9 * (1.0 + x.norm_squared()));
    }

    #[test]
    fn ricci_does_not_depend_on_the_orthonormal_basis(k in 0usize..14, raw in prop::collection::vec(-1.0f64..1.0, 36)) {
        let m = &entries()[k].model;
        let r = m.complement_dim();
        let a = DMatrix::from_fn(r, r, |i, j| raw[i * 6 + j]) + DMatrix::identity(r, r) * 3.0;
        let q = a.qr().q();
        let rotated = m.with_rotated_basis(&q);
        prop_assert!(max_abs(&(ricci_matrix(&rotated) - ricci_matrix(m))) <= 1e-9);
    }

    #[test]
    fn certificate_feasibility_is_scale_invariant(k in 0usize..14, x in coords(), c in 0.1f64..5.0) {
        let m = &entries()[k].model;
        let x = vec_of(&x, m.complement_dim());
        let a = go_certificate(m, &x).unwrap();
        let b = go_certificate(m, &(&x * c)).unwrap();
        // equations are quadratic in X, so the residual scales by c^2
        prop_assert!((b.residual - c * c * a.residual).abs() <= 1e-8 * (1.0 + b.residual));
        let margin = (a.residual - a.threshold).abs();
        if margin > 1e-6 {
            prop_assert_eq!(a.feasible, b.feasible);
        }
        if a.feasible {
            prop_assert!(a.substitution_residual <= a.threshold);
        }
    }

    #[test]
    fn projections_decompose_the_algebra(k in 0usize..14, x in coords()) {
        let m = &entries()[k].model;
        let x = vec_of(&x, m.dim());
        let (pm, ph) = (m.project_m(&x).unwrap(), m.project_h(&x).unwrap());
        prop_assert!((m.m_to_alg(&pm) + m.h_to_alg(&ph) - &x).amax() <= 1e-10);
        let again = m.project_m(&m.m_to_alg(&pm)).unwrap();
        prop_assert!((again - &pm).amax() <= 1e-10);
        prop_assert!(m.project_h(&m.m_to_alg(&pm)).unwrap().amax() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn first_orbit_sample_is_the_origin(k in 0usize..14, x in coords()) {
        let m = &entries()[k].model;
        let x = vec_of(&x, m.dim());
        let plan = OrbitPlan { random_words: 3, max_word_len: 1, ..OrbitPlan::default() };
        let p = length_profile(m, &x, &plan).unwrap();
        prop_assert!(p.samples[0].word.is_empty());
        prop_assert!((p.samples[0].length - length_at_origin(m, &x).unwrap()).abs() <= 1e-12);
        prop_assert!((p.samples[0].critical_residual - critical_point_residual(m, &x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn emitted_models_parse_back(k in 0usize..14, raw in prop::collection::vec(-1.0f64..1.0, 16)) {
        // random left-invariant metric when h = 0, otherwise the catalog metric
        let e = &entries()[k];
        let mut doc = ModelDocument::from_entry(e);
        if e.model.isotropy_dim() == 0 {
            let r = e.model.complement_dim();
            let a = DMatrix::from_fn(r, r, |i, j| raw[(i * 4 + j) % 16]);
            let g = &a * a.transpose() + DMatrix::identity(r, r);
            doc.model = metriclie::model::build_model(
                e.name.clone(), e.model.algebra().clone(), e.model.isotropy().clone(), g, None, &Default::default(),
            ).unwrap();
        }
        let text = emit_document(&doc);
        let back = parse_document(&text, &LoadOptions::default()).unwrap();
        prop_assert_eq!(back.model.metric(), doc.model.metric());
        prop_assert_eq!(back.model.algebra(), doc.model.algebra());
        prop_assert_eq!(emit_document(&back), text);
    }
}
