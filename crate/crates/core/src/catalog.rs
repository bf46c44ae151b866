//! Built-in models with known properties, used as regression oracles.
//!
//! Every expectation below is reproducible by hand from the structure
//! constants; the derivation is summarized in each entry's notes.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{Check, StructureTensor, Subspace};
use crate::geodesic::SurveyVerdict;
use crate::model::{build_model, BuildOptions, HomogeneousModel};

/// A subspace with a name, as stored in model files.
#[derive(Debug, Clone)]
pub struct NamedSubspace {
    pub name: String,
    pub subspace: Subspace,
}

impl NamedSubspace {
    fn new(name: &str, subspace: Subspace) -> Self {
        Self { name: name.into(), subspace: subspace.with_label(name) }
    }
}

/// Abelian ideal with the expected outcome of its length profiles.
#[derive(Debug, Clone)]
pub struct IdealExpectation {
    pub ideal: NamedSubspace,
    pub constant_length: bool,
}

#[derive(Debug, Clone)]
pub struct Expectations {
    pub go_verdict: SurveyVerdict,
    /// First failing probe of the default battery, in `m`-coordinates.
    pub go_witness: Option<Vec<f64>>,
    pub unimodular_defect: f64,
    pub ricci_matrix: DMatrix<f64>,
    pub naturally_reductive: bool,
    pub symmetric_pair: bool,
    pub ideals: Vec<IdealExpectation>,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub basis_names: Vec<String>,
    pub model: HomogeneousModel,
    pub expected: Expectations,
    /// Subalgebras `k ⊃ h` for the compact-quotient comparison.
    pub k_candidates: Vec<NamedSubspace>,
    /// `m1` subspaces for skew-symmetry audits.
    pub splits: Vec<NamedSubspace>,
    pub provenance_notes: Vec<String>,
}

/// `[m, m] ⊂ h`: largest g-norm of `[X_i, X_j]_m` over `m`-basis pairs.
pub fn symmetric_pair_check(model: &HomogeneousModel) -> Check {
    let basis = model.complement().spanning_vectors();
    let mut worst: f64 = 0.0;
    for (i, x) in basis.iter().enumerate() {
        for y in &basis[i + 1..] {
            worst = worst.max(model.g_norm(&model.bracket_m(x, y)));
        }
    }
    Check::within(worst, model.tolerances().eps_struct)
}

const EPS_RANK: f64 = 1e-9;

fn sub(dim: usize, rows: &[&[f64]]) -> Subspace {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    Subspace::from_rows("s", dim, &rows, EPS_RANK).expect("catalog subspaces are independent")
}

fn diag(xs: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(xs.to_vec()))
}

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("e{i}")).collect()
}

fn model(
    name: &str,
    algebra: StructureTensor,
    isotropy: Subspace,
    metric: DMatrix<f64>,
    complement: Option<Subspace>,
) -> HomogeneousModel {
    build_model(name, algebra, isotropy, metric, complement, &BuildOptions::default())
        .unwrap_or_else(|e| panic!("catalog entry {name} is invalid: {e}"))
}

fn so3() -> StructureTensor {
    StructureTensor::from_brackets(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)]).expect("so(3)")
}

pub fn abelian(n: usize) -> CatalogEntry {
    let name = format!("abelian{n}");
    let t = StructureTensor::abelian(n).expect("positive dimension");
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    CatalogEntry {
        name: name.clone(),
        basis_names: names(n),
        model: model(&name, t, Subspace::zero(n), DMatrix::identity(n, n), None),
        expected: Expectations {
            go_verdict: SurveyVerdict::Pass,
            go_witness: None,
            unimodular_defect: 0.0,
            ricci_matrix: DMatrix::zeros(n, n),
            naturally_reductive: true,
            symmetric_pair: true,
            ideals: vec![IdealExpectation { ideal: NamedSubspace::new("all", Subspace::full(n)), constant_length: true }],
        },
        k_candidates: vec![NamedSubspace::new("axis", sub(n, &[&first]))],
        splits: vec![NamedSubspace::new("axis", sub(n, &[&first]))],
        provenance_notes: vec![
            "all brackets vanish: Killing form, ad and Ricci are zero; flat torus algebra".into(),
            "Ad is the identity, so every field has constant length".into(),
        ],
    }
}

pub fn so3_biinvariant() -> CatalogEntry {
    CatalogEntry {
        name: "so3-biinvariant".into(),
        basis_names: names(3),
        model: model("so3-biinvariant", so3(), Subspace::zero(3), DMatrix::identity(3, 3), None),
        expected: Expectations {
            go_verdict: SurveyVerdict::Pass,
            go_witness: None,
            unimodular_defect: 0.0,
            ricci_matrix: DMatrix::identity(3, 3) * 0.5,
            naturally_reductive: true,
            symmetric_pair: false,
            ideals: vec![IdealExpectation { ideal: NamedSubspace::new("zero", Subspace::zero(3)), constant_length: true }],
        },
        k_candidates: vec![
            NamedSubspace::new("circle", sub(3, &[&[0.0, 0.0, 1.0]])),
            NamedSubspace::new("whole", Subspace::full(3)),
        ],
        splits: vec![
            NamedSubspace::new("axis3", sub(3, &[&[0.0, 0.0, 1.0]])),
            NamedSubspace::new("axis1", sub(3, &[&[1.0, 0.0, 0.0]])),
        ],
        provenance_notes: vec![
            "B = -2 I; Ric(e1) = 1 - 1 + 1/2 = 1/2 termwise".into(),
            "([X,Y],Z) is totally antisymmetric for g = I, so H_X = 0 works".into(),
        ],
    }
}

pub fn so3_squashed() -> CatalogEntry {
    CatalogEntry {
        name: "so3-squashed".into(),
        basis_names: names(3),
        model: model("so3-squashed", so3(), Subspace::zero(3), diag(&[1.0, 1.0, 2.0]), None),
        expected: Expectations {
            go_verdict: SurveyVerdict::Fail,
            go_witness: Some(vec![1.0, 0.0, 1.0]),
            unimodular_defect: 0.0,
            ricci_matrix: diag(&[0.0, 0.0, 2.0]),
            naturally_reductive: false,
            symmetric_pair: false,
            ideals: vec![IdealExpectation { ideal: NamedSubspace::new("zero", Subspace::zero(3)), constant_length: true }],
        },
        k_candidates: Vec::new(),
        splits: vec![NamedSubspace::new("axis3", sub(3, &[&[0.0, 0.0, 1.0]]))],
        provenance_notes: vec![
            "X = e1+e3, Y = e2: [X,Y] = e3 - e1 and g(e3 - e1, e1 + e3) = 1 with h = 0".into(),
            "orthonormal f = (e1, e2, e3/sqrt2) has structure constants (1/sqrt2, 1/sqrt2, sqrt2); the three-dimensional unimodular formula gives Ric(f) = (0, 0, 1), i.e. Ric(e3,e3) = 2".into(),
            "relative to the supplied algebra only; a larger isometry algebra is not considered".into(),
        ],
    }
}

pub fn sphere() -> CatalogEntry {
    let h = sub(3, &[&[1.0, 0.0, 0.0]]);
    let m = sub(3, &[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
    CatalogEntry {
        name: "sphere".into(),
        basis_names: names(3),
        model: model("sphere", so3(), h.clone(), DMatrix::identity(2, 2), Some(m.clone())),
        expected: Expectations {
            go_verdict: SurveyVerdict::Pass,
            go_witness: None,
            unimodular_defect: 0.0,
            ricci_matrix: DMatrix::identity(2, 2),
            naturally_reductive: true,
            symmetric_pair: true,
            ideals: vec![IdealExpectation { ideal: NamedSubspace::new("zero", Subspace::zero(3)), constant_length: true }],
        },
        k_candidates: vec![NamedSubspace::new("whole", Subspace::full(3)), NamedSubspace::new("isotropy", h)],
        splits: vec![NamedSubspace::new("m", m), NamedSubspace::new("zero", Subspace::zero(3))],
        provenance_notes: vec![
            "[e2,e3] = e1 lies in h, so only -1/2 B(X,X) = |X|^2 survives: Ric = I".into(),
            "[m,m] ⊂ h: symmetric pair".into(),
        ],
    }
}

pub fn e2_plane() -> CatalogEntry {
    // basis (r, e1, e2): [r,e1] = e2, [r,e2] = -e1
    let t = StructureTensor::from_brackets(3, &[(0, 1, 2, 1.0), (0, 2, 1, -1.0)]).expect("e(2)");
    let h = sub(3, &[&[1.0, 0.0, 0.0]]);
    let m = sub(3, &[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
    CatalogEntry {
        name: "e2-plane".into(),
        basis_names: vec!["r".into(), "e1".into(), "e2".into()],
        model: model("e2-plane", t, h.clone(), DMatrix::identity(2, 2), Some(m.clone())),
        expected: Expectations {
            go_verdict: SurveyVerdict::Pass,
            go_witness: None,
            unimodular_defect: 0.0,
            ricci_matrix: DMatrix::zeros(2, 2),
            naturally_reductive: true,
            symmetric_pair: true,
            ideals: vec![IdealExpectation { ideal: NamedSubspace::new("translations", m.clone()), constant_length: true }],
        },
        k_candidates: vec![NamedSubspace::new("isotropy", h), NamedSubspace::new("whole", Subspace::full(3))],
        splits: vec![NamedSubspace::new("zero", Subspace::zero(3)), NamedSubspace::new("m", m)],
        provenance_notes: vec![
            "[m,m] = 0 and B(e_i,e_i) = 0 on m: flat".into(),
            "Ad(exp t·ad r) rotates the translation ideal isometrically".into(),
        ],
    }
}

pub fn affine2() -> CatalogEntry {
    let t = StructureTensor::from_brackets(2, &[(0, 1, 1, 1.0)]).expect("aff(1)");
    CatalogEntry {
        name: "affine2".into(),
        basis_names: names(2),
        model: model("affine2", t, Subspace::zero(2), DMatrix::identity(2, 2), None),
        expected: Expectations {
            go_verdict: SurveyVerdict::Fail,
            go_witness: Some(vec![0.0, 1.0]),
            unimodular_defect: 1.0,
            ricci_matrix: -DMatrix::identity(2, 2),
            naturally_reductive: false,
            symmetric_pair: false,
            ideals: vec![IdealExpectation { ideal: NamedSubspace::new("u", sub(2, &[&[0.0, 1.0]])), constant_length: false }],
        },
        k_candidates: Vec::new(),
        splits: Vec::new(),
        provenance_notes: vec![
            "trace ad(e1) = 1: not unimodular, Z = e1".into(),
            "X = e2: ([e2,e1], e2) = -1 with no isotropy to compensate".into(),
            "Ric(e1) = -1/2 - 1/2 = -1, Ric(e2) = -1/2 + 1/2 - 1 = -1 (hyperbolic plane)".into(),
            "Ad(exp t·ad e1) e2 = e^t e2: the ideal span{e2} is not of constant length".into(),
        ],
    }
}

pub fn heisenberg() -> CatalogEntry {
    let t = StructureTensor::from_brackets(3, &[(0, 1, 2, 1.0)]).expect("heisenberg");
    CatalogEntry {
        name: "heisenberg".into(),
        basis_names: names(3),
        model: model("heisenberg", t, Subspace::zero(3), DMatrix::identity(3, 3), None),
        expected: Expectations {
            go_verdict: SurveyVerdict::Fail,
            go_witness: Some(vec![1.0, 0.0, 1.0]),
            unimodular_defect: 0.0,
            ricci_matrix: diag(&[-0.5, -0.5, 0.5]),
            naturally_reductive: false,
            symmetric_pair: false,
            ideals: vec![
                IdealExpectation { ideal: NamedSubspace::new("center", sub(3, &[&[0.0, 0.0, 1.0]])), constant_length: true },
                IdealExpectation {
                    ideal: NamedSubspace::new("e1e3", sub(3, &[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]])),
                    constant_length: false,
                },
            ],
        },
        k_candidates: Vec::new(),
        splits: Vec::new(),
        provenance_notes: vec![
            "X = e1+e3, Y = e2: ([X,Y], X) = (e3, e1+e3) = 1".into(),
            "three-dimensional unimodular formula with structure constants (0,0,1): Ric = diag(-1/2,-1/2,1/2)".into(),
            "Ad(exp t·ad e2) e1 = e1 - t e3: span{e1,e3} has non-constant length; e3 is central".into(),
        ],
    }
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, rb) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(ra + rb, ra + rb);
    out.view_mut((0, 0), (ra, ra)).copy_from(a);
    out.view_mut((ra, ra), (rb, rb)).copy_from(b);
    out
}

/// Direct product: direct-sum algebra, isotropy and complement, block metric.
pub fn product_model(a: &CatalogEntry, b: &CatalogEntry) -> HomogeneousModel {
    let (ma, mb) = (&a.model, &b.model);
    let (na, nb) = (ma.dim(), mb.dim());
    let n = na + nb;
    let algebra = ma.algebra().direct_sum(mb.algebra());
    let h = ma
        .isotropy()
        .embed(n, 0)
        .sum(&mb.isotropy().embed(n, na), EPS_RANK)
        .expect("factor isotropies are independent");
    let m = ma
        .complement()
        .embed(n, 0)
        .sum(&mb.complement().embed(n, na), EPS_RANK)
        .expect("factor complements are independent");
    let metric = block_diag(ma.metric(), mb.metric());
    let opts = BuildOptions { tol: *ma.tolerances(), strict: true };
    build_model(format!("{}-x-{}", a.name, b.name), algebra, h, metric, Some(m), &opts)
        .expect("products of valid models are valid")
}

/// [`product_model`] together with the combined expectations and subspaces.
pub fn product_entry(a: &CatalogEntry, b: &CatalogEntry) -> CatalogEntry {
    let model = product_model(a, b);
    let (na, nb) = (a.model.dim(), b.model.dim());
    let n = na + nb;
    let (ha, hb) = (a.model.isotropy().embed(n, 0), b.model.isotropy().embed(n, na));
    let lift = |s: &NamedSubspace, offset: usize, tag: &str| NamedSubspace::new(&format!("{tag}.{}", s.name), s.subspace.embed(n, offset));

    let mut k_candidates = Vec::new();
    for k in &a.k_candidates {
        let s = k.subspace.embed(n, 0).sum(&hb, EPS_RANK).expect("independent");
        k_candidates.push(NamedSubspace::new(&format!("a.{}", k.name), s));
    }
    for k in &b.k_candidates {
        let s = ha.sum(&k.subspace.embed(n, na), EPS_RANK).expect("independent");
        k_candidates.push(NamedSubspace::new(&format!("b.{}", k.name), s));
    }
    let mut splits = vec![NamedSubspace::new("factor_a", a.model.complement().embed(n, 0))];
    splits.extend(a.splits.iter().map(|s| lift(s, 0, "a")));
    splits.extend(b.splits.iter().map(|s| lift(s, na, "b")));

    let mut ideals: Vec<IdealExpectation> = a
        .expected
        .ideals
        .iter()
        .map(|i| IdealExpectation { ideal: lift(&i.ideal, 0, "a"), constant_length: i.constant_length })
        .collect();
    ideals.extend(
        b.expected
            .ideals
            .iter()
            .map(|i| IdealExpectation { ideal: lift(&i.ideal, na, "b"), constant_length: i.constant_length }),
    );

    let both = |x: SurveyVerdict, y: SurveyVerdict| {
        if x == SurveyVerdict::Pass && y == SurveyVerdict::Pass {
            SurveyVerdict::Pass
        } else {
            SurveyVerdict::Fail
        }
    };
    let mut basis_names = a.basis_names.clone();
    for nm in &b.basis_names {
        let mut nm = nm.clone();
        while basis_names.contains(&nm) {
            nm.push('\'');
        }
        basis_names.push(nm);
    }
    CatalogEntry {
        name: model.name().to_string(),
        basis_names,
        model,
        expected: Expectations {
            go_verdict: both(a.expected.go_verdict, b.expected.go_verdict),
            go_witness: None,
            unimodular_defect: a.expected.unimodular_defect.max(b.expected.unimodular_defect),
            ricci_matrix: block_diag(&a.expected.ricci_matrix, &b.expected.ricci_matrix),
            naturally_reductive: a.expected.naturally_reductive && b.expected.naturally_reductive,
            symmetric_pair: a.expected.symmetric_pair && b.expected.symmetric_pair,
            ideals,
        },
        k_candidates,
        splits,
        provenance_notes: vec![format!(
            "product of {} and {}: brackets between factors vanish, so every quantity splits blockwise",
            a.name, b.name
        )],
    }
}

/// `so(3) ⊕ so(3)` bi-invariant with the diagonal as compact subgroup.
pub fn so3_pair_diagonal() -> CatalogEntry {
    let mut e = product_entry(&so3_biinvariant(), &so3_biinvariant());
    let diagonal = sub(6, &[&[1.0, 0.0, 0.0, 1.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]]);
    e.k_candidates.push(NamedSubspace::new("diagonal", diagonal.clone()));
    e.splits.push(NamedSubspace::new("diagonal", diagonal));
    e.provenance_notes.push(
        "at X = (u,u): Ric = |u|^2, the diagonal carries twice the metric so Ric* = |u|^2/2, and [m2,m2] ⊂ diagonal gives correction |u|^2/2".into(),
    );
    e
}

/// The non-product entries.
pub fn base_entries() -> Vec<CatalogEntry> {
    vec![
        abelian(1),
        abelian(2),
        abelian(3),
        so3_biinvariant(),
        so3_squashed(),
        sphere(),
        e2_plane(),
        affine2(),
        heisenberg(),
    ]
}

/// All built-in entries, including a few products.
pub fn catalog_entries() -> Vec<CatalogEntry> {
    let mut out = base_entries();
    out.push(product_entry(&abelian(1), &sphere()));
    out.push(product_entry(&so3_squashed(), &abelian(1)));
    out.push(product_entry(&so3_biinvariant(), &e2_plane()));
    out.push(product_entry(&sphere(), &sphere()));
    out.push(so3_pair_diagonal());
    out
}

pub fn catalog_entry(name: &str) -> Option<CatalogEntry> {
    catalog_entries().into_iter().find(|e| e.name == name)
}
