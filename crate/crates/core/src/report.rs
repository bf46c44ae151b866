//! Full analysis of a model document, serialized as a versioned JSON report.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::algebra::Check;
use crate::catalog::symmetric_pair_check;
use crate::curvature::{ricci, ricci_matrix, z_vector, CompactQuotient, IdentityReport, RicciResult};
use crate::format::ModelDocument;
use crate::geodesic::{go_survey, naturally_reductive_check, skew_symmetry_audit, unimodularity_audit, GoSurvey, ProbePlan, SkewAudit, UnimodularityAudit};
use crate::killing::{
    parallel_candidate_report, verify_abelian_ideal_theorem, LengthProfile, OrbitPlan, OrbitSampler, ParallelCandidateReport, TheoremReport,
};
use crate::model::{ComplementSource, ModelValidation};
use crate::tolerance::Tolerances;

pub const SCHEMA_VERSION: &str = "metriclie-report/1";

const SCOPE_NOTE: &str = "all verdicts are relative to the supplied Lie algebra acting on G/H; a larger isometry algebra is not considered, and orbit verdicts cover the sampled group elements only";

/// Optional sections are either computed or explicitly absent.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Section<T> {
    Computed(T),
    NotRequested,
}

impl<T> Section<T> {
    pub fn computed(&self) -> Option<&T> {
        match self {
            Section::Computed(t) => Some(t),
            Section::NotRequested => None,
        }
    }
}

fn optional<T>(items: Vec<T>) -> Section<Vec<T>> {
    if items.is_empty() {
        Section::NotRequested
    } else {
        Section::Computed(items)
    }
}

/// Result of an analysis step that may be inapplicable to the given input.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok { name: String, result: T },
    Error { name: String, message: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub name: String,
    pub dim: usize,
    pub isotropy_dim: usize,
    pub complement_dim: usize,
    pub basis_names: Vec<String>,
    pub brackets: Vec<(usize, usize, usize, f64)>,
    pub isotropy: Vec<Vec<f64>>,
    pub complement: Vec<Vec<f64>>,
    pub complement_source: ComplementSource,
    pub metric: Vec<Vec<f64>>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciSection {
    /// Bilinear Ricci form in `m` span coordinates.
    pub matrix: Vec<Vec<f64>>,
    /// Termwise evaluation at each `m` span vector.
    pub basis_terms: Vec<RicciResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RicStarSection {
    pub m1_dim: usize,
    pub m2_dim: usize,
    pub go_hypothesis: bool,
    pub samples: Vec<IdentityReport>,
    pub max_difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Plans {
    pub seed: u64,
    pub probe_plan: ProbePlan,
    pub orbit_plan: OrbitPlan,
    pub orbit_plan_description: String,
    pub ric_star_samples: usize,
}

/// Self-checks of the implementation; any breach means a bug, not a verdict.
#[derive(Debug, Clone, Serialize)]
pub struct InternalChecks {
    pub ricci_terms_max_error: f64,
    pub ricci_matrix_diagonal_max_error: f64,
    pub certificate_substitution_max_excess: f64,
    pub breaches: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: &'static str,
    pub tool: ToolInfo,
    pub scope_note: &'static str,
    pub model: ModelSummary,
    pub validation: ModelValidation,
    pub unimodularity: UnimodularityAudit,
    pub z_vector: Vec<f64>,
    pub ricci: RicciSection,
    pub go_survey: GoSurvey,
    pub naturally_reductive: Check,
    pub symmetric_pair: Check,
    /// One profile per algebra basis vector.
    pub length_profiles: Vec<LengthProfile>,
    pub theorem_reports: Section<Vec<Outcome<TheoremReport>>>,
    pub parallel_candidates: Section<Vec<Outcome<ParallelCandidateReport>>>,
    pub ric_star: Section<Vec<Outcome<RicStarSection>>>,
    pub skew_audits: Section<Vec<Outcome<SkewAudit>>>,
    pub plans: Plans,
    pub internal_checks: InternalChecks,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn has_breach(&self) -> bool {
        !self.internal_checks.breaches.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub probe_plan: ProbePlan,
    pub orbit_plan: OrbitPlan,
    pub ric_star_samples: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self::with_seed(42)
    }
}

impl AnalysisOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            probe_plan: ProbePlan { seed, ..ProbePlan::default() },
            orbit_plan: OrbitPlan { seed, ..OrbitPlan::default() },
            ric_star_samples: 8,
        }
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn unit(r: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(r);
    v[i] = 1.0;
    v
}

/// Seeded random elements of `m1`, in algebra coordinates.
pub fn m1_samples(q: &CompactQuotient, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = q.m1.span();
    (0..count)
        .map(|_| {
            let c: DVector<f64> = DVector::from_fn(span.nrows(), |_, _| StandardNormal.sample(&mut rng));
            span.transpose() * c
        })
        .collect()
}

pub fn run_analysis(doc: &ModelDocument, opts: &AnalysisOptions) -> AnalysisReport {
    let model = &doc.model;
    let r = model.complement_dim();
    let survey = go_survey(model, &opts.probe_plan);
    let go = survey.passed();

    let ric = ricci_matrix(model);
    let basis_terms: Vec<RicciResult> = (0..r).map(|i| ricci(model, &unit(r, i)).expect("unit length matches m")).collect();
    let ricci_terms_max_error = basis_terms.iter().map(|t| (t.value - t.terms_sum()).abs()).fold(0.0, f64::max);
    let ricci_matrix_diagonal_max_error = basis_terms.iter().enumerate().map(|(i, t)| (t.value - ric[(i, i)]).abs()).fold(0.0, f64::max);

    let certificate_substitution_max_excess = survey
        .certificates
        .iter()
        .filter(|c| c.certificate.feasible)
        .map(|c| c.certificate.substitution_residual - c.certificate.threshold)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);

    let mut breaches = Vec::new();
    let scale = 1.0 + linalg_scale(&ric);
    if ricci_terms_max_error > 1e-9 * scale {
        breaches.push(format!("Ricci terms do not add up (error {ricci_terms_max_error:e})"));
    }
    if ricci_matrix_diagonal_max_error > 1e-9 * scale {
        breaches.push(format!("Ricci matrix disagrees with direct evaluation (error {ricci_matrix_diagonal_max_error:e})"));
    }
    if certificate_substitution_max_excess > 0.0 {
        breaches.push(format!(
            "feasible certificate fails re-substitution (excess {certificate_substitution_max_excess:e})"
        ));
    }

    let sampler = OrbitSampler::new(model, &opts.orbit_plan);
    let length_profiles = (0..model.dim())
        .map(|i| sampler.profile(&model.algebra().basis_vector(i)).expect("basis vector length matches"))
        .collect();

    let theorem_reports = optional(
        doc.ideals
            .iter()
            .map(|a| {
                let s = a.subspace.clone().with_label(&a.name);
                match verify_abelian_ideal_theorem(model, &s, &opts.orbit_plan, go) {
                    Ok(result) => Outcome::Ok { name: a.name.clone(), result },
                    Err(e) => Outcome::Error { name: a.name.clone(), message: e.to_string() },
                }
            })
            .collect(),
    );
    let parallel_candidates = optional(
        doc.ideals
            .iter()
            .map(|a| {
                let s = a.subspace.clone().with_label(&a.name);
                match parallel_candidate_report(model, &s, &opts.orbit_plan, go) {
                    Ok(result) => Outcome::Ok { name: a.name.clone(), result },
                    Err(e) => Outcome::Error { name: a.name.clone(), message: e.to_string() },
                }
            })
            .collect(),
    );

    let ric_star = optional(
        doc.subalgebras
            .iter()
            .map(|k| {
                let name = k.name.clone();
                let s = k.subspace.clone().with_label(&k.name);
                let q = match CompactQuotient::new(model, &s) {
                    Ok(q) => q,
                    Err(e) => return Outcome::Error { name, message: e.to_string() },
                };
                let mut samples = Vec::new();
                for x in m1_samples(&q, opts.ric_star_samples, opts.orbit_plan.seed) {
                    match q.evaluate(model, &x) {
                        Ok(rep) => samples.push(rep),
                        Err(e) => return Outcome::Error { name, message: e.to_string() },
                    }
                }
                let max_difference = samples.iter().map(|s| s.difference).fold(0.0, f64::max);
                Outcome::Ok {
                    name,
                    result: RicStarSection { m1_dim: q.m1.dim(), m2_dim: q.m2_basis.len(), go_hypothesis: go, samples, max_difference },
                }
            })
            .collect(),
    );

    let skew_audits = optional(
        doc.splits
            .iter()
            .map(|sp| {
                let s = sp.subspace.clone().with_label(&sp.name);
                match model.make_split(&s) {
                    Ok(pair) => Outcome::Ok { name: sp.name.clone(), result: skew_symmetry_audit(model, &pair, go) },
                    Err(e) => Outcome::Error { name: sp.name.clone(), message: e.to_string() },
                }
            })
            .collect(),
    );

    AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") },
        scope_note: SCOPE_NOTE,
        model: ModelSummary {
            name: model.name().to_string(),
            dim: model.dim(),
            isotropy_dim: model.isotropy_dim(),
            complement_dim: r,
            basis_names: doc.basis_names.clone(),
            brackets: model.algebra().records().into_iter().map(|(i, j, k, c)| (i + 1, j + 1, k + 1, c)).collect(),
            isotropy: rows(model.isotropy().span()),
            complement: rows(model.complement().span()),
            complement_source: model.validation().complement_source,
            metric: rows(model.metric()),
            tolerances: *model.tolerances(),
        },
        validation: model.validation().clone(),
        unimodularity: unimodularity_audit(model, Some(go)),
        z_vector: z_vector(model).iter().copied().collect(),
        ricci: RicciSection { matrix: rows(&ric), basis_terms },
        naturally_reductive: naturally_reductive_check(model),
        symmetric_pair: symmetric_pair_check(model),
        go_survey: survey,
        length_profiles,
        theorem_reports,
        parallel_candidates,
        ric_star,
        skew_audits,
        plans: Plans {
            seed: opts.orbit_plan.seed,
            probe_plan: opts.probe_plan,
            orbit_plan_description: opts.orbit_plan.describe(),
            orbit_plan: opts.orbit_plan.clone(),
            ric_star_samples: opts.ric_star_samples,
        },
        internal_checks: InternalChecks {
            ricci_terms_max_error,
            ricci_matrix_diagonal_max_error,
            certificate_substitution_max_excess,
            breaches,
        },
    }
}

fn linalg_scale(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

fn vec_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Plain-text summary for terminals.
pub fn render_text(rep: &AnalysisReport) -> String {
    let mut s = String::new();
    let m = &rep.model;
    let _ = writeln!(s, "model {}  dim g = {}  dim h = {}  dim m = {}", m.name, m.dim, m.isotropy_dim, m.complement_dim);
    for w in &rep.validation.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let _ = writeln!(s, "{:<28} {}", "unimodular", yes(rep.unimodularity.unimodular));
    let _ = writeln!(s, "{:<28} {:.3e}", "unimodularity defect", rep.unimodularity.defect);
    let _ = writeln!(s, "{:<28} {}", "naturally reductive", yes(rep.naturally_reductive.holds));
    let _ = writeln!(s, "{:<28} {}", "symmetric pair", yes(rep.symmetric_pair.holds));
    let verdict = if rep.go_survey.passed() { "pass" } else { "fail" };
    let _ = writeln!(s, "{:<28} {} ({} probes)", "geodesic orbit survey", verdict, rep.go_survey.certificates.len());
    if let Some(w) = rep.go_survey.witness() {
        let _ = writeln!(s, "{:<28} {} {}", "  witness direction", w.probe, vec_str(&w.certificate.direction));
        if let Some(y) = &w.certificate.witness {
            let _ = writeln!(s, "{:<28} Y = {}  value {:.9}", "  obstruction", vec_str(&y.y), y.value);
        }
    }
    let _ = writeln!(s, "ricci matrix (m span coordinates):");
    for row in &rep.ricci.matrix {
        let _ = writeln!(s, "  {}", vec_str(row));
    }
    let _ = writeln!(s, "length profiles of basis fields:");
    for (name, p) in m.basis_names.iter().zip(&rep.length_profiles) {
        let _ = writeln!(s, "  {:<8} {:<14} spread {:.3e}", name, format!("{:?}", p.verdict).to_lowercase(), p.spread);
    }
    if let Some(ts) = rep.theorem_reports.computed() {
        let _ = writeln!(s, "abelian ideal reports:");
        for t in ts {
            match t {
                Outcome::Ok { name, result } => {
                    let _ = writeln!(s, "  {:<12} {:?}  max spread {:.3e}", name, result.status, result.max_spread);
                }
                Outcome::Error { name, message } => {
                    let _ = writeln!(s, "  {name:<12} error: {message}");
                }
            }
        }
    }
    if let Some(ks) = rep.ric_star.computed() {
        let _ = writeln!(s, "compact quotient comparisons:");
        for k in ks {
            match k {
                Outcome::Ok { name, result } => {
                    let _ = writeln!(s, "  {:<12} max |left - right| {:.3e}", name, result.max_difference);
                }
                Outcome::Error { name, message } => {
                    let _ = writeln!(s, "  {name:<12} error: {message}");
                }
            }
        }
    }
    if let Some(ks) = rep.skew_audits.computed() {
        let _ = writeln!(s, "skew audits:");
        for k in ks {
            match k {
                Outcome::Ok { name, result } => {
                    let _ = writeln!(s, "  {:<12} skew {}  max residual {:.3e}", name, yes(result.skew), result.max_residual);
                }
                Outcome::Error { name, message } => {
                    let _ = writeln!(s, "  {name:<12} error: {message}");
                }
            }
        }
    }
    for b in &rep.internal_checks.breaches {
        let _ = writeln!(s, "INTERNAL: {b}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn quick() -> AnalysisOptions {
        let mut o = AnalysisOptions::default();
        o.probe_plan.random_count = 20;
        o.orbit_plan.random_words = 10;
        o
    }

    #[test]
    fn sphere_report() {
        let doc = ModelDocument::from_entry(&catalog::sphere());
        let rep = run_analysis(&doc, &quick());
        assert!(rep.go_survey.passed());
        assert!(rep.symmetric_pair.holds);
        assert_eq!(rep.ricci.matrix, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(!rep.has_breach());
    }

    #[test]
    fn absent_sections_are_marked() {
        let mut doc = ModelDocument::from_entry(&catalog::affine2());
        doc.subalgebras.clear();
        doc.splits.clear();
        let rep = run_analysis(&doc, &quick());
        let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(v["ric_star"]["status"], "not_requested");
        assert_eq!(v["theorem_reports"]["status"], "computed");
    }
}
