//! Lengths of Killing fields along sampled orbits.
//!
//! Points of `M = G/H` are reached as `a·o` with `a` a product of adjoint
//! exponentials. The squared length of the Killing field `X` at `a·o` is
//! `g((Ad_{a^-1} X)_m, (Ad_{a^-1} X)_m)`, so no manifold points are built.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{check_len, AlgVector, Check, Subspace};
use crate::curvature::ricci;
use crate::model::{HomogeneousModel, ModelError};

/// `|X_m|_g` at the origin.
pub fn length_at_origin(model: &HomogeneousModel, x: &AlgVector) -> Result<f64, ModelError> {
    check_len(x, model.dim())?;
    Ok(model.g_norm(&model.pm(x)))
}

/// `max_i |g([e_i, X]_m, X_m)|`; zero when the origin is a critical point of
/// `y -> g_y(X, X)`.
pub fn critical_point_residual(model: &HomogeneousModel, x: &AlgVector) -> Result<f64, ModelError> {
    check_len(x, model.dim())?;
    Ok(critical_residual(model, x))
}

fn critical_residual(model: &HomogeneousModel, x: &AlgVector) -> f64 {
    let xm = model.pm(x);
    let ad_x = model.algebra().ad(x);
    // [e_i, X] = -ad_X e_i
    (0..model.dim())
        .map(|i| model.g(&model.pm(&(-ad_x.column(i).into_owned())), &xm).abs())
        .fold(0.0, f64::max)
}

/// One factor `exp(t · ad_{e_generator})` of a group word.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Letter {
    /// 0-based algebra basis index.
    #[serde(serialize_with = "serialize_generator")]
    pub generator: usize,
    pub t: f64,
}

fn serialize_generator<S: serde::Serializer>(g: &usize, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("e{}", g + 1))
}

pub fn describe_word(word: &[Letter]) -> String {
    if word.is_empty() {
        return "identity".into();
    }
    word.iter().map(|l| format!("exp({}·ad e{})", l.t, l.generator + 1)).collect::<Vec<_>>().join("·")
}

/// Which group elements to sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitPlan {
    /// Times used for the exhaustive short words.
    pub times: Vec<f64>,
    /// All words up to this length over `exp(t · ad_{e_i})` are sampled.
    pub max_word_len: usize,
    pub random_words: usize,
    pub random_word_max_len: usize,
    /// Random elements of an ideal tested in addition to its spanning vectors.
    pub ideal_samples: usize,
    pub seed: u64,
}

impl Default for OrbitPlan {
    fn default() -> Self {
        Self {
            times: vec![0.1, -0.1, 0.7, -0.7, 1.3, -1.3],
            max_word_len: 2,
            random_words: 100,
            random_word_max_len: 3,
            ideal_samples: 10,
            seed: 42,
        }
    }
}

impl OrbitPlan {
    pub fn describe(&self) -> String {
        format!(
            "identity; all words of length <= {} over exp(t·ad e_i) with t in {:?}; {} random words of length 1..={} with t uniform in [-pi, pi] (ChaCha8, seed {})",
            self.max_word_len, self.times, self.random_words, self.random_word_max_len, self.seed
        )
    }

    /// Words in sampling order; the identity comes first.
    pub fn words(&self, dim: usize) -> Vec<Vec<Letter>> {
        let letters: Vec<Letter> = (0..dim)
            .flat_map(|g| self.times.iter().map(move |&t| Letter { generator: g, t }))
            .collect();
        let mut words: Vec<Vec<Letter>> = vec![Vec::new()];
        let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
        for _ in 0..self.max_word_len {
            let next: Vec<Vec<Letter>> = frontier
                .iter()
                .flat_map(|w| {
                    letters.iter().map(move |l| {
                        let mut w2 = w.clone();
                        w2.push(*l);
                        w2
                    })
                })
                .collect();
            words.extend(next.iter().cloned());
            frontier = next;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random_words {
            let len = rng.random_range(1..=self.random_word_max_len.max(1));
            let w = (0..len)
                .map(|_| Letter {
                    generator: rng.random_range(0..dim),
                    t: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
                })
                .collect();
            words.push(w);
        }
        words
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LengthSample {
    pub word: Vec<Letter>,
    /// `|X'_m|_g` with `X' = Ad_{a^-1} X`.
    pub length: f64,
    /// `g(X'_m, X'_m)`, the function whose critical points are tested.
    pub sq_length: f64,
    pub critical_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthVerdict {
    Constant,
    NonConstant,
    Indeterminate,
}

#[derive(Debug, Clone, Serialize)]
pub struct LengthProfile {
    pub field: Vec<f64>,
    /// `max - min` of the squared lengths.
    pub spread: f64,
    pub max_sq_length: f64,
    pub max_critical_residual: f64,
    pub verdict: LengthVerdict,
    /// Verdicts refer to the sampled orbit set only.
    pub scope: &'static str,
    pub samples: Vec<LengthSample>,
}

const PROFILE_SCOPE: &str = "constant on sampled orbit set";

/// Precomputed `Ad_{a^-1}` matrices for an orbit plan.
pub struct OrbitSampler<'m> {
    model: &'m HomogeneousModel,
    words: Vec<Vec<Letter>>,
    inverse_ads: Vec<DMatrix<f64>>,
}

impl<'m> OrbitSampler<'m> {
    pub fn new(model: &'m HomogeneousModel, plan: &OrbitPlan) -> Self {
        let n = model.dim();
        let algebra = model.algebra();
        let words = plan.words(n);
        let generator = |l: &Letter| crate::linalg::expm(&(algebra.ad(&algebra.basis_vector(l.generator)) * -l.t));
        let inverse_ads = words
            .par_iter()
            .map(|w| {
                // (g_1 ... g_k)^-1 = g_k^-1 ... g_1^-1
                w.iter().fold(DMatrix::identity(n, n), |acc, l| generator(l) * acc)
            })
            .collect();
        Self { model, words, inverse_ads }
    }

    pub fn sample_count(&self) -> usize {
        self.words.len()
    }

    pub fn profile(&self, x: &AlgVector) -> Result<LengthProfile, ModelError> {
        check_len(x, self.model.dim())?;
        let model = self.model;
        let samples: Vec<LengthSample> = self
            .words
            .par_iter()
            .zip(self.inverse_ads.par_iter())
            .map(|(w, ad_inv)| {
                let moved = ad_inv * x;
                let xm = model.pm(&moved);
                let sq = model.g(&xm, &xm).max(0.0);
                LengthSample {
                    word: w.clone(),
                    length: sq.sqrt(),
                    sq_length: sq,
                    critical_residual: critical_residual(model, &moved),
                }
            })
            .collect();
        let max_sq = samples.iter().map(|s| s.sq_length).fold(f64::NEG_INFINITY, f64::max);
        let min_sq = samples.iter().map(|s| s.sq_length).fold(f64::INFINITY, f64::min);
        let spread = (max_sq - min_sq).max(0.0);
        let max_res = samples.iter().map(|s| s.critical_residual).fold(0.0, f64::max);
        let eps = model.tolerances().eps_len;
        let worst = (spread / (1.0 + max_sq)).max(max_res);
        let verdict = if worst <= eps {
            LengthVerdict::Constant
        } else if worst <= 100.0 * eps {
            LengthVerdict::Indeterminate
        } else {
            LengthVerdict::NonConstant
        };
        Ok(LengthProfile {
            field: x.iter().copied().collect(),
            spread,
            max_sq_length: max_sq,
            max_critical_residual: max_res,
            verdict,
            scope: PROFILE_SCOPE,
            samples,
        })
    }
}

/// Length profile of the Killing field `x` over the plan's group words.
pub fn length_profile(model: &HomogeneousModel, x: &AlgVector, plan: &OrbitPlan) -> Result<LengthProfile, ModelError> {
    OrbitSampler::new(model, plan).profile(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremStatus {
    Pass,
    /// Hypotheses hold yet some field has non-constant length.
    Contradiction,
    Indeterminate,
    PreconditionFailed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Preconditions {
    pub ideal: Check,
    pub abelian: Check,
    pub go_passed: bool,
}

impl Preconditions {
    pub fn met(&self) -> bool {
        self.ideal.holds && self.abelian.holds && self.go_passed
    }

    fn evaluate(model: &HomogeneousModel, a: &Subspace, go_passed: bool) -> Self {
        let tol = model.tolerances();
        Self {
            ideal: model.algebra().is_ideal(a, tol.eps_rank),
            abelian: model.algebra().is_abelian(a, tol.eps_struct),
            go_passed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub ideal_label: String,
    pub ideal_dim: usize,
    pub preconditions: Preconditions,
    pub status: TheoremStatus,
    pub max_spread: f64,
    pub scope: &'static str,
    pub profiles: Vec<LengthProfile>,
}

fn ideal_fields(a: &Subspace, plan: &OrbitPlan) -> Vec<AlgVector> {
    let mut fields = a.spanning_vectors();
    if a.dim() > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        for _ in 0..plan.ideal_samples {
            let c: nalgebra::DVector<f64> = nalgebra::DVector::from_fn(a.dim(), |_, _| StandardNormal.sample(&mut rng));
            fields.push(a.span().transpose() * c);
        }
    }
    fields
}

/// Checks that every element of the abelian ideal `a` has constant length.
///
/// `go_passed` is the GO survey verdict of the model, which is the hypothesis
/// under which constancy is predicted.
pub fn verify_abelian_ideal_theorem(
    model: &HomogeneousModel,
    a: &Subspace,
    plan: &OrbitPlan,
    go_passed: bool,
) -> Result<TheoremReport, ModelError> {
    check_len(&AlgVector::zeros(a.ambient_dim()), model.dim())?;
    let preconditions = Preconditions::evaluate(model, a, go_passed);
    let sampler = OrbitSampler::new(model, plan);
    let profiles = ideal_fields(a, plan)
        .iter()
        .map(|x| sampler.profile(x))
        .collect::<Result<Vec<_>, _>>()?;
    let max_spread = profiles.iter().map(|p| p.spread).fold(0.0, f64::max);
    let all_constant = profiles.iter().all(|p| p.verdict == LengthVerdict::Constant);
    let any_nonconstant = profiles.iter().any(|p| p.verdict == LengthVerdict::NonConstant);
    let status = if !preconditions.met() {
        TheoremStatus::PreconditionFailed
    } else if all_constant {
        TheoremStatus::Pass
    } else if any_nonconstant {
        TheoremStatus::Contradiction
    } else {
        TheoremStatus::Indeterminate
    };
    Ok(TheoremReport {
        ideal_label: a.label().to_string(),
        ideal_dim: a.dim(),
        preconditions,
        status,
        max_spread,
        scope: PROFILE_SCOPE,
        profiles,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ParallelCandidate {
    pub field: Vec<f64>,
    pub ricci: f64,
    pub length_verdict: LengthVerdict,
}

/// Constant-length fields of `a` with vanishing Ricci curvature. No splitting
/// of the manifold is claimed.
#[derive(Debug, Clone, Serialize)]
pub struct ParallelCandidateReport {
    pub ideal_label: String,
    pub preconditions: Preconditions,
    pub candidates: Vec<ParallelCandidate>,
}

pub fn parallel_candidate_report(
    model: &HomogeneousModel,
    a: &Subspace,
    plan: &OrbitPlan,
    go_passed: bool,
) -> Result<ParallelCandidateReport, ModelError> {
    check_len(&AlgVector::zeros(a.ambient_dim()), model.dim())?;
    let preconditions = Preconditions::evaluate(model, a, go_passed);
    let eps = model.tolerances().eps_len;
    let sampler = OrbitSampler::new(model, plan);
    let mut candidates = Vec::new();
    for x in a.spanning_vectors() {
        let profile = sampler.profile(&x)?;
        let xm = model.pm(&x);
        let ric = ricci(model, &xm)?.value;
        if profile.verdict == LengthVerdict::Constant && ric.abs() <= eps * (1.0 + model.g(&xm, &xm)) {
            candidates.push(ParallelCandidate { field: x.iter().copied().collect(), ricci: ric, length_verdict: profile.verdict });
        }
    }
    Ok(ParallelCandidateReport { ideal_label: a.label().to_string(), preconditions, candidates })
}
