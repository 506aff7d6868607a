//! Uniqueness certificate, the scalar reduction for three-argument cliques,
//! the normalisation repair and the ordinal independence experiment.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::enumeration::{enumerate_models_with_supports, EnumerationConfig, EnumerationError, ModelSet};
use crate::framework::{ArgumentId, FrameworkError, SocialFramework, VoteRecord};
use crate::semantics::{tau, SemanticsConfig, Valuation};
use crate::solver::{solve, SolverConfig, SolverError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("supports must lie strictly inside (0, 1), got {0:?}")]
    DomainViolation([f64; 3]),
    #[error("bisection tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("normalisation needs at least one argument")]
    EmptyFramework,
    #[error("normalised supports still violate the uniqueness condition at `{0}`")]
    CertificateBroken(ArgumentId),
    #[error("expected exactly one normalised model, found {0}")]
    NotUnique(usize),
    #[error("no start converged during enumeration")]
    NoModel,
    #[error(transparent)]
    Framework(#[from] FrameworkError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Result of checking `|Att(a)| * tau(a) < 1` for every argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessCertificate {
    pub holds: bool,
    /// First argument (canonical order) whose margin is not positive.
    pub witness: Option<ArgumentId>,
    /// `1 - |Att(a)| * tau(a)` per argument.
    pub margins: BTreeMap<ArgumentId, f64>,
}

/// Sufficient (not necessary) condition for a unique model.
pub fn certify_uniqueness(fw: &SocialFramework, cfg: &SemanticsConfig) -> UniquenessCertificate {
    let supports: Vec<f64> = fw.votes().iter().map(|v| tau(cfg, *v)).collect();
    certify_with_supports(fw, &supports)
}

pub fn certify_with_supports(fw: &SocialFramework, supports: &[f64]) -> UniquenessCertificate {
    let margins: BTreeMap<ArgumentId, f64> = fw
        .arguments()
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), 1.0 - fw.attacker_indices(i).len() as f64 * supports[i]))
        .collect();
    let witness = margins
        .iter()
        .find(|(_, &m)| m <= 0.0)
        .map(|(a, _)| a.clone());
    UniquenessCertificate {
        holds: witness.is_none(),
        witness,
        margins,
    }
}

const BISECTION_MAX_STEPS: usize = 200;

/// The unique model of the full mutual-attack clique on three arguments
/// with supports `a1, a2, a3` in `(0, 1)`, computed without a multivariate
/// solver.
///
/// With supports sorted so that `s1 >= s2 >= s3`, the two smaller
/// coordinates are `x_k = 1/2 - sqrt(1/4 - (s_k/s1) * x1 * (1 - x1))`, which
/// turns the system into the scalar equation `x1 = f(x1)` with
/// `f(x) = s1 * (1/2 + sqrt(...)) * (1/2 + sqrt(...))`. `f(0) = f(1) = s1`,
/// so `f(x) - x` changes sign on `[0, 1]` and bisection finds the root.
/// The output is returned in the input order.
pub fn solve_three_clique(a1: f64, a2: f64, a3: f64, tol: f64) -> Result<[f64; 3], AnalysisError> {
    let input = [a1, a2, a3];
    if input.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(AnalysisError::DomainViolation(input));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(AnalysisError::InvalidTolerance(tol));
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| input[j].total_cmp(&input[i]));
    let [s1, s2, s3] = order.map(|i| input[i]);
    let (r2, r3) = (s2 / s1, s3 / s1);

    // 1/2 - x2 (resp. x3) as a function of x1
    let offset = |ratio: f64, x1: f64| {
        let spread = 0.25 - (0.5 - x1) * (0.5 - x1);
        (0.25 - ratio * spread).max(0.0).sqrt()
    };
    let f = |x1: f64| s1 * (0.5 + offset(r2, x1)) * (0.5 + offset(r3, x1));

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_MAX_STEPS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x1 = 0.5 * (lo + hi);
    let sorted = [x1, 0.5 - offset(r2, x1), 0.5 - offset(r3, x1)];

    let mut out = [0.0; 3];
    for (k, &i) in order.iter().enumerate() {
        out[i] = sorted[k];
    }
    Ok(out)
}

/// Max-norm defect of `x` in the three-clique system
/// `x_i = a_i * prod_{j != i} (1 - x_j)`.
pub fn three_clique_residual(supports: [f64; 3], x: [f64; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let rhs = (0..3)
                .filter(|&j| j != i)
                .fold(supports[i], |acc, j| acc * (1.0 - x[j]));
            (x[i] - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Outcome of solving with supports divided by the number of arguments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedSolution {
    /// The unique model of the normalised system.
    pub normalized_model: Valuation,
    /// Model values multiplied back by `|A|`; may exceed 1.
    pub scores: Vec<f64>,
    pub certificate: UniquenessCertificate,
    pub models: ModelSet,
}

impl NormalizedSolution {
    pub fn score(&self, fw: &SocialFramework, arg: &ArgumentId) -> Result<f64, FrameworkError> {
        Ok(self.scores[fw.index_of(arg)?])
    }
}

/// Divides every support by `|A|`, which forces the uniqueness condition,
/// finds the model and rescales it by `|A|` for ranking.
pub fn normalized_solve(
    fw: &SocialFramework,
    cfg: &SemanticsConfig,
    scfg: &SolverConfig,
    ecfg: &EnumerationConfig,
) -> Result<NormalizedSolution, AnalysisError> {
    if fw.is_empty() {
        return Err(AnalysisError::EmptyFramework);
    }
    let n = fw.len() as f64;
    let supports: Vec<f64> = fw.votes().iter().map(|v| tau(cfg, *v) / n).collect();
    let certificate = certify_with_supports(fw, &supports);
    if let Some(w) = &certificate.witness {
        return Err(AnalysisError::CertificateBroken(w.clone()));
    }
    let models = enumerate_models_with_supports(fw, cfg, scfg, ecfg, Some(&supports))?;
    match models.len() {
        0 => Err(AnalysisError::NoModel),
        1 => {
            let normalized_model = models.models[0].model.clone();
            let scores = normalized_model.values().iter().map(|v| v * n).collect();
            Ok(NormalizedSolution {
                normalized_model,
                scores,
                certificate,
                models,
            })
        }
        k => Err(AnalysisError::NotUnique(k)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Vote-derived supports, one solve from the support vector.
    Raw,
    /// Supports divided by `|A|`, scores rescaled by `|A|`.
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOrder {
    FirstAbove,
    Tied,
    SecondAbove,
}

impl PairOrder {
    fn of(first: f64, second: f64, tie_epsilon: f64) -> Self {
        if (first - second).abs() <= tie_epsilon {
            PairOrder::Tied
        } else if first > second {
            PairOrder::FirstAbove
        } else {
            PairOrder::SecondAbove
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub focus_pair: (ArgumentId, ArgumentId),
    pub mode: SolveMode,
    pub padding_count: usize,
    pub values_before: (f64, f64),
    pub values_after: (f64, f64),
    pub ranking_before: PairOrder,
    pub ranking_after: PairOrder,
    pub violated: bool,
}

/// Settings shared by the experiment's two solves.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentSettings {
    pub solver: SolverConfig,
    pub enumeration: EnumerationConfig,
    pub tie_epsilon: f64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            solver: SolverConfig::default(),
            enumeration: EnumerationConfig::default(),
            tie_epsilon: crate::enumeration::DEFAULT_TIE_EPSILON,
        }
    }
}

/// Compares the order of the focus pair before and after adding
/// `padding_count` unattacked arguments with `padding_votes`.
pub fn independence_experiment(
    fw: &SocialFramework,
    cfg: &SemanticsConfig,
    focus: (&ArgumentId, &ArgumentId),
    padding_count: usize,
    padding_votes: VoteRecord,
    mode: SolveMode,
    settings: &ExperimentSettings,
) -> Result<IndependenceReport, AnalysisError> {
    fw.index_of(focus.0)?;
    fw.index_of(focus.1)?;
    let padded = fw.disjoint_union(&padding(fw, padding_count, padding_votes))?;

    let values_before = focus_values(fw, cfg, focus, mode, settings)?;
    let values_after = focus_values(&padded, cfg, focus, mode, settings)?;
    let ranking_before = PairOrder::of(values_before.0, values_before.1, settings.tie_epsilon);
    let ranking_after = PairOrder::of(values_after.0, values_after.1, settings.tie_epsilon);
    Ok(IndependenceReport {
        focus_pair: (focus.0.clone(), focus.1.clone()),
        mode,
        padding_count,
        values_before,
        values_after,
        ranking_before,
        ranking_after,
        violated: ranking_before != ranking_after,
    })
}

/// Fresh unattacked arguments named `pad{i}`, skipping names already in `fw`.
fn padding(fw: &SocialFramework, count: usize, votes: VoteRecord) -> SocialFramework {
    let mut names = Vec::with_capacity(count);
    let mut i = 0usize;
    while names.len() < count {
        let id = ArgumentId::new(format!("pad{i}")).expect("padding names are valid");
        if fw.index_of(&id).is_err() {
            names.push(id);
        }
        i += 1;
    }
    let vote_map: BTreeMap<_, _> = names.iter().cloned().map(|a| (a, votes)).collect();
    SocialFramework::build(names, Vec::new(), &vote_map).expect("padding framework is well formed")
}

fn focus_values(
    fw: &SocialFramework,
    cfg: &SemanticsConfig,
    focus: (&ArgumentId, &ArgumentId),
    mode: SolveMode,
    settings: &ExperimentSettings,
) -> Result<(f64, f64), AnalysisError> {
    let (i, j) = (fw.index_of(focus.0)?, fw.index_of(focus.1)?);
    match mode {
        SolveMode::Raw => {
            let start = Valuation::supports(fw, cfg);
            let out = solve(fw, cfg, &settings.solver, &start, None)?;
            Ok((out.model.values()[i], out.model.values()[j]))
        }
        SolveMode::Normalized => {
            let sol = normalized_solve(fw, cfg, &settings.solver, &settings.enumeration)?;
            Ok((sol.scores[i], sol.scores[j]))
        }
    }
}
