//! Finding every social model of a framework.
//!
//! [`enumerate_models`] solves from many starting points (the support vector,
//! low/high corners of the hypercube, seeded random points) and keeps the
//! distinct roots. [`grid_oracle`] is an independent check for small
//! frameworks: it scans a regular grid of the hypercube, keeps the grid
//! points whose residual is small enough to lie next to a root, and only
//! uses Newton to polish the local minima it found.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::framework::{ArgumentId, SocialFramework};
use crate::semantics::{max_distance, ProductOperator, SemanticsConfig, SemanticsError, Valuation};
use crate::solver::{FixedPointSolver, SolveOutcome, SolverConfig, SolverError};

/// Largest framework accepted by the grid oracle.
pub const GRID_ORACLE_MAX_ARGUMENTS: usize = 4;
/// Newton steps spent polishing each grid candidate.
const POLISH_STEPS: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnumerationError {
    #[error("invalid enumeration configuration: {0}")]
    InvalidConfig(String),
    #[error("grid oracle supports at most {max} arguments, framework has {arguments}")]
    TooLarge { arguments: usize, max: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnumerationConfig {
    pub random_starts: usize,
    pub seed: u64,
    /// Models closer than this in the max-norm are merged.
    pub dedup_distance: f64,
    /// Low and high coordinate used for corner starts.
    pub corner_levels: (f64, f64),
    /// Corner starts are used only when `2^|A|` does not exceed this.
    pub corner_limit: usize,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig {
            random_starts: 256,
            seed: 0,
            dedup_distance: 1e-6,
            corner_levels: (0.05, 0.95),
            corner_limit: 4096,
        }
    }
}

impl EnumerationConfig {
    pub fn validate(&self, scfg: &SolverConfig) -> Result<(), EnumerationError> {
        if !(self.dedup_distance > scfg.tolerance && self.dedup_distance.is_finite()) {
            return Err(EnumerationError::InvalidConfig(format!(
                "dedup distance {} must exceed the solver tolerance {}",
                self.dedup_distance, scfg.tolerance
            )));
        }
        let (lo, hi) = self.corner_levels;
        if !((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi)) {
            return Err(EnumerationError::InvalidConfig(format!(
                "corner levels ({lo}, {hi}) must lie in [0, 1]"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoundModel {
    pub model: Valuation,
    pub residual: f64,
}

/// Distinct models found by a search, sorted lexicographically by value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSet {
    pub models: Vec<FoundModel>,
    pub starts_used: usize,
    pub non_converged: usize,
    /// Set only by the grid oracle.
    pub exhaustive: bool,
}

impl ModelSet {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// Index of a stored model within `distance` of `values`, if any.
    pub fn position_near(&self, values: &[f64], distance: f64) -> Option<usize> {
        self.models
            .iter()
            .position(|m| max_distance(m.model.values(), values) <= distance)
    }
}

/// Multi-start search for all models of `fw`.
pub fn enumerate_models(
    fw: &SocialFramework,
    cfg: &SemanticsConfig,
    scfg: &SolverConfig,
    ecfg: &EnumerationConfig,
) -> Result<ModelSet, EnumerationError> {
    enumerate_models_with_supports(fw, cfg, scfg, ecfg, None)
}

/// Same as [`enumerate_models`] with the supports replaced by `tau_override`.
pub fn enumerate_models_with_supports(
    fw: &SocialFramework,
    cfg: &SemanticsConfig,
    scfg: &SolverConfig,
    ecfg: &EnumerationConfig,
    tau_override: Option<&[f64]>,
) -> Result<ModelSet, EnumerationError> {
    scfg.validate()?;
    ecfg.validate(scfg)?;
    let op = ProductOperator::new(fw, cfg, tau_override)?;
    let solver = FixedPointSolver::new(fw, &op, *scfg);
    let starts = starting_points(&op, ecfg);

    let outcomes: Vec<Result<SolveOutcome, SolverError>> =
        starts.par_iter().map(|s| solver.solve(s)).collect();

    let starts_used = starts.len();
    let mut converged = Vec::with_capacity(starts_used);
    let mut non_converged = 0;
    for outcome in outcomes {
        match outcome {
            Ok(out) => converged.push((out.model.into_values(), out.residual)),
            Err(_) => non_converged += 1,
        }
    }
    Ok(ModelSet {
        models: deduplicate(converged, ecfg.dedup_distance),
        starts_used,
        non_converged,
        exhaustive: false,
    })
}

fn starting_points(op: &ProductOperator, ecfg: &EnumerationConfig) -> Vec<Vec<f64>> {
    let n = op.dim();
    let mut starts = vec![op.supports().to_vec()];
    let corner_count = u32::try_from(n).ok().and_then(|n| 1usize.checked_shl(n));
    if let Some(count) = corner_count.filter(|&c| c <= ecfg.corner_limit) {
        let (lo, hi) = ecfg.corner_levels;
        for mask in 0..count {
            starts.push((0..n).map(|i| if mask >> i & 1 == 1 { hi } else { lo }).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ecfg.seed);
    for _ in 0..ecfg.random_starts {
        starts.push((0..n).map(|_| rng.random::<f64>()).collect());
    }
    starts
}

/// Sorts lexicographically, then keeps each point farther than `distance`
/// from every point already kept.
fn deduplicate(mut points: Vec<(Vec<f64>, f64)>, distance: f64) -> Vec<FoundModel> {
    points.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.total_cmp(&b.1))
    });
    let mut kept: Vec<FoundModel> = Vec::new();
    for (values, residual) in points {
        if kept
            .iter()
            .all(|k| max_distance(k.model.values(), &values) > distance)
        {
            kept.push(FoundModel {
                model: Valuation::from_raw(values),
                residual,
            });
        }
    }
    kept
}

/// Grid scan of `[0, 1]^|A|` at spacing `1 / resolution`, with default solver
/// settings for the final Newton polish.
pub fn grid_oracle(
    fw: &SocialFramework,
    cfg: &SemanticsConfig,
    resolution: usize,
) -> Result<ModelSet, EnumerationError> {
    grid_oracle_with(
        fw,
        cfg,
        &SolverConfig::default(),
        resolution,
        EnumerationConfig::default().dedup_distance,
    )
}

pub fn grid_oracle_with(
    fw: &SocialFramework,
    cfg: &SemanticsConfig,
    scfg: &SolverConfig,
    resolution: usize,
    dedup_distance: f64,
) -> Result<ModelSet, EnumerationError> {
    if fw.len() > GRID_ORACLE_MAX_ARGUMENTS {
        return Err(EnumerationError::TooLarge {
            arguments: fw.len(),
            max: GRID_ORACLE_MAX_ARGUMENTS,
        });
    }
    if resolution == 0 {
        return Err(EnumerationError::InvalidConfig("resolution must be positive".into()));
    }
    scfg.validate()?;
    let op = ProductOperator::new(fw, cfg, None)?;
    let solver = FixedPointSolver::new(fw, &op, *scfg);

    let scan = GridScan::new(&op, resolution);
    let near_root = scan.points_near_roots();
    let candidates = scan.local_minima(&near_root);

    let mut polished = Vec::new();
    let mut failed = 0;
    for cell in &candidates {
        let (x, residual) = solver.polish(&scan.point(cell), POLISH_STEPS);
        if residual <= scfg.tolerance {
            polished.push((x, residual));
        } else {
            failed += 1;
        }
    }
    Ok(ModelSet {
        models: deduplicate(polished, dedup_distance),
        starts_used: candidates.len(),
        non_converged: failed,
        exhaustive: true,
    })
}

type Cell = Vec<u32>;

struct GridScan<'a> {
    op: &'a ProductOperator,
    resolution: usize,
    step: f64,
    lipschitz: f64,
    /// Any root lies within half a step of some grid point, whose residual
    /// is then at most `lipschitz * step / 2`.
    threshold: f64,
}

impl<'a> GridScan<'a> {
    fn new(op: &'a ProductOperator, resolution: usize) -> Self {
        let step = 1.0 / resolution as f64;
        let lipschitz = op.residual_lipschitz();
        GridScan {
            op,
            resolution,
            step,
            lipschitz,
            threshold: lipschitz * step * 0.5 * (1.0 + 1e-9),
        }
    }

    fn point(&self, cell: &[u32]) -> Vec<f64> {
        cell.iter().map(|&i| i as f64 * self.step).collect()
    }

    /// Every grid point with residual at most the threshold. Boxes of grid
    /// points are skipped when the residual at their centre, minus the
    /// Lipschitz bound over the box, already exceeds the threshold; the
    /// result equals a full scan of the grid.
    fn points_near_roots(&self) -> HashMap<Cell, f64> {
        let n = self.op.dim();
        let mut kept = HashMap::new();
        let full: Vec<(u32, u32)> = vec![(0, self.resolution as u32); n];
        let mut stack = vec![full];
        while let Some(bounds) = stack.pop() {
            let centre: Vec<f64> = bounds
                .iter()
                .map(|&(lo, hi)| (lo + hi) as f64 * 0.5 * self.step)
                .collect();
            let half_width = bounds
                .iter()
                .map(|&(lo, hi)| (hi - lo) as f64 * 0.5 * self.step)
                .fold(0.0, f64::max);
            let residual = self.op.residual(&centre);
            if residual - self.lipschitz * half_width > self.threshold {
                continue;
            }
            let widest = bounds
                .iter()
                .enumerate()
                .max_by_key(|(_, &(lo, hi))| hi - lo)
                .map(|(d, _)| d);
            match widest {
                Some(d) if bounds[d].1 > bounds[d].0 => {
                    let (lo, hi) = bounds[d];
                    let mid = lo + (hi - lo) / 2;
                    let mut left = bounds.clone();
                    left[d] = (lo, mid);
                    let mut right = bounds;
                    right[d] = (mid + 1, hi);
                    stack.push(left);
                    stack.push(right);
                }
                _ => {
                    // single grid point (or the empty framework)
                    if residual <= self.threshold {
                        kept.insert(bounds.iter().map(|&(lo, _)| lo).collect(), residual);
                    }
                }
            }
        }
        kept
    }

    /// Kept points not beaten by any kept neighbour (including diagonals).
    /// Ties are broken by cell order so a flat minimum yields one candidate.
    fn local_minima(&self, kept: &HashMap<Cell, f64>) -> Vec<Cell> {
        let n = self.op.dim();
        let offsets: Vec<Vec<i64>> = (0..3usize.pow(n as u32))
            .map(|k| (0..n).map(|d| (k / 3usize.pow(d as u32) % 3) as i64 - 1).collect())
            .filter(|o: &Vec<i64>| o.iter().any(|&v| v != 0))
            .collect();
        let mut minima: Vec<Cell> = kept
            .iter()
            .filter(|(cell, &r)| {
                offsets.iter().all(|off| {
                    let neighbour: Option<Cell> = cell
                        .iter()
                        .zip(off)
                        .map(|(&c, &o)| u32::try_from(c as i64 + o).ok())
                        .collect();
                    match neighbour.and_then(|nb| kept.get(&nb).map(|&nr| (nb, nr))) {
                        Some((nb, nr)) => (r, *cell) < (nr, &nb),
                        None => true,
                    }
                })
            })
            .map(|(cell, _)| cell.clone())
            .collect();
        minima.sort();
        minima
    }
}

/// A total preorder over arguments, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ranking {
    pub tiers: Vec<Vec<ArgumentId>>,
}

impl Ranking {
    /// Orders arguments by descending value. Neighbouring values within
    /// `tie_epsilon` share a tier; tiers list arguments in canonical order.
    pub fn from_values(fw: &SocialFramework, values: &[f64], tie_epsilon: f64) -> Ranking {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        let mut tiers: Vec<Vec<usize>> = Vec::new();
        let mut previous = f64::NAN;
        for i in order {
            match tiers.last_mut() {
                Some(tier) if previous - values[i] <= tie_epsilon => tier.push(i),
                _ => tiers.push(vec![i]),
            }
            previous = values[i];
        }
        Ranking {
            tiers: tiers
                .into_iter()
                .map(|mut t| {
                    t.sort_unstable();
                    t.into_iter().map(|i| fw.arguments()[i].clone()).collect()
                })
                .collect(),
        }
    }

    /// Position of the tier holding `arg`, 0 being the best.
    pub fn tier_of(&self, arg: &ArgumentId) -> Option<usize> {
        self.tiers.iter().position(|t| t.contains(arg))
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tiers: Vec<String> = self
            .tiers
            .iter()
            .map(|t| t.iter().map(ArgumentId::as_str).collect::<Vec<_>>().join(" ≃ "))
            .collect();
        f.write_str(&tiers.join(" ≻ "))
    }
}

/// Default tie tolerance for rankings.
pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;

pub fn rankings_of(fw: &SocialFramework, ms: &ModelSet, tie_epsilon: f64) -> Vec<Ranking> {
    ms.models
        .iter()
        .map(|m| Ranking::from_values(fw, m.model.values(), tie_epsilon))
        .collect()
}
