//! Computes one social model: damped Picard iteration on the model equation
//! until the residual is small, then Newton on `F(x) = x - rhs(x)`.
//!
//! The Jacobian of `rhs` only couples arguments joined by an attack, so it is
//! block diagonal over the weakly connected components. Newton steps solve
//! each block with a dense LU factorisation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::framework::SocialFramework;
use crate::semantics::{ProductOperator, SemanticsConfig, SemanticsError, Valuation};

/// Largest component handled by dense Newton steps. Frameworks with a
/// bigger component are solved by Picard iteration alone.
pub const DENSE_NEWTON_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Target max-norm residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight of the new iterate in a Picard step, in `(0, 1]`.
    pub damping: f64,
    /// Newton takes over once the residual drops below this.
    pub newton_switch_residual: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-12,
            max_iterations: 10_000,
            damping: 0.5,
            newton_switch_residual: 1e-3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.tolerance.is_nan() || self.tolerance >= self.newton_switch_residual {
            return bad(format!(
                "tolerance {} must be below the Newton switch residual {}",
                self.tolerance, self.newton_switch_residual
            ));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Picard,
    Newton,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutcome {
    pub model: Valuation,
    pub residual: f64,
    pub iterations: usize,
    /// Phases in the order they ran; consecutive steps of one kind are merged.
    pub method_trace: Vec<Phase>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("no convergence after {iterations} iterations (best residual {residual:e})")]
    NonConvergence {
        best: Valuation,
        residual: f64,
        iterations: usize,
    },
    #[error("singular Newton system and Picard fallback stalled after {iterations} iterations (best residual {residual:e})")]
    SingularJacobian {
        best: Valuation,
        residual: f64,
        iterations: usize,
    },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// One damped Picard step `(1 - d) m + d rhs(m)`, clamped to `[0, 1]`.
pub fn picard_step(
    fw: &SocialFramework,
    cfg: &SemanticsConfig,
    m: &Valuation,
    damping: f64,
) -> Result<Valuation, SolverError> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(SolverError::InvalidConfig(format!(
            "damping must lie in (0, 1], got {damping}"
        )));
    }
    check_len(fw, m)?;
    let op = ProductOperator::new(fw, cfg, None)?;
    let mut x = m.values().to_vec();
    let mut scratch = vec![0.0; x.len()];
    damped_update(&op, &mut x, &mut scratch, damping);
    Ok(Valuation::from_raw(x))
}

/// Analytic Jacobian of the model equation's right-hand side at `m`, rows
/// and columns in canonical argument order.
pub fn jacobian(
    fw: &SocialFramework,
    cfg: &SemanticsConfig,
    m: &Valuation,
    tau_override: Option<&[f64]>,
) -> Result<DMatrix<f64>, SemanticsError> {
    if m.len() != fw.len() {
        return Err(SemanticsError::LengthMismatch {
            expected: fw.len(),
            got: m.len(),
        });
    }
    Ok(ProductOperator::new(fw, cfg, tau_override)?.jacobian(m.values()))
}

/// Solves the model equation starting from `start`.
pub fn solve(
    fw: &SocialFramework,
    cfg: &SemanticsConfig,
    scfg: &SolverConfig,
    start: &Valuation,
    tau_override: Option<&[f64]>,
) -> Result<SolveOutcome, SolverError> {
    scfg.validate()?;
    check_len(fw, start)?;
    let op = ProductOperator::new(fw, cfg, tau_override)?;
    FixedPointSolver::new(fw, &op, *scfg).solve(start.values())
}

fn check_len(fw: &SocialFramework, m: &Valuation) -> Result<(), SolverError> {
    if m.len() != fw.len() {
        return Err(SemanticsError::LengthMismatch {
            expected: fw.len(),
            got: m.len(),
        }
        .into());
    }
    Ok(())
}

fn damped_update(op: &ProductOperator, x: &mut [f64], scratch: &mut [f64], damping: f64) {
    op.apply(x, scratch);
    for (xi, ri) in x.iter_mut().zip(scratch.iter()) {
        *xi = ((1.0 - damping) * *xi + damping * ri).clamp(0.0, 1.0);
    }
}

/// A solver bound to one compiled operator; reused across many starts.
pub(crate) struct FixedPointSolver<'a> {
    op: &'a ProductOperator,
    blocks: Vec<Vec<usize>>,
    cfg: SolverConfig,
    newton_enabled: bool,
}

impl<'a> FixedPointSolver<'a> {
    pub(crate) fn new(fw: &SocialFramework, op: &'a ProductOperator, cfg: SolverConfig) -> Self {
        let blocks = fw.components();
        let newton_enabled = blocks.iter().all(|b| b.len() <= DENSE_NEWTON_LIMIT);
        FixedPointSolver {
            op,
            blocks,
            cfg,
            newton_enabled,
        }
    }

    pub(crate) fn solve(&self, start: &[f64]) -> Result<SolveOutcome, SolverError> {
        let cfg = &self.cfg;
        let mut x: Vec<f64> = start.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let mut scratch = vec![0.0; x.len()];
        let mut residual = self.op.residual(&x);
        let mut best = (x.clone(), residual);
        let mut iterations = 0;
        let mut trace: Vec<Phase> = Vec::new();
        let mut newton_gate = cfg.newton_switch_residual;
        let mut last_newton_singular = false;

        let record = |trace: &mut Vec<Phase>, phase: Phase| {
            if trace.last() != Some(&phase) {
                trace.push(phase);
            }
        };

        while residual > cfg.tolerance {
            if iterations >= cfg.max_iterations {
                let (best, residual) = best;
                let best = Valuation::from_raw(best);
                return Err(if last_newton_singular {
                    SolverError::SingularJacobian {
                        best,
                        residual,
                        iterations,
                    }
                } else {
                    SolverError::NonConvergence {
                        best,
                        residual,
                        iterations,
                    }
                });
            }

            if self.newton_enabled && residual < newton_gate {
                match self.newton_step(&x) {
                    Some(candidate) => {
                        iterations += 1;
                        record(&mut trace, Phase::Newton);
                        let candidate_residual = self.op.residual(&candidate);
                        last_newton_singular = false;
                        if candidate_residual < residual {
                            x = candidate;
                            residual = candidate_residual;
                            if residual < best.1 {
                                best = (x.clone(), residual);
                            }
                            continue;
                        }
                        // Newton did not help here: let Picard make progress first.
                        newton_gate = residual * 0.5;
                    }
                    None => {
                        last_newton_singular = true;
                        newton_gate = residual * 0.5;
                    }
                }
            }

            damped_update(self.op, &mut x, &mut scratch, cfg.damping);
            iterations += 1;
            record(&mut trace, Phase::Picard);
            residual = self.op.residual(&x);
            if residual < best.1 {
                best = (x.clone(), residual);
            }
        }

        Ok(SolveOutcome {
            model: Valuation::from_raw(x),
            residual,
            iterations,
            method_trace: trace,
        })
    }

    /// Newton iterations only, for polishing a candidate that is already
    /// close to a root. Returns the final point and its residual.
    pub(crate) fn polish(&self, start: &[f64], max_steps: usize) -> (Vec<f64>, f64) {
        let mut x: Vec<f64> = start.to_vec();
        let mut residual = self.op.residual(&x);
        for _ in 0..max_steps {
            if residual <= self.cfg.tolerance {
                break;
            }
            let Some(candidate) = self.newton_step(&x) else {
                break;
            };
            let candidate_residual = self.op.residual(&candidate);
            if candidate_residual >= residual {
                break;
            }
            x = candidate;
            residual = candidate_residual;
        }
        (x, residual)
    }

    /// Full Newton step on `F(x) = x - rhs(x)`, block by block. `None` when a
    /// block system is singular.
    fn newton_step(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = x.len();
        let mut local = vec![usize::MAX; n];
        let mut next = x.to_vec();
        for block in &self.blocks {
            let k = block.len();
            for (pos, &g) in block.iter().enumerate() {
                local[g] = pos;
            }
            // (I - J) delta = -(x - rhs(x))
            let mut system = DMatrix::<f64>::identity(k, k);
            let mut rhs = DVector::<f64>::zeros(k);
            for (row, &a) in block.iter().enumerate() {
                rhs[row] = self.op.rhs_at(a, x) - x[a];
                let attackers = self.op.attackers(a);
                for &b in attackers {
                    let partial = attackers
                        .iter()
                        .filter(|&&c| c != b)
                        .fold(self.op.supports()[a], |acc, &c| acc * (1.0 - x[c]));
                    system[(row, local[b])] += partial;
                }
            }
            let delta = if k == 1 {
                let pivot = system[(0, 0)];
                if pivot.abs() < f64::EPSILON {
                    return None;
                }
                DVector::from_element(1, rhs[0] / pivot)
            } else {
                system.lu().solve(&rhs)?
            };
            if delta.iter().any(|d| !d.is_finite()) {
                return None;
            }
            for (row, &g) in block.iter().enumerate() {
                next[g] = (x[g] + delta[row]).clamp(0.0, 1.0);
            }
        }
        Some(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::framework::VoteRecord;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> SemanticsConfig {
        SemanticsConfig::default()
    }

    fn two_cycle() -> SocialFramework {
        SocialFramework::from_parts(&["a", "b"], &[("a", "b"), ("b", "a")], &[("a", 1, 0), ("b", 1, 0)])
            .unwrap()
    }

    /// Central differences of `rhs`, independent of the analytic formula.
    fn finite_difference_jacobian(op: &ProductOperator, x: &[f64], h: f64) -> DMatrix<f64> {
        let n = x.len();
        let mut jac = DMatrix::zeros(n, n);
        let mut plus = vec![0.0; n];
        let mut minus = vec![0.0; n];
        for b in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[b] += h;
            xm[b] -= h;
            op.apply(&xp, &mut plus);
            op.apply(&xm, &mut minus);
            for a in 0..n {
                jac[(a, b)] = (plus[a] - minus[a]) / (2.0 * h);
            }
        }
        jac
    }

    #[test]
    fn picard_examples() {
        let fw = fixtures::figure1();
        let zero = Valuation::constant(&fw, 0.0).unwrap();
        let full = picard_step(&fw, &cfg(), &zero, 1.0).unwrap();
        assert!(full.values().iter().all(|v| (v - 1.0 / 1.1).abs() < 1e-15));
        let half = picard_step(&fw, &cfg(), &zero, 0.5).unwrap();
        assert!(half.values().iter().all(|v| (v - 0.45455).abs() < 1e-5));
        assert!(picard_step(&fw, &cfg(), &zero, 0.0).is_err());
        assert!(picard_step(&fw, &cfg(), &zero, 1.5).is_err());
    }

    #[test]
    fn picard_fixed_point_is_stationary() {
        let fw = two_cycle();
        let root = 1.0 / 2.1;
        let m = Valuation::constant(&fw, root).unwrap();
        for d in [0.1, 0.5, 1.0] {
            let next = picard_step(&fw, &cfg(), &m, d).unwrap();
            assert!(next.distance(&m) < 1e-15);
        }
    }

    #[test]
    fn jacobian_examples() {
        let fw = SocialFramework::from_parts(&["x"], &[], &[("x", 1, 0)]).unwrap();
        let m = Valuation::constant(&fw, 0.3).unwrap();
        assert_eq!(jacobian(&fw, &cfg(), &m, None).unwrap()[(0, 0)], 0.0);

        let fw = two_cycle();
        let m = Valuation::constant(&fw, 0.0).unwrap();
        let j = jacobian(&fw, &cfg(), &m, None).unwrap();
        assert_eq!(j[(0, 0)], 0.0);
        assert_eq!(j[(1, 1)], 0.0);
        assert!((j[(0, 1)] + 1.0 / 1.1).abs() < 1e-15);
        assert!((j[(1, 0)] + 1.0 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let self_loop = SocialFramework::from_parts(
            &["s", "t"],
            &[("s", "s"), ("s", "t"), ("t", "s")],
            &[("s", 3, 1), ("t", 1, 0)],
        )
        .unwrap();
        for fw in [fixtures::figure1(), fixtures::example2(), self_loop] {
            let op = ProductOperator::new(&fw, &cfg(), None).unwrap();
            for _ in 0..20 {
                let x: Vec<f64> = (0..fw.len()).map(|_| rng.random_range(0.01..0.99)).collect();
                let diff = (op.jacobian(&x) - finite_difference_jacobian(&op, &x, 1e-7)).abs().max();
                assert!(diff < 1e-6, "max entry error {diff}");
            }
        }
    }

    #[test]
    fn solve_figure1_symmetric_start() {
        let fw = fixtures::figure1();
        let start = Valuation::supports(&fw, &cfg());
        let out = solve(&fw, &cfg(), &SolverConfig::default(), &start, None).unwrap();
        assert!(out.residual <= 1e-12);
        for v in out.model.values() {
            assert!((v - 0.36573).abs() < 1e-4);
        }
        assert!(out.method_trace.contains(&Phase::Newton));
    }

    #[test]
    fn solve_single_unattacked() {
        let fw = SocialFramework::from_parts(&["x"], &[], &[("x", 1, 0)]).unwrap();
        let start = Valuation::supports(&fw, &cfg());
        let out = solve(&fw, &cfg(), &SolverConfig::default(), &start, None).unwrap();
        assert!((out.model.values()[0] - 1.0 / 1.1).abs() < 1e-15);
        assert!(out.iterations <= 1);

        // inside the Newton radius a single step lands on the constant
        let start = Valuation::constant(&fw, 0.9095).unwrap();
        let out = solve(&fw, &cfg(), &SolverConfig::default(), &start, None).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.method_trace, vec![Phase::Newton]);
    }

    #[test]
    fn solve_two_cycle() {
        let fw = two_cycle();
        let start = Valuation::constant(&fw, 0.5).unwrap();
        let out = solve(&fw, &cfg(), &SolverConfig::default(), &start, None).unwrap();
        for v in out.model.values() {
            assert!((v - 1.0 / 2.1).abs() < 1e-9);
        }
    }

    #[test]
    fn solve_self_attacker() {
        let fw = SocialFramework::from_parts(&["s"], &[("s", "s")], &[("s", 1, 0)]).unwrap();
        let start = Valuation::constant(&fw, 0.0).unwrap();
        let out = solve(&fw, &cfg(), &SolverConfig::default(), &start, None).unwrap();
        assert!((out.model.values()[0] - 1.0 / 2.1).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_reports_best() {
        let fw = fixtures::figure1();
        let start = Valuation::constant(&fw, 0.0).unwrap();
        let scfg = SolverConfig {
            max_iterations: 2,
            ..SolverConfig::default()
        };
        match solve(&fw, &cfg(), &scfg, &start, None) {
            Err(SolverError::NonConvergence { best, residual, iterations }) => {
                assert_eq!(iterations, 2);
                assert_eq!(best.len(), 4);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            SolverConfig { tolerance: 0.0, ..SolverConfig::default() },
            SolverConfig { tolerance: 1e-2, ..SolverConfig::default() },
            SolverConfig { damping: 0.0, ..SolverConfig::default() },
            SolverConfig { max_iterations: 0, ..SolverConfig::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(SolverError::InvalidConfig(_))));
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let fw = fixtures::figure1();
        let start = Valuation::new(&fw, vec![0.1, 0.7, 0.3, 0.9]).unwrap();
        let a = solve(&fw, &cfg(), &SolverConfig::default(), &start, None).unwrap();
        let b = solve(&fw, &cfg(), &SolverConfig::default(), &start, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn large_padded_framework_solves() {
        let fw = fixtures::example2()
            .disjoint_union(&fixtures::isolated("p", 1000, VoteRecord::new(1, 0)))
            .unwrap();
        let start = Valuation::supports(&fw, &cfg());
        let out = solve(&fw, &cfg(), &SolverConfig::default(), &start, None).unwrap();
        assert!(out.residual <= 1e-12);
    }

    #[test]
    fn certified_frameworks_converge_under_plain_picard() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut tested = 0;
        while tested < 50 {
            let fw = crate::testing::random_framework(&mut rng, 8, 0.3, 12);
            let op = ProductOperator::new(&fw, &cfg(), None).unwrap();
            let certified = (0..fw.len())
                .all(|a| op.attackers(a).len() as f64 * op.supports()[a] < 1.0);
            if !certified {
                continue;
            }
            tested += 1;
            let mut m = Valuation::new(&fw, (0..fw.len()).map(|_| rng.random()).collect()).unwrap();
            for _ in 0..5000 {
                m = picard_step(&fw, &cfg(), &m, 1.0).unwrap();
            }
            assert!(op.residual(m.values()) < 1e-9);
        }
    }

    #[test]
    fn solutions_stay_below_max_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let fw = crate::testing::random_framework(&mut rng, 7, 0.4, 6);
            let start = Valuation::new(&fw, (0..fw.len()).map(|_| rng.random()).collect()).unwrap();
            if let Ok(out) = solve(&fw, &cfg(), &SolverConfig::default(), &start, None) {
                let max_tau = Valuation::supports(&fw, &cfg()).values().iter().copied().fold(0.0, f64::max);
                assert!(out.model.values().iter().all(|v| *v >= 0.0 && *v <= max_tau + 1e-12));
                let rhs = crate::semantics::evaluate_rhs(&fw, &cfg(), &out.model, None).unwrap();
                assert!(rhs.distance(&out.model) <= 1e-12);
            }
        }
    }
}
