//! The simple product semantics on `[0, 1]`.
//!
//! Social support is `tau = pro / (pro + con + epsilon)`, attacker scores are
//! aggregated with the probabilistic sum, negated with `1 - x` and combined
//! with the support through the product T-norm. A social model is a fixed
//! point of the resulting operator `x_a = tau(a) * prod_{b in Att(a)} (1 - x_b)`.

mod axioms;

pub use axioms::{check_operators, check_well_behaved, AxiomReport, AxiomResult, AxiomStatus, OperatorTuple};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::framework::{ArgumentId, FrameworkError, SocialFramework, VoteRecord};

/// Inputs may leave `[0, 1]` by this much before they are rejected.
pub const DOMAIN_TOLERANCE: f64 = 1e-12;

pub const BOTTOM: f64 = 0.0;
pub const TOP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("epsilon must be a finite positive number, got {0}")]
    InvalidEpsilon(f64),
    #[error("value {0} lies outside [0, 1]")]
    Domain(f64),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Framework(#[from] FrameworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticsConfig {
    epsilon: f64,
}

impl SemanticsConfig {
    pub fn new(epsilon: f64) -> Result<Self, SemanticsError> {
        if epsilon.is_finite() && epsilon > 0.0 {
            Ok(SemanticsConfig { epsilon })
        } else {
            Err(SemanticsError::InvalidEpsilon(epsilon))
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl Default for SemanticsConfig {
    fn default() -> Self {
        SemanticsConfig { epsilon: 0.1 }
    }
}

fn check_unit(x: f64) -> Result<f64, SemanticsError> {
    if !(-DOMAIN_TOLERANCE..=1.0 + DOMAIN_TOLERANCE).contains(&x) {
        Err(SemanticsError::Domain(x))
    } else {
        Ok(x.clamp(0.0, 1.0))
    }
}

/// Social support of an argument. Zero when nobody voted.
pub fn tau(cfg: &SemanticsConfig, votes: VoteRecord) -> f64 {
    if votes.pro == 0 && votes.con == 0 {
        return 0.0;
    }
    let pro = votes.pro as f64;
    pro / (pro + votes.con as f64 + cfg.epsilon)
}

/// Product T-norm.
pub fn tnorm(x: f64, y: f64) -> Result<f64, SemanticsError> {
    Ok(check_unit(x)? * check_unit(y)?)
}

/// Probabilistic sum T-conorm.
pub fn tconorm(x: f64, y: f64) -> Result<f64, SemanticsError> {
    let (x, y) = (check_unit(x)?, check_unit(y)?);
    Ok(x + y - x * y)
}

pub fn negation(x: f64) -> Result<f64, SemanticsError> {
    Ok(1.0 - check_unit(x)?)
}

/// Probabilistic sum over any number of attacker scores, `1 - prod(1 - v)`.
/// The empty aggregate is bottom.
pub fn aggregate_attackers(values: &[f64]) -> Result<f64, SemanticsError> {
    let mut survive = 1.0;
    for &v in values {
        survive *= 1.0 - check_unit(v)?;
    }
    Ok(1.0 - survive)
}

/// An assignment of a value in `[0, 1]` to every argument, stored in the
/// framework's canonical argument order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Valuation(Vec<f64>);

impl Valuation {
    pub fn new(fw: &SocialFramework, values: Vec<f64>) -> Result<Self, SemanticsError> {
        if values.len() != fw.len() {
            return Err(SemanticsError::LengthMismatch {
                expected: fw.len(),
                got: values.len(),
            });
        }
        let values = values
            .into_iter()
            .map(check_unit)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Valuation(values))
    }

    /// Builds a valuation from `(name, value)` pairs covering every argument.
    pub fn from_named(fw: &SocialFramework, pairs: &[(&str, f64)]) -> Result<Self, SemanticsError> {
        let mut values = vec![f64::NAN; fw.len()];
        for (name, v) in pairs {
            values[fw.lookup(name)?] = *v;
        }
        Self::new(fw, values)
    }

    pub fn constant(fw: &SocialFramework, value: f64) -> Result<Self, SemanticsError> {
        Self::new(fw, vec![value; fw.len()])
    }

    /// The support vector of the framework, the usual starting point.
    pub fn supports(fw: &SocialFramework, cfg: &SemanticsConfig) -> Self {
        Valuation(fw.votes().iter().map(|v| tau(cfg, *v)).collect())
    }

    /// Wraps values already known to be in range. Used by the solver.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Valuation(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, fw: &SocialFramework, arg: &ArgumentId) -> Result<f64, FrameworkError> {
        Ok(self.0[fw.index_of(arg)?])
    }

    pub fn distance(&self, other: &Valuation) -> f64 {
        max_distance(&self.0, &other.0)
    }
}

pub(crate) fn max_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// The right-hand side operator of the model equation, compiled for one
/// framework and one support vector.
#[derive(Debug, Clone)]
pub struct ProductOperator {
    supports: Vec<f64>,
    attackers: Vec<Vec<usize>>,
}

impl ProductOperator {
    /// `tau_override`, when given, replaces the vote-derived supports
    /// (indexed in canonical argument order).
    pub fn new(
        fw: &SocialFramework,
        cfg: &SemanticsConfig,
        tau_override: Option<&[f64]>,
    ) -> Result<Self, SemanticsError> {
        let supports = match tau_override {
            Some(t) => {
                if t.len() != fw.len() {
                    return Err(SemanticsError::LengthMismatch {
                        expected: fw.len(),
                        got: t.len(),
                    });
                }
                t.iter().copied().map(check_unit).collect::<Result<_, _>>()?
            }
            None => fw.votes().iter().map(|v| tau(cfg, *v)).collect(),
        };
        let attackers = (0..fw.len())
            .map(|i| fw.attacker_indices(i).to_vec())
            .collect();
        Ok(ProductOperator { supports, attackers })
    }

    pub fn dim(&self) -> usize {
        self.supports.len()
    }

    pub fn supports(&self) -> &[f64] {
        &self.supports
    }

    pub fn attackers(&self, i: usize) -> &[usize] {
        &self.attackers[i]
    }

    pub fn rhs_at(&self, i: usize, x: &[f64]) -> f64 {
        self.attackers[i]
            .iter()
            .fold(self.supports[i], |acc, &b| acc * (1.0 - x[b]))
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.rhs_at(i, x);
        }
    }

    /// Max-norm of `x - rhs(x)`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| (x[i] - self.rhs_at(i, x)).abs())
            .fold(0.0, f64::max)
    }

    /// Jacobian of the right-hand side. Row `a` holds
    /// `-tau(a) * prod_{c in Att(a), c != b} (1 - x_c)` in column `b` for
    /// every attacker `b`.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let mut jac = DMatrix::zeros(n, n);
        for a in 0..n {
            for &b in &self.attackers[a] {
                let others = self.attackers[a]
                    .iter()
                    .filter(|&&c| c != b)
                    .fold(self.supports[a], |acc, &c| acc * (1.0 - x[c]));
                jac[(a, b)] = -others;
            }
        }
        jac
    }

    /// Lipschitz constant of the residual over `[0, 1]^n` in the max-norm:
    /// `1 + max_a tau(a) * |Att(a)|`.
    pub fn residual_lipschitz(&self) -> f64 {
        1.0 + self
            .supports
            .iter()
            .zip(&self.attackers)
            .map(|(t, att)| t * att.len() as f64)
            .fold(0.0, f64::max)
    }
}

/// Applies the model equation once: `tau(a) * prod_{b in Att(a)} (1 - m(b))`.
pub fn evaluate_rhs(
    fw: &SocialFramework,
    cfg: &SemanticsConfig,
    m: &Valuation,
    tau_override: Option<&[f64]>,
) -> Result<Valuation, SemanticsError> {
    if m.len() != fw.len() {
        return Err(SemanticsError::LengthMismatch {
            expected: fw.len(),
            got: m.len(),
        });
    }
    let op = ProductOperator::new(fw, cfg, tau_override)?;
    let mut out = vec![0.0; fw.len()];
    op.apply(m.values(), &mut out);
    Ok(Valuation(out))
}

/// Fixed-point defect `max_a |m(a) - rhs(m)(a)|`.
pub fn residual(fw: &SocialFramework, cfg: &SemanticsConfig, m: &Valuation) -> f64 {
    let op = ProductOperator::new(fw, cfg, None).expect("vote supports lie in [0, 1)");
    op.residual(m.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    const EPS: f64 = 0.1;

    fn cfg() -> SemanticsConfig {
        SemanticsConfig::new(EPS).unwrap()
    }

    #[test]
    fn tau_values() {
        let c = cfg();
        assert!((tau(&c, VoteRecord::new(1, 0)) - 1.0 / 1.1).abs() < 1e-15);
        assert_eq!(tau(&c, VoteRecord::new(0, 0)), 0.0);
        assert_eq!(tau(&SemanticsConfig::new(3.0).unwrap(), VoteRecord::new(0, 0)), 0.0);
        assert!((tau(&c, VoteRecord::new(5, 0)) - 0.98039).abs() < 1e-5);
    }

    #[test]
    fn epsilon_must_be_positive() {
        assert!(SemanticsConfig::new(0.0).is_err());
        assert!(SemanticsConfig::new(-1.0).is_err());
        assert!(SemanticsConfig::new(f64::NAN).is_err());
    }

    #[test]
    fn operator_examples() {
        assert_eq!(tnorm(0.3, 1.0).unwrap(), 0.3);
        assert_eq!(tnorm(0.5, 0.5).unwrap(), 0.25);
        assert_eq!(tnorm(0.7, 0.0).unwrap(), 0.0);
        assert_eq!(tconorm(0.3, 0.0).unwrap(), 0.3);
        assert_eq!(tconorm(0.5, 0.5).unwrap(), 0.75);
        assert_eq!(tconorm(0.3, 1.0).unwrap(), 1.0);
        assert_eq!(negation(0.0).unwrap(), 1.0);
        assert_eq!(negation(1.0).unwrap(), 0.0);
        assert!((negation(0.36573).unwrap() - 0.63427).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(tnorm(1.1, 0.5), Err(SemanticsError::Domain(_))));
        assert!(matches!(tconorm(0.5, -0.01), Err(SemanticsError::Domain(_))));
        assert!(matches!(negation(f64::NAN), Err(SemanticsError::Domain(_))));
        assert!(aggregate_attackers(&[0.2, 2.0]).is_err());
        // round-off inside the tolerance band is absorbed
        assert_eq!(negation(1.0 + 1e-13).unwrap(), 0.0);
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate_attackers(&[]).unwrap(), 0.0);
        let v = 1.0 / 6.6;
        assert!((aggregate_attackers(&[v, v]).unwrap() - 0.28007).abs() < 1e-5);
        assert!((aggregate_attackers(&[0.88875, 0.88875]).unwrap() - 0.98762).abs() < 1e-5);
    }

    #[test]
    fn rhs_on_table1_model1() {
        let fw = fixtures::figure1();
        let m = Valuation::constant(&fw, 0.36573).unwrap();
        let rhs = evaluate_rhs(&fw, &cfg(), &m, None).unwrap();
        assert!(rhs.distance(&m) < 1e-4);
    }

    #[test]
    fn rhs_unattacked_is_support() {
        let fw = SocialFramework::from_parts(&["x"], &[], &[("x", 1, 0)]).unwrap();
        for v in [0.0, 0.4, 1.0] {
            let m = Valuation::constant(&fw, v).unwrap();
            let rhs = evaluate_rhs(&fw, &cfg(), &m, None).unwrap();
            assert!((rhs.values()[0] - 1.0 / 1.1).abs() < 1e-15);
        }
    }

    #[test]
    fn rhs_three_clique_product_form() {
        let fw = fixtures::clique(&["a1", "a2", "a3"], VoteRecord::new(1, 0));
        let supports = [0.9, 0.6, 0.3];
        let x = [0.2, 0.5, 0.7];
        let m = Valuation::new(&fw, x.to_vec()).unwrap();
        let rhs = evaluate_rhs(&fw, &cfg(), &m, Some(&supports)).unwrap();
        let expected = [
            0.9 * (1.0 - x[1]) * (1.0 - x[2]),
            0.6 * (1.0 - x[0]) * (1.0 - x[2]),
            0.3 * (1.0 - x[0]) * (1.0 - x[1]),
        ];
        for (got, want) in rhs.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn residual_examples() {
        let fw = fixtures::figure1();
        let c = cfg();
        let model2 = Valuation::from_named(
            &fw,
            &[("a", 0.01125), ("b", 0.88875), ("c", 0.01125), ("d", 0.88875)],
        )
        .unwrap();
        assert!(residual(&fw, &c, &model2) < 5e-5);
        let zero = Valuation::constant(&fw, 0.0).unwrap();
        assert!((residual(&fw, &c, &zero) - 0.90909).abs() < 1e-5);

        let lone = SocialFramework::from_parts(&["x"], &[], &[("x", 1, 0)]).unwrap();
        let fixed = Valuation::supports(&lone, &c);
        assert_eq!(residual(&lone, &c, &fixed), 0.0);
    }

    #[test]
    fn self_attack_enters_rhs() {
        let fw = SocialFramework::from_parts(&["s"], &[("s", "s")], &[("s", 1, 0)]).unwrap();
        let m = Valuation::constant(&fw, 0.25).unwrap();
        let rhs = evaluate_rhs(&fw, &cfg(), &m, None).unwrap();
        assert!((rhs.values()[0] - 0.75 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn override_length_checked() {
        let fw = fixtures::figure1();
        assert!(ProductOperator::new(&fw, &cfg(), Some(&[0.5])).is_err());
    }

    proptest! {
        #[test]
        fn tnorm_tconorm_bounds(x in 0.0..=1.0f64, y in 0.0..=1.0f64) {
            let t = tnorm(x, y).unwrap();
            let s = tconorm(x, y).unwrap();
            prop_assert!((0.0..=1.0).contains(&t));
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!(t <= x.min(y));
            prop_assert!(s >= x.max(y));
        }

        #[test]
        fn de_morgan(x in 0.0..=1.0f64, y in 0.0..=1.0f64) {
            let dual = 1.0 - tnorm(1.0 - x, 1.0 - y).unwrap();
            prop_assert!((tconorm(x, y).unwrap() - dual).abs() <= 1e-15);
        }

        #[test]
        fn aggregate_matches_fold(values in proptest::collection::vec(0.0..=1.0f64, 0..1000)) {
            let folded = values
                .iter()
                .try_fold(BOTTOM, |acc, &v| tconorm(acc, v))
                .unwrap();
            prop_assert!((aggregate_attackers(&values).unwrap() - folded).abs() <= 1e-12);
        }

        #[test]
        fn rhs_antitone_and_bounded(
            lo in proptest::collection::vec(0.0..=1.0f64, 4),
            bump in proptest::collection::vec(0.0..=1.0f64, 4),
        ) {
            let fw = fixtures::figure1();
            let c = cfg();
            let hi: Vec<f64> = lo.iter().zip(&bump).map(|(l, b)| l + (1.0 - l) * b).collect();
            let r_lo = evaluate_rhs(&fw, &c, &Valuation::new(&fw, lo).unwrap(), None).unwrap();
            let r_hi = evaluate_rhs(&fw, &c, &Valuation::new(&fw, hi).unwrap(), None).unwrap();
            for (a, b) in r_lo.values().iter().zip(r_hi.values()) {
                prop_assert!(a >= b);
                prop_assert!(*a <= 1.0 / 1.1 && *b >= 0.0);
            }
        }
    }
}
