//! Sampled checks of the well-behavedness axioms for an operator tuple.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::SemanticsConfig;
use crate::framework::VoteRecord;

const CHECK_TOLERANCE: f64 = 1e-12;
/// Vote counts are sampled from `0..=VOTE_GRID`.
const VOTE_GRID: u64 = 10;

/// The operators that make up a semantics. Plain function pointers so that
/// mutated variants can be plugged in for negative testing.
#[derive(Clone, Copy)]
pub struct OperatorTuple {
    pub cfg: SemanticsConfig,
    pub tau: fn(&SemanticsConfig, VoteRecord) -> f64,
    pub tnorm: fn(f64, f64) -> f64,
    pub tconorm: fn(f64, f64) -> f64,
    pub negation: fn(f64) -> f64,
}

impl OperatorTuple {
    pub fn simple_product(cfg: SemanticsConfig) -> Self {
        OperatorTuple {
            cfg,
            tau: super::tau,
            tnorm: |x, y| x * y,
            tconorm: |x, y| x + y - x * y,
            negation: |x| 1.0 - x,
        }
    }

    pub fn with_negation(mut self, negation: fn(f64) -> f64) -> Self {
        self.negation = negation;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AxiomStatus {
    Pass,
    Fail { witness: Vec<f64>, detail: String },
    NotCheckable { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomResult {
    pub operator: &'static str,
    pub axiom: &'static str,
    #[serde(flatten)]
    pub status: AxiomStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub seed: u64,
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    /// True when no checkable axiom failed.
    pub fn all_passed(&self) -> bool {
        self.results
            .iter()
            .all(|r| !matches!(r.status, AxiomStatus::Fail { .. }))
    }

    pub fn find(&self, operator: &str, axiom: &str) -> Option<&AxiomResult> {
        self.results
            .iter()
            .find(|r| r.operator == operator && r.axiom == axiom)
    }
}

/// Checks the simple product semantics for the given epsilon.
pub fn check_well_behaved(cfg: &SemanticsConfig, samples: usize, seed: u64) -> AxiomReport {
    check_operators(&OperatorTuple::simple_product(*cfg), samples, seed)
}

type Predicate<'a> = Box<dyn Fn(&[f64]) -> Option<String> + 'a>;

/// One axiom: a predicate over a sampled point, returning the failure detail.
struct Check<'a> {
    operator: &'static str,
    axiom: &'static str,
    test: Predicate<'a>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= CHECK_TOLERANCE
}

pub fn check_operators(ops: &OperatorTuple, samples: usize, seed: u64) -> AxiomReport {
    let samples = samples.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Each point: three unit values, then two vote counts.
    let mut points: Vec<[f64; 5]> = Vec::with_capacity(samples);
    for k in 0..samples {
        let mut p = [0.0; 5];
        for slot in p.iter_mut().take(3) {
            *slot = rng.random::<f64>();
        }
        // Exercise the lattice ends explicitly on the first few points.
        match k {
            0 => p[..3].copy_from_slice(&[0.0, 1.0, 0.5]),
            1 => p[..3].copy_from_slice(&[1.0, 0.0, 1.0]),
            _ => {}
        }
        p[3] = rng.random_range(0..=VOTE_GRID) as f64;
        p[4] = rng.random_range(0..=VOTE_GRID) as f64;
        points.push(p);
    }

    let o = *ops;
    let votes = |p: &[f64], dp: u64, dc: u64| VoteRecord::new(p[3] as u64 + dp, p[4] as u64 + dc);

    let checks: Vec<Check> = vec![
        Check {
            operator: "tnorm",
            axiom: "commutativity",
            test: Box::new(move |p| {
                let (l, r) = ((o.tnorm)(p[0], p[1]), (o.tnorm)(p[1], p[0]));
                (!close(l, r)).then(|| format!("T(x,y) = {l} but T(y,x) = {r}"))
            }),
        },
        Check {
            operator: "tnorm",
            axiom: "associativity",
            test: Box::new(move |p| {
                let l = (o.tnorm)((o.tnorm)(p[0], p[1]), p[2]);
                let r = (o.tnorm)(p[0], (o.tnorm)(p[1], p[2]));
                (!close(l, r)).then(|| format!("T(T(x,y),z) = {l} but T(x,T(y,z)) = {r}"))
            }),
        },
        Check {
            operator: "tnorm",
            axiom: "monotonicity",
            test: Box::new(move |p| {
                let (lo, hi) = (p[0].min(p[1]), p[0].max(p[1]));
                let (l, r) = ((o.tnorm)(lo, p[2]), (o.tnorm)(hi, p[2]));
                (l > r + CHECK_TOLERANCE).then(|| format!("T({lo},z) = {l} > T({hi},z) = {r}"))
            }),
        },
        Check {
            operator: "tnorm",
            axiom: "identity_top",
            test: Box::new(move |p| {
                let v = (o.tnorm)(p[0], 1.0);
                (!close(v, p[0])).then(|| format!("T(x,1) = {v}"))
            }),
        },
        Check {
            operator: "tconorm",
            axiom: "commutativity",
            test: Box::new(move |p| {
                let (l, r) = ((o.tconorm)(p[0], p[1]), (o.tconorm)(p[1], p[0]));
                (!close(l, r)).then(|| format!("S(x,y) = {l} but S(y,x) = {r}"))
            }),
        },
        Check {
            operator: "tconorm",
            axiom: "associativity",
            test: Box::new(move |p| {
                let l = (o.tconorm)((o.tconorm)(p[0], p[1]), p[2]);
                let r = (o.tconorm)(p[0], (o.tconorm)(p[1], p[2]));
                (!close(l, r)).then(|| format!("S(S(x,y),z) = {l} but S(x,S(y,z)) = {r}"))
            }),
        },
        Check {
            operator: "tconorm",
            axiom: "monotonicity",
            test: Box::new(move |p| {
                let (lo, hi) = (p[0].min(p[1]), p[0].max(p[1]));
                let (l, r) = ((o.tconorm)(lo, p[2]), (o.tconorm)(hi, p[2]));
                (l > r + CHECK_TOLERANCE).then(|| format!("S({lo},z) = {l} > S({hi},z) = {r}"))
            }),
        },
        Check {
            operator: "tconorm",
            axiom: "identity_bottom",
            test: Box::new(move |p| {
                let v = (o.tconorm)(p[0], 0.0);
                (!close(v, p[0])).then(|| format!("S(x,0) = {v}"))
            }),
        },
        Check {
            operator: "negation",
            axiom: "antimonotonicity",
            test: Box::new(move |p| {
                let (lo, hi) = (p[0].min(p[1]), p[0].max(p[1]));
                let (l, r) = ((o.negation)(lo), (o.negation)(hi));
                (l + CHECK_TOLERANCE < r).then(|| format!("N({lo}) = {l} < N({hi}) = {r}"))
            }),
        },
        Check {
            operator: "negation",
            axiom: "bottom_to_top",
            test: Box::new(move |_| {
                let v = (o.negation)(0.0);
                (!close(v, 1.0)).then(|| format!("N(0) = {v}"))
            }),
        },
        Check {
            operator: "negation",
            axiom: "top_to_bottom",
            test: Box::new(move |_| {
                let v = (o.negation)(1.0);
                (!close(v, 0.0)).then(|| format!("N(1) = {v}"))
            }),
        },
        Check {
            operator: "negation",
            axiom: "involution",
            test: Box::new(move |p| {
                let v = (o.negation)((o.negation)(p[2]));
                (!close(v, p[2])).then(|| format!("N(N(x)) = {v}"))
            }),
        },
        Check {
            operator: "tau",
            axiom: "monotone_in_pro",
            test: Box::new(move |p| {
                let (l, r) = ((o.tau)(&o.cfg, votes(p, 0, 0)), (o.tau)(&o.cfg, votes(p, 1, 0)));
                (l > r + CHECK_TOLERANCE).then(|| format!("tau drops from {l} to {r} with one more pro vote"))
            }),
        },
        Check {
            operator: "tau",
            axiom: "antimonotone_in_con",
            test: Box::new(move |p| {
                let (l, r) = ((o.tau)(&o.cfg, votes(p, 0, 0)), (o.tau)(&o.cfg, votes(p, 0, 1)));
                (r > l + CHECK_TOLERANCE).then(|| format!("tau rises from {l} to {r} with one more con vote"))
            }),
        },
        Check {
            operator: "tau",
            axiom: "range",
            test: Box::new(move |p| {
                let v = (o.tau)(&o.cfg, votes(p, 0, 0));
                (!(0.0..=1.0).contains(&v)).then(|| format!("tau = {v} outside [0, 1]"))
            }),
        },
    ];

    let mut results: Vec<AxiomResult> = checks
        .iter()
        .map(|check| {
            let failure = points
                .iter()
                .find_map(|p| (check.test)(p).map(|detail| (p.to_vec(), detail)));
            let status = match failure {
                None => AxiomStatus::Pass,
                Some((witness, detail)) => AxiomStatus::Fail { witness, detail },
            };
            AxiomResult {
                operator: check.operator,
                axiom: check.axiom,
                status,
            }
        })
        .collect();

    for operator in ["tnorm", "tconorm", "negation"] {
        results.push(AxiomResult {
            operator,
            axiom: "continuity",
            status: AxiomStatus::NotCheckable {
                reason: "continuity cannot be established from finitely many samples".into(),
            },
        });
    }

    AxiomReport {
        samples,
        seed,
        results,
    }
}
