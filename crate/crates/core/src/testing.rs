//! Random framework generation for property tests and the acceptance suite.

use rand::Rng;

use crate::framework::{ArgumentId, SocialFramework, VoteRecord};
use std::collections::BTreeMap;

/// A framework with `1..=max_args` arguments named `a0, a1, ...`, each
/// ordered pair (self-attacks included) attacking with probability
/// `attack_probability`, and vote counts drawn from `0..=max_votes`.
pub fn random_framework<R: Rng>(
    rng: &mut R,
    max_args: usize,
    attack_probability: f64,
    max_votes: u64,
) -> SocialFramework {
    let n = rng.random_range(1..=max_args.max(1));
    let args: Vec<ArgumentId> = (0..n)
        .map(|i| ArgumentId::new(format!("a{i}")).expect("generated names are valid"))
        .collect();
    let mut attacks = Vec::new();
    for a in &args {
        for b in &args {
            if rng.random_bool(attack_probability) {
                attacks.push((a.clone(), b.clone()));
            }
        }
    }
    let votes: BTreeMap<_, _> = args
        .iter()
        .map(|a| {
            let record = VoteRecord::new(rng.random_range(0..=max_votes), rng.random_range(0..=max_votes));
            (a.clone(), record)
        })
        .collect();
    SocialFramework::build(args, attacks, &votes).expect("generated framework is well formed")
}
