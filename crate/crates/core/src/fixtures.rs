//! Reference frameworks used by tests, the acceptance suite and the CLI docs.

use crate::framework::{ArgumentId, SocialFramework, VoteRecord};
use std::collections::BTreeMap;

/// Four arguments in a cycle of mutual attacks `a <-> b <-> c <-> d <-> a`,
/// every argument with one pro vote. Under epsilon = 0.1 it has three models.
pub fn figure1() -> SocialFramework {
    SocialFramework::from_parts(
        &["a", "b", "c", "d"],
        &[
            ("a", "b"),
            ("b", "a"),
            ("b", "c"),
            ("c", "b"),
            ("c", "d"),
            ("d", "c"),
            ("d", "a"),
            ("a", "d"),
        ],
        &[("a", 1, 0), ("b", 1, 0), ("c", 1, 0), ("d", 1, 0)],
    )
    .expect("figure 1 framework is well formed")
}

/// A mutual-attack triangle `a, b, c` next to `d -> f <- e`, with `f`
/// holding five pro votes and everything else one.
pub fn example2() -> SocialFramework {
    SocialFramework::from_parts(
        &["a", "b", "c", "d", "e", "f"],
        &[
            ("a", "b"),
            ("b", "a"),
            ("a", "c"),
            ("c", "a"),
            ("b", "c"),
            ("c", "b"),
            ("e", "f"),
            ("d", "f"),
        ],
        &[
            ("a", 1, 0),
            ("b", 1, 0),
            ("c", 1, 0),
            ("d", 1, 0),
            ("e", 1, 0),
            ("f", 5, 0),
        ],
    )
    .expect("example 2 framework is well formed")
}

/// `count` unattacked arguments named `{prefix}{i}` sharing the same votes.
pub fn isolated(prefix: &str, count: usize, votes: VoteRecord) -> SocialFramework {
    let args: Vec<ArgumentId> = (0..count)
        .map(|i| ArgumentId::new(format!("{prefix}{i}")).expect("valid padding name"))
        .collect();
    let vote_map: BTreeMap<_, _> = args.iter().cloned().map(|a| (a, votes)).collect();
    SocialFramework::build(args, Vec::new(), &vote_map).expect("isolated arguments are well formed")
}

/// Full mutual-attack clique over the given names (no self-attacks).
pub fn clique(names: &[&str], votes: VoteRecord) -> SocialFramework {
    let mut attacks = Vec::new();
    for a in names {
        for b in names {
            if a != b {
                attacks.push((*a, *b));
            }
        }
    }
    let vote_list: Vec<_> = names.iter().map(|n| (*n, votes.pro, votes.con)).collect();
    SocialFramework::from_parts(names, &attacks, &vote_list).expect("clique is well formed")
}
