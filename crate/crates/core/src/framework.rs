//! The social argumentation framework `<A, R, V>`: arguments, attacks and
//! per-argument pro/con vote counts.
//!
//! Arguments are kept in lexicographic order and every index-based accessor
//! refers to that canonical order, so valuations can be stored as plain
//! vectors aligned with [`SocialFramework::arguments`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameworkError {
    #[error("invalid argument identifier {0:?} (expected letters, digits or '_')")]
    InvalidArgumentId(String),
    #[error("argument `{0}` declared more than once")]
    DuplicateArgument(ArgumentId),
    #[error("attack ({attacker}, {target}) references an undeclared argument")]
    UnknownEndpoint {
        attacker: ArgumentId,
        target: ArgumentId,
    },
    #[error("unknown argument `{0}`")]
    UnknownArgument(ArgumentId),
    #[error("argument `{0}` exists in both frameworks")]
    NameCollision(ArgumentId),
}

/// Name of an argument. Non-empty, made of ASCII letters, digits and `_`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ArgumentId(String);

impl ArgumentId {
    pub fn new(name: impl Into<String>) -> Result<Self, FrameworkError> {
        let name = name.into();
        let valid = !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_');
        if valid {
            Ok(ArgumentId(name))
        } else {
            Err(FrameworkError::InvalidArgumentId(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ArgumentId {
    type Err = FrameworkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ArgumentId::new(s)
    }
}

impl TryFrom<String> for ArgumentId {
    type Error = FrameworkError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        ArgumentId::new(s)
    }
}

impl From<ArgumentId> for String {
    fn from(id: ArgumentId) -> String {
        id.0
    }
}

/// Pro and con vote counts of one argument.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VoteRecord {
    pub pro: u64,
    pub con: u64,
}

impl VoteRecord {
    pub const fn new(pro: u64, con: u64) -> Self {
        VoteRecord { pro, con }
    }
}

/// Parts of a framework as plain data, the inverse of [`SocialFramework::build`].
pub type Decomposed = (
    Vec<ArgumentId>,
    Vec<(ArgumentId, ArgumentId)>,
    BTreeMap<ArgumentId, VoteRecord>,
);

/// An immutable social abstract argumentation framework.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialFramework {
    arguments: Vec<ArgumentId>,
    index: HashMap<ArgumentId, usize>,
    /// (attacker, target) index pairs.
    attacks: BTreeSet<(usize, usize)>,
    attackers: Vec<Vec<usize>>,
    votes: Vec<VoteRecord>,
}

impl SocialFramework {
    /// Validates and assembles a framework. Missing votes default to `(0, 0)`
    /// and repeated attacks are collapsed.
    pub fn build<A, R>(
        arguments: A,
        attacks: R,
        votes: &BTreeMap<ArgumentId, VoteRecord>,
    ) -> Result<Self, FrameworkError>
    where
        A: IntoIterator<Item = ArgumentId>,
        R: IntoIterator<Item = (ArgumentId, ArgumentId)>,
    {
        let mut seen = BTreeSet::new();
        for arg in arguments {
            if let Some(dup) = seen.replace(arg) {
                return Err(FrameworkError::DuplicateArgument(dup));
            }
        }
        let arguments: Vec<ArgumentId> = seen.into_iter().collect();
        let index: HashMap<ArgumentId, usize> = arguments
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();

        let mut attack_set = BTreeSet::new();
        for (attacker, target) in attacks {
            match (index.get(&attacker), index.get(&target)) {
                (Some(&i), Some(&j)) => {
                    attack_set.insert((i, j));
                }
                _ => return Err(FrameworkError::UnknownEndpoint { attacker, target }),
            }
        }

        let mut vote_vec = vec![VoteRecord::default(); arguments.len()];
        for (arg, record) in votes {
            let &i = index
                .get(arg)
                .ok_or_else(|| FrameworkError::UnknownArgument(arg.clone()))?;
            vote_vec[i] = *record;
        }

        Ok(Self::assemble(arguments, index, attack_set, vote_vec))
    }

    /// Convenience constructor from string slices, used heavily in tests and
    /// fixtures. Votes are `(name, pro, con)`.
    pub fn from_parts(
        arguments: &[&str],
        attacks: &[(&str, &str)],
        votes: &[(&str, u64, u64)],
    ) -> Result<Self, FrameworkError> {
        let args = arguments
            .iter()
            .map(|a| ArgumentId::new(*a))
            .collect::<Result<Vec<_>, _>>()?;
        let atts = attacks
            .iter()
            .map(|(a, b)| Ok((ArgumentId::new(*a)?, ArgumentId::new(*b)?)))
            .collect::<Result<Vec<_>, FrameworkError>>()?;
        let mut vote_map = BTreeMap::new();
        for (a, pro, con) in votes {
            vote_map.insert(ArgumentId::new(*a)?, VoteRecord::new(*pro, *con));
        }
        Self::build(args, atts, &vote_map)
    }

    fn assemble(
        arguments: Vec<ArgumentId>,
        index: HashMap<ArgumentId, usize>,
        attacks: BTreeSet<(usize, usize)>,
        votes: Vec<VoteRecord>,
    ) -> Self {
        let mut attackers = vec![Vec::new(); arguments.len()];
        // BTreeSet iteration is sorted by attacker, so each list ends up sorted.
        for &(i, j) in &attacks {
            attackers[j].push(i);
        }
        SocialFramework {
            arguments,
            index,
            attacks,
            attackers,
            votes,
        }
    }

    pub fn len(&self) -> usize {
        self.arguments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arguments.is_empty()
    }

    /// Arguments in canonical (lexicographic) order.
    pub fn arguments(&self) -> &[ArgumentId] {
        &self.arguments
    }

    pub fn attack_count(&self) -> usize {
        self.attacks.len()
    }

    /// Attacks as `(attacker, target)` pairs in canonical order.
    pub fn attacks(&self) -> impl Iterator<Item = (&ArgumentId, &ArgumentId)> + '_ {
        self.attacks
            .iter()
            .map(move |&(i, j)| (&self.arguments[i], &self.arguments[j]))
    }

    pub fn index_of(&self, arg: &ArgumentId) -> Result<usize, FrameworkError> {
        self.index
            .get(arg)
            .copied()
            .ok_or_else(|| FrameworkError::UnknownArgument(arg.clone()))
    }

    /// Looks an argument up by name.
    pub fn lookup(&self, name: &str) -> Result<usize, FrameworkError> {
        self.index_of(&ArgumentId::new(name)?)
    }

    pub fn votes(&self) -> &[VoteRecord] {
        &self.votes
    }

    pub fn votes_of(&self, arg: &ArgumentId) -> Result<VoteRecord, FrameworkError> {
        Ok(self.votes[self.index_of(arg)?])
    }

    /// Indices of the attackers of argument `i`, sorted.
    pub fn attacker_indices(&self, i: usize) -> &[usize] {
        &self.attackers[i]
    }

    pub fn attackers_of(&self, arg: &ArgumentId) -> Result<Vec<&ArgumentId>, FrameworkError> {
        let i = self.index_of(arg)?;
        Ok(self.attackers[i]
            .iter()
            .map(|&b| &self.arguments[b])
            .collect())
    }

    /// Union of two frameworks over disjoint argument sets. No attacks are
    /// added between the two sides.
    pub fn disjoint_union(&self, other: &SocialFramework) -> Result<SocialFramework, FrameworkError> {
        if let Some(clash) = other.arguments.iter().find(|a| self.index.contains_key(*a)) {
            return Err(FrameworkError::NameCollision(clash.clone()));
        }
        let (mut args, mut attacks, mut votes) = self.decompose();
        let (other_args, other_attacks, other_votes) = other.decompose();
        args.extend(other_args);
        attacks.extend(other_attacks);
        votes.extend(other_votes);
        SocialFramework::build(args, attacks, &votes)
    }

    /// Weakly connected component containing `arg` (attack direction ignored).
    pub fn connected_component(
        &self,
        arg: &ArgumentId,
    ) -> Result<BTreeSet<ArgumentId>, FrameworkError> {
        let start = self.index_of(arg)?;
        let component = self.component_of_index(start, &self.undirected_adjacency());
        Ok(component
            .into_iter()
            .map(|i| self.arguments[i].clone())
            .collect())
    }

    /// Partition of the argument indices into weakly connected components.
    /// Components are ordered by their smallest index, and each is sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adjacency = self.undirected_adjacency();
        let mut assigned = vec![false; self.len()];
        let mut out = Vec::new();
        for i in 0..self.len() {
            if assigned[i] {
                continue;
            }
            let component = self.component_of_index(i, &adjacency);
            for &j in &component {
                assigned[j] = true;
            }
            out.push(component);
        }
        out
    }

    fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adjacency = vec![Vec::new(); self.len()];
        for &(i, j) in &self.attacks {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        adjacency
    }

    fn component_of_index(&self, start: usize, adjacency: &[Vec<usize>]) -> Vec<usize> {
        let mut visited = vec![false; self.len()];
        let mut stack = vec![start];
        visited[start] = true;
        let mut component = Vec::new();
        while let Some(i) = stack.pop() {
            component.push(i);
            for &j in &adjacency[i] {
                if !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
        component.sort_unstable();
        component
    }

    /// Splits the framework back into its parts. Every argument gets an
    /// explicit vote entry.
    pub fn decompose(&self) -> Decomposed {
        let attacks = self
            .attacks()
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        let votes = self
            .arguments
            .iter()
            .cloned()
            .zip(self.votes.iter().copied())
            .collect();
        (self.arguments.clone(), attacks, votes)
    }
}
