//! Agent identifiers and bitmask agent sets.
//!
//! Agent `i` is bit `i` of the mask (agent 0 is the least significant bit).
//! The numeric order of ids is the fixed item order used for every
//! tie-break.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest population any exhaustive routine accepts.
pub const MAX_AGENTS: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Ordered by mask value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentSet(pub u32);

impl AgentSet {
    pub const EMPTY: AgentSet = AgentSet(0);

    /// `{0, 1, .., n-1}`.
    pub fn full(n: usize) -> AgentSet {
        assert!(n <= 32);
        if n == 32 {
            AgentSet(u32::MAX)
        } else {
            AgentSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> AgentSet {
        AgentSet(1 << i)
    }

    pub fn from_agents<I: IntoIterator<Item = usize>>(agents: I) -> AgentSet {
        AgentSet(agents.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> AgentSet {
        AgentSet(self.0 | 1 << i)
    }

    pub fn without(self, i: usize) -> AgentSet {
        AgentSet(self.0 & !(1 << i))
    }

    pub fn union(self, other: AgentSet) -> AgentSet {
        AgentSet(self.0 | other.0)
    }

    pub fn intersection(self, other: AgentSet) -> AgentSet {
        AgentSet(self.0 & other.0)
    }

    pub fn difference(self, other: AgentSet) -> AgentSet {
        AgentSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: AgentSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: AgentSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Lowest agent id in the set.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Agents in increasing id order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `self`, in increasing mask order.
    pub fn subsets(self) -> impl Iterator<Item = AgentSet> {
        let ground = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == ground {
                None
            } else {
                // next submask in increasing numeric order
                Some((cur.wrapping_sub(ground)) & ground)
            };
            Some(AgentSet(cur))
        })
    }

    /// Compare as sorted agent lists, lexicographically.
    pub fn cmp_lex(self, other: AgentSet) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl fmt::Debug for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for AgentSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> AgentSet {
        AgentSet::from_agents(iter)
    }
}
