//! Witnessed causal precedence.
//!
//! `x ≺≺ y` holds when `y` incorporates the hash of `x`, directly or through
//! intermediate records. A [`CausalChain`] makes that concrete: each step
//! presents the next twist in full and says which of its fields carries the
//! hash of the previous element. Verification needs nothing but the chain.

use thiserror::Error;

use crate::hashref::HashRef;
use crate::trie::{trie_verify, TrieProof, TrieVerdict};
use crate::twist::Twist;

/// How a twist incorporates the hash before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inclusion {
    /// The twist's `prev` is the hash.
    Prev,
    /// The twist's `tether` is the hash.
    Tether,
    /// The twist's rigging trie binds `key` to the hash.
    Rigging { key: HashRef, proof: TrieProof },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub twist: Twist,
    pub via: Inclusion,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("step {0}: prev does not carry the preceding hash")]
    PrevMismatch(usize),
    #[error("step {0}: tether does not carry the preceding hash")]
    TetherMismatch(usize),
    #[error("step {index}: rigging trie gives {verdict:?} for the key")]
    RiggingMismatch { index: usize, verdict: TrieVerdict },
    #[error("chains do not meet: {end:?} vs {start:?}")]
    Disconnected { end: HashRef, start: HashRef },
}

/// A chain of hash inclusions starting at `start`. With no steps it
/// witnesses only `start ≼≼ start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalChain {
    pub start: HashRef,
    pub steps: Vec<ChainStep>,
}

impl CausalChain {
    pub fn identity(start: HashRef) -> Self {
        Self { start, steps: Vec::new() }
    }

    pub fn push(&mut self, twist: Twist, via: Inclusion) {
        self.steps.push(ChainStep { twist, via });
    }

    pub fn with(mut self, twist: Twist, via: Inclusion) -> Self {
        self.push(twist, via);
        self
    }

    /// Hash of the last element (computed, not trusted).
    pub fn end(&self) -> HashRef {
        self.steps.last().map_or(self.start, |s| s.twist.hash())
    }

    pub fn is_strict(&self) -> bool {
        !self.steps.is_empty()
    }

    /// Checks every inclusion and returns the hash the chain ends at.
    pub fn verify(&self) -> Result<HashRef, ChainError> {
        let mut cur = self.start;
        for (index, step) in self.steps.iter().enumerate() {
            match &step.via {
                Inclusion::Prev if step.twist.prev != cur => return Err(ChainError::PrevMismatch(index)),
                Inclusion::Tether if step.twist.tether != cur => {
                    return Err(ChainError::TetherMismatch(index))
                }
                Inclusion::Rigging { key, proof } => {
                    let verdict = trie_verify(&step.twist.rigging, key, proof);
                    if verdict != TrieVerdict::Bound(cur) {
                        return Err(ChainError::RiggingMismatch { index, verdict });
                    }
                }
                _ => {}
            }
            cur = step.twist.hash();
        }
        Ok(cur)
    }

    /// Appends `next`, which must start where `self` ends.
    pub fn concat(mut self, next: CausalChain) -> Result<Self, ChainError> {
        let end = self.end();
        if end != next.start {
            return Err(ChainError::Disconnected { end, start: next.start });
        }
        self.steps.extend(next.steps);
        Ok(self)
    }

    /// Prev steps walking forward through `twists`, which must be
    /// consecutive and start right after `start`.
    pub fn along(start: HashRef, twists: &[Twist]) -> Self {
        Self {
            start,
            steps: twists
                .iter()
                .map(|t| ChainStep { twist: *t, via: Inclusion::Prev })
                .collect(),
        }
    }
}
