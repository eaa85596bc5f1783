//! Rig certificates.
//!
//! A [`RigCert`] records how a rig was derived: a single half-hitch, a
//! splice of a length-1 rig onto another rig, or a half-hitch lashed up to
//! another rig. Each node caches its corkline and leadline; verification
//! recomputes both and rejects any disagreement.

mod codec;
mod holds;
mod ops;
mod verify;

use std::collections::HashMap;
use std::fmt;

use crate::graph::Line;
use crate::hashref::HashRef;
use crate::hitch::HalfHitchCert;
use crate::trie::TrieProof;
use crate::twist::Twist;

pub use codec::{decode_rig, encode_rig, RigDecodeError, RIG_MAGIC, RIG_VERSION};
pub use holds::{holds_fast_check, holds_fast_witness, HoldsFastError, HoldsFastWitness, Link};
pub use ops::{lash, lashable, rig_height, rig_length, splice, spliceable, tetherline, tetherline_height};
pub use verify::{verify_rig, RigError, RigRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Guild {
    /// A single half-hitch.
    GH,
    /// Built from half-hitches by splicing and lashing.
    GUp,
}

impl fmt::Display for Guild {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Guild::GH => "GH",
            Guild::GUp => "GUp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigCert {
    pub derivation: Derivation,
    pub corkline: Line,
    pub leadline: Line,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derivation {
    Leaf(Leaf),
    Splice(Box<Splice>),
    Lash(Box<Lash>),
}

/// A half-hitch whose corkline is its topline, optionally extended into
/// the past (`before`, oldest first) and the future (`after`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    pub half: HalfHitchCert,
    pub before: Vec<Twist>,
    pub after: Vec<Twist>,
}

/// `left` has length 1. Its half-hitch gains the first meet after the
/// junction as a post; `post_inclusion` is the post's binding of the lead.
/// `gap` holds the corkline twists lying between the two corklines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splice {
    pub left: RigCert,
    pub post_inclusion: TrieProof,
    pub gap: Vec<Twist>,
    pub right: RigCert,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lash {
    pub bottom: RigCert,
    pub upper: RigCert,
}

fn ids(twists: &[Twist]) -> impl Iterator<Item = HashRef> + '_ {
    twists.iter().map(Twist::hash)
}

impl RigCert {
    /// A leaf with no corkline extension.
    pub fn half_hitch(half: HalfHitchCert) -> Self {
        Self::leaf(half, Vec::new(), Vec::new())
    }

    /// Builds the node and its lines without checking anything.
    pub fn leaf(half: HalfHitchCert, before: Vec<Twist>, after: Vec<Twist>) -> Self {
        let cork: Vec<HashRef> = ids(&before).chain(ids(&half.topline)).chain(ids(&after)).collect();
        let lead: Vec<HashRef> = ids(&half.footline).collect();
        Self {
            corkline: Line::new(cork).expect("topline is non-empty"),
            leadline: Line::new(lead).expect("footline is non-empty"),
            derivation: Derivation::Leaf(Leaf { half, before, after }),
        }
    }

    /// Builds a splice node around an already computed corkline. The
    /// leadline is the concatenation of the children's, or the left one's
    /// if they do not meet.
    pub fn spliced(left: RigCert, post_inclusion: TrieProof, gap: Vec<Twist>, right: RigCert, corkline: Line) -> Self {
        let leadline = left.leadline.concat(&right.leadline).unwrap_or_else(|| left.leadline.clone());
        Self {
            corkline,
            leadline,
            derivation: Derivation::Splice(Box::new(Splice { left, post_inclusion, gap, right })),
        }
    }

    /// Builds a lash node without checking lashability.
    pub fn lashed(bottom: RigCert, upper: RigCert) -> Self {
        Self {
            corkline: upper.corkline.clone(),
            leadline: bottom.leadline.clone(),
            derivation: Derivation::Lash(Box::new(Lash { bottom, upper })),
        }
    }

    pub fn guild(&self) -> Guild {
        match self.derivation {
            Derivation::Leaf(_) => Guild::GH,
            _ => Guild::GUp,
        }
    }

    /// The half-hitch whose footline starts the leadline.
    pub fn leading_half(&self) -> &HalfHitchCert {
        match &self.derivation {
            Derivation::Leaf(leaf) => &leaf.half,
            Derivation::Splice(s) => s.left.leading_half(),
            Derivation::Lash(l) => l.bottom.leading_half(),
        }
    }

    /// Every twist the certificate carries, keyed by hash.
    pub fn twists(&self) -> HashMap<HashRef, Twist> {
        let mut out = HashMap::new();
        self.collect_twists(&mut out);
        out
    }

    fn collect_twists(&self, out: &mut HashMap<HashRef, Twist>) {
        let mut add = |ts: &[Twist]| {
            for t in ts {
                out.insert(t.hash(), *t);
            }
        };
        match &self.derivation {
            Derivation::Leaf(leaf) => {
                add(&leaf.half.topline);
                add(&leaf.half.footline);
                add(&leaf.before);
                add(&leaf.after);
            }
            Derivation::Splice(s) => {
                add(&s.gap);
                s.left.collect_twists(out);
                s.right.collect_twists(out);
            }
            Derivation::Lash(l) => {
                l.bottom.collect_twists(out);
                l.upper.collect_twists(out);
            }
        }
    }

    /// All half-hitches in the derivation, in pre-order.
    pub fn half_hitches(&self) -> Vec<&HalfHitchCert> {
        let mut out = Vec::new();
        self.collect_halves(&mut out);
        out
    }

    fn collect_halves<'a>(&'a self, out: &mut Vec<&'a HalfHitchCert>) {
        match &self.derivation {
            Derivation::Leaf(leaf) => out.push(&leaf.half),
            Derivation::Splice(s) => {
                s.left.collect_halves(out);
                s.right.collect_halves(out);
            }
            Derivation::Lash(l) => {
                l.bottom.collect_halves(out);
                l.upper.collect_halves(out);
            }
        }
    }

    /// Number of derivation nodes.
    pub fn node_count(&self) -> usize {
        1 + match &self.derivation {
            Derivation::Leaf(_) => 0,
            Derivation::Splice(s) => s.left.node_count() + s.right.node_count(),
            Derivation::Lash(l) => l.bottom.node_count() + l.upper.node_count(),
        }
    }
}
