//! Hash-linked twists, lines, hitches and rigs.
//!
//! A [`Twist`] names its previous twist, an optional tether, and the root of
//! a Merkle [`trie`]. Lines of twists are tied to one another by hitches;
//! rigs compose hitches by splicing and lashing, and every rig certificate
//! can be checked offline against nothing but its own bytes.

pub mod chain;
pub mod codec;
pub mod graph;
pub mod hashref;
pub mod hitch;
pub mod rig;
pub mod scenario;
pub mod store;
pub mod support;
pub mod trie;
pub mod twist;

pub use chain::{CausalChain, ChainError, ChainStep, Inclusion};
pub use codec::DecodeError;
pub use graph::{Alignment, GraphError, Line};
pub use hashref::HashRef;
pub use hitch::{HalfHitchCert, HitchCert, HitchError};
pub use rig::{Derivation, Guild, RigCert, RigError};
pub use store::{TwistSource, TwistStore};
pub use support::{RigRelation, Verdict};
pub use trie::{Trie, TrieProof, TrieVerdict};
pub use twist::Twist;
