//! Path-compressed binary Merkle trie keyed on digest bits.
//!
//! Every key is a non-null [`HashRef`]; its digest bits choose the path.
//! Interior nodes record the bit index at which their two subtrees first
//! differ, so a trie over `n` keys has exactly `n` leaves and `n - 1`
//! branches. The empty trie has the null root.
//!
//! Node encodings (hashed with SHA-256 to give node identities):
//!
//! ```text
//! leaf   = 0x4c ‖ key ‖ value            (key/value as algo ‖ digest)
//! branch = 0x42 ‖ split ‖ left ‖ right   (split: u8, children: 32 byte digests)
//! ```
//!
//! A proof carries the terminal leaf found by following the key's bits and
//! the sibling digests on the way back up. Following the key from a fixed
//! root is deterministic, so a root and key admit at most one outcome:
//! the leaf carries the key (bound) or a different key (absent).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::codec::{put_len, DecodeError, Reader};
use crate::hashref::{HashRef, DIGEST_LEN};

pub const TAG_LEAF: u8 = 0x4c;
pub const TAG_BRANCH: u8 = 0x42;

/// Keys are SHA-256 digests.
pub const KEY_BITS: usize = DIGEST_LEN * 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrieError {
    #[error("trie keys must be non-null")]
    NullKey,
    #[error("key {key:?} bound to both {first:?} and {second:?}")]
    ConflictingValues {
        key: HashRef,
        first: HashRef,
        second: HashRef,
    },
}

/// Outcome of checking a proof against a root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrieVerdict {
    Bound(HashRef),
    Absent,
    Invalid,
}

/// Where the key's path ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminal {
    /// The trie is empty.
    Empty,
    /// The leaf reached by following the key. A different key here is the
    /// divergence witness for an absent key.
    Leaf { key: HashRef, value: HashRef },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProofStep {
    pub split: u8,
    pub sibling: [u8; DIGEST_LEN],
}

/// Merkle path from a terminal up to the root (leaf side first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrieProof {
    pub terminal: Terminal,
    pub path: Vec<ProofStep>,
}

pub(crate) fn leaf_digest(key: &HashRef, value: &HashRef) -> [u8; DIGEST_LEN] {
    let mut buf = Vec::with_capacity(1 + key.encoded_len() + value.encoded_len());
    buf.push(TAG_LEAF);
    key.encode_into(&mut buf);
    value.encode_into(&mut buf);
    digest_of(&buf)
}

pub(crate) fn branch_digest(
    split: u8,
    left: &[u8; DIGEST_LEN],
    right: &[u8; DIGEST_LEN],
) -> [u8; DIGEST_LEN] {
    let mut buf = [0u8; 2 + 2 * DIGEST_LEN];
    buf[0] = TAG_BRANCH;
    buf[1] = split;
    buf[2..2 + DIGEST_LEN].copy_from_slice(left);
    buf[2 + DIGEST_LEN..].copy_from_slice(right);
    digest_of(&buf)
}

fn digest_of(bytes: &[u8]) -> [u8; DIGEST_LEN] {
    match HashRef::of(bytes) {
        HashRef::Sha256(d) => d,
        HashRef::Null => unreachable!(),
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        key: HashRef,
        value: HashRef,
        digest: [u8; DIGEST_LEN],
    },
    Branch {
        split: u8,
        left: Box<Node>,
        right: Box<Node>,
        digest: [u8; DIGEST_LEN],
    },
}

impl Node {
    fn digest(&self) -> &[u8; DIGEST_LEN] {
        match self {
            Node::Leaf { digest, .. } | Node::Branch { digest, .. } => digest,
        }
    }

    fn build(entries: &[(HashRef, HashRef)]) -> Node {
        if let [(key, value)] = entries {
            return Node::Leaf {
                key: *key,
                value: *value,
                digest: leaf_digest(key, value),
            };
        }
        // Entries are sorted, so the first and last key bound the prefix
        // that every key in the slice shares.
        let first = &entries[0].0;
        let last = &entries[entries.len() - 1].0;
        let split = (0..KEY_BITS)
            .find(|&i| first.bit(i) != last.bit(i))
            .expect("distinct keys differ in some bit");
        let cut = entries.partition_point(|(k, _)| k.bit(split) == 0);
        let left = Box::new(Node::build(&entries[..cut]));
        let right = Box::new(Node::build(&entries[cut..]));
        let split = split as u8;
        let digest = branch_digest(split, left.digest(), right.digest());
        Node::Branch { split, left, right, digest }
    }

    fn count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Branch { left, right, .. } => 1 + left.count() + right.count(),
        }
    }

    fn collect_digests(&self, out: &mut Vec<[u8; DIGEST_LEN]>) {
        out.push(*self.digest());
        if let Node::Branch { left, right, .. } = self {
            left.collect_digests(out);
            right.collect_digests(out);
        }
    }
}

/// An in-memory trie with its node structure, able to produce proofs.
#[derive(Debug, Clone)]
pub struct Trie {
    entries: BTreeMap<HashRef, HashRef>,
    root: Option<Node>,
}

impl Trie {
    /// Builds a trie from key/value pairs. Repeating a pair is harmless;
    /// binding one key to two values is an error.
    pub fn build<I>(pairs: I) -> Result<Self, TrieError>
    where
        I: IntoIterator<Item = (HashRef, HashRef)>,
    {
        let mut entries = BTreeMap::new();
        for (key, value) in pairs {
            if key.is_null() {
                return Err(TrieError::NullKey);
            }
            if let Some(first) = entries.insert(key, value) {
                if first != value {
                    return Err(TrieError::ConflictingValues { key, first, second: value });
                }
            }
        }
        let sorted: Vec<_> = entries.iter().map(|(k, v)| (*k, *v)).collect();
        let root = (!sorted.is_empty()).then(|| Node::build(&sorted));
        Ok(Self { entries, root })
    }

    pub fn root(&self) -> HashRef {
        self.root
            .as_ref()
            .map_or(HashRef::Null, |n| HashRef::Sha256(*n.digest()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &HashRef) -> Option<&HashRef> {
        self.entries.get(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&HashRef, &HashRef)> {
        self.entries.iter()
    }

    /// Number of leaf and branch nodes.
    pub fn node_count(&self) -> usize {
        self.root.as_ref().map_or(0, Node::count)
    }

    /// Digests of every node, root first.
    pub fn node_digests(&self) -> Vec<[u8; DIGEST_LEN]> {
        let mut out = Vec::new();
        if let Some(n) = &self.root {
            n.collect_digests(&mut out);
        }
        out
    }

    /// Inclusion proof when `key` is bound, exclusion proof otherwise.
    pub fn prove(&self, key: &HashRef) -> Result<TrieProof, TrieError> {
        if key.is_null() {
            return Err(TrieError::NullKey);
        }
        let Some(mut node) = self.root.as_ref() else {
            return Ok(TrieProof { terminal: Terminal::Empty, path: Vec::new() });
        };
        let mut path = Vec::new();
        loop {
            match node {
                Node::Leaf { key: k, value, .. } => {
                    path.reverse();
                    return Ok(TrieProof {
                        terminal: Terminal::Leaf { key: *k, value: *value },
                        path,
                    });
                }
                Node::Branch { split, left, right, .. } => {
                    let (next, sibling) = if key.bit(*split as usize) == 0 {
                        (left, right)
                    } else {
                        (right, left)
                    };
                    path.push(ProofStep { split: *split, sibling: *sibling.digest() });
                    node = next;
                }
            }
        }
    }
}

/// Root of the trie holding `pairs`; null for the empty set.
pub fn trie_build<I>(pairs: I) -> Result<HashRef, TrieError>
where
    I: IntoIterator<Item = (HashRef, HashRef)>,
{
    Trie::build(pairs).map(|t| t.root())
}

pub fn trie_prove<I>(pairs: I, key: &HashRef) -> Result<TrieProof, TrieError>
where
    I: IntoIterator<Item = (HashRef, HashRef)>,
{
    Trie::build(pairs)?.prove(key)
}

/// Checks `proof` for `key` against `root`. Total: malformed or
/// non-reconstructing proofs come back as [`TrieVerdict::Invalid`].
pub fn trie_verify(root: &HashRef, key: &HashRef, proof: &TrieProof) -> TrieVerdict {
    if key.is_null() {
        return TrieVerdict::Invalid;
    }
    let (leaf_key, value) = match &proof.terminal {
        Terminal::Empty => {
            return if proof.path.is_empty() && root.is_null() {
                TrieVerdict::Absent
            } else {
                TrieVerdict::Invalid
            };
        }
        Terminal::Leaf { key, value } => (key, value),
    };
    let Some(root) = root.digest() else {
        return TrieVerdict::Invalid;
    };
    if leaf_key.is_null() {
        return TrieVerdict::Invalid;
    }
    let mut acc = leaf_digest(leaf_key, value);
    let mut above: Option<u8> = None;
    for step in &proof.path {
        // Splits strictly increase from the root down.
        if above.is_some_and(|prev| step.split >= prev) {
            return TrieVerdict::Invalid;
        }
        let bit = key.bit(step.split as usize);
        if leaf_key.bit(step.split as usize) != bit {
            return TrieVerdict::Invalid;
        }
        acc = if bit == 0 {
            branch_digest(step.split, &acc, &step.sibling)
        } else {
            branch_digest(step.split, &step.sibling, &acc)
        };
        above = Some(step.split);
    }
    if &acc != root {
        return TrieVerdict::Invalid;
    }
    if leaf_key == key {
        TrieVerdict::Bound(*value)
    } else {
        TrieVerdict::Absent
    }
}

impl TrieProof {
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        match &self.terminal {
            Terminal::Empty => out.push(0x00),
            Terminal::Leaf { key, value } => {
                out.push(0x01);
                key.encode_into(out);
                value.encode_into(out);
            }
        }
        put_len(out, self.path.len());
        for step in &self.path {
            out.push(step.split);
            out.extend_from_slice(&step.sibling);
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }

    pub fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let terminal = match r.u8("proof terminal")? {
            0x00 => Terminal::Empty,
            0x01 => Terminal::Leaf {
                key: HashRef::decode_from(r)?,
                value: HashRef::decode_from(r)?,
            },
            tag => return Err(DecodeError::UnknownTag { tag, context: "proof terminal" }),
        };
        let len = r.u32("proof length")? as usize;
        if len > KEY_BITS {
            return Err(DecodeError::Malformed("proof longer than key width"));
        }
        let mut path = Vec::with_capacity(len);
        for _ in 0..len {
            let split = r.u8("proof split")?;
            let sibling = r.array32("proof sibling")?;
            path.push(ProofStep { split, sibling });
        }
        Ok(Self { terminal, path })
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let p = Self::decode_from(&mut r)?;
        r.finish()?;
        Ok(p)
    }
}

/// Keys whose only non-zero bits are the first four; the "toy" key space
/// used for exhaustive enumeration.
pub fn toy_key(nibble: u8) -> HashRef {
    let mut d = [0u8; DIGEST_LEN];
    d[0] = (nibble & 0x0f) << 4;
    HashRef::Sha256(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn h(s: &str) -> HashRef {
        HashRef::of(s.as_bytes())
    }

    #[test]
    fn empty_trie_has_null_root_and_binds_nothing() {
        let t = Trie::build([]).unwrap();
        assert!(t.root().is_null());
        let proof = t.prove(&h("k")).unwrap();
        assert_eq!(proof.terminal, Terminal::Empty);
        assert_eq!(trie_verify(&HashRef::Null, &h("k"), &proof), TrieVerdict::Absent);
    }

    #[test]
    fn order_independent() {
        let a = trie_build([(h("a"), h("x")), (h("b"), h("y"))]).unwrap();
        let b = trie_build([(h("b"), h("y")), (h("a"), h("x"))]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn value_changes_root() {
        let v = trie_build([(h("k"), h("v"))]).unwrap();
        let w = trie_build([(h("k"), h("w"))]).unwrap();
        assert_ne!(v, w);
    }

    #[test]
    fn conflicting_duplicate_rejected() {
        let err = Trie::build([(h("k"), h("v")), (h("k"), h("w"))]).unwrap_err();
        assert!(matches!(err, TrieError::ConflictingValues { .. }));
        assert!(Trie::build([(h("k"), h("v")), (h("k"), h("v"))]).is_ok());
    }

    #[test]
    fn null_key_rejected() {
        assert_eq!(Trie::build([(HashRef::Null, h("v"))]).unwrap_err(), TrieError::NullKey);
        let t = Trie::build([(h("k"), h("v"))]).unwrap();
        assert_eq!(t.prove(&HashRef::Null).unwrap_err(), TrieError::NullKey);
    }

    #[test]
    fn inclusion_and_exclusion() {
        let pairs = [(h("k"), h("v"))];
        let root = trie_build(pairs).unwrap();
        let incl = trie_prove(pairs, &h("k")).unwrap();
        assert_eq!(trie_verify(&root, &h("k"), &incl), TrieVerdict::Bound(h("v")));
        let excl = trie_prove(pairs, &h("j")).unwrap();
        assert_eq!(trie_verify(&root, &h("j"), &excl), TrieVerdict::Absent);
        // The exclusion proof says nothing about a third key it doesn't lead to.
        assert_eq!(trie_verify(&root, &h("k"), &excl), TrieVerdict::Bound(h("v")));
    }

    #[test]
    fn null_value_is_bound_not_absent() {
        let pairs = [(h("k"), HashRef::Null)];
        let root = trie_build(pairs).unwrap();
        let p = trie_prove(pairs, &h("k")).unwrap();
        assert_eq!(trie_verify(&root, &h("k"), &p), TrieVerdict::Bound(HashRef::Null));
    }

    #[test]
    fn toy_trie_shape() {
        let pairs: Vec<_> = [0b0000, 0b0001, 0b1000].iter().map(|&n| (toy_key(n), h("v"))).collect();
        let t = Trie::build(pairs).unwrap();
        assert_eq!(t.node_count(), 5);
        let p = t.prove(&toy_key(0b0001)).unwrap();
        // Root splits on bit 0, then bit 3.
        assert_eq!(p.path.iter().map(|s| s.split).collect::<Vec<_>>(), vec![3, 0]);
    }

    #[test]
    fn proof_size_logarithmic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs: Vec<_> = (0..1024)
            .map(|_| (HashRef::Sha256(rng.random()), HashRef::Sha256(rng.random())))
            .collect();
        let t = Trie::build(pairs.iter().copied()).unwrap();
        let longest = pairs.iter().map(|(k, _)| t.prove(k).unwrap().path.len()).max().unwrap();
        assert!(longest < 40, "path length {longest}");
    }

    #[test]
    fn random_sets_verify() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let n = rng.random_range(0..8);
            let pairs: Vec<_> = (0..n)
                .map(|_| (HashRef::Sha256(rng.random()), HashRef::Sha256(rng.random())))
                .collect();
            let t = Trie::build(pairs.iter().copied()).unwrap();
            let key = if n > 0 && rng.random_bool(0.5) {
                pairs[rng.random_range(0..n)].0
            } else {
                HashRef::Sha256(rng.random())
            };
            let expected = t.get(&key).map_or(TrieVerdict::Absent, |v| TrieVerdict::Bound(*v));
            let proof = t.prove(&key).unwrap();
            assert_eq!(trie_verify(&t.root(), &key, &proof), expected);
        }
    }

    #[test]
    fn proof_codec_rejects_garbage() {
        assert!(TrieProof::decode(&[0x07]).is_err());
        assert!(TrieProof::decode(&[0x00, 0, 0, 0, 0, 0xff]).is_err());
    }

    proptest! {
        #[test]
        fn proof_codec_round_trip(keys in proptest::collection::vec(any::<[u8; 32]>(), 0..6), probe in any::<[u8; 32]>()) {
            let t = Trie::build(keys.iter().map(|k| (HashRef::Sha256(*k), HashRef::of(k)))).unwrap();
            let p = t.prove(&HashRef::Sha256(probe)).unwrap();
            prop_assert_eq!(TrieProof::decode(&p.encode()).unwrap(), p);
        }

        #[test]
        fn root_independent_of_insertion_order(mut keys in proptest::collection::vec(any::<[u8; 32]>(), 0..12), seed in any::<u64>()) {
            let pairs: Vec<_> = keys.iter().map(|k| (HashRef::Sha256(*k), HashRef::of(k))).collect();
            let before = trie_build(pairs.iter().copied()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..keys.len()).rev() {
                keys.swap(i, rng.random_range(0..=i));
            }
            let after = trie_build(keys.iter().map(|k| (HashRef::Sha256(*k), HashRef::of(k)))).unwrap();
            prop_assert_eq!(before, after);
        }
    }
}
