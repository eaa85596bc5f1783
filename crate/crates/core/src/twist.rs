//! Twists: the three-reference record every rigging structure is made of.

use crate::codec::{DecodeError, Reader};
use crate::hashref::HashRef;

/// A twist holds its previous twist, its tether, and the root of its
/// rigging trie.
///
/// The canonical encoding is `prev ‖ tether ‖ rigging`, each written as an
/// algorithm byte followed by its digest. A twist is identified by the
/// SHA-256 of that encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Twist {
    pub prev: HashRef,
    pub tether: HashRef,
    pub rigging: HashRef,
}

impl Twist {
    pub fn new(prev: HashRef, tether: HashRef, rigging: HashRef) -> Self {
        Self { prev, tether, rigging }
    }

    /// Fast twists are tethered to something.
    pub fn is_fast(&self) -> bool {
        !self.tether.is_null()
    }

    pub fn is_loose(&self) -> bool {
        self.tether.is_null()
    }

    /// A twist with a null previous starts a line.
    pub fn is_origin(&self) -> bool {
        self.prev.is_null()
    }

    pub fn encoded_len(&self) -> usize {
        self.prev.encoded_len() + self.tether.encoded_len() + self.rigging.encoded_len()
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        self.prev.encode_into(out);
        self.tether.encode_into(out);
        self.rigging.encode_into(out);
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.encode_into(&mut out);
        out
    }

    pub fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let prev = HashRef::decode_from(r)?;
        let tether = HashRef::decode_from(r)?;
        let rigging = HashRef::decode_from(r)?;
        Ok(Self { prev, tether, rigging })
    }

    /// Decodes exactly one twist; trailing bytes are an error.
    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let t = Self::decode_from(&mut r)?;
        r.finish()?;
        Ok(t)
    }

    /// The twist's identity.
    pub fn hash(&self) -> HashRef {
        HashRef::of(&self.encode())
    }
}
