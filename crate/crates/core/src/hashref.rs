//! Algorithm-tagged hash references.
//!
//! A reference is encoded as a single algorithm byte followed by the digest.
//! `0x00` is the null reference and carries no digest; `0x01` is SHA-256 with
//! a 32 byte digest. The algorithm byte fixes the digest length, so encoded
//! references can be concatenated without length prefixes.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::codec::{DecodeError, Reader};

pub const ALGO_NULL: u8 = 0x00;
pub const ALGO_SHA256: u8 = 0x01;
pub const DIGEST_LEN: usize = 32;

/// Reference to a twist, trie node or arbitrary value by its digest.
///
/// Ordering is byte ordering of the encoding, so sorting digests sorts keys
/// by their bit strings.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum HashRef {
    #[default]
    Null,
    Sha256([u8; DIGEST_LEN]),
}

impl HashRef {
    /// SHA-256 of `bytes`.
    pub fn of(bytes: &[u8]) -> Self {
        HashRef::Sha256(Sha256::digest(bytes).into())
    }

    /// SHA-256 over the concatenation of `parts`.
    pub fn of_parts(parts: &[&[u8]]) -> Self {
        let mut h = Sha256::new();
        for p in parts {
            h.update(p);
        }
        HashRef::Sha256(h.finalize().into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, HashRef::Null)
    }

    pub fn algo(&self) -> u8 {
        match self {
            HashRef::Null => ALGO_NULL,
            HashRef::Sha256(_) => ALGO_SHA256,
        }
    }

    pub fn digest(&self) -> Option<&[u8; DIGEST_LEN]> {
        match self {
            HashRef::Null => None,
            HashRef::Sha256(d) => Some(d),
        }
    }

    pub fn encoded_len(&self) -> usize {
        match self {
            HashRef::Null => 1,
            HashRef::Sha256(_) => 1 + DIGEST_LEN,
        }
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.push(self.algo());
        if let HashRef::Sha256(d) = self {
            out.extend_from_slice(d);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.encode_into(&mut out);
        out
    }

    pub fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        match r.u8("hash algorithm")? {
            ALGO_NULL => Ok(HashRef::Null),
            ALGO_SHA256 => Ok(HashRef::Sha256(r.array32("sha-256 digest")?)),
            other => Err(DecodeError::UnknownAlgo(other)),
        }
    }

    /// Lowercase hex of the digest; `"null"` for the null reference.
    pub fn to_hex(&self) -> String {
        match self {
            HashRef::Null => "null".to_string(),
            HashRef::Sha256(d) => hex::encode(d),
        }
    }

    /// Parses 64 hex digits (a bare SHA-256 digest), or `"null"`.
    pub fn from_hex(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "null" {
            return Some(HashRef::Null);
        }
        let bytes = hex::decode(s).ok()?;
        let digest: [u8; DIGEST_LEN] = bytes.try_into().ok()?;
        Some(HashRef::Sha256(digest))
    }

    /// Bit `i` of the digest, most significant bit of byte 0 first.
    /// The null reference has no bits and reads as zero.
    pub fn bit(&self, i: usize) -> u8 {
        match self {
            HashRef::Null => 0,
            HashRef::Sha256(d) => (d[i / 8] >> (7 - (i % 8))) & 1,
        }
    }
}

impl fmt::Debug for HashRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HashRef::Null => write!(f, "null"),
            HashRef::Sha256(d) => write!(f, "{}", &hex::encode(d)[..12]),
        }
    }
}

impl fmt::Display for HashRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_encodes_to_single_byte() {
        assert_eq!(HashRef::Null.to_bytes(), vec![0x00]);
    }

    #[test]
    fn sha256_of_empty_matches_known_vector() {
        let h = HashRef::of(b"");
        assert_eq!(
            h.to_hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn hex_round_trip() {
        let h = HashRef::of(b"abc");
        assert_eq!(HashRef::from_hex(&h.to_hex()), Some(h));
        assert_eq!(HashRef::from_hex("null"), Some(HashRef::Null));
        assert_eq!(HashRef::from_hex("zz"), None);
        assert_eq!(HashRef::from_hex("abcd"), None);
    }

    #[test]
    fn bits_read_msb_first() {
        let mut d = [0u8; 32];
        d[0] = 0b1010_0000;
        let h = HashRef::Sha256(d);
        assert_eq!((0..4).map(|i| h.bit(i)).collect::<Vec<_>>(), vec![1, 0, 1, 0]);
    }

    #[test]
    fn unknown_algo_rejected() {
        let mut r = Reader::new(&[0x02]);
        assert_eq!(HashRef::decode_from(&mut r), Err(DecodeError::UnknownAlgo(2)));
    }
}
