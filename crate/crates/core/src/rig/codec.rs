//! Rig file format.
//!
//! ```text
//! file  = "RIG1" ‖ version:u8 ‖ node
//! node  = tag:u8 ‖ corkline:refs ‖ leadline:refs ‖ body
//! leaf   (0x10) = half ‖ before:refs ‖ after:refs
//! splice (0x11) = node(left) ‖ proof(post) ‖ gap:refs ‖ node(right)
//! lash   (0x12) = node(bottom) ‖ node(upper)
//! half  = fastener ‖ lead ‖ meet ‖ hoist ‖ topline:refs ‖ footline:refs
//!         ‖ proof(hoist) ‖ count:u32 ‖ proof(exclusion)*
//! refs  = count:u32 ‖ hashref*
//! ```
//!
//! Twists are written by hash and resolved from a store when decoding.

use thiserror::Error;

use super::{Derivation, Leaf, Lash, RigCert, Splice};
use crate::codec::{put_len, DecodeError, Reader};
use crate::graph::Line;
use crate::hashref::HashRef;
use crate::hitch::HalfHitchCert;
use crate::store::TwistSource;
use crate::trie::TrieProof;
use crate::twist::Twist;

pub const RIG_MAGIC: &[u8; 4] = b"RIG1";
pub const RIG_VERSION: u8 = 1;

const TAG_LEAF: u8 = 0x10;
const TAG_SPLICE: u8 = 0x11;
const TAG_LASH: u8 = 0x12;

const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RigDecodeError {
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("unknown twist reference {0}")]
    UnknownReference(HashRef),
}

pub fn encode_rig(cert: &RigCert) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(RIG_MAGIC);
    out.push(RIG_VERSION);
    encode_node(cert, &mut out);
    out
}

fn put_refs<'a>(out: &mut Vec<u8>, refs: impl ExactSizeIterator<Item = &'a HashRef>) {
    put_len(out, refs.len());
    for r in refs {
        r.encode_into(out);
    }
}

fn put_twists(out: &mut Vec<u8>, twists: &[Twist]) {
    let ids: Vec<HashRef> = twists.iter().map(Twist::hash).collect();
    put_refs(out, ids.iter());
}

fn encode_node(cert: &RigCert, out: &mut Vec<u8>) {
    let tag = match cert.derivation {
        Derivation::Leaf(_) => TAG_LEAF,
        Derivation::Splice(_) => TAG_SPLICE,
        Derivation::Lash(_) => TAG_LASH,
    };
    out.push(tag);
    put_refs(out, cert.corkline.ids().iter());
    put_refs(out, cert.leadline.ids().iter());
    match &cert.derivation {
        Derivation::Leaf(leaf) => {
            encode_half(&leaf.half, out);
            put_twists(out, &leaf.before);
            put_twists(out, &leaf.after);
        }
        Derivation::Splice(s) => {
            encode_node(&s.left, out);
            s.post_inclusion.encode_into(out);
            put_twists(out, &s.gap);
            encode_node(&s.right, out);
        }
        Derivation::Lash(l) => {
            encode_node(&l.bottom, out);
            encode_node(&l.upper, out);
        }
    }
}

fn encode_half(half: &HalfHitchCert, out: &mut Vec<u8>) {
    for r in [&half.fastener, &half.lead, &half.meet, &half.hoist] {
        r.encode_into(out);
    }
    put_twists(out, &half.topline);
    put_twists(out, &half.footline);
    half.hoist_inclusion.encode_into(out);
    put_len(out, half.firstness_exclusions.len());
    for p in &half.firstness_exclusions {
        p.encode_into(out);
    }
}

/// Decodes a rig file, looking up every referenced twist in `src`.
pub fn decode_rig<S: TwistSource + ?Sized>(bytes: &[u8], src: &S) -> Result<RigCert, RigDecodeError> {
    let mut r = Reader::new(bytes);
    if r.take(4, "magic")? != RIG_MAGIC {
        return Err(DecodeError::BadMagic.into());
    }
    let version = r.u8("version")?;
    if version != RIG_VERSION {
        return Err(DecodeError::UnsupportedVersion(version).into());
    }
    let cert = Decoder { r: &mut r, src }.node(0)?;
    r.finish()?;
    Ok(cert)
}

struct Decoder<'r, 'b, S: ?Sized> {
    r: &'r mut Reader<'b>,
    src: &'r S,
}

impl<S: TwistSource + ?Sized> Decoder<'_, '_, S> {
    fn count(&mut self, what: &'static str) -> Result<usize, DecodeError> {
        let n = self.r.u32(what)? as usize;
        // Every element takes at least one byte.
        if n > self.r.remaining() {
            return Err(DecodeError::Truncated(what));
        }
        Ok(n)
    }

    fn refs(&mut self, what: &'static str) -> Result<Vec<HashRef>, DecodeError> {
        let n = self.count(what)?;
        (0..n).map(|_| HashRef::decode_from(self.r)).collect()
    }

    fn line(&mut self, what: &'static str) -> Result<Line, DecodeError> {
        Line::new(self.refs(what)?).map_err(|_| DecodeError::Malformed(what))
    }

    fn twists(&mut self, what: &'static str) -> Result<Vec<Twist>, RigDecodeError> {
        self.refs(what)?
            .into_iter()
            .map(|id| self.src.twist(&id).ok_or(RigDecodeError::UnknownReference(id)))
            .collect()
    }

    fn node(&mut self, depth: usize) -> Result<RigCert, RigDecodeError> {
        if depth > MAX_DEPTH {
            return Err(DecodeError::Malformed("derivation nested too deeply").into());
        }
        let tag = self.r.u8("node tag")?;
        let corkline = self.line("corkline")?;
        let leadline = self.line("leadline")?;
        let derivation = match tag {
            TAG_LEAF => {
                let half = self.half()?;
                let before = self.twists("corkline extension")?;
                let after = self.twists("corkline extension")?;
                Derivation::Leaf(Leaf { half, before, after })
            }
            TAG_SPLICE => {
                let left = self.node(depth + 1)?;
                let post_inclusion = TrieProof::decode_from(self.r)?;
                let gap = self.twists("splice gap")?;
                let right = self.node(depth + 1)?;
                Derivation::Splice(Box::new(Splice { left, post_inclusion, gap, right }))
            }
            TAG_LASH => {
                let bottom = self.node(depth + 1)?;
                let upper = self.node(depth + 1)?;
                Derivation::Lash(Box::new(Lash { bottom, upper }))
            }
            tag => return Err(DecodeError::UnknownTag { tag, context: "rig node" }.into()),
        };
        Ok(RigCert { derivation, corkline, leadline })
    }

    fn half(&mut self) -> Result<HalfHitchCert, RigDecodeError> {
        let fastener = HashRef::decode_from(self.r)?;
        let lead = HashRef::decode_from(self.r)?;
        let meet = HashRef::decode_from(self.r)?;
        let hoist = HashRef::decode_from(self.r)?;
        let topline = self.twists("topline")?;
        let footline = self.twists("footline")?;
        let hoist_inclusion = TrieProof::decode_from(self.r)?;
        let n = self.count("exclusions")?;
        let firstness_exclusions = (0..n)
            .map(|_| TrieProof::decode_from(self.r))
            .collect::<Result<_, _>>()?;
        Ok(HalfHitchCert {
            fastener,
            lead,
            meet,
            hoist,
            topline,
            footline,
            hoist_inclusion,
            firstness_exclusions,
        })
    }
}
