//! Hitches and half-hitches.
//!
//! A hitch relates five twists: fastener `f`, lead `l`, meet `m`, hoist `h`
//! and post `n`, with
//!
//! ```text
//! f = t(l)    l = *p(m)    m = *p(n)
//! r(h): l ↦ m    r(n): l ↦ h
//! h is the first successor of f whose rigging binds l
//! ```
//!
//! Certificates carry every twist of the topline `[f, …, h]` and footline
//! `[l, …, m]` in full, so verification needs no store.

use std::fmt;

use thiserror::Error;

use crate::chain::{CausalChain, ChainError, Inclusion};
use crate::graph::{fast_previous, line_between, GraphError, Line};
use crate::hashref::HashRef;
use crate::store::TwistStore;
use crate::trie::{trie_verify, TrieProof, TrieVerdict};
use crate::twist::Twist;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Fastener,
    Lead,
    Meet,
    Hoist,
    Post,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Fastener => "fastener",
            Role::Lead => "lead",
            Role::Meet => "meet",
            Role::Hoist => "hoist",
            Role::Post => "post",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HitchError {
    #[error("{0} does not hash to the claimed reference")]
    HashMismatch(Role),
    #[error("topline is not consecutive at index {0}")]
    ToplineBroken(usize),
    #[error("footline is not consecutive at index {0}")]
    FootlineBroken(usize),
    #[error("post line is not consecutive at index {0}")]
    PostLineBroken(usize),
    #[error("fastener must strictly precede hoist")]
    ToplineTooShort,
    #[error("lead must strictly precede meet")]
    FootlineTooShort,
    #[error("fastener is not the tether of the lead")]
    FastenerNotTether,
    #[error("meet is loose")]
    MeetNotFast,
    #[error("lead is not the fast previous of the meet")]
    LeadNotFastPrevious,
    #[error("meet is not the fast previous of the post")]
    MeetNotFastPrevious,
    #[error("hoist rigging does not bind lead to meet ({0:?})")]
    HoistInclusionFailed(TrieVerdict),
    #[error("post rigging does not bind lead to hoist ({0:?})")]
    PostBindingMismatch(TrieVerdict),
    #[error("no valid exclusion proof for topline twist {index} after the fastener")]
    IncompleteFirstness { index: usize },
    #[error("{earlier:?} binds the lead before the hoist")]
    NotFirstSuccessor { earlier: HashRef },
    #[error("lead line is tethered to itself")]
    SelfTethered,
    #[error("unknown twist {0}")]
    Unresolved(HashRef),
    #[error("no trie known for rigging root {0}")]
    MissingTrie(HashRef),
    #[error(transparent)]
    Graph(GraphError),
}

impl From<GraphError> for HitchError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Unresolved(id) => HitchError::Unresolved(id),
            other => HitchError::Graph(other),
        }
    }
}

/// Everything needed to check a half-hitch locally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfHitchCert {
    pub fastener: HashRef,
    pub lead: HashRef,
    pub meet: HashRef,
    pub hoist: HashRef,
    /// `[f, …, h]`.
    pub topline: Vec<Twist>,
    /// `[l, …, m]`.
    pub footline: Vec<Twist>,
    /// `r(h): l ↦ m`.
    pub hoist_inclusion: TrieProof,
    /// One absence proof for key `l` per twist strictly between `f` and `h`.
    pub firstness_exclusions: Vec<TrieProof>,
}

/// A half-hitch plus its post.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitchCert {
    pub half: HalfHitchCert,
    pub post: HashRef,
    /// The twists after the meet up to and including the post.
    pub post_line: Vec<Twist>,
    /// `r(n): l ↦ h`.
    pub post_inclusion: TrieProof,
}

impl HalfHitchCert {
    pub fn topline_ids(&self) -> Line {
        Line::new(self.topline.iter().map(Twist::hash).collect()).expect("verified topline is non-empty")
    }

    pub fn footline_ids(&self) -> Line {
        Line::new(self.footline.iter().map(Twist::hash).collect()).expect("verified footline is non-empty")
    }

    pub fn twists(&self) -> impl Iterator<Item = &Twist> {
        self.topline.iter().chain(&self.footline)
    }
}

fn check_consecutive(twists: &[Twist], err: fn(usize) -> HitchError) -> Result<(), HitchError> {
    for i in 1..twists.len() {
        if twists[i].prev != twists[i - 1].hash() {
            return Err(err(i));
        }
    }
    Ok(())
}

fn check_role(twist: Option<&Twist>, id: &HashRef, role: Role) -> Result<(), HitchError> {
    match twist {
        Some(t) if t.hash() == *id => Ok(()),
        _ => Err(HitchError::HashMismatch(role)),
    }
}

pub fn verify_half_hitch(cert: &HalfHitchCert) -> Result<(), HitchError> {
    let top = &cert.topline;
    let foot = &cert.footline;
    check_role(top.first(), &cert.fastener, Role::Fastener)?;
    check_role(top.last(), &cert.hoist, Role::Hoist)?;
    check_role(foot.first(), &cert.lead, Role::Lead)?;
    check_role(foot.last(), &cert.meet, Role::Meet)?;
    if top.len() < 2 {
        return Err(HitchError::ToplineTooShort);
    }
    if foot.len() < 2 {
        return Err(HitchError::FootlineTooShort);
    }
    check_consecutive(top, HitchError::ToplineBroken)?;
    check_consecutive(foot, HitchError::FootlineBroken)?;

    let lead = &foot[0];
    if lead.tether != cert.fastener {
        return Err(HitchError::FastenerNotTether);
    }
    if foot[foot.len() - 1].is_loose() {
        return Err(HitchError::MeetNotFast);
    }
    if foot[1..foot.len() - 1].iter().any(Twist::is_fast) {
        return Err(HitchError::LeadNotFastPrevious);
    }

    let verdict = trie_verify(&top[top.len() - 1].rigging, &cert.lead, &cert.hoist_inclusion);
    if verdict != TrieVerdict::Bound(cert.meet) {
        return Err(HitchError::HoistInclusionFailed(verdict));
    }
    let interior = &top[1..top.len() - 1];
    for (i, twist) in interior.iter().enumerate() {
        let Some(proof) = cert.firstness_exclusions.get(i) else {
            return Err(HitchError::IncompleteFirstness { index: i });
        };
        match trie_verify(&twist.rigging, &cert.lead, proof) {
            TrieVerdict::Absent => {}
            TrieVerdict::Bound(_) => return Err(HitchError::NotFirstSuccessor { earlier: twist.hash() }),
            TrieVerdict::Invalid => return Err(HitchError::IncompleteFirstness { index: i }),
        }
    }
    if cert.firstness_exclusions.len() != interior.len() {
        return Err(HitchError::IncompleteFirstness { index: interior.len() });
    }

    // The two lines must be distinct lines: no shared twist, and the lead
    // must not continue the topline.
    let top_ids = cert.topline_ids();
    if cert.footline_ids().ids().iter().any(|id| top_ids.contains(id)) || top_ids.contains(&lead.prev) {
        return Err(HitchError::SelfTethered);
    }
    Ok(())
}

pub fn verify_hitch(cert: &HitchCert) -> Result<(), HitchError> {
    verify_half_hitch(&cert.half)?;
    let post_line = &cert.post_line;
    check_role(post_line.last(), &cert.post, Role::Post)?;
    if post_line[0].prev != cert.half.meet {
        return Err(HitchError::PostLineBroken(0));
    }
    check_consecutive(post_line, HitchError::PostLineBroken)?;
    if post_line[..post_line.len() - 1].iter().any(Twist::is_fast) {
        return Err(HitchError::MeetNotFastPrevious);
    }
    let verdict = trie_verify(&post_line[post_line.len() - 1].rigging, &cert.half.lead, &cert.post_inclusion);
    if verdict != TrieVerdict::Bound(cert.half.hoist) {
        return Err(HitchError::PostBindingMismatch(verdict));
    }
    Ok(())
}

fn resolve(store: &TwistStore, id: &HashRef) -> Result<Twist, HitchError> {
    store.get(id).ok_or(HitchError::Unresolved(*id))
}

fn twists_of(store: &TwistStore, line: &Line) -> Result<Vec<Twist>, HitchError> {
    line.ids().iter().map(|id| resolve(store, id)).collect()
}

fn prove(store: &TwistStore, twist: &Twist, key: &HashRef) -> Result<TrieProof, HitchError> {
    store.prove(&twist.rigging, key).ok_or(HitchError::MissingTrie(twist.rigging))
}

/// Gathers twists and proofs without judging them. Exclusion slots hold
/// whatever proof the trie yields, inclusion or not.
pub fn assemble_unchecked(
    store: &TwistStore,
    fastener: HashRef,
    lead: HashRef,
    meet: HashRef,
    hoist: HashRef,
) -> Result<HalfHitchCert, HitchError> {
    let topline = twists_of(store, &line_between(store, &fastener, &hoist)?)?;
    let footline = twists_of(store, &line_between(store, &lead, &meet)?)?;
    let hoist_inclusion = prove(store, &topline[topline.len() - 1], &lead)?;
    let firstness_exclusions = topline[1..topline.len().saturating_sub(1)]
        .iter()
        .map(|t| prove(store, t, &lead))
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

/// Builds a half-hitch certificate from the store, naming the first
/// relation that fails.
pub fn assemble_half_hitch(
    store: &TwistStore,
    fastener: HashRef,
    lead: HashRef,
    meet: HashRef,
    hoist: HashRef,
) -> Result<HalfHitchCert, HitchError> {
    if resolve(store, &lead)?.tether != fastener {
        return Err(HitchError::FastenerNotTether);
    }
    if resolve(store, &meet)?.is_loose() {
        return Err(HitchError::MeetNotFast);
    }
    match fast_previous(store, &meet) {
        Ok(p) if p == lead => {}
        Ok(_) | Err(GraphError::NoFastPredecessor(_)) => return Err(HitchError::LeadNotFastPrevious),
        Err(e) => return Err(e.into()),
    }
    if fastener == hoist {
        return Err(HitchError::ToplineTooShort);
    }
    let topline = match line_between(store, &fastener, &hoist) {
        Err(GraphError::NotPreceding { .. }) => return Err(HitchError::ToplineBroken(0)),
        other => other?,
    };
    for id in &topline.ids()[1..topline.len() - 1] {
        let t = resolve(store, id)?;
        if let TrieVerdict::Bound(_) = trie_verify(&t.rigging, &lead, &prove(store, &t, &lead)?) {
            return Err(HitchError::NotFirstSuccessor { earlier: *id });
        }
    }
    let cert = assemble_unchecked(store, fastener, lead, meet, hoist)?;
    verify_half_hitch(&cert)?;
    Ok(cert)
}

/// Extends a half-hitch with a post found in the store.
pub fn assemble_hitch(store: &TwistStore, half: HalfHitchCert, post: HashRef) -> Result<HitchCert, HitchError> {
    let line = match line_between(store, &half.meet, &post) {
        Err(GraphError::NotPreceding { .. }) => return Err(HitchError::PostLineBroken(0)),
        other => other?,
    };
    if line.len() < 2 {
        return Err(HitchError::PostLineBroken(0));
    }
    let post_line = twists_of(store, &Line::new(line.ids()[1..].to_vec())?)?;
    let post_inclusion = prove(store, &post_line[post_line.len() - 1], &half.lead)?;
    let cert = HitchCert { half, post, post_line, post_inclusion };
    verify_hitch(&cert)?;
    Ok(cert)
}

/// Explicit witnesses for `f ≺≺ l ≺≺ m ≺≺ h (≺≺ n)`, one chain per link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chronology {
    pub segments: Vec<CausalChain>,
}

impl Chronology {
    /// Verifies every segment and that each starts where the last ended.
    pub fn verify(&self) -> Result<HashRef, ChainError> {
        let mut end: Option<HashRef> = None;
        for seg in &self.segments {
            if let Some(end) = end {
                if seg.start != end {
                    return Err(ChainError::Disconnected { end, start: seg.start });
                }
            }
            end = Some(seg.verify()?);
        }
        Ok(end.unwrap_or_default())
    }

    pub fn joined(&self) -> Result<CausalChain, ChainError> {
        let mut it = self.segments.iter().cloned();
        let first = it.next().unwrap_or_else(|| CausalChain::identity(HashRef::Null));
        it.try_fold(first, CausalChain::concat)
    }
}

fn half_segments(cert: &HalfHitchCert) -> Vec<CausalChain> {
    let lead = cert.footline[0];
    let hoist = cert.topline[cert.topline.len() - 1];
    vec![
        CausalChain::identity(cert.fastener).with(lead, Inclusion::Tether),
        CausalChain::along(cert.lead, &cert.footline[1..]),
        CausalChain::identity(cert.meet).with(
            hoist,
            Inclusion::Rigging { key: cert.lead, proof: cert.hoist_inclusion.clone() },
        ),
    ]
}

/// `f ≺≺ l ≺≺ m ≺≺ h`.
pub fn half_hitch_chronology(cert: &HalfHitchCert) -> Chronology {
    Chronology { segments: half_segments(cert) }
}

/// `f ≺≺ l ≺≺ m ≺≺ h ≺≺ n`.
pub fn hitch_chronology_witness(cert: &HitchCert) -> Chronology {
    let mut segments = half_segments(&cert.half);
    let post = cert.post_line[cert.post_line.len() - 1];
    segments.push(CausalChain::identity(cert.half.hoist).with(
        post,
        Inclusion::Rigging { key: cert.half.lead, proof: cert.post_inclusion.clone() },
    ));
    Chronology { segments }
}
