//! Relations between rigs, unique succession, and exhaustive checks of
//! supportiveness over small twist pools.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{alignment, fast_previous, line_between, precedes, precedes_or_eq, Alignment, GraphError, Line};
use crate::hashref::HashRef;
use crate::hitch::{assemble_half_hitch, assemble_unchecked, verify_half_hitch, HalfHitchCert, HitchError};
use crate::rig::{encode_rig, lash, lashable, rig_length, splice, verify_rig, RigCert};
use crate::store::{Layered, TwistStore};
use crate::trie::Terminal;
use crate::twist::Twist;

/// Largest pool [`oracle_supportive`] will enumerate.
pub const POOL_LIMIT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Disjoint,
    Aligned,
    Misaligned,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Disjoint => "disjoint",
            Verdict::Aligned => "aligned",
            Verdict::Misaligned => "misaligned",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    /// Two corkline twists that are not aligned.
    CorklinesForked(HashRef, HashRef),
    /// The leadlines share no twist.
    NoCommonTwist,
    /// The enveloping line of both leadlines.
    Envelope(Line),
    /// Two leadline twists that are not aligned.
    LeadlinesForked(HashRef, HashRef),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigRelation {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

impl fmt::Display for RigRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.evidence {
            Evidence::CorklinesForked(a, b) => write!(f, "{} corklines fork at {} / {}", self.verdict, a.to_hex(), b.to_hex()),
            Evidence::NoCommonTwist => write!(f, "{} leadlines share no twist", self.verdict),
            Evidence::Envelope(l) => write!(f, "{} envelope {}..{} ({} twists)", self.verdict, l.first().to_hex(), l.last().to_hex(), l.len()),
            Evidence::LeadlinesForked(a, b) => write!(f, "{} leadlines fork at {} / {}", self.verdict, a.to_hex(), b.to_hex()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SupportError {
    #[error("equivocation against {z:?}: {a0:?} is followed by both {first:?} and {second:?}")]
    EquivocationDetected {
        z: HashRef,
        a0: HashRef,
        first: HashRef,
        second: HashRef,
        /// Indices of the two candidates.
        rigs: (usize, usize),
    },
    #[error("pool of {size} twists exceeds the limit of {limit}")]
    PoolTooLarge { size: usize, limit: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn union(a: &RigCert, b: &RigCert) -> HashMap<HashRef, Twist> {
    let mut map = a.twists();
    map.extend(b.twists());
    map
}

/// Classifies a pair of rigs. Disjointness is decided first: corklines
/// not aligned, or leadlines with no twist in common.
pub fn relate(store: &TwistStore, r: &RigCert, other: &RigCert) -> Result<RigRelation, GraphError> {
    let map = union(r, other);
    let src = Layered(&map, store);
    let corks: Vec<HashRef> = r.corkline.ids().iter().chain(other.corkline.ids()).copied().collect();
    if let Alignment::Forked(a, b) = alignment(&src, &corks)? {
        return Ok(RigRelation { verdict: Verdict::Disjoint, evidence: Evidence::CorklinesForked(a, b) });
    }
    if !r.leadline.ids().iter().any(|id| other.leadline.contains(id)) {
        return Ok(RigRelation { verdict: Verdict::Disjoint, evidence: Evidence::NoCommonTwist });
    }
    let leads: Vec<HashRef> = r.leadline.ids().iter().chain(other.leadline.ids()).copied().collect();
    Ok(match alignment(&src, &leads)? {
        Alignment::Envelope(line) => RigRelation { verdict: Verdict::Aligned, evidence: Evidence::Envelope(line) },
        Alignment::Forked(a, b) => RigRelation { verdict: Verdict::Misaligned, evidence: Evidence::LeadlinesForked(a, b) },
    })
}

/// The successor of `a0` held fast to the line ending at `z`, if any.
/// Candidates are taken as already accepted; those whose corkline does not
/// end at or before `z` are ignored. Two different successors are reported
/// as an equivocation.
pub fn unique_successor(
    store: &TwistStore,
    z: &HashRef,
    a0: &HashRef,
    candidates: &[RigCert],
) -> Result<Option<HashRef>, SupportError> {
    let mut found: Option<(HashRef, usize)> = None;
    for (i, cert) in candidates.iter().enumerate() {
        let Some(pos) = cert.leadline.position(a0) else { continue };
        let Some(&a1) = cert.leadline.ids().get(pos + 1) else { continue };
        let map = cert.twists();
        if !precedes_or_eq(&Layered(&map, store), &cert.corkline.last(), z)? {
            continue;
        }
        match found {
            Some((first, j)) if first != a1 => {
                return Err(SupportError::EquivocationDetected { z: *z, a0: *a0, first, second: a1, rigs: (j, i) });
            }
            Some(_) => {}
            None => found = Some((a1, i)),
        }
    }
    Ok(found.map(|(a1, _)| a1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    /// Accepted rigs, in canonical order.
    pub rigs: Vec<RigCert>,
    pub pairs: usize,
    pub counts: BTreeMap<Verdict, usize>,
    pub misaligned: Vec<(usize, usize, RigRelation)>,
    pub equivocations: Vec<SupportError>,
}

impl OracleReport {
    pub fn is_supportive(&self) -> bool {
        self.misaligned.is_empty() && self.equivocations.is_empty()
    }

    /// One line per finding plus a summary, stable across runs.
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!(
            "rigs {} pairs {} aligned {} disjoint {} misaligned {}",
            self.rigs.len(),
            self.pairs,
            self.counts.get(&Verdict::Aligned).unwrap_or(&0),
            self.counts.get(&Verdict::Disjoint).unwrap_or(&0),
            self.counts.get(&Verdict::Misaligned).unwrap_or(&0),
        )];
        for (i, j, rel) in &self.misaligned {
            out.push(format!("pair {i} {j} {rel}"));
        }
        for e in &self.equivocations {
            out.push(format!("equivocation {e}"));
        }
        out
    }
}

fn pool_half_hitches(pool: &TwistStore) -> Vec<HalfHitchCert> {
    let ids = pool.ids();
    let mut out = Vec::new();
    for m in &ids {
        let Some(meet) = pool.get(m) else { continue };
        if meet.is_loose() {
            continue;
        }
        let Ok(l) = fast_previous(pool, m) else { continue };
        let Some(f) = pool.get(&l).map(|t| t.tether) else { continue };
        if !pool.contains(&f) {
            continue;
        }
        for h in &ids {
            if precedes(pool, &f, h).unwrap_or(false) {
                if let Ok(cert) = assemble_half_hitch(pool, f, l, *m, *h) {
                    out.push(cert);
                }
            }
        }
    }
    out
}

/// Every leaf over `half`: the topline extended back by any number of pool
/// predecessors and forward to any pool descendant.
fn pool_leaves(pool: &TwistStore, half: &HalfHitchCert) -> Vec<RigCert> {
    let mut ancestors = Vec::new();
    let mut cur = half.topline[0].prev;
    while let Some(t) = pool.get(&cur) {
        ancestors.push(t);
        cur = t.prev;
    }
    let mut afters: Vec<Vec<Twist>> = vec![Vec::new()];
    for y in pool.ids() {
        if precedes(pool, &half.hoist, &y).unwrap_or(false) {
            if let Ok(line) = line_between(pool, &half.hoist, &y) {
                afters.push(line.ids()[1..].iter().filter_map(|id| pool.get(id)).collect());
            }
        }
    }
    let mut out = Vec::new();
    for k in 0..=ancestors.len() {
        let before: Vec<Twist> = ancestors[..k].iter().rev().copied().collect();
        for after in &afters {
            out.push(RigCert::leaf(half.clone(), before.clone(), after.clone()));
        }
    }
    out
}

/// Enumerates every rig buildable from the pool (half-hitch leaves, then up
/// to `max_depth` rounds of splicing and lashing), relates every pair, and
/// sweeps every `(z, a0)` for equivocation.
pub fn oracle_supportive(pool: &TwistStore, max_depth: usize) -> Result<OracleReport, SupportError> {
    if pool.len() > POOL_LIMIT {
        return Err(SupportError::PoolTooLarge { size: pool.len(), limit: POOL_LIMIT });
    }
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut rigs: Vec<RigCert> = Vec::new();
    let mut admit = |cert: RigCert, rigs: &mut Vec<RigCert>| {
        if seen.insert(encode_rig(&cert)) {
            rigs.push(cert);
        }
    };
    for half in pool_half_hitches(pool) {
        for leaf in pool_leaves(pool, &half) {
            if verify_rig(&leaf).is_ok() {
                admit(leaf, &mut rigs);
            }
        }
    }
    for _ in 0..max_depth {
        let before = rigs.len();
        let snapshot = rigs.clone();
        for r0 in &snapshot {
            for r1 in &snapshot {
                if r0.leadline.last() == r1.leadline.first() && rig_length(r0) == Ok(1) {
                    if let Ok(cert) = splice(pool, r0.clone(), r1.clone()) {
                        admit(cert, &mut rigs);
                    }
                }
                if lashable(r0, r1) {
                    if let Ok(cert) = lash(r0.clone(), r1.clone()) {
                        admit(cert, &mut rigs);
                    }
                }
            }
        }
        if rigs.len() == before {
            break;
        }
    }
    rigs.sort_by_cached_key(encode_rig);

    let mut counts = BTreeMap::new();
    let mut misaligned = Vec::new();
    let mut pairs = 0;
    for i in 0..rigs.len() {
        for j in i + 1..rigs.len() {
            let rel = relate(pool, &rigs[i], &rigs[j])?;
            pairs += 1;
            *counts.entry(rel.verdict).or_insert(0) += 1;
            if rel.verdict == Verdict::Misaligned {
                misaligned.push((i, j, rel));
            }
        }
    }

    let mut equivocations = Vec::new();
    let leads: BTreeSet<HashRef> = rigs.iter().flat_map(|r| r.leadline.ids().iter().copied()).collect();
    for z in pool.ids() {
        for a0 in &leads {
            match unique_successor(pool, &z, a0, &rigs) {
                Ok(_) => {}
                Err(e @ SupportError::EquivocationDetected { .. }) => equivocations.push(e),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(OracleReport { rigs, pairs, counts, misaligned, equivocations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForgeStrategy {
    /// A second hoist later on the topline binds the lead to another meet.
    LaterHoist,
    /// The later hoist, with the earlier binding hidden behind a proof for
    /// a different key.
    ForgedExclusion,
    /// The later hoist, with the exclusion for the earlier hoist left out.
    OmittedExclusion,
    /// The later hoist, presenting a topline that skips the earlier hoist.
    SkippedTopline,
    /// The original hoist, with its proof edited to name another meet.
    SameHoistOtherValue,
    /// A hoist on a fork of the topline right after the fastener.
    ForkedCorkline,
}

impl ForgeStrategy {
    pub const ALL: [ForgeStrategy; 6] = [
        ForgeStrategy::LaterHoist,
        ForgeStrategy::ForgedExclusion,
        ForgeStrategy::OmittedExclusion,
        ForgeStrategy::SkippedTopline,
        ForgeStrategy::SameHoistOtherValue,
        ForgeStrategy::ForkedCorkline,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForgeOutcome {
    /// Verification refused the forged certificate.
    Blocked(HitchError),
    /// Accepted, but on a corkline that does not align with the original.
    Disjoint,
    /// Accepted and conflicting with the original on one corkline.
    Accepted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForgeReport {
    pub attempts: Vec<(ForgeStrategy, ForgeOutcome)>,
    /// Pairs of accepted certificates with equal fastener and lead,
    /// different meets, and aligned corklines.
    pub conflicts: usize,
}

/// Tries to produce a second accepted half-hitch with the same fastener
/// and lead as `hh` but a different meet, once per strategy. New twists are
/// written into `store`.
pub fn forge_second_meet(store: &TwistStore, hh: &HalfHitchCert) -> ForgeReport {
    let (f, l) = (hh.fastener, hh.lead);
    let hoist = *hh.topline.last().expect("accepted topline");
    let salt = |tag: &str| HashRef::of_parts(&[b"forge", tag.as_bytes(), hh.hoist.to_bytes().as_slice()]);
    let nonce = |tag: &str| (salt(tag), HashRef::Null);

    // The rival meet: fast, straight after the lead.
    let meet_root = store.put_trie([nonce("meet")]).expect("fresh trie");
    let rival = store.put(Twist::new(l, f, meet_root));
    let later_root = store.put_trie([(l, rival), nonce("later")]).expect("fresh trie");
    let later = store.put(Twist::new(hh.hoist, hoist.tether, later_root));
    let fork_root = store.put_trie([(l, rival), nonce("fork")]).expect("fresh trie");
    let fork = store.put(Twist::new(f, hoist.tether, fork_root));

    let mut accepted: Vec<HalfHitchCert> = vec![hh.clone()];
    let mut attempts = Vec::new();
    let mut judge = |strategy, result: Result<HalfHitchCert, HitchError>| {
        let outcome = match result.and_then(|c| verify_half_hitch(&c).map(|_| c)) {
            Err(e) => ForgeOutcome::Blocked(e),
            Ok(cert) => {
                let aligned = corklines_aligned(store, hh, &cert);
                accepted.push(cert);
                if aligned {
                    ForgeOutcome::Accepted
                } else {
                    ForgeOutcome::Disjoint
                }
            }
        };
        attempts.push((strategy, outcome));
    };

    for strategy in ForgeStrategy::ALL {
        let attempt = match strategy {
            ForgeStrategy::LaterHoist => assemble_half_hitch(store, f, l, rival, later),
            ForgeStrategy::ForgedExclusion => assemble_unchecked(store, f, l, rival, later).map(|mut c| {
                // A genuine proof from the earlier hoist's trie, for a key
                // that is not the lead.
                let other = store
                    .trie(&hoist.rigging)
                    .and_then(|t| t.entries().map(|(k, _)| *k).find(|k| *k != l))
                    .and_then(|k| store.prove(&hoist.rigging, &k));
                if let (Some(slot), Some(p)) = (c.firstness_exclusions.last_mut(), other) {
                    *slot = p;
                }
                c
            }),
            ForgeStrategy::OmittedExclusion => assemble_unchecked(store, f, l, rival, later).map(|mut c| {
                c.firstness_exclusions.pop();
                c
            }),
            ForgeStrategy::SkippedTopline => assemble_unchecked(store, f, l, rival, later).map(|mut c| {
                let n = c.topline.len();
                c.topline.remove(n - 2);
                c.firstness_exclusions.pop();
                c
            }),
            ForgeStrategy::SameHoistOtherValue => {
                let mut c = hh.clone();
                c.meet = rival;
                c.footline = vec![hh.footline[0], store.get(&rival).expect("just stored")];
                if let Terminal::Leaf { value, .. } = &mut c.hoist_inclusion.terminal {
                    *value = rival;
                }
                Ok(c)
            }
            ForgeStrategy::ForkedCorkline => assemble_half_hitch(store, f, l, rival, fork),
        };
        judge(strategy, attempt);
    }

    let mut conflicts = 0;
    for i in 0..accepted.len() {
        for j in i + 1..accepted.len() {
            let (a, b) = (&accepted[i], &accepted[j]);
            if a.fastener == b.fastener && a.lead == b.lead && a.meet != b.meet && corklines_aligned(store, a, b) {
                conflicts += 1;
            }
        }
    }
    ForgeReport { attempts, conflicts }
}

fn corklines_aligned(store: &TwistStore, a: &HalfHitchCert, b: &HalfHitchCert) -> bool {
    let ids: Vec<HashRef> = a.topline_ids().ids().iter().chain(b.topline_ids().ids()).copied().collect();
    matches!(alignment(store, &ids), Ok(Alignment::Envelope(_)))
}
