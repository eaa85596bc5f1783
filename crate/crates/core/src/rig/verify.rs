use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::holds::{holds_fast_check, holds_fast_witness, HoldsFastError};
use super::{Derivation, Guild, Leaf, Lash, RigCert, Splice};
use crate::graph::{alignment, fast_line_length, fast_tether, precedes_known, Alignment, GraphError};
use crate::hashref::HashRef;
use crate::hitch::{verify_half_hitch, verify_hitch, HitchCert, HitchError};
use crate::twist::Twist;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RigRule {
    #[error("half-hitch: {0}")]
    Hitch(HitchError),
    #[error("corkline extension is not consecutive with the topline")]
    ExtensionBroken,
    #[error("cached {0} does not match the derivation")]
    CachedLine(&'static str),
    #[error("left side of a splice must have length 1")]
    NotLengthOne,
    #[error("leadlines do not meet at the splice junction")]
    LeadlineJunction,
    #[error("half-hitch does not start the leadline")]
    HalfHitchMismatch,
    #[error("splice post: {0}")]
    PostHitch(HitchError),
    #[error("corklines fork at {0:?} and {1:?}")]
    CorklinesForked(HashRef, HashRef),
    #[error("splice gap does not fill the enveloping corkline")]
    GapMismatch,
    #[error("lashed bottom is not a single half-hitch")]
    BottomNotHalfHitch,
    #[error("bottom corkline is not inside the upper leadline")]
    CorklineNotInLeadline,
    #[error("corkline twist {0:?} reappears elsewhere in the rig")]
    CorklineReuse(HashRef),
    #[error("fast tether chain of {twist:?} reaches aligned twist {reached:?}")]
    TetherPrecedence { twist: HashRef, reached: HashRef },
    #[error("holds fast: {0}")]
    HoldsFast(HoldsFastError),
    #[error(transparent)]
    Graph(GraphError),
}

/// A rejection: the rule that failed and where in the derivation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct RigError {
    pub path: String,
    pub rule: RigRule,
}

impl fmt::Display for RigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.rule)
    }
}

fn fail<T>(path: &str, rule: RigRule) -> Result<T, RigError> {
    Err(RigError { path: path.to_string(), rule })
}

fn graph(path: &str) -> impl Fn(GraphError) -> RigError + '_ {
    move |e| RigError { path: path.to_string(), rule: RigRule::Graph(e) }
}

type TwistMap = HashMap<HashRef, Twist>;

/// Checks a certificate using only its own twists. The guild is GH for a
/// single half-hitch and GUp for anything spliced or lashed.
pub fn verify_rig(cert: &RigCert) -> Result<Guild, RigError> {
    let map = cert.twists();
    verify_node(cert, &map, "root")?;
    check_tether_precedence(cert, &map)?;
    let witness = holds_fast_witness(cert);
    holds_fast_check(&map, &cert.leadline, &cert.corkline, &witness)
        .or_else(|e| fail("root", RigRule::HoldsFast(e)))?;
    Ok(cert.guild())
}

fn verify_node(cert: &RigCert, map: &TwistMap, path: &str) -> Result<(), RigError> {
    match &cert.derivation {
        Derivation::Leaf(leaf) => verify_leaf(cert, leaf, path)?,
        Derivation::Splice(s) => verify_splice(cert, s, map, path)?,
        Derivation::Lash(l) => verify_lash(cert, l, map, path)?,
    }
    let outside = non_cork(cert);
    if let Some(id) = cert.corkline.ids().iter().find(|id| outside.contains(id)) {
        return fail(path, RigRule::CorklineReuse(*id));
    }
    Ok(())
}

/// Twists of the rig that lie off its corkline by construction.
fn non_cork(cert: &RigCert) -> HashSet<HashRef> {
    match &cert.derivation {
        Derivation::Leaf(leaf) => leaf.half.footline.iter().map(Twist::hash).collect(),
        Derivation::Splice(s) => {
            let mut out = non_cork(&s.left);
            out.extend(non_cork(&s.right));
            out
        }
        Derivation::Lash(l) => {
            let mut out: HashSet<HashRef> = l.bottom.twists().into_keys().collect();
            out.extend(non_cork(&l.upper));
            out
        }
    }
}

fn ids(twists: &[Twist]) -> Vec<HashRef> {
    twists.iter().map(Twist::hash).collect()
}

fn verify_leaf(cert: &RigCert, leaf: &Leaf, path: &str) -> Result<(), RigError> {
    let half = &leaf.half;
    verify_half_hitch(half).or_else(|e| fail(path, RigRule::Hitch(e)))?;
    let mut cork = ids(&leaf.before);
    cork.extend(ids(&half.topline));
    cork.extend(ids(&leaf.after));
    let joined: Vec<&Twist> = leaf.before.iter().chain(&half.topline).chain(&leaf.after).collect();
    if joined.windows(2).any(|w| w[1].prev != w[0].hash()) {
        return fail(path, RigRule::ExtensionBroken);
    }
    if cert.corkline.ids() != cork.as_slice() {
        return fail(path, RigRule::CachedLine("corkline"));
    }
    if cert.leadline.ids() != ids(&half.footline).as_slice() {
        return fail(path, RigRule::CachedLine("leadline"));
    }
    Ok(())
}

fn verify_splice(cert: &RigCert, s: &Splice, map: &TwistMap, path: &str) -> Result<(), RigError> {
    verify_node(&s.left, map, &format!("{path}.left"))?;
    verify_node(&s.right, map, &format!("{path}.right"))?;

    if fast_line_length(map, &s.left.leadline).map_err(graph(path))? != 1 {
        return fail(path, RigRule::NotLengthOne);
    }
    let h0 = s.left.leading_half();
    let (a0, a1) = (s.left.leadline.first(), s.left.leadline.last());
    if h0.lead != a0 || h0.meet != a1 {
        return fail(path, RigRule::HalfHitchMismatch);
    }
    if s.right.leadline.first() != a1 {
        return fail(path, RigRule::LeadlineJunction);
    }
    let h1 = s.right.leading_half();
    let h1_foot = ids(&h1.footline);
    if h1.lead != a1 || !s.right.leadline.ids().starts_with(&h1_foot) {
        return fail(path, RigRule::HalfHitchMismatch);
    }
    let post_hitch = HitchCert {
        half: h0.clone(),
        post: h1.meet,
        post_line: h1.footline[1..].to_vec(),
        post_inclusion: s.post_inclusion.clone(),
    };
    verify_hitch(&post_hitch).or_else(|e| fail(path, RigRule::PostHitch(e)))?;

    let cork_ids: Vec<HashRef> = s.left.corkline.ids().iter().chain(s.right.corkline.ids()).copied().collect();
    let envelope = match alignment(map, &cork_ids).map_err(graph(path))? {
        Alignment::Envelope(line) => line,
        Alignment::Forked(a, b) => return fail(path, RigRule::CorklinesForked(a, b)),
    };
    let expected_gap: Vec<HashRef> = envelope
        .ids()
        .iter()
        .filter(|id| !s.left.corkline.contains(id) && !s.right.corkline.contains(id))
        .copied()
        .collect();
    if ids(&s.gap) != expected_gap {
        return fail(path, RigRule::GapMismatch);
    }
    if cert.corkline != envelope {
        return fail(path, RigRule::CachedLine("corkline"));
    }
    match s.left.leadline.concat(&s.right.leadline) {
        Some(lead) if lead == cert.leadline => Ok(()),
        _ => fail(path, RigRule::CachedLine("leadline")),
    }
}

fn verify_lash(cert: &RigCert, l: &Lash, map: &TwistMap, path: &str) -> Result<(), RigError> {
    if !matches!(l.bottom.derivation, Derivation::Leaf(_)) {
        return fail(path, RigRule::BottomNotHalfHitch);
    }
    verify_node(&l.bottom, map, &format!("{path}.bottom"))?;
    verify_node(&l.upper, map, &format!("{path}.upper"))?;
    if !l.upper.leadline.contains_subline(&l.bottom.corkline) {
        return fail(path, RigRule::CorklineNotInLeadline);
    }
    let bottom = l.bottom.twists();
    if let Some(id) = l.upper.corkline.ids().iter().find(|id| bottom.contains_key(id)) {
        return fail(path, RigRule::CorklineReuse(*id));
    }
    if cert.corkline != l.upper.corkline {
        return fail(path, RigRule::CachedLine("corkline"));
    }
    if cert.leadline != l.bottom.leadline {
        return fail(path, RigRule::CachedLine("leadline"));
    }
    Ok(())
}

/// Rejects any fast twist off the corkline whose iterated fast tether comes
/// back to a twist aligned with it. Across distinct lines the chain only
/// climbs; landing on the twist's own line means a line tethered to itself.
fn check_tether_precedence(cert: &RigCert, map: &TwistMap) -> Result<(), RigError> {
    let cork: HashSet<&HashRef> = cert.corkline.ids().iter().collect();
    let mut candidates: Vec<&HashRef> = map.keys().filter(|id| !cork.contains(id)).collect();
    candidates.sort();
    for x in candidates {
        if map[x].is_loose() {
            continue;
        }
        let mut cur = *x;
        for _ in 0..=map.len() {
            match fast_tether(map, &cur) {
                Ok(next) => cur = next,
                Err(_) => break,
            }
            if cur == *x || precedes_known(map, &cur, x) || precedes_known(map, x, &cur) {
                return fail("root", RigRule::TetherPrecedence { twist: *x, reached: cur });
            }
        }
    }
    Ok(())
}
