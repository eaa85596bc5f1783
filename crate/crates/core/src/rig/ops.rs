//! Splicing, lashing, and the measurements of a rig.

use std::collections::{BTreeSet, HashMap};

use super::{verify_rig, Derivation, RigCert, RigError, RigRule};
use crate::graph::{alignment, fast_line_length, fast_tether, line_between, Alignment, GraphError, Line};
use crate::hashref::HashRef;
use crate::hitch::HitchError;
use crate::store::{Layered, TwistSource, TwistStore};
use crate::twist::Twist;

fn root_err(rule: RigRule) -> RigError {
    RigError { path: "root".into(), rule }
}

fn union(a: &RigCert, b: &RigCert) -> HashMap<HashRef, Twist> {
    let mut map = a.twists();
    map.extend(b.twists());
    map
}

/// Splices `r0` onto the past side of `r1`. The post proof and any corkline
/// twists between the two corklines come from `store`; the result is
/// verified before it is returned.
pub fn splice(store: &TwistStore, r0: RigCert, r1: RigCert) -> Result<RigCert, RigError> {
    let map = union(&r0, &r1);
    let src = Layered(&map, store);
    let lead = r0.leading_half().lead;
    let post = *r1.leading_half().footline.last().expect("footline is non-empty");
    let post_inclusion = store
        .prove(&post.rigging, &lead)
        .ok_or_else(|| root_err(RigRule::PostHitch(HitchError::MissingTrie(post.rigging))))?;

    let cork_ids: Vec<HashRef> = r0.corkline.ids().iter().chain(r1.corkline.ids()).copied().collect();
    let graph = |e| root_err(RigRule::Graph(e));
    let envelope = match alignment(&src, &cork_ids).map_err(graph)? {
        Alignment::Envelope(line) => line,
        Alignment::Forked(a, b) => return Err(root_err(RigRule::CorklinesForked(a, b))),
    };
    let gap = envelope
        .ids()
        .iter()
        .filter(|id| !r0.corkline.contains(id) && !r1.corkline.contains(id))
        .map(|id| src.twist(id).ok_or(GraphError::Unresolved(*id)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(graph)?;
    let cert = RigCert::spliced(r0, post_inclusion, gap, r1, envelope);
    verify_rig(&cert)?;
    Ok(cert)
}

/// Whether [`splice`] would succeed. Missing twists make the answer unknown.
pub fn spliceable(store: &TwistStore, r0: &RigCert, r1: &RigCert) -> Result<bool, GraphError> {
    match splice(store, r0.clone(), r1.clone()) {
        Ok(_) => Ok(true),
        Err(RigError { rule: RigRule::Graph(e @ GraphError::Unresolved(_)), .. }) => Err(e),
        Err(_) => Ok(false),
    }
}

/// `h0` is a single half-hitch whose corkline lies inside the leadline of
/// `r1`, and shares no twist with the corkline of `r1`.
pub fn lashable(h0: &RigCert, r1: &RigCert) -> bool {
    if !matches!(h0.derivation, Derivation::Leaf(_)) {
        return false;
    }
    if !r1.leadline.contains_subline(&h0.corkline) {
        return false;
    }
    let bottom = h0.twists();
    !r1.corkline.ids().iter().any(|id| bottom.contains_key(id))
}

/// Lashes `h0` up to `r1` and verifies the result.
pub fn lash(h0: RigCert, r1: RigCert) -> Result<RigCert, RigError> {
    if !matches!(h0.derivation, Derivation::Leaf(_)) {
        return Err(root_err(RigRule::BottomNotHalfHitch));
    }
    let cert = RigCert::lashed(h0, r1);
    verify_rig(&cert)?;
    Ok(cert)
}

/// Fast-line length of the leadline.
pub fn rig_length(r: &RigCert) -> Result<usize, GraphError> {
    fast_line_length(&r.twists(), &r.leadline)
}

/// Least `n` with `(*t)^n(a_α)` on the corkline.
pub fn rig_height(store: &TwistStore, r: &RigCert) -> Result<usize, GraphError> {
    let map = r.twists();
    let src = Layered(&map, store);
    let mut cur = r.leadline.first();
    let mut n = 0;
    while !r.corkline.contains(&cur) {
        cur = fast_tether(&src, &cur)?;
        n += 1;
    }
    Ok(n)
}

/// The twists connecting `a_α` to the corkline: each hop contributes the
/// tether, the fast tether, and the twists between them.
pub fn tetherline(store: &TwistStore, r: &RigCert) -> Result<BTreeSet<HashRef>, GraphError> {
    let map = r.twists();
    let src = Layered(&map, store);
    let mut cur = r.leadline.first();
    let mut out = BTreeSet::from([cur]);
    while !r.corkline.contains(&cur) {
        let tether = src.twist(&cur).ok_or(GraphError::Unresolved(cur))?.tether;
        let next = fast_tether(&src, &cur)?;
        out.extend(line_between(&src, &next, &tether)?.into_ids());
        cur = next;
    }
    Ok(out)
}

/// Fast members of a tetherline that are off the corkline; one per hop.
pub fn tetherline_height<S: TwistSource + ?Sized>(
    src: &S,
    tetherline: &BTreeSet<HashRef>,
    corkline: &Line,
) -> Result<usize, GraphError> {
    let mut n = 0;
    for id in tetherline.iter().filter(|id| !corkline.contains(id)) {
        if src.twist(id).ok_or(GraphError::Unresolved(*id))?.is_fast() {
            n += 1;
        }
    }
    Ok(n)
}
