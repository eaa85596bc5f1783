//! Holding fast: `z_α ≺≺ a_α ≺≺ a_ω ≺≺ z_ω`.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{Derivation, RigCert};
use crate::chain::{CausalChain, ChainError, Inclusion};
use crate::graph::{line_between, GraphError, Line};
use crate::hashref::HashRef;
use crate::store::TwistSource;
use crate::twist::Twist;

/// Which of the three links of the sandwich.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    /// `z_α ≺≺ a_α`, up the tethers.
    Ascent,
    /// `a_α ≼ a_ω`, along the leadline.
    Along,
    /// `a_ω ≺≺ z_ω`, down the rigging tries.
    Descent,
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Link::Ascent => "ascent",
            Link::Along => "leadline",
            Link::Descent => "descent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HoldsFastError {
    #[error("{link} link broken: {source}")]
    Broken {
        link: Link,
        #[source]
        source: ChainError,
    },
    #[error("{link} link ends at {found:?}, expected {expected:?}")]
    Endpoint { link: Link, expected: HashRef, found: HashRef },
    #[error("corkline is not a line: {0}")]
    Corkline(GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoldsFastWitness {
    pub ascent: CausalChain,
    pub along: CausalChain,
    pub descent: CausalChain,
}

impl HoldsFastWitness {
    /// Composes `self` (A holds fast to B) with `outer` (B holds fast to Z)
    /// into a witness that A holds fast to Z.
    pub fn compose(self, outer: HoldsFastWitness) -> Result<HoldsFastWitness, ChainError> {
        Ok(HoldsFastWitness {
            ascent: outer.ascent.concat(self.ascent)?,
            along: self.along,
            descent: self.descent.concat(outer.descent)?,
        })
    }
}

fn check_link(link: Link, chain: &CausalChain, from: HashRef, to: HashRef) -> Result<(), HoldsFastError> {
    if chain.start != from {
        return Err(HoldsFastError::Endpoint { link, expected: from, found: chain.start });
    }
    let end = chain.verify().map_err(|source| HoldsFastError::Broken { link, source })?;
    if end != to {
        return Err(HoldsFastError::Endpoint { link, expected: to, found: end });
    }
    Ok(())
}

/// Checks that `witness` shows `leadline` holding fast to `corkline`.
/// The leadline link must consist of `prev` steps only, so that it also
/// shows `a_α ≼ a_ω`.
pub fn holds_fast_check<S: TwistSource + ?Sized>(
    src: &S,
    leadline: &Line,
    corkline: &Line,
    witness: &HoldsFastWitness,
) -> Result<(), HoldsFastError> {
    corkline.check_consecutive(src).map_err(HoldsFastError::Corkline)?;
    check_link(Link::Ascent, &witness.ascent, corkline.first(), leadline.first())?;
    if let Some(i) = witness.along.steps.iter().position(|s| s.via != Inclusion::Prev) {
        return Err(HoldsFastError::Broken { link: Link::Along, source: ChainError::PrevMismatch(i) });
    }
    check_link(Link::Along, &witness.along, leadline.first(), leadline.last())?;
    check_link(Link::Descent, &witness.descent, leadline.last(), corkline.last())
}

fn walk(map: &HashMap<HashRef, Twist>, from: HashRef, to: HashRef) -> CausalChain {
    // An unwalkable pair yields an identity chain that fails the check.
    match line_between(map, &from, &to) {
        Ok(line) => {
            let twists: Vec<Twist> = line.ids()[1..].iter().map(|id| map[id]).collect();
            CausalChain::along(from, &twists)
        }
        Err(_) => CausalChain::identity(from),
    }
}

fn join(a: CausalChain, b: CausalChain) -> CausalChain {
    let fallback = a.clone();
    a.concat(b).unwrap_or(fallback)
}

fn ascent_descent(cert: &RigCert, map: &HashMap<HashRef, Twist>) -> (CausalChain, CausalChain) {
    let cork = &cert.corkline;
    match &cert.derivation {
        Derivation::Leaf(leaf) => {
            let half = &leaf.half;
            let ascent = walk(map, cork.first(), half.fastener).with(half.footline[0], Inclusion::Tether);
            let hoist = half.topline[half.topline.len() - 1];
            let descent = CausalChain::identity(half.meet)
                .with(hoist, Inclusion::Rigging { key: half.lead, proof: half.hoist_inclusion.clone() });
            let descent = join(descent, walk(map, half.hoist, cork.last()));
            (ascent, descent)
        }
        Derivation::Splice(s) => {
            let (left_up, _) = ascent_descent(&s.left, map);
            let (_, right_down) = ascent_descent(&s.right, map);
            let ascent = join(walk(map, cork.first(), s.left.corkline.first()), left_up);
            let descent = join(right_down, walk(map, s.right.corkline.last(), cork.last()));
            (ascent, descent)
        }
        Derivation::Lash(l) => {
            let (bottom_up, bottom_down) = ascent_descent(&l.bottom, map);
            let (upper_up, upper_down) = ascent_descent(&l.upper, map);
            let b = &l.bottom.corkline;
            let via = &l.upper.leadline;
            let ascent = join(join(upper_up, walk(map, via.first(), b.first())), bottom_up);
            let descent = join(join(bottom_down, walk(map, b.last(), via.last())), upper_down);
            (ascent, descent)
        }
    }
}

/// Builds the witness from the certificate alone.
pub fn holds_fast_witness(cert: &RigCert) -> HoldsFastWitness {
    let map = cert.twists();
    let (ascent, descent) = ascent_descent(cert, &map);
    let along = walk(&map, cert.leadline.first(), cert.leadline.last());
    HoldsFastWitness { ascent, along, descent }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_of(n: usize) -> (HashMap<HashRef, Twist>, Vec<HashRef>) {
        let mut map = HashMap::new();
        let mut ids = Vec::new();
        let mut prev = HashRef::Null;
        for i in 0..n {
            let t = Twist::new(prev, HashRef::Null, HashRef::of(&[i as u8]));
            prev = t.hash();
            map.insert(prev, t);
            ids.push(prev);
        }
        (map, ids)
    }

    #[test]
    fn line_holds_fast_to_itself() {
        let (map, ids) = chain_of(4);
        let line = Line::new(ids.clone()).unwrap();
        let witness = HoldsFastWitness {
            ascent: CausalChain::identity(ids[0]),
            along: walk(&map, ids[0], ids[3]),
            descent: CausalChain::identity(ids[3]),
        };
        assert_eq!(holds_fast_check(&map, &line, &line, &witness), Ok(()));
    }

    #[test]
    fn missing_descent_rejected() {
        let (map, ids) = chain_of(4);
        let cork = Line::new(ids.clone()).unwrap();
        let lead = Line::new(ids[1..3].to_vec()).unwrap();
        let witness = HoldsFastWitness {
            ascent: walk(&map, ids[0], ids[1]),
            along: walk(&map, ids[1], ids[2]),
            descent: CausalChain::identity(ids[2]),
        };
        assert!(matches!(
            holds_fast_check(&map, &lead, &cork, &witness),
            Err(HoldsFastError::Endpoint { link: Link::Descent, .. })
        ));
    }
}
