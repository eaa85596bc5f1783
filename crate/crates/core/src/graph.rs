//! Lines and the relations between twists: predecessor, alignment, fast
//! previous and fast tether, fast-line length, enveloping lines.
//!
//! Queries walk `prev` references through a [`TwistSource`]. A reference the
//! source cannot resolve makes the answer unknown ([`GraphError::Unresolved`])
//! rather than false, so callers working from partial data fail closed.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::hashref::HashRef;
use crate::store::TwistSource;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown twist {0}")]
    Unresolved(HashRef),
    #[error("{from:?} does not precede {to:?}")]
    NotPreceding { from: HashRef, to: HashRef },
    #[error("no fast twist precedes {0:?}")]
    NoFastPredecessor(HashRef),
    #[error("{0:?} is loose")]
    NotFast(HashRef),
    #[error("length is undefined: {0:?} is loose")]
    LengthUndefined(HashRef),
    #[error("line is not consecutive at index {0}")]
    NotConsecutive(usize),
    #[error("empty line")]
    EmptyLine,
}

/// A non-empty run of consecutive twists, oldest first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Line(Vec<HashRef>);

impl Line {
    pub fn new(ids: Vec<HashRef>) -> Result<Self, GraphError> {
        if ids.is_empty() {
            return Err(GraphError::EmptyLine);
        }
        Ok(Self(ids))
    }

    pub fn single(id: HashRef) -> Self {
        Self(vec![id])
    }

    pub fn ids(&self) -> &[HashRef] {
        &self.0
    }

    pub fn into_ids(self) -> Vec<HashRef> {
        self.0
    }

    pub fn first(&self) -> HashRef {
        self.0[0]
    }

    pub fn last(&self) -> HashRef {
        self.0[self.0.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, id: &HashRef) -> bool {
        self.0.contains(id)
    }

    pub fn position(&self, id: &HashRef) -> Option<usize> {
        self.0.iter().position(|x| x == id)
    }

    /// True when `other` appears as a contiguous run inside `self`.
    pub fn contains_subline(&self, other: &Line) -> bool {
        self.position(&other.first())
            .is_some_and(|i| self.0[i..].starts_with(&other.0))
    }

    /// Joins two lines sharing an endpoint: `self` must end where `next`
    /// begins.
    pub fn concat(&self, next: &Line) -> Option<Line> {
        (self.last() == next.first()).then(|| {
            let mut ids = self.0.clone();
            ids.extend_from_slice(&next.0[1..]);
            Line(ids)
        })
    }

    /// Checks every `prev` link against `src`.
    pub fn check_consecutive<S: TwistSource + ?Sized>(&self, src: &S) -> Result<(), GraphError> {
        for (i, pair) in self.0.windows(2).enumerate() {
            let next = src.twist(&pair[1]).ok_or(GraphError::Unresolved(pair[1]))?;
            if next.prev != pair[0] {
                return Err(GraphError::NotConsecutive(i + 1));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

fn resolve<S: TwistSource + ?Sized>(src: &S, id: &HashRef) -> Result<crate::Twist, GraphError> {
    src.twist(id).ok_or(GraphError::Unresolved(*id))
}

/// `x ≺ y`: `x` is reached from `y` by following `prev` one or more times.
pub fn precedes<S: TwistSource + ?Sized>(src: &S, x: &HashRef, y: &HashRef) -> Result<bool, GraphError> {
    let mut cur = resolve(src, y)?.prev;
    loop {
        if cur == *x {
            return Ok(true);
        }
        if cur.is_null() {
            return Ok(false);
        }
        cur = resolve(src, &cur)?.prev;
    }
}

/// `x ≼ y`.
pub fn precedes_or_eq<S: TwistSource + ?Sized>(src: &S, x: &HashRef, y: &HashRef) -> Result<bool, GraphError> {
    if x == y {
        return Ok(true);
    }
    precedes(src, x, y)
}

/// `x ≺ y` as far as `src` shows: the walk stops (answering false) at the
/// first twist `src` does not have.
pub fn precedes_known<S: TwistSource + ?Sized>(src: &S, x: &HashRef, y: &HashRef) -> bool {
    let Some(mut cur) = src.twist(y).map(|t| t.prev) else {
        return false;
    };
    loop {
        if cur == *x {
            return true;
        }
        match src.twist(&cur) {
            Some(t) => cur = t.prev,
            None => return false,
        }
    }
}

/// `x ≼ y` or `y ≼ x`.
pub fn aligned<S: TwistSource + ?Sized>(src: &S, x: &HashRef, y: &HashRef) -> Result<bool, GraphError> {
    if x == y {
        return Ok(true);
    }
    let forward = precedes(src, x, y);
    if forward == Ok(true) {
        return Ok(true);
    }
    let backward = precedes(src, y, x);
    if backward == Ok(true) {
        return Ok(true);
    }
    forward?;
    backward
}

/// The unique line `[a, …, b]`.
pub fn line_between<S: TwistSource + ?Sized>(src: &S, a: &HashRef, b: &HashRef) -> Result<Line, GraphError> {
    let mut ids = vec![*b];
    let mut cur = *b;
    while cur != *a {
        let prev = resolve(src, &cur)?.prev;
        if prev.is_null() {
            return Err(GraphError::NotPreceding { from: *a, to: *b });
        }
        ids.push(prev);
        cur = prev;
    }
    ids.reverse();
    Ok(Line(ids))
}

/// `*p(x)`: the nearest fast strict predecessor of `x`.
pub fn fast_previous<S: TwistSource + ?Sized>(src: &S, x: &HashRef) -> Result<HashRef, GraphError> {
    let mut cur = resolve(src, x)?.prev;
    loop {
        if cur.is_null() {
            return Err(GraphError::NoFastPredecessor(*x));
        }
        let t = resolve(src, &cur)?;
        if t.is_fast() {
            return Ok(cur);
        }
        cur = t.prev;
    }
}

/// `*t(x)`: the tether of `x` if that is fast, else its fast previous.
pub fn fast_tether<S: TwistSource + ?Sized>(src: &S, x: &HashRef) -> Result<HashRef, GraphError> {
    let t = resolve(src, x)?;
    if t.is_loose() {
        return Err(GraphError::NotFast(*x));
    }
    let tether = resolve(src, &t.tether)?;
    if tether.is_fast() {
        Ok(t.tether)
    } else {
        fast_previous(src, &t.tether)
    }
}

/// One less than the number of fast twists on a line that begins and ends
/// fast.
pub fn fast_line_length<S: TwistSource + ?Sized>(src: &S, line: &Line) -> Result<usize, GraphError> {
    let mut fast = 0usize;
    for (i, id) in line.ids().iter().enumerate() {
        let t = resolve(src, id)?;
        if t.is_fast() {
            fast += 1;
        } else if i == 0 || i + 1 == line.len() {
            return Err(GraphError::LengthUndefined(*id));
        }
    }
    Ok(fast - 1)
}

/// Either the minimal enveloping line of a set of twists, or two of them
/// that are not aligned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alignment {
    Envelope(Line),
    Forked(HashRef, HashRef),
}

/// Finds the latest and earliest twists of the collection; they exist iff
/// every pair is aligned, because ≼ is a tree order.
pub fn alignment<S: TwistSource + ?Sized>(src: &S, ids: &[HashRef]) -> Result<Alignment, GraphError> {
    let mut distinct: Vec<HashRef> = Vec::new();
    let mut seen = HashSet::new();
    for id in ids {
        if seen.insert(*id) {
            distinct.push(*id);
        }
    }
    let Some((&head, rest)) = distinct.split_first() else {
        return Err(GraphError::EmptyLine);
    };
    let (mut latest, mut earliest) = (head, head);
    for id in rest {
        if !precedes_known(src, id, &latest) {
            if !precedes_known(src, &latest, id) {
                confirm_fork(src, &latest, id)?;
                return Ok(Alignment::Forked(latest, *id));
            }
            latest = *id;
        }
        if !precedes_known(src, &earliest, id) {
            if !precedes_known(src, id, &earliest) {
                confirm_fork(src, &earliest, id)?;
                return Ok(Alignment::Forked(earliest, *id));
            }
            earliest = *id;
        }
    }
    line_between(src, &earliest, &latest).map(Alignment::Envelope)
}

/// Neither walk found the other twist among the known ones; a fork is only
/// reported once both walks end at an origin.
fn confirm_fork<S: TwistSource + ?Sized>(src: &S, x: &HashRef, y: &HashRef) -> Result<(), GraphError> {
    precedes(src, x, y)?;
    precedes(src, y, x)?;
    Ok(())
}

/// The minimal line containing every twist of every input line, or `None`
/// when the lines are misaligned.
pub fn enveloping_line<S: TwistSource + ?Sized>(src: &S, lines: &[Line]) -> Result<Option<Line>, GraphError> {
    let ids: Vec<HashRef> = lines.iter().flat_map(|l| l.ids().iter().copied()).collect();
    Ok(match alignment(src, &ids)? {
        Alignment::Envelope(line) => Some(line),
        Alignment::Forked(..) => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::TwistStore;
    use crate::twist::Twist;

    struct Fixture {
        store: TwistStore,
        anchor: HashRef,
        salt: u64,
    }

    impl Fixture {
        fn new() -> Self {
            Self { store: TwistStore::new(), anchor: HashRef::of(b"anchor"), salt: 0 }
        }

        fn add(&mut self, prev: HashRef, fast: bool) -> HashRef {
            self.salt += 1;
            let tether = if fast { self.anchor } else { HashRef::Null };
            self.store
                .put(Twist::new(prev, tether, HashRef::of(&self.salt.to_be_bytes())))
        }
    }

    #[test]
    fn precedes_on_a_chain() {
        let mut f = Fixture::new();
        let a = f.add(HashRef::Null, false);
        let b = f.add(a, false);
        let c = f.add(b, false);
        let s = &f.store;
        assert!(precedes(s, &b, &c).unwrap());
        assert!(precedes(s, &a, &c).unwrap());
        assert!(!precedes(s, &c, &a).unwrap());
        assert!(!precedes(s, &a, &a).unwrap());
        assert!(aligned(s, &a, &c).unwrap());
        assert!(aligned(s, &a, &a).unwrap());
    }

    #[test]
    fn siblings_are_not_aligned() {
        let mut f = Fixture::new();
        let z = f.add(HashRef::Null, false);
        let x = f.add(z, false);
        let y = f.add(z, true);
        assert!(!aligned(&f.store, &x, &y).unwrap());
        let lines = [Line::single(x), Line::single(y)];
        assert_eq!(enveloping_line(&f.store, &lines).unwrap(), None);
    }

    #[test]
    fn unresolved_is_not_false() {
        let mut f = Fixture::new();
        let ghost = HashRef::of(b"missing");
        let a = f.add(ghost, false);
        let other = f.add(HashRef::Null, false);
        assert_eq!(precedes(&f.store, &other, &a), Err(GraphError::Unresolved(ghost)));
        assert_eq!(aligned(&f.store, &other, &a), Err(GraphError::Unresolved(ghost)));
        assert!(!precedes_known(&f.store, &other, &a));
    }

    #[test]
    fn lines_between() {
        let mut f = Fixture::new();
        let a = f.add(HashRef::Null, false);
        let b = f.add(a, false);
        let c = f.add(b, false);
        let s = &f.store;
        assert_eq!(line_between(s, &a, &a).unwrap().ids(), &[a]);
        assert_eq!(line_between(s, &a, &c).unwrap().ids(), &[a, b, c]);
        assert!(matches!(line_between(s, &c, &a), Err(GraphError::NotPreceding { .. })));
        let sib = f.add(a, false);
        assert!(line_between(&f.store, &sib, &c).is_err());
    }

    #[test]
    fn fast_previous_cases() {
        let mut f = Fixture::new();
        let origin = f.add(HashRef::Null, false);
        let fa = f.add(origin, true);
        let l1 = f.add(fa, false);
        let l2 = f.add(l1, false);
        let x = f.add(l2, true);
        let g = f.add(x, true);
        let y = f.add(g, false);
        let s = &f.store;
        assert_eq!(fast_previous(s, &x).unwrap(), fa);
        assert_eq!(fast_previous(s, &y).unwrap(), g);
        assert_eq!(fast_previous(s, &fa), Err(GraphError::NoFastPredecessor(fa)));
    }

    #[test]
    fn fast_tether_cases() {
        let mut f = Fixture::new();
        let q = f.add(HashRef::Null, true);
        let loose = f.add(q, false);
        let fast_target = f.add(loose, true);
        let put = |f: &mut Fixture, tether| {
            f.salt += 1;
            f.store.put(Twist::new(HashRef::Null, tether, HashRef::of(&f.salt.to_be_bytes())))
        };
        let x1 = put(&mut f, fast_target);
        let x2 = put(&mut f, loose);
        let s = &f.store;
        assert_eq!(fast_tether(s, &x1).unwrap(), fast_target);
        assert_eq!(fast_tether(s, &x2).unwrap(), q);
        assert_eq!(fast_tether(s, &loose), Err(GraphError::NotFast(loose)));
    }

    #[test]
    fn fast_line_lengths() {
        let mut f = Fixture::new();
        let a = f.add(HashRef::Null, true);
        let x = f.add(a, false);
        let g = f.add(x, true);
        let y = f.add(g, false);
        let h = f.add(y, true);
        let s = &f.store;
        assert_eq!(fast_line_length(s, &Line::single(a)).unwrap(), 0);
        assert_eq!(fast_line_length(s, &line_between(s, &a, &g).unwrap()).unwrap(), 1);
        assert_eq!(fast_line_length(s, &line_between(s, &a, &h).unwrap()).unwrap(), 2);
        assert_eq!(
            fast_line_length(s, &line_between(s, &a, &y).unwrap()),
            Err(GraphError::LengthUndefined(y))
        );
    }

    #[test]
    fn envelopes() {
        let mut f = Fixture::new();
        let a = f.add(HashRef::Null, false);
        let b = f.add(a, false);
        let c = f.add(b, false);
        let s = &f.store;
        let ab = line_between(s, &a, &b).unwrap();
        let bc = line_between(s, &b, &c).unwrap();
        let abc = line_between(s, &a, &c).unwrap();
        assert_eq!(enveloping_line(s, &[ab.clone(), bc.clone()]).unwrap(), Some(abc.clone()));
        assert_eq!(enveloping_line(s, &[bc, ab]).unwrap(), Some(abc.clone()));
        assert_eq!(enveloping_line(s, &[abc.clone()]).unwrap(), Some(abc));
        // Aligned but not touching: the gap is filled in.
        let envelope = enveloping_line(s, &[Line::single(a), Line::single(c)]).unwrap().unwrap();
        assert_eq!(envelope.ids(), &[a, b, c]);
    }

    #[test]
    fn line_helpers() {
        let ids: Vec<_> = (0..5u8).map(|i| HashRef::Sha256([i; 32])).collect();
        let l = Line::new(ids.clone()).unwrap();
        assert!(l.contains_subline(&Line::new(ids[1..3].to_vec()).unwrap()));
        assert!(!l.contains_subline(&Line::new(vec![ids[1], ids[3]]).unwrap()));
        let left = Line::new(ids[..3].to_vec()).unwrap();
        let right = Line::new(ids[2..].to_vec()).unwrap();
        assert_eq!(left.concat(&right).unwrap(), l);
        assert!(right.concat(&left).is_none());
        assert_eq!(Line::new(vec![]), Err(GraphError::EmptyLine));
    }
}
