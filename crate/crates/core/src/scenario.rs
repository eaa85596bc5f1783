//! Seeded construction of twist stores and the rigs over them.
//!
//! A [`Workbench`] grows lines twist by twist. Each line queues bindings
//! for its next twist (hoists) or its next fast twist (posts), so a
//! [`Plan`] can be laid out in the causal order the hashes force: a lead
//! before its meet, the meet before its hoist, the hoist before the post.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hashref::HashRef;
use crate::hitch::{assemble_half_hitch, assemble_hitch, assemble_unchecked, HalfHitchCert, HitchCert, HitchError};
use crate::rig::{lash, splice, RigCert, RigError};
use crate::store::TwistStore;
use crate::twist::Twist;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Hitch(#[from] HitchError),
    #[error("{0}")]
    Rig(#[from] RigError),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tether {
    /// Tethered to a twist outside the store, so always fast.
    Anchor,
    Loose,
    To(HashRef),
}

#[derive(Debug, Default)]
struct LineState {
    tip: HashRef,
    twists: Vec<HashRef>,
    next: Vec<(HashRef, HashRef)>,
    next_fast: Vec<(HashRef, HashRef)>,
    cork: bool,
}

/// Shape of a rig to build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Plan {
    Hitch,
    Lash(Box<Plan>),
    Splice(Box<Plan>, Box<Plan>),
}

impl Plan {
    pub fn lash(inner: Plan) -> Self {
        Plan::Lash(Box::new(inner))
    }

    pub fn splice(left: Plan, right: Plan) -> Self {
        Plan::Splice(Box::new(left), Box::new(right))
    }

    /// `k` hitches spliced end to end.
    pub fn chain(k: usize) -> Self {
        assert!(k > 0);
        (1..k).fold(Plan::Hitch, |acc, _| Plan::splice(Plan::Hitch, acc))
    }

    /// A hitch lashed up `k` times.
    pub fn tower(k: usize) -> Self {
        (0..k).fold(Plan::Hitch, |acc, _| Plan::lash(acc))
    }

    pub fn length(&self) -> usize {
        match self {
            Plan::Hitch | Plan::Lash(_) => 1,
            Plan::Splice(l, r) => l.length() + r.length(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            Plan::Hitch => 1,
            Plan::Lash(inner) => inner.height() + 1,
            Plan::Splice(l, _) => l.height(),
        }
    }

    /// A random plan whose left splice children have length 1.
    pub fn random(rng: &mut impl Rng, depth: usize) -> Self {
        if depth == 0 {
            return Plan::Hitch;
        }
        match rng.random_range(0..3u8) {
            0 => Plan::Hitch,
            1 => Plan::lash(Plan::random(rng, depth - 1)),
            _ => Plan::splice(Plan::random_unit(rng, depth - 1), Plan::random(rng, depth - 1)),
        }
    }

    /// A random length-1 plan.
    pub fn random_unit(rng: &mut impl Rng, depth: usize) -> Self {
        if depth == 0 || rng.random_bool(0.5) {
            Plan::Hitch
        } else {
            Plan::lash(Plan::random(rng, depth - 1))
        }
    }
}

/// Roles of one half-hitch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roles {
    pub fastener: HashRef,
    pub lead: HashRef,
    pub meet: HashRef,
    pub hoist: HashRef,
}

/// What a plan produced, before certificates are assembled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Built {
    Hitch(Roles),
    Lash { bottom: Roles, inner: Box<Built> },
    Splice(Box<Built>, Box<Built>),
}

struct Started {
    lead: HashRef,
    fastener: HashRef,
    upper: LineId,
    kind: StartedKind,
}

enum StartedKind {
    Hitch,
    Lash(Box<Started>),
    Splice(Box<Started>, Plan),
}

pub struct Workbench {
    store: TwistStore,
    anchor: HashRef,
    seed: u64,
    counter: u64,
    lines: Vec<LineState>,
    rng: ChaCha8Rng,
    max_fill: usize,
}

impl Workbench {
    /// Deterministic for a given seed. `max_fill` bounds the random runs of
    /// loose twists inserted wherever a plan allows them.
    pub fn new(seed: u64, max_fill: usize) -> Self {
        Self {
            store: TwistStore::new(),
            anchor: HashRef::of_parts(&[b"anchor", &seed.to_be_bytes()]),
            seed,
            counter: 0,
            lines: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_fill,
        }
    }

    pub fn store(&self) -> &TwistStore {
        &self.store
    }

    pub fn into_store(self) -> TwistStore {
        self.store
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn new_line(&mut self) -> LineId {
        self.lines.push(LineState::default());
        LineId(self.lines.len() - 1)
    }

    /// A line that branches off after `tip`.
    pub fn line_from(&mut self, tip: HashRef) -> LineId {
        let id = self.new_line();
        self.lines[id.0].tip = tip;
        id
    }

    /// A line whose own twists are tethered to the anchor.
    pub fn new_cork_line(&mut self) -> LineId {
        let id = self.new_line();
        self.lines[id.0].cork = true;
        id
    }

    pub fn tip(&self, line: LineId) -> HashRef {
        self.lines[line.0].tip
    }

    pub fn twists(&self, line: LineId) -> &[HashRef] {
        &self.lines[line.0].twists
    }

    /// Queues a binding for the next twist appended to `line`.
    pub fn bind_next(&mut self, line: LineId, key: HashRef, value: HashRef) {
        self.lines[line.0].next.push((key, value));
    }

    /// Queues a binding for the next fast twist appended to `line`.
    pub fn bind_next_fast(&mut self, line: LineId, key: HashRef, value: HashRef) {
        self.lines[line.0].next_fast.push((key, value));
    }

    pub fn append(&mut self, line: LineId, tether: Tether) -> HashRef {
        let tether = match tether {
            Tether::Anchor => self.anchor,
            Tether::Loose => HashRef::Null,
            Tether::To(t) => t,
        };
        self.counter += 1;
        let nonce = HashRef::of_parts(&[b"nonce", &self.seed.to_be_bytes(), &self.counter.to_be_bytes()]);
        let state = &mut self.lines[line.0];
        let mut pairs = std::mem::take(&mut state.next);
        if !tether.is_null() {
            pairs.append(&mut state.next_fast);
        }
        pairs.push((nonce, HashRef::Null));
        let root = self.store.put_trie(pairs).expect("queued keys are distinct");
        let id = self.store.put(Twist::new(state.tip, tether, root));
        state.tip = id;
        state.twists.push(id);
        id
    }

    /// Appends up to `max_fill` loose twists, chosen at random.
    pub fn fill(&mut self, line: LineId) {
        let n = if self.max_fill == 0 { 0 } else { self.rng.random_range(0..=self.max_fill) };
        for _ in 0..n {
            self.append(line, Tether::Loose);
        }
    }

    fn upper_tether(&self, line: LineId) -> Tether {
        if self.lines[line.0].cork {
            Tether::Anchor
        } else {
            Tether::Loose
        }
    }

    fn start(&mut self, plan: &Plan, lead_line: LineId, cork: LineId) -> Started {
        match plan {
            Plan::Hitch => {
                self.fill(cork);
                let fastener = self.append(cork, Tether::Anchor);
                self.fill(lead_line);
                let lead = self.append(lead_line, Tether::To(fastener));
                Started { lead, fastener, upper: cork, kind: StartedKind::Hitch }
            }
            Plan::Lash(inner) => {
                let upper = self.new_line();
                let inner = self.start(inner, upper, cork);
                self.fill(lead_line);
                let lead = self.append(lead_line, Tether::To(inner.lead));
                Started { lead, fastener: inner.lead, upper, kind: StartedKind::Lash(Box::new(inner)) }
            }
            Plan::Splice(left, right) => {
                let left = self.start(left, lead_line, cork);
                Started {
                    lead: left.lead,
                    fastener: left.fastener,
                    upper: left.upper,
                    kind: StartedKind::Splice(Box::new(left), (**right).clone()),
                }
            }
        }
    }

    /// Creates the meet (unless given), the hoist, and queues the post.
    fn hoist(&mut self, s: &Started, lead_line: LineId, meet: Option<HashRef>) -> Roles {
        let (fastener, lead, upper) = (s.fastener, s.lead, s.upper);
        let meet = meet.unwrap_or_else(|| {
            self.fill(lead_line);
            self.append(lead_line, Tether::To(fastener))
        });
        self.fill(upper);
        self.bind_next(upper, lead, meet);
        let tether = self.upper_tether(upper);
        let hoist = self.append(upper, tether);
        self.bind_next_fast(lead_line, lead, hoist);
        Roles { fastener, lead, meet, hoist }
    }

    fn finish(&mut self, s: Started, lead_line: LineId, cork: LineId, meet: Option<HashRef>) -> Built {
        match s.kind {
            StartedKind::Hitch => Built::Hitch(self.hoist(&s, lead_line, meet)),
            StartedKind::Lash(_) => {
                let bottom = self.hoist(&s, lead_line, meet);
                let StartedKind::Lash(inner_state) = s.kind else { unreachable!() };
                let inner = self.finish(*inner_state, s.upper, cork, None);
                Built::Lash { bottom, inner: Box::new(inner) }
            }
            StartedKind::Splice(left, right) => {
                let right_state = self.start(&right, lead_line, cork);
                let junction = right_state.lead;
                let left = self.finish(*left, lead_line, cork, Some(junction));
                let right = self.finish(right_state, lead_line, cork, meet);
                Built::Splice(Box::new(left), Box::new(right))
            }
        }
    }

    /// Lays out `plan` with its leadline on `lead_line` and its corkline on
    /// `cork`.
    pub fn build(&mut self, plan: &Plan, lead_line: LineId, cork: LineId) -> Built {
        let s = self.start(plan, lead_line, cork);
        self.finish(s, lead_line, cork, None)
    }

    pub fn half(&self, r: &Roles) -> Result<HalfHitchCert, HitchError> {
        assemble_half_hitch(&self.store, r.fastener, r.lead, r.meet, r.hoist)
    }

    /// Assembles and verifies the certificate for a built plan.
    pub fn cert(&self, built: &Built) -> Result<RigCert, ScenarioError> {
        Ok(match built {
            Built::Hitch(r) => RigCert::half_hitch(self.half(r)?),
            Built::Lash { bottom, inner } => lash(RigCert::half_hitch(self.half(bottom)?), self.cert(inner)?)?,
            Built::Splice(left, right) => splice(&self.store, self.cert(left)?, self.cert(right)?)?,
        })
    }
}

/// The roles of the first half-hitch of a built plan.
pub fn leading_roles(built: &Built) -> Roles {
    match built {
        Built::Hitch(r) => *r,
        Built::Lash { bottom, .. } => *bottom,
        Built::Splice(left, _) => leading_roles(left),
    }
}

/// A store with one rig built from `plan`.
pub fn build_rig(seed: u64, plan: &Plan, max_fill: usize) -> Result<(TwistStore, RigCert), ScenarioError> {
    let mut wb = Workbench::new(seed, max_fill);
    let (lead, cork) = (wb.new_line(), wb.new_cork_line());
    let built = wb.build(plan, lead, cork);
    let cert = wb.cert(&built)?;
    Ok((wb.into_store(), cert))
}

/// A random hitch with its post.
pub fn random_hitch(seed: u64) -> Result<(TwistStore, HitchCert), ScenarioError> {
    let mut wb = Workbench::new(seed, 2);
    let (lead, cork) = (wb.new_line(), wb.new_cork_line());
    let Built::Hitch(roles) = wb.build(&Plan::Hitch, lead, cork) else { unreachable!() };
    wb.fill(lead);
    let post = wb.append(lead, Tether::To(roles.fastener));
    let half = wb.half(&roles)?;
    let hitch = assemble_hitch(wb.store(), half, post)?;
    Ok((wb.into_store(), hitch))
}

/// A random spliceable pair: a length-1 rig and a rig starting at its meet.
pub fn random_splice_pair(seed: u64) -> Result<(TwistStore, RigCert, RigCert), ScenarioError> {
    let mut wb = Workbench::new(seed, 2);
    let left = Plan::random_unit(wb.rng(), 2);
    let right = Plan::random(wb.rng(), 2);
    let (lead, cork) = (wb.new_line(), wb.new_cork_line());
    let Built::Splice(l, r) = wb.build(&Plan::splice(left, right), lead, cork) else { unreachable!() };
    let (l, r) = (wb.cert(&l)?, wb.cert(&r)?);
    Ok((wb.into_store(), l, r))
}

/// A random lashable pair. The upper rig's leadline starts at the fast
/// tether of the bottom's lead.
pub fn random_lash_pair(seed: u64) -> Result<(TwistStore, RigCert, RigCert), ScenarioError> {
    let mut wb = Workbench::new(seed, 2);
    let inner = Plan::random(wb.rng(), 2);
    let (lead, cork) = (wb.new_line(), wb.new_cork_line());
    let Built::Lash { bottom, inner } = wb.build(&Plan::lash(inner), lead, cork) else { unreachable!() };
    let h0 = RigCert::half_hitch(wb.half(&bottom)?);
    let r1 = wb.cert(&inner)?;
    Ok((wb.into_store(), h0, r1))
}

/// Two candidate successors of one twist against one corkline:
/// `z1` binds `a0 ↦ a1`, the later `z2` binds `a0 ↦ a1'`.
pub struct DoubleSpend {
    pub store: TwistStore,
    pub z: [HashRef; 3],
    pub a0: HashRef,
    pub a1: HashRef,
    pub rival: HashRef,
    /// The honest half-hitch on `z1`.
    pub honest: RigCert,
    /// The half-hitch on `z2`, assembled without checks; its exclusion
    /// slot for `z1` holds an inclusion proof.
    pub forged: RigCert,
}

pub fn double_spend(seed: u64) -> DoubleSpend {
    let mut wb = Workbench::new(seed, 0);
    let (a, z) = (wb.new_line(), wb.new_cork_line());
    let z0 = wb.append(z, Tether::Anchor);
    let a0 = wb.append(a, Tether::To(z0));
    let a1 = wb.append(a, Tether::To(z0));
    // A sibling of a1 on a fork of the lead line.
    let rival = {
        let root = wb.store.put_trie([(HashRef::of_parts(&[b"rival", &seed.to_be_bytes()]), HashRef::Null)]);
        wb.store.put(Twist::new(a0, z0, root.expect("one key")))
    };
    wb.bind_next(z, a0, a1);
    let z1 = wb.append(z, Tether::Anchor);
    wb.bind_next(z, a0, rival);
    let z2 = wb.append(z, Tether::Anchor);
    let honest = RigCert::half_hitch(assemble_half_hitch(&wb.store, z0, a0, a1, z1).expect("honest half-hitch"));
    let forged = RigCert::half_hitch(assemble_unchecked(&wb.store, z0, a0, rival, z2).expect("twists present"));
    DoubleSpend { store: wb.into_store(), z: [z0, z1, z2], a0, a1, rival, honest, forged }
}

/// The four-twist half-hitch: `f`, `h` on the corkline and `l`, `m` on the
/// leadline.
pub fn minimal_half_hitch(seed: u64) -> Result<(TwistStore, RigCert), ScenarioError> {
    build_rig(seed, &Plan::Hitch, 0)
}

/// A leadline that changes intermediate lines partway: two lashed
/// half-hitches on different intermediate lines, spliced.
pub fn custody_transfer(seed: u64) -> Result<(TwistStore, RigCert), ScenarioError> {
    build_rig(seed, &Plan::splice(Plan::lash(Plan::Hitch), Plan::lash(Plan::Hitch)), 0)
}

/// Named demo scenarios: `half-hitch`, `spliced-chain(k)`, `lashed(k)`,
/// `custody-transfer`.
pub fn demo(name: &str, seed: u64) -> Result<(TwistStore, RigCert), ScenarioError> {
    let arg = |prefix: &str| -> Option<usize> {
        name.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?.parse().ok()
    };
    match name {
        "half-hitch" => minimal_half_hitch(seed),
        "custody-transfer" => custody_transfer(seed),
        _ => {
            if let Some(k) = arg("spliced-chain").filter(|k| (1..=64).contains(k)) {
                build_rig(seed, &Plan::chain(k), 0)
            } else if let Some(k) = arg("lashed").filter(|k| *k <= 64) {
                build_rig(seed, &Plan::tower(k), 0)
            } else {
                Err(ScenarioError::UnknownScenario(name.to_string()))
            }
        }
    }
}

/// A tower of `k` lashes over one half-hitch, assembled without checks,
/// whose leadline branches off the fastener on line `d` above it
/// (`1 ≤ d ≤ k + 1`, the corkline being line `k + 1`). Iterating the fast
/// tether from the lead reaches a twist that precedes it.
pub fn tethered_to_own_past(seed: u64, k: usize, d: usize) -> Result<RigCert, ScenarioError> {
    assert!((1..=k + 1).contains(&d));
    let mut wb = Workbench::new(seed, 1);
    let mut lines = vec![LineId(usize::MAX)];
    for _ in 0..k {
        lines.push(wb.new_line());
    }
    lines.push(wb.new_cork_line());
    let mut fast = vec![HashRef::Null; k + 2];
    wb.fill(lines[k + 1]);
    fast[k + 1] = wb.append(lines[k + 1], Tether::Anchor);
    for j in (1..=k).rev() {
        wb.fill(lines[j]);
        fast[j] = wb.append(lines[j], Tether::To(fast[j + 1]));
    }
    lines[0] = wb.line_from(fast[d]);
    let a0 = wb.append(lines[0], Tether::To(fast[1]));
    let mut halves = Vec::new();
    for j in 0..=k {
        let lead = if j == 0 { a0 } else { fast[j] };
        wb.fill(lines[j]);
        let meet = wb.append(lines[j], Tether::To(fast[j + 1]));
        wb.fill(lines[j + 1]);
        wb.bind_next(lines[j + 1], lead, meet);
        let tether = wb.upper_tether(lines[j + 1]);
        let hoist = wb.append(lines[j + 1], tether);
        halves.push(assemble_unchecked(&wb.store, fast[j + 1], lead, meet, hoist)?);
    }
    let mut halves = halves.into_iter().rev().map(RigCert::half_hitch);
    let top = halves.next().expect("k + 1 half-hitches");
    Ok(halves.fold(top, |upper, bottom| RigCert::lashed(bottom, upper)))
}

/// A pool of at most 12 twists from one of several small families:
/// single hitches, splices, lashes, double-spend attempts, forked
/// corklines, and two leadlines on one corkline.
pub fn random_pool(seed: u64) -> TwistStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let fill = usize::from(rng.random_bool(0.6));
    let pool = pool_family(seed, fill, &mut rng);
    if pool.len() <= 12 {
        pool
    } else {
        pool_family(seed, 0, &mut rng)
    }
}

fn pool_family(seed: u64, fill: usize, rng: &mut ChaCha8Rng) -> TwistStore {
    match seed % 7 {
        0 => {
            let mut wb = Workbench::new(seed, fill);
            let (a, z) = (wb.new_line(), wb.new_cork_line());
            let Built::Hitch(r) = wb.build(&Plan::Hitch, a, z) else { unreachable!() };
            wb.append(a, Tether::To(r.fastener));
            wb.fill(z);
            wb.into_store()
        }
        1 => pool_from(seed, &Plan::chain(2), fill),
        2 => pool_from(seed, &Plan::lash(Plan::Hitch), fill),
        3 => pool_from(seed, &Plan::splice(Plan::Hitch, Plan::lash(Plan::Hitch)), fill),
        4 => {
            let ds = double_spend(seed);
            if rng.random_bool(0.5) {
                // Another hoist further on, binding the rival again.
                let t = Twist::new(ds.z[2], HashRef::of(b"late"), {
                    ds.store.put_trie([(ds.a0, ds.rival), (HashRef::of_parts(&[b"late", &seed.to_be_bytes()]), HashRef::Null)]).expect("distinct")
                });
                ds.store.put(t);
            }
            ds.store
        }
        5 => forked_corkline(seed),
        _ => {
            let mut wb = Workbench::new(seed, fill);
            let (a, b, z) = (wb.new_line(), wb.new_line(), wb.new_cork_line());
            wb.build(&Plan::Hitch, a, z);
            wb.build(&Plan::Hitch, b, z);
            wb.into_store()
        }
    }
}

fn pool_from(seed: u64, plan: &Plan, fill: usize) -> TwistStore {
    let mut wb = Workbench::new(seed, fill);
    let (a, z) = (wb.new_line(), wb.new_cork_line());
    wb.build(plan, a, z);
    wb.into_store()
}

/// `z0` with two forks `z1`, `z1'`, each binding a different successor of
/// `a0`.
pub fn forked_corkline(seed: u64) -> TwistStore {
    let mut wb = Workbench::new(seed, 0);
    let (a, z) = (wb.new_line(), wb.new_cork_line());
    let z0 = wb.append(z, Tether::Anchor);
    let a0 = wb.append(a, Tether::To(z0));
    let a1 = wb.append(a, Tether::To(z0));
    let store = wb.into_store();
    let salted = |tag: &[u8]| HashRef::of_parts(&[tag, &seed.to_be_bytes()]);
    let rival_root = store.put_trie([(salted(b"rival"), HashRef::Null)]).expect("one key");
    let rival = store.put(Twist::new(a0, z0, rival_root));
    let anchor = HashRef::of(b"fork anchor");
    for (tag, meet) in [(&b"left"[..], a1), (&b"right"[..], rival)] {
        let root = store.put_trie([(a0, meet), (salted(tag), HashRef::Null)]).expect("distinct");
        store.put(Twist::new(z0, anchor, root));
    }
    store
}
