use rigging::hitch::HitchError;
use rigging::rig::verify_rig;
use rigging::scenario::{double_spend, forked_corkline, minimal_half_hitch, random_hitch, random_pool};
use rigging::support::{
    forge_second_meet, oracle_supportive, relate, unique_successor, Evidence, ForgeOutcome, ForgeStrategy,
    SupportError, Verdict, POOL_LIMIT,
};
use rigging::trie::TrieVerdict;
use rigging::{HashRef, TwistStore};

#[test]
fn rig_against_itself_is_aligned() {
    let (store, cert) = minimal_half_hitch(0).unwrap();
    let rel = relate(&store, &cert, &cert).unwrap();
    assert_eq!(rel.verdict, Verdict::Aligned);
    assert_eq!(rel.evidence, Evidence::Envelope(cert.leadline.clone()));
}

#[test]
fn bypassed_double_spend_is_misaligned() {
    let ds = double_spend(0);
    assert!(verify_rig(&ds.honest).is_ok());
    assert!(verify_rig(&ds.forged).is_err());
    let rel = relate(&ds.store, &ds.honest, &ds.forged).unwrap();
    assert_eq!(rel.verdict, Verdict::Misaligned);
    assert!(matches!(rel.evidence, Evidence::LeadlinesForked(..)));
}

#[test]
fn unique_successor_cases() {
    let ds = double_spend(1);
    let z = ds.z[2];
    assert_eq!(unique_successor(&ds.store, &z, &ds.a0, &[]), Ok(None));
    assert_eq!(unique_successor(&ds.store, &z, &ds.a0, &[ds.honest.clone()]), Ok(Some(ds.a1)));
    // Too early on the corkline to be considered.
    assert_eq!(unique_successor(&ds.store, &ds.z[0], &ds.a0, &[ds.honest.clone()]), Ok(None));
    // The detector fires when handed a certificate that skipped verification.
    let both = [ds.honest.clone(), ds.forged.clone()];
    assert!(matches!(
        unique_successor(&ds.store, &z, &ds.a0, &both),
        Err(SupportError::EquivocationDetected { first, second, .. }) if first == ds.a1 && second == ds.rival
    ));
}

#[test]
fn minimal_pool_has_one_rig() {
    let (store, _) = minimal_half_hitch(3).unwrap();
    let report = oracle_supportive(&store, 3).unwrap();
    assert_eq!(report.rigs.len(), 1);
    assert_eq!(report.pairs, 0);
    assert!(report.is_supportive());
}

#[test]
fn double_spend_pool_admits_one_successor() {
    let ds = double_spend(5);
    let report = oracle_supportive(&ds.store, 3).unwrap();
    assert!(report.is_supportive(), "{:?}", report.lines());
    let successors: Vec<HashRef> = report
        .rigs
        .iter()
        .filter(|r| r.leadline.first() == ds.a0)
        .map(|r| r.leadline.ids()[1])
        .collect();
    assert!(!successors.is_empty());
    assert!(successors.iter().all(|a1| *a1 == ds.a1));
}

#[test]
fn forked_corkline_pool_is_disjoint_across_forks() {
    let store = forked_corkline(2);
    let report = oracle_supportive(&store, 3).unwrap();
    assert_eq!(report.rigs.len(), 2, "{:?}", report.lines());
    let rel = relate(&store, &report.rigs[0], &report.rigs[1]).unwrap();
    assert_eq!(rel.verdict, Verdict::Disjoint);
    assert!(matches!(rel.evidence, Evidence::CorklinesForked(..)));
    assert!(report.is_supportive());
}

#[test]
fn oversized_pool_refused() {
    let store = TwistStore::new();
    for i in 0..=POOL_LIMIT as u8 {
        store.put(rigging::Twist::new(HashRef::Null, HashRef::Null, HashRef::of(&[i])));
    }
    assert!(matches!(oracle_supportive(&store, 1), Err(SupportError::PoolTooLarge { .. })));
}

#[test]
fn pool_sweep_finds_no_misaligned_pair() {
    for seed in 0..40 {
        let pool = random_pool(seed);
        let report = oracle_supportive(&pool, 3).unwrap();
        assert!(report.is_supportive(), "seed {seed}: {:?}", report.lines());
    }
}

#[test]
fn oracle_report_is_deterministic() {
    let a = oracle_supportive(&random_pool(3), 3).unwrap();
    let b = oracle_supportive(&random_pool(3), 3).unwrap();
    assert_eq!(a.lines(), b.lines());
}

#[test]
fn forge_attempts_are_blocked_or_disjoint() {
    for seed in 0..20 {
        let (store, hitch) = random_hitch(seed).unwrap();
        let report = forge_second_meet(&store, &hitch.half);
        assert_eq!(report.conflicts, 0);
        for (strategy, outcome) in &report.attempts {
            match strategy {
                ForgeStrategy::LaterHoist => {
                    assert!(matches!(outcome, ForgeOutcome::Blocked(HitchError::NotFirstSuccessor { .. })))
                }
                ForgeStrategy::SameHoistOtherValue => assert_eq!(
                    outcome,
                    &ForgeOutcome::Blocked(HitchError::HoistInclusionFailed(TrieVerdict::Invalid))
                ),
                ForgeStrategy::ForkedCorkline => assert_eq!(outcome, &ForgeOutcome::Disjoint),
                _ => assert!(matches!(outcome, ForgeOutcome::Blocked(_)), "{strategy:?}: {outcome:?}"),
            }
        }
    }
}
