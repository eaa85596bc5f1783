use rigging::hitch::{hitch_chronology_witness, verify_half_hitch, verify_hitch, HitchError};
use rigging::scenario::random_hitch;
use rigging::trie::TrieVerdict;
use rigging::{HashRef, Twist};

#[test]
fn generated_hitches_verify_with_ordered_chronology() {
    for seed in 0..200 {
        let (_, hitch) = random_hitch(seed).unwrap();
        assert_eq!(verify_hitch(&hitch), Ok(()), "seed {seed}");
        let chrono = hitch_chronology_witness(&hitch);
        let h = &hitch.half;
        let expected = [h.fastener, h.lead, h.meet, h.hoist, hitch.post];
        assert_eq!(chrono.segments.len(), 4);
        for (i, seg) in chrono.segments.iter().enumerate() {
            assert_eq!(seg.start, expected[i]);
            assert!(seg.is_strict());
            assert_eq!(seg.verify(), Ok(expected[i + 1]), "seed {seed} segment {i}");
        }
        assert_eq!(chrono.verify(), Ok(hitch.post));
    }
}

#[test]
fn topline_twist_swapped_for_a_stranger() {
    let (_, hitch) = random_hitch(11).unwrap();
    let mut half = hitch.half.clone();
    let n = half.topline.len();
    half.topline[n - 1] = Twist::new(half.topline[n - 2].hash(), HashRef::of(b"x"), half.topline[n - 1].rigging);
    assert_eq!(verify_half_hitch(&half), Err(HitchError::HashMismatch(rigging::hitch::Role::Hoist)));
}

#[test]
fn post_proof_for_another_key_rejected() {
    let (_, hitch) = random_hitch(12).unwrap();
    let mut h = hitch.clone();
    h.post_inclusion = hitch.half.hoist_inclusion.clone();
    assert!(matches!(verify_hitch(&h), Err(HitchError::PostBindingMismatch(TrieVerdict::Invalid))));
}
