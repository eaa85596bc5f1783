use rigging::rig::{verify_rig, RigRule};
use rigging::scenario::tethered_to_own_past;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn leadlines_branching_off_their_own_support_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for seed in 0..60 {
        let k = rng.random_range(1..=3);
        let d = rng.random_range(2..=k + 1);
        let cert = tethered_to_own_past(seed, k, d).unwrap();
        let err = verify_rig(&cert).unwrap_err();
        assert!(matches!(err.rule, RigRule::TetherPrecedence { .. }), "seed {seed}: {err}");
    }
}
