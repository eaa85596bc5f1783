use std::fs;
use std::path::{Path, PathBuf};

use rigging::rig::{decode_rig, encode_rig, rig_length};
use rigging::scenario::forked_corkline;
use rigging::support::oracle_supportive;
use rigging::{Derivation, TwistStore};
use rigging_cli::{run, EXIT_CONFLICT, EXIT_INPUT, EXIT_OK, EXIT_REJECT};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("rigging").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn demo(name: &str, dir: &Path) -> (PathBuf, PathBuf) {
    let r = cli(&["demo", name, s(dir)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    (dir.join("rig.rig"), dir.join("store"))
}

#[test]
fn half_hitch_demo_writes_four_twists_and_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let (rig, store) = demo("half-hitch", tmp.path());
    assert_eq!(fs::read_dir(&store).unwrap().count(), 4);
    let rigs = fs::read_dir(tmp.path()).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some()).count();
    assert_eq!(rigs, 1);
    let r = cli(&["verify", s(&rig), "--store", s(&store)]);
    assert_eq!((r.code, r.out.trim()), (EXIT_OK, "accept GH"));
}

#[test]
fn spliced_chain_has_the_requested_length() {
    let tmp = tempfile::tempdir().unwrap();
    let (rig, store) = demo("spliced-chain(3)", tmp.path());
    let cert = decode_rig(&fs::read(&rig).unwrap(), &TwistStore::load_dir(&store).unwrap()).unwrap();
    assert_eq!(rig_length(&cert).unwrap(), 3);
    let r = cli(&["verify", s(&rig), "--store", s(&store)]);
    assert_eq!((r.code, r.out.trim()), (EXIT_OK, "accept GUp"));
}

#[test]
fn custody_transfer_switches_intermediate_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let (rig, store_dir) = demo("custody-transfer", tmp.path());
    let store = TwistStore::load_dir(&store_dir).unwrap();
    let cert = decode_rig(&fs::read(&rig).unwrap(), &store).unwrap();
    let Derivation::Splice(sp) = &cert.derivation else { panic!("expected a splice") };
    let (Derivation::Lash(left), Derivation::Lash(right)) = (&sp.left.derivation, &sp.right.derivation) else {
        panic!("expected two lashes")
    };
    let (b, c) = (left.bottom.corkline.first(), right.bottom.corkline.first());
    assert!(!rigging::graph::aligned(&store, &b, &c).unwrap(), "intermediates should be distinct lines");
    assert_eq!(cli(&["verify", s(&rig), "--store", s(&store_dir)]).code, EXIT_OK);
}

#[test]
fn flipped_bytes_never_accept() {
    let tmp = tempfile::tempdir().unwrap();
    let (rig, store) = demo("lashed(1)", tmp.path());
    let bytes = fs::read(&rig).unwrap();
    let bad = tmp.path().join("bad.rig");
    for i in (0..bytes.len()).step_by(7) {
        let mut m = bytes.clone();
        m[i] ^= 0x20;
        fs::write(&bad, &m).unwrap();
        let code = cli(&["verify", s(&bad), "--store", s(&store)]).code;
        assert!(code == EXIT_REJECT || code == EXIT_INPUT, "byte {i}: exit {code}");
    }
}

#[test]
fn missing_store_twist_is_a_rejection() {
    let tmp = tempfile::tempdir().unwrap();
    let (rig, store) = demo("half-hitch", tmp.path());
    let victim = fs::read_dir(&store).unwrap().next().unwrap().unwrap().path();
    fs::remove_file(victim).unwrap();
    let r = cli(&["verify", s(&rig), "--store", s(&store)]);
    assert_eq!(r.code, EXIT_REJECT);
    assert!(r.out.contains("unknown reference"), "{}", r.out);
}

#[test]
fn unreadable_inputs_are_input_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let (rig, store) = demo("half-hitch", tmp.path());
    assert_eq!(cli(&["verify", "/nonexistent.rig", "--store", s(&store)]).code, EXIT_INPUT);
    assert_eq!(cli(&["verify", s(&rig), "--store", "/nonexistent"]).code, EXIT_INPUT);
    fs::write(tmp.path().join("junk.rig"), b"RIG2").unwrap();
    assert_eq!(cli(&["verify", s(&tmp.path().join("junk.rig")), "--store", s(&store)]).code, EXIT_INPUT);
    let r = cli(&["demo", "spliced-chain", s(tmp.path())]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.err.contains("expected one of"));
    assert_eq!(cli(&["frobnicate"]).code, EXIT_INPUT);
}

#[test]
fn rig_against_itself_does_not_conflict() {
    let tmp = tempfile::tempdir().unwrap();
    let (rig, store) = demo("spliced-chain(2)", tmp.path());
    let r = cli(&["check-conflict", s(&rig), s(&rig), "--store", s(&store)]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.starts_with("aligned"), "{}", r.out);
}

#[test]
fn rigs_on_forked_corklines_are_disjoint() {
    let tmp = tempfile::tempdir().unwrap();
    let store = forked_corkline(0);
    let report = oracle_supportive(&store, 1).unwrap();
    assert_eq!(report.rigs.len(), 2);
    let store_dir = tmp.path().join("store");
    store.save_dir(&store_dir).unwrap();
    let paths: Vec<PathBuf> = report
        .rigs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = tmp.path().join(format!("{i}.rig"));
            fs::write(&p, encode_rig(r)).unwrap();
            p
        })
        .collect();
    let r = cli(&["check-conflict", s(&paths[0]), s(&paths[1]), "--store", s(&store_dir)]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.starts_with("disjoint corklines fork"), "{}", r.out);
}

#[test]
fn double_spend_demo() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(cli(&["demo", "double-spend", s(tmp.path())]).code, EXIT_OK);
    let store = tmp.path().join("store");
    let (honest, forged) = (tmp.path().join("honest.rig"), tmp.path().join("forged.rig"));
    assert_eq!(cli(&["verify", s(&honest), "--store", s(&store)]).code, EXIT_OK);
    assert_eq!(cli(&["verify", s(&forged), "--store", s(&store)]).code, EXIT_REJECT);
    assert_eq!(cli(&["check-conflict", s(&honest), s(&forged), "--store", s(&store)]).code, EXIT_REJECT);
    let r = cli(&["check-conflict", s(&honest), s(&forged), "--store", s(&store), "--assume-valid"]);
    assert_eq!(r.code, EXIT_CONFLICT);
    assert!(r.out.contains("misaligned leadlines fork"), "{}", r.out);
    assert!(r.out.contains("equivocation"), "{}", r.out);
}

#[test]
fn demos_are_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        assert_eq!(cli(&["demo", "custody-transfer", s(dir), "--seed", "0"]).code, EXIT_OK);
    }
    assert_eq!(fs::read(a.path().join("rig.rig")).unwrap(), fs::read(b.path().join("rig.rig")).unwrap());
    let c = tempfile::tempdir().unwrap();
    cli(&["demo", "custody-transfer", s(c.path()), "--seed", "1"]);
    assert_ne!(fs::read(a.path().join("rig.rig")).unwrap(), fs::read(c.path().join("rig.rig")).unwrap());
}

#[test]
fn inspect_shows_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let (rig, store_dir) = demo("half-hitch", tmp.path());
    let store = TwistStore::load_dir(&store_dir).unwrap();
    let cert = decode_rig(&fs::read(&rig).unwrap(), &store).unwrap();
    let half = cert.leading_half();
    let r = cli(&["inspect", &half.lead.to_hex(), "--store", s(&store_dir)]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains(&format!("tether:  {}", half.fastener.to_hex())), "{}", r.out);
    assert!(r.out.contains("kind:    fast"));

    let loose = tempfile::tempdir().unwrap();
    demo("lashed(1)", loose.path());
    let store = TwistStore::load_dir(&loose.path().join("store")).unwrap();
    let id = store.ids().into_iter().find(|id| store.get(id).unwrap().is_loose()).unwrap();
    let r = cli(&["inspect", &id.to_hex(), "--store", s(&loose.path().join("store"))]);
    assert!(r.out.contains("tether:  null (loose)"), "{}", r.out);

    assert_eq!(cli(&["inspect", "xyz", "--store", s(&store_dir)]).code, EXIT_INPUT);
    assert_eq!(cli(&["inspect", &"ab".repeat(32), "--store", s(&store_dir)]).code, EXIT_INPUT);
}

#[test]
fn json_output() {
    let tmp = tempfile::tempdir().unwrap();
    let (rig, store) = demo("half-hitch", tmp.path());
    let r = cli(&["--format", "json", "verify", s(&rig), "--store", s(&store)]);
    let v: serde_json::Value = serde_json::from_str(r.out.trim()).unwrap();
    assert_eq!(v["verdict"], "accept");
    assert_eq!(v["guild"], "GH");
}

fn sockets() -> usize {
    fs::read_dir("/proc/self/fd")
        .map(|d| {
            d.filter_map(|e| fs::read_link(e.ok()?.path()).ok())
                .filter(|l| l.to_string_lossy().starts_with("socket:"))
                .count()
        })
        .unwrap_or(0)
}

#[test]
fn verification_opens_no_sockets() {
    let tmp = tempfile::tempdir().unwrap();
    let (rig, store) = demo("custody-transfer", tmp.path());
    let before = sockets();
    assert_eq!(cli(&["verify", s(&rig), "--store", s(&store)]).code, EXIT_OK);
    assert_eq!(cli(&["check-conflict", s(&rig), s(&rig), "--store", s(&store)]).code, EXIT_OK);
    assert_eq!(sockets(), before);
}
