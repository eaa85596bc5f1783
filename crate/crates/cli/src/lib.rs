//! The `rigging` command line: build demo stores, verify rig files,
//! check pairs of rigs for conflict, and inspect twists.
//!
//! Exit codes: 0 accept / no conflict, 1 reject, 2 input error, 3 conflict.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use rigging::graph::{alignment, fast_previous, fast_tether, Alignment};
use rigging::rig::{decode_rig, encode_rig, verify_rig, RigDecodeError};
use rigging::scenario::{demo, double_spend};
use rigging::support::{relate, unique_successor, SupportError, Verdict};
use rigging::{HashRef, RigCert, TwistSource, TwistStore};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFLICT: i32 = 3;

/// Scenarios accepted by `demo`.
pub const SCENARIOS: &str = "half-hitch, spliced-chain(K), lashed(K), custody-transfer, double-spend";

#[derive(Debug, Parser)]
#[command(name = "rigging", version, about = "Build and verify rig certificates offline")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a named scenario's twists and rig files to OUT_DIR.
    Demo {
        scenario: String,
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify a rig file against a twist store.
    Verify {
        rig: PathBuf,
        #[arg(long)]
        store: PathBuf,
    },
    /// Check whether two rigs conflict.
    CheckConflict {
        rig_a: PathBuf,
        rig_b: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// Relate the rigs even if they fail verification.
        #[arg(long)]
        assume_valid: bool,
    },
    /// Print a twist and its fast previous and fast tether.
    Inspect {
        hash: String,
        #[arg(long)]
        store: PathBuf,
    },
}

/// A command outcome: exit code plus what to print.
struct Outcome {
    code: i32,
    text: String,
    json: serde_json::Value,
}

impl Outcome {
    fn new(code: i32, text: impl Into<String>, json: serde_json::Value) -> Self {
        Self { code, text: text.into(), json }
    }

    fn input(msg: impl Into<String>) -> Self {
        let msg = msg.into();
        Self::new(EXIT_INPUT, format!("error: {msg}"), json!({ "error": msg }))
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<'a, I, T>(args: I, out: &'a mut dyn Write, err: &'a mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = write!(if e.use_stderr() { err } else { out }, "{}", e.render());
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Demo { scenario, out_dir, seed } => cmd_demo(&scenario, &out_dir, seed),
        Command::Verify { rig, store } => cmd_verify(&rig, &store),
        Command::CheckConflict { rig_a, rig_b, store, assume_valid } => {
            cmd_check_conflict(&rig_a, &rig_b, &store, assume_valid)
        }
        Command::Inspect { hash, store } => cmd_inspect(&hash, &store),
    };
    let sink = if outcome.code == EXIT_INPUT { err } else { out };
    let _ = match cli.format {
        Format::Text => writeln!(sink, "{}", outcome.text),
        Format::Json => writeln!(sink, "{}", outcome.json),
    };
    outcome.code
}

fn write_rig(path: &Path, cert: &RigCert) -> Result<(), Outcome> {
    fs::write(path, encode_rig(cert)).map_err(|e| Outcome::input(format!("{}: {e}", path.display())))
}

fn cmd_demo(scenario: &str, out_dir: &Path, seed: u64) -> Outcome {
    let store_dir = out_dir.join("store");
    let (store, rigs) = if scenario == "double-spend" {
        let ds = double_spend(seed);
        (ds.store, vec![("honest.rig", ds.honest), ("forged.rig", ds.forged)])
    } else {
        match demo(scenario, seed) {
            Ok((store, cert)) => (store, vec![("rig.rig", cert)]),
            Err(e) => return Outcome::input(format!("{e}; expected one of {SCENARIOS}")),
        }
    };
    let twists = match store.save_dir(&store_dir) {
        Ok(n) => n,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let mut files = Vec::new();
    for (name, cert) in &rigs {
        let path = out_dir.join(name);
        if let Err(o) = write_rig(&path, cert) {
            return o;
        }
        files.push(path.display().to_string());
    }
    Outcome::new(
        EXIT_OK,
        format!("{twists} twists in {}\n{}", store_dir.display(), files.join("\n")),
        json!({ "scenario": scenario, "seed": seed, "store": store_dir.display().to_string(), "twists": twists, "rigs": files }),
    )
}

fn load_store(dir: &Path) -> Result<TwistStore, Outcome> {
    TwistStore::load_dir(dir).map_err(|e| Outcome::input(e.to_string()))
}

fn load_rig(path: &Path, store: &TwistStore) -> Result<RigCert, Outcome> {
    let bytes = fs::read(path).map_err(|e| Outcome::input(format!("{}: {e}", path.display())))?;
    decode_rig(&bytes, store).map_err(|e| match e {
        RigDecodeError::UnknownReference(id) => Outcome::new(
            EXIT_REJECT,
            format!("reject: {}: unknown reference {}", path.display(), id.to_hex()),
            json!({ "verdict": "reject", "rig": path.display().to_string(), "unknown_reference": id.to_hex() }),
        ),
        RigDecodeError::Decode(d) => Outcome::input(format!("{}: {d}", path.display())),
    })
}

fn cmd_verify(rig: &Path, store_dir: &Path) -> Outcome {
    let cert = match load_store(store_dir).and_then(|store| load_rig(rig, &store)) {
        Ok(c) => c,
        Err(o) => return o,
    };
    match verify_rig(&cert) {
        Ok(guild) => Outcome::new(EXIT_OK, format!("accept {guild}"), json!({ "verdict": "accept", "guild": guild.to_string() })),
        Err(e) => Outcome::new(
            EXIT_REJECT,
            format!("reject {e}"),
            json!({ "verdict": "reject", "path": e.path, "rule": e.rule.to_string() }),
        ),
    }
}

fn cmd_check_conflict(a: &Path, b: &Path, store_dir: &Path, assume_valid: bool) -> Outcome {
    let store = match load_store(store_dir) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let mut certs = Vec::new();
    let mut notes = Vec::new();
    for path in [a, b] {
        let cert = match load_rig(path, &store) {
            Ok(c) => c,
            Err(o) => return o,
        };
        if let Err(e) = verify_rig(&cert) {
            if !assume_valid {
                return Outcome::new(
                    EXIT_REJECT,
                    format!("reject {}: {e}", path.display()),
                    json!({ "verdict": "reject", "rig": path.display().to_string(), "path": e.path, "rule": e.rule.to_string() }),
                );
            }
            notes.push(format!("{} fails verification ({e}); assumed valid", path.display()));
        }
        certs.push(cert);
    }
    let rel = match relate(&store, &certs[0], &certs[1]) {
        Ok(r) => r,
        Err(e) => return Outcome::new(EXIT_REJECT, format!("reject {e}"), json!({ "verdict": "reject", "error": e.to_string() })),
    };
    let mut lines = notes.clone();
    lines.push(rel.to_string());
    let mut conflict = rel.verdict == Verdict::Misaligned;
    if let Some(e) = shared_successor_conflict(&store, &certs) {
        lines.push(e.to_string());
        conflict = true;
    }
    let code = if conflict { EXIT_CONFLICT } else { EXIT_OK };
    Outcome::new(
        code,
        lines.join("\n"),
        json!({ "verdict": rel.verdict.to_string(), "conflict": conflict, "evidence": lines, "assumed_valid": notes }),
    )
}

/// Different successors of one shared twist, held against aligned
/// corklines.
fn shared_successor_conflict(store: &TwistStore, certs: &[RigCert]) -> Option<SupportError> {
    let corks: Vec<HashRef> = certs.iter().flat_map(|c| c.corkline.ids().iter().copied()).collect();
    let mut map = certs[0].twists();
    map.extend(certs[1].twists());
    let Ok(Alignment::Envelope(env)) = alignment(&rigging::store::Layered(&map, store), &corks) else {
        return None;
    };
    certs[0]
        .leadline
        .ids()
        .iter()
        .filter(|a0| certs[1].leadline.contains(a0))
        .find_map(|a0| unique_successor(store, &env.last(), a0, certs).err())
}

fn cmd_inspect(hash: &str, store_dir: &Path) -> Outcome {
    let Some(id) = HashRef::from_hex(hash).filter(|h| !h.is_null()) else {
        return Outcome::input(format!("not a twist hash: {hash:?}"));
    };
    let store = match load_store(store_dir) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let Some(t) = store.twist(&id) else {
        return Outcome::input(format!("unknown twist {}", id.to_hex()));
    };
    let show = |h: &HashRef| if h.is_null() { "null".to_string() } else { h.to_hex() };
    let p = fast_previous(&store, &id).ok();
    let tt = fast_tether(&store, &id).ok();
    let tether = if t.is_loose() { "null (loose)".to_string() } else { t.tether.to_hex() };
    let text = [
        format!("twist:   {}", id.to_hex()),
        format!("prev:    {}", show(&t.prev)),
        format!("tether:  {tether}"),
        format!("rigging: {}", show(&t.rigging)),
        format!("kind:    {}", if t.is_fast() { "fast" } else { "loose" }),
        format!("*p:      {}", p.map_or("unresolved".into(), |h| h.to_hex())),
        format!("*t:      {}", tt.map_or("unresolved".into(), |h| h.to_hex())),
    ]
    .join("\n");
    Outcome::new(
        EXIT_OK,
        text,
        json!({
            "twist": id.to_hex(),
            "prev": show(&t.prev),
            "tether": show(&t.tether),
            "rigging": show(&t.rigging),
            "fast": t.is_fast(),
            "fast_previous": p.map(|h| h.to_hex()),
            "fast_tether": tt.map(|h| h.to_hex()),
        }),
    )
}
