//! Content-addressed twist storage.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::codec::DecodeError;
use crate::hashref::HashRef;
use crate::trie::{Trie, TrieError, TrieProof};
use crate::twist::Twist;

pub const TWIST_FILE_EXT: &str = "twist";

/// Anything twists can be looked up in by hash.
pub trait TwistSource {
    fn twist(&self, id: &HashRef) -> Option<Twist>;
}

impl TwistSource for HashMap<HashRef, Twist> {
    fn twist(&self, id: &HashRef) -> Option<Twist> {
        self.get(id).copied()
    }
}

impl<T: TwistSource + ?Sized> TwistSource for &T {
    fn twist(&self, id: &HashRef) -> Option<Twist> {
        (**self).twist(id)
    }
}

/// Looks in `first`, then `second`.
#[derive(Debug, Clone, Copy)]
pub struct Layered<A, B>(pub A, pub B);

impl<A: TwistSource, B: TwistSource> TwistSource for Layered<A, B> {
    fn twist(&self, id: &HashRef) -> Option<Twist> {
        self.0.twist(id).or_else(|| self.1.twist(id))
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: DecodeError,
    },
    #[error("{path}: file name does not match content hash {actual}")]
    HashMismatch { path: PathBuf, actual: HashRef },
}

/// In-memory, append-only twist store keyed by twist hash.
///
/// The store also remembers the tries it has built so that proofs can be
/// produced for rigging roots; only twists are persisted.
#[derive(Debug, Default)]
pub struct TwistStore {
    twists: RwLock<HashMap<HashRef, Twist>>,
    tries: RwLock<HashMap<HashRef, Arc<Trie>>>,
}

impl TwistStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores `t` under its hash. Idempotent.
    pub fn put(&self, t: Twist) -> HashRef {
        let id = t.hash();
        self.twists.write().unwrap().entry(id).or_insert(t);
        id
    }

    pub fn get(&self, id: &HashRef) -> Option<Twist> {
        self.twists.read().unwrap().get(id).copied()
    }

    pub fn contains(&self, id: &HashRef) -> bool {
        self.twists.read().unwrap().contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.twists.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All stored twist hashes, sorted.
    pub fn ids(&self) -> Vec<HashRef> {
        let mut ids: Vec<_> = self.twists.read().unwrap().keys().copied().collect();
        ids.sort();
        ids
    }

    pub fn snapshot(&self) -> HashMap<HashRef, Twist> {
        self.twists.read().unwrap().clone()
    }

    /// Builds a trie, remembers it, and returns its root.
    pub fn put_trie<I>(&self, pairs: I) -> Result<HashRef, TrieError>
    where
        I: IntoIterator<Item = (HashRef, HashRef)>,
    {
        let trie = Trie::build(pairs)?;
        let root = trie.root();
        if !root.is_null() {
            self.tries.write().unwrap().entry(root).or_insert_with(|| Arc::new(trie));
        }
        Ok(root)
    }

    pub fn trie(&self, root: &HashRef) -> Option<Arc<Trie>> {
        self.tries.read().unwrap().get(root).cloned()
    }

    /// Proof for `key` under `root`, if the store knows that trie.
    /// The null root is the empty trie and is always known.
    pub fn prove(&self, root: &HashRef, key: &HashRef) -> Option<TrieProof> {
        if root.is_null() {
            return Trie::build([]).ok()?.prove(key).ok();
        }
        self.trie(root)?.prove(key).ok()
    }

    /// Writes one `<hex>.twist` file per twist holding its encoding.
    pub fn save_dir(&self, dir: &Path) -> Result<usize, StoreError> {
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| StoreError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let twists = self.twists.read().unwrap();
        for (id, t) in twists.iter() {
            let path = dir.join(format!("{}.{TWIST_FILE_EXT}", id.to_hex()));
            fs::write(&path, t.encode()).map_err(io_err(&path))?;
        }
        Ok(twists.len())
    }

    /// Loads every `.twist` file in `dir`, checking each file name against
    /// the hash of its content. Other files are ignored.
    pub fn load_dir(dir: &Path) -> Result<Self, StoreError> {
        let store = Self::new();
        let entries = fs::read_dir(dir).map_err(|source| StoreError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for entry in entries {
            let entry = entry.map_err(|source| StoreError::Io { path: dir.to_path_buf(), source })?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some(TWIST_FILE_EXT) {
                continue;
            }
            let bytes = fs::read(&path).map_err(|source| StoreError::Io { path: path.clone(), source })?;
            let twist = Twist::decode(&bytes).map_err(|source| StoreError::Decode {
                path: path.clone(),
                source,
            })?;
            let id = twist.hash();
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            if HashRef::from_hex(stem) != Some(id) {
                return Err(StoreError::HashMismatch { path, actual: id });
            }
            store.put(twist);
        }
        Ok(store)
    }
}

impl TwistSource for TwistStore {
    fn twist(&self, id: &HashRef) -> Option<Twist> {
        self.get(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn put_is_idempotent() {
        let s = TwistStore::new();
        let t = Twist::new(HashRef::of(b"p"), HashRef::Null, HashRef::Null);
        let a = s.put(t);
        let b = s.put(t);
        assert_eq!(a, b);
        assert_eq!(s.len(), 1);
        assert_eq!(s.put(Twist::default()), Twist::default().hash());
    }

    #[test]
    fn size_counts_distinct_twists() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = TwistStore::new();
        let mut distinct = HashSet::new();
        for _ in 0..10_000 {
            // Small alphabet so duplicates actually occur.
            let pick = |rng: &mut ChaCha8Rng| match rng.random_range(0..4u8) {
                0 => HashRef::Null,
                n => HashRef::Sha256([n; 32]),
            };
            let t = Twist::new(pick(&mut rng), pick(&mut rng), pick(&mut rng));
            distinct.insert(t.encode());
            s.put(t);
        }
        assert_eq!(s.len(), distinct.len());
    }

    #[test]
    fn every_entry_keyed_by_its_hash() {
        let s = TwistStore::new();
        for i in 0..50u8 {
            s.put(Twist::new(HashRef::Sha256([i; 32]), HashRef::Null, HashRef::Null));
        }
        for (id, t) in s.snapshot() {
            assert_eq!(id, t.hash());
        }
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = TwistStore::new();
        for i in 0..10u8 {
            s.put(Twist::new(HashRef::Sha256([i; 32]), HashRef::of(&[i]), HashRef::Null));
        }
        s.save_dir(dir.path()).unwrap();
        let loaded = TwistStore::load_dir(dir.path()).unwrap();
        assert_eq!(loaded.ids(), s.ids());
    }

    #[test]
    fn misnamed_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let t = Twist::default();
        let wrong = HashRef::of(b"other").to_hex();
        fs::write(dir.path().join(format!("{wrong}.twist")), t.encode()).unwrap();
        assert!(matches!(
            TwistStore::load_dir(dir.path()),
            Err(StoreError::HashMismatch { .. })
        ));
    }

    #[test]
    fn prove_needs_known_trie() {
        let s = TwistStore::new();
        let k = HashRef::of(b"k");
        let root = s.put_trie([(k, HashRef::of(b"v"))]).unwrap();
        assert!(s.prove(&root, &k).is_some());
        assert!(s.prove(&HashRef::of(b"unknown root"), &k).is_none());
        assert!(s.prove(&HashRef::Null, &k).is_some());
    }
}
