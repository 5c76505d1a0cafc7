//! Content-addressed on-disk store for operator matrices and reports.
//!
//! Each file is an envelope `{version, key, checksum, payload}` where the
//! checksum is the SHA-256 of the payload text. A version or checksum mismatch
//! is treated as a miss; the caller recomputes and overwrites.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use nonarch::transforms::{OperatorMatrix, OperatorMatrixJson};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CACHE_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "NONARCH_CACHE_DIR";

#[derive(Debug, Serialize, Deserialize)]
struct Envelope {
    version: u32,
    key: String,
    checksum: String,
    payload: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lookup<T> {
    Hit(T),
    Miss,
    /// Present but unreadable; the reason is kept for the report.
    Rejected(String),
}

pub struct Cache {
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

pub fn checksum(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

impl Cache {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Cache { dir, hits: AtomicUsize::new(0), misses: AtomicUsize::new(0) })
    }

    /// Directory from the environment, if set.
    pub fn from_env() -> std::io::Result<Option<Self>> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::open(PathBuf::from(d)).map(Some),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    fn path(&self, key: &str) -> PathBuf {
        let safe: String = key.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect();
        self.dir.join(format!("{safe}.json"))
    }

    pub fn put_text(&self, key: &str, payload: String) -> std::io::Result<()> {
        let env = Envelope { version: CACHE_VERSION, key: key.to_string(), checksum: checksum(&payload), payload };
        let tmp = self.path(&format!("{key}.tmp"));
        std::fs::write(&tmp, serde_json::to_vec(&env)?)?;
        std::fs::rename(tmp, self.path(key))
    }

    pub fn get_text(&self, key: &str) -> Lookup<String> {
        let out = match std::fs::read(self.path(key)) {
            Err(_) => Lookup::Miss,
            Ok(bytes) => match serde_json::from_slice::<Envelope>(&bytes) {
                Err(e) => Lookup::Rejected(format!("unreadable envelope: {e}")),
                Ok(env) if env.version != CACHE_VERSION => {
                    Lookup::Rejected(format!("cache format {} (expected {CACHE_VERSION})", env.version))
                }
                Ok(env) if env.key != key => Lookup::Rejected("key mismatch".into()),
                Ok(env) if checksum(&env.payload) != env.checksum => Lookup::Rejected("checksum mismatch".into()),
                Ok(env) => Lookup::Hit(env.payload),
            },
        };
        let counter = if matches!(out, Lookup::Hit(_)) { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        out
    }

    pub fn put_operator(&self, key: &str, op: &OperatorMatrix) -> std::io::Result<()> {
        self.put_text(key, serde_json::to_string(&op.to_json())?)
    }

    pub fn get_operator(&self, key: &str) -> Lookup<OperatorMatrix> {
        match self.get_text(key) {
            Lookup::Hit(text) => {
                let parsed = serde_json::from_str::<OperatorMatrixJson>(&text)
                    .map_err(|e| e.to_string())
                    .and_then(|j| OperatorMatrix::from_json(&j).map_err(|e| e.to_string()));
                match parsed {
                    Ok(op) => Lookup::Hit(op),
                    Err(e) => Lookup::Rejected(e),
                }
            }
            Lookup::Miss => Lookup::Miss,
            Lookup::Rejected(e) => Lookup::Rejected(e),
        }
    }
}
