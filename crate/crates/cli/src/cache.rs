//! On-disk result cache: one JSON file per entry under `dir/namespace/`,
//! named by the SHA-256 of the key and stamped with the code version.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Bumped whenever cached payloads change meaning.
pub const CACHE_FORMAT: u32 = 1;

pub fn version_stamp() -> String {
    format!("{}+cache{}", env!("CARGO_PKG_VERSION"), CACHE_FORMAT)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub namespace: String,
    pub key: String,
    pub version: String,
    pub created_at: u64,
    /// Base64 of the payload bytes.
    pub payload: String,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
    version: String,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self::with_version(dir, version_stamp())
    }

    pub fn with_version(dir: impl Into<PathBuf>, version: impl Into<String>) -> Self {
        Cache { dir: dir.into(), version: version.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, namespace: &str, key: &str) -> PathBuf {
        let digest = Sha256::digest(format!("{namespace}\n{key}").as_bytes());
        let name: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.dir.join(namespace).join(format!("{name}.json"))
    }

    /// Stored payload, or `None` when absent, unreadable or from another version.
    pub fn load(&self, namespace: &str, key: &str) -> Option<Vec<u8>> {
        let text = fs::read_to_string(self.path(namespace, key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        if entry.version != self.version || entry.key != key || entry.namespace != namespace {
            return None;
        }
        STANDARD.decode(entry.payload).ok()
    }

    pub fn store(&self, namespace: &str, key: &str, payload: &[u8]) -> Result<(), CliError> {
        let path = self.path(namespace, key);
        let parent = path.parent().expect("entry path has a parent");
        fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let entry = CacheEntry {
            namespace: namespace.to_string(),
            key: key.to_string(),
            version: self.version.clone(),
            created_at,
            payload: STANDARD.encode(payload),
        };
        let text = serde_json::to_string(&entry).map_err(|e| CliError::Io(e.to_string()))?;
        let tmp = tempfile::NamedTempFile::new_in(parent)
            .map_err(|e| CliError::Io(format!("cannot write in {}: {e}", parent.display())))?;
        tmp.as_file().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        tmp.persist(&path).map_err(|e| CliError::Io(format!("cannot persist {}: {e}", path.display())))?;
        Ok(())
    }
}
