//! Content-addressed result cache: one JSON file per entry under a two-level hash-prefix tree.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "EULER_WORKBENCH_CACHE";

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    /// `$EULER_WORKBENCH_CACHE`, else `$XDG_CACHE_HOME/euler-workbench`, else `~/.cache/euler-workbench`.
    pub fn default_root() -> Option<PathBuf> {
        if let Some(p) = std::env::var_os(CACHE_ENV) {
            return Some(PathBuf::from(p));
        }
        if let Some(p) = std::env::var_os("XDG_CACHE_HOME") {
            return Some(PathBuf::from(p).join("euler-workbench"));
        }
        std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("euler-workbench"))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// SHA-256 of the operation name and canonical parameters (serde_json keeps object keys sorted).
    pub fn key(operation: &str, params: &Value) -> String {
        let mut h = Sha256::new();
        h.update(operation.as_bytes());
        h.update([0]);
        h.update(params.to_string().as_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.root.join(&key[..2]).join(&key[2..4]).join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<Value> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let entry: Value = serde_json::from_str(&text).ok()?;
        (entry["key"] == key).then(|| entry["value"].clone())
    }

    /// Writes a temporary file next to the target and renames it into place.
    pub fn put(&self, key: &str, operation: &str, value: &Value) -> std::io::Result<()> {
        let path = self.path(key);
        let dir = path.parent().expect("entry paths have a parent");
        fs::create_dir_all(dir)?;
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let entry = json!({
            "key": key,
            "operation": operation,
            "version": env!("CARGO_PKG_VERSION"),
            "created": created,
            "value": value,
        });
        let tmp = dir.join(format!(
            ".{key}.{}.{}.tmp",
            std::process::id(),
            TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(entry.to_string().as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, &path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path());
        let key = Cache::key("op", &json!({"b": 1, "a": [2, 3]}));
        assert!(c.get(&key).is_none());
        c.put(&key, "op", &json!({"passed": true})).unwrap();
        assert_eq!(c.get(&key), Some(json!({"passed": true})));
        assert!(dir.path().join(&key[..2]).join(&key[2..4]).join(format!("{key}.json")).exists());
        assert_ne!(key, Cache::key("op", &json!({"b": 2, "a": [2, 3]})));
    }
}
