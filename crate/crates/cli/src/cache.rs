//! Memoization of gate sets and group closures under `GU3_CACHE_DIR`.

use std::fs;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::Serialize;

pub const ENV: &str = "GU3_CACHE_DIR";

fn dir() -> Option<PathBuf> {
    std::env::var_os(ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Returns the cached value under `name`, or computes and stores it. A
/// missing or unreadable cache entry is recomputed; write failures are
/// reported and otherwise ignored.
pub fn memo<T, E, F>(name: &str, compute: F) -> Result<T, E>
where
    T: Serialize + DeserializeOwned,
    F: FnOnce() -> Result<T, E>,
{
    let Some(dir) = dir() else { return compute() };
    let path = dir.join(format!("{name}.json"));
    if let Ok(bytes) = fs::read(&path) {
        if let Ok(v) = serde_json::from_slice(&bytes) {
            return Ok(v);
        }
        eprintln!("warning: ignoring unreadable cache entry {}", path.display());
    }
    let v = compute()?;
    let write = fs::create_dir_all(&dir).and_then(|_| {
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec(&v).expect("serializable"))?;
        fs::rename(&tmp, &path)
    });
    if let Err(e) = write {
        eprintln!("warning: could not write cache entry {}: {e}", path.display());
    }
    Ok(v)
}
