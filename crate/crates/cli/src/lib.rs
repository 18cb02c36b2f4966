//! Job keys, serialized tables and the on-disk result cache behind the
//! `knotops` binary.
//!
//! Every output embeds its [`JobKey`], so a table always carries the sign
//! convention and cutoffs it was computed with. Serialization goes through
//! `serde_json::Value`, whose maps are ordered, so the bytes of a record are a
//! function of its content alone.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use knotops::poisson_operad::SignVersion;
use knotops::spectral::Page;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "KNOTOPS_CACHE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobKind {
    Hochschild,
    Semidirect,
    Map,
    GeoSuite,
}

/// Everything a result depends on. Two jobs with equal keys produce equal
/// bytes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JobKey {
    pub kind: JobKind,
    pub n: u32,
    pub max_level: usize,
    pub max_degree: usize,
    pub sign_version: SignVersion,
    pub code_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Which cosimplicial map a `Map` job is about.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
}

impl JobKey {
    pub fn new(kind: JobKind, n: u32, max_level: usize, max_degree: usize) -> Self {
        JobKey {
            kind,
            n,
            max_level,
            max_degree,
            sign_version: SignVersion::KoszulPrefixV1,
            code_version: CODE_VERSION.to_string(),
            samples: None,
            seed: None,
            map: None,
        }
    }

    /// Hex SHA-256 of the canonical serialization; names the cache file.
    pub fn digest(&self) -> String {
        sha256_hex(canonical_json(self).as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub p: usize,
    pub q: usize,
    pub dim: usize,
    pub basis: Vec<String>,
    pub partial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// An E² table. Timing is reported on stderr and never stored here, so the
/// record stays byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRecord {
    pub key: JobKey,
    pub entries: Vec<TableEntry>,
    pub partial: bool,
}

impl TableRecord {
    pub fn from_page(key: JobKey, page: &Page) -> Self {
        let entries: Vec<TableEntry> = page
            .entries()
            .map(|e| TableEntry {
                p: e.p(),
                q: e.q(),
                dim: e.dim(),
                basis: page.basis_labels(e.p(), e.q()),
                partial: e.partial(),
                note: e.partial().then(|| {
                    format!(
                        "level {} is the cutoff: cycles are not tested, dim is an upper bound",
                        e.p()
                    )
                }),
            })
            .collect();
        let partial = entries.iter().any(|e| e.partial);
        TableRecord { key, entries, partial }
    }

    pub fn entry(&self, p: usize, q: usize) -> Option<&TableEntry> {
        self.entries.iter().find(|e| e.p == p && e.q == q)
    }

    /// One row per bidegree; the key is repeated on every row.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "kind",
            "n",
            "max_level",
            "max_degree",
            "sign_version",
            "p",
            "q",
            "dim",
            "partial",
            "basis",
        ])?;
        let kind = serde_json::to_value(self.key.kind).expect("enum serializes");
        for e in &self.entries {
            w.write_record([
                kind.as_str().unwrap_or_default().to_string(),
                self.key.n.to_string(),
                self.key.max_level.to_string(),
                self.key.max_degree.to_string(),
                self.key.sign_version.as_str().to_string(),
                e.p.to_string(),
                e.q.to_string(),
                e.dim.to_string(),
                e.partial.to_string(),
                e.basis.join("; "),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    key: JobKey,
    content_sha256: String,
    payload: serde_json::Value,
}

/// Outcome of a cache lookup.
#[derive(Debug)]
pub enum Lookup {
    Hit(serde_json::Value),
    Miss,
    /// The file exists but fails its integrity check; recompute.
    Corrupt(String),
}

/// A directory of `<key digest>.json` files, written atomically.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Cache { dir })
    }

    /// The directory from the flag, else from the environment.
    pub fn from_flag_or_env(flag: Option<&Path>) -> io::Result<Option<Self>> {
        match flag.map(Path::to_path_buf).or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from)) {
            Some(dir) => Cache::new(dir).map(Some),
            None => Ok(None),
        }
    }

    pub fn path(&self, key: &JobKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.digest()))
    }

    pub fn get(&self, key: &JobKey) -> Lookup {
        let bytes = match fs::read(self.path(key)) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Lookup::Miss,
            Err(e) => return Lookup::Corrupt(e.to_string()),
        };
        let file: CacheFile = match serde_json::from_slice(&bytes) {
            Ok(f) => f,
            Err(e) => return Lookup::Corrupt(format!("unreadable cache file: {e}")),
        };
        if &file.key != key {
            return Lookup::Corrupt("cache file belongs to a different job".into());
        }
        if sha256_hex(canonical_json(&file.payload).as_bytes()) != file.content_sha256 {
            return Lookup::Corrupt("content hash mismatch".into());
        }
        Lookup::Hit(file.payload)
    }

    /// Writes to a temporary file in the same directory, then renames.
    pub fn put(&self, key: &JobKey, payload: &serde_json::Value) -> io::Result<()> {
        let file = CacheFile {
            key: key.clone(),
            content_sha256: sha256_hex(canonical_json(payload).as_bytes()),
            payload: payload.clone(),
        };
        let target = self.path(key);
        let tmp = self.dir.join(format!(".{}.{}.tmp", key.digest(), std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(canonical_json(&file).as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_depends_on_every_field() {
        let a = JobKey::new(JobKind::Hochschild, 5, 6, 12);
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.max_degree = 16;
        assert_ne!(a.digest(), b.digest());
        let mut c = a.clone();
        c.seed = Some(1);
        assert_ne!(a.digest(), c.digest());
        assert!(a < JobKey::new(JobKind::Semidirect, 5, 6, 12));
    }

    #[test]
    fn canonical_json_sorts_keys() {
        let key = JobKey::new(JobKind::GeoSuite, 4, 0, 0);
        let s = canonical_json(&key);
        let fields: Vec<&str> = s
            .lines()
            .filter_map(|l| l.trim().strip_prefix('"'))
            .map(|l| l.split('"').next().unwrap())
            .collect();
        let mut sorted = fields.clone();
        sorted.sort();
        assert_eq!(fields, sorted);
        assert!(s.contains("\"kind\": \"geo-suite\""));
        assert!(s.contains("koszul-prefix-v1"));
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let key = JobKey::new(JobKind::Map, 5, 6, 12);
        assert!(matches!(cache.get(&key), Lookup::Miss));
        let payload = serde_json::json!({"b": 1, "a": [1, 2]});
        cache.put(&key, &payload).unwrap();
        match cache.get(&key) {
            Lookup::Hit(v) => assert_eq!(v, payload),
            other => panic!("{other:?}"),
        }
        let text = fs::read_to_string(cache.path(&key)).unwrap();
        fs::write(cache.path(&key), text.replace("\"b\": 1", "\"b\": 2")).unwrap();
        assert!(matches!(cache.get(&key), Lookup::Corrupt(_)));
        fs::write(cache.path(&key), "{").unwrap();
        assert!(matches!(cache.get(&key), Lookup::Corrupt(_)));
        // floats survive the round trip bit for bit
        let floats = serde_json::json!({"r": 0.1 + 0.2, "s": 1.2345678901234567e-13});
        cache.put(&key, &floats).unwrap();
        assert!(matches!(cache.get(&key), Lookup::Hit(v) if v == floats));
        // no temporary files are left behind
        cache.put(&key, &payload).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
