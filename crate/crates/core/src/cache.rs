//! On-disk eigenvector cache, one file per `(L, θ, n_up, level)`.
//!
//! Layout, all little-endian:
//!
//! | field   | type      |
//! |---------|-----------|
//! | magic   | `b"RLAD"` |
//! | version | u32       |
//! | L       | u32       |
//! | theta   | f64 (radians) |
//! | n_up    | u32       |
//! | level   | u32       |
//! | dim     | u64       |
//! | data    | `dim` × f64 |
//! | crc32   | u32 over every preceding byte |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::hamiltonian::LadderParams;

pub const MAGIC: &[u8; 4] = b"RLAD";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 4 + 4 + 8;

/// Header fields of a cache file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheKey {
    pub l: u32,
    pub theta: f64,
    pub n_up: u32,
    pub level: u32,
}

pub fn encode(key: &CacheKey, data: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * data.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&key.l.to_le_bytes());
    out.extend_from_slice(&key.theta.to_le_bytes());
    out.extend_from_slice(&key.n_up.to_le_bytes());
    out.extend_from_slice(&key.level.to_le_bytes());
    out.extend_from_slice(&(data.len() as u64).to_le_bytes());
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<(CacheKey, Vec<f64>), String> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(format!("file too short ({} bytes)", bytes.len()));
    }
    let (body, crc) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(crc.try_into().unwrap());
    if crc32fast::hash(body) != stored {
        return Err("CRC32 mismatch".into());
    }
    if &body[..4] != MAGIC {
        return Err("bad magic".into());
    }
    let u32_at = |o: usize| u32::from_le_bytes(body[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(body[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let key = CacheKey {
        l: u32_at(8),
        theta: f64::from_bits(u64_at(12)),
        n_up: u32_at(20),
        level: u32_at(24),
    };
    let dim = u64_at(28) as usize;
    if body.len() != HEADER_LEN + 8 * dim {
        return Err(format!("expected {dim} values, found {} bytes of data", body.len() - HEADER_LEN));
    }
    let data = body[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((key, data))
}

/// A directory of cached eigenvectors.
#[derive(Debug, Clone)]
pub struct VectorCache {
    dir: PathBuf,
}

impl VectorCache {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!(
            "L{}_t{:016x}_n{}_lv{}.rlad",
            key.l,
            key.theta.to_bits(),
            key.n_up,
            key.level
        ))
    }

    /// Reads one file, checking integrity and that its header matches `key`.
    pub fn read(&self, key: &CacheKey) -> Result<Option<Vec<f64>>> {
        let path = self.path_for(key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let corrupt = |reason: String| Error::CorruptCache {
            path: path.display().to_string(),
            reason,
        };
        let (found, data) = decode(&bytes).map_err(corrupt)?;
        if found.l != key.l
            || found.theta.to_bits() != key.theta.to_bits()
            || found.n_up != key.n_up
            || found.level != key.level
        {
            return Err(corrupt(format!("header {found:?} does not match {key:?}")));
        }
        Ok(Some(data))
    }

    /// Writes one file through a temporary name and an atomic rename.
    pub fn write(&self, key: &CacheKey, data: &[f64]) -> Result<()> {
        let path = self.path_for(key);
        let tmp = path.with_extension("rlad.tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&encode(key, data))?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    fn key(params: &LadderParams, n_up: usize, level: usize) -> CacheKey {
        CacheKey {
            l: params.l() as u32,
            theta: params.theta(),
            n_up: n_up as u32,
            level: level as u32,
        }
    }

    /// Consecutive cached levels `0, 1, …` of one sector, if at least `count`
    /// of them are present and valid. Corrupt files count as misses.
    pub fn load_levels(
        &self,
        params: &LadderParams,
        n_up: usize,
        dim: usize,
        count: usize,
    ) -> Result<Option<Vec<Vec<f64>>>> {
        let mut out = Vec::new();
        loop {
            let key = Self::key(params, n_up, out.len());
            match self.read(&key) {
                Ok(Some(v)) if v.len() == dim => out.push(v),
                Ok(Some(v)) => {
                    log::warn!("cache entry {key:?} has dimension {} instead of {dim}", v.len());
                    break;
                }
                Ok(None) => break,
                Err(Error::CorruptCache { path, reason }) => {
                    log::warn!("ignoring corrupt cache file {path}: {reason}");
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok((out.len() >= count).then_some(out))
    }

    pub fn store_levels(&self, params: &LadderParams, n_up: usize, vectors: &[&[f64]]) -> Result<()> {
        for (level, v) in vectors.iter().enumerate() {
            self.write(&Self::key(params, n_up, level), v)?;
        }
        // a stale longer run must not extend this one
        let stale = self.path_for(&Self::key(params, n_up, vectors.len()));
        if stale.exists() {
            fs::remove_file(stale)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let key = CacheKey {
            l: 6,
            theta: 0.25,
            n_up: 6,
            level: 1,
        };
        let bytes = encode(&key, &[1.0, -2.5]);
        assert_eq!(&bytes[..4], b"RLAD");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 6);
        assert_eq!(f64::from_le_bytes(bytes[12..20].try_into().unwrap()), 0.25);
        assert_eq!(u64::from_le_bytes(bytes[28..36].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(bytes[44..52].try_into().unwrap()), -2.5);
        assert_eq!(bytes.len(), 36 + 16 + 4);
        let (k, d) = decode(&bytes).unwrap();
        assert_eq!(k, key);
        assert_eq!(d, vec![1.0, -2.5]);
    }

    #[test]
    fn detects_corruption() {
        let key = CacheKey {
            l: 4,
            theta: 0.0,
            n_up: 4,
            level: 0,
        };
        let mut bytes = encode(&key, &[0.5; 10]);
        bytes[40] ^= 0x10;
        assert!(decode(&bytes).unwrap_err().contains("CRC32"));
        assert!(decode(&bytes[..10]).is_err());
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = VectorCache::new(dir.path()).unwrap();
        let params = LadderParams::new(4, 0.3).unwrap();
        let a = vec![0.6, 0.8];
        let b = vec![0.8, -0.6];
        cache.store_levels(&params, 4, &[&a, &b]).unwrap();
        assert_eq!(cache.load_levels(&params, 4, 2, 2).unwrap(), Some(vec![a.clone(), b.clone()]));
        assert_eq!(cache.load_levels(&params, 4, 2, 3).unwrap(), None);
        assert_eq!(cache.load_levels(&params, 5, 2, 1).unwrap(), None);

        // corrupt level 1: only level 0 remains usable
        let path = cache.path_for(&VectorCache::key(&params, 4, 1));
        let mut bytes = fs::read(&path).unwrap();
        let n = bytes.len();
        bytes[n - 1] ^= 0xff;
        fs::write(&path, bytes).unwrap();
        assert_eq!(cache.load_levels(&params, 4, 2, 1).unwrap(), Some(vec![a]));
        assert_eq!(cache.load_levels(&params, 4, 2, 2).unwrap(), None);
    }
}
