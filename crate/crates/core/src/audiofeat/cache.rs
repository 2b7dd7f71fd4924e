//! `FEA1` feature cache.
//!
//! ```text
//! "FEA1" | manifest sha-256 (32 bytes) | u64 count | u64 dim | f32 x count*dim
//! ```
//! Little-endian throughout.

use std::path::Path;

use crate::error::{Error, Result};
use crate::ndcore::blob::Reader;

pub const MAGIC: &[u8; 4] = b"FEA1";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCache {
    pub manifest_hash: [u8; 32],
    pub dim: usize,
    pub rows: Vec<Vec<f32>>,
}

impl FeatureCache {
    pub fn from_f64(manifest_hash: [u8; 32], dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape(format!(
                "feature rows must all have length {dim}"
            )));
        }
        Ok(Self {
            manifest_hash,
            dim,
            rows: rows
                .iter()
                .map(|r| r.iter().map(|&v| v as f32).collect())
                .collect(),
        })
    }

    pub fn rows_f64(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&v| f64::from(v)).collect())
            .collect()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(52 + self.rows.len() * self.dim * 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.manifest_hash);
        out.extend_from_slice(&(self.rows.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.dim as u64).to_le_bytes());
        for r in &self.rows {
            for v in r {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(buf: &[u8]) -> Result<Self> {
        let mut r = Reader::new(buf);
        if r.take(4)? != MAGIC {
            return Err(Error::Decode("bad magic, expected FEA1".into()));
        }
        let manifest_hash: [u8; 32] = r.take(32)?.try_into().unwrap();
        let count = r.u64()? as usize;
        let dim = r.u64()? as usize;
        if r.remaining() as u128 != count as u128 * dim as u128 * 4 {
            return Err(Error::Decode(format!(
                "{} payload bytes for {count} x {dim} floats",
                r.remaining()
            )));
        }
        let mut rows = Vec::with_capacity(count);
        for _ in 0..count {
            rows.push((0..dim).map(|_| r.f32()).collect::<Result<Vec<_>>>()?);
        }
        Ok(Self {
            manifest_hash,
            dim,
            rows,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }

    /// Loads the cache only if it was produced for `manifest_hash`.
    pub fn read_matching(path: &Path, manifest_hash: &[u8; 32]) -> Option<Self> {
        Self::read(path)
            .ok()
            .filter(|c| &c.manifest_hash == manifest_hash)
    }
}
