//! `NDC1` parameter snapshot format.
//!
//! ```text
//! "NDC1"
//! u32        segment count
//! per segment:
//!   u16      name length, then UTF-8 name
//!   u64      offset
//!   u8       rank, then rank x u64 dims
//! u64        value count
//! f64 x n    values
//! ```
//! All integers and floats are little-endian.

use super::params::{ParamVector, Segment};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NDC1";

pub fn encode(params: &ParamVector) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + params.values.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(params.layout.len() as u32).to_le_bytes());
    for seg in &params.layout {
        let name = seg.name.as_bytes();
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name);
        out.extend_from_slice(&(seg.offset as u64).to_le_bytes());
        out.push(seg.shape.len() as u8);
        for &d in &seg.shape {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
    }
    out.extend_from_slice(&(params.values.len() as u64).to_le_bytes());
    for v in &params.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Decode(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

pub fn decode(buf: &[u8]) -> Result<ParamVector> {
    let mut r = Reader::new(buf);
    if r.take(4)? != MAGIC {
        return Err(Error::Decode("bad magic, expected NDC1".into()));
    }
    let nseg = r.u32()? as usize;
    let mut layout = Vec::with_capacity(nseg.min(1024));
    for _ in 0..nseg {
        let len = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|e| Error::Decode(format!("segment name: {e}")))?
            .to_string();
        let offset = r.u64()? as usize;
        let rank = r.u8()? as usize;
        let shape = (0..rank)
            .map(|_| r.u64().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        layout.push(Segment {
            name,
            offset,
            shape,
        });
    }
    let n = r.u64()? as usize;
    if r.remaining() != n.saturating_mul(8) {
        return Err(Error::Decode(format!(
            "{} payload bytes for {n} values",
            r.remaining()
        )));
    }
    let values = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let p = ParamVector { values, layout };
    p.check_layout().map_err(|e| Error::Decode(e.to_string()))?;
    Ok(p)
}
