//! The `EMB1` container.
//!
//! ```text
//! offset  size          field
//! 0       4             magic "EMB1"
//! 4       4             format version, u32 = 1
//! 8       4             N (rows), u32
//! 12      4             d (columns), u32
//! 16      4             metadata_len, u32
//! 20      metadata_len  UTF-8 JSON {"model", "angle", "rotation_augmented"}
//! ...     4 * N * d     f32 payload, row-major
//! ```
//!
//! All integers and floats are little-endian.

use std::fs;
use std::path::Path;

use super::{EmbeddingMeta, EmbeddingSet};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"EMB1";
pub const VERSION: u32 = 1;
/// Bytes before the metadata block.
pub const HEADER_LEN: usize = 20;

pub fn write_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    set.validate()?;
    let n = u32::try_from(set.len())
        .map_err(|_| Error::Validation(format!("{} rows exceed the u32 header field", set.len())))?;
    let d = u32::try_from(set.dim())
        .map_err(|_| Error::Validation(format!("dimension {} exceeds the u32 header field", set.dim())))?;
    let meta = serde_json::to_vec(set.meta())?;
    let meta_len = u32::try_from(meta.len()).map_err(|_| Error::Validation("metadata block too large".into()))?;

    let mut buf = Vec::with_capacity(HEADER_LEN + meta.len() + 4 * set.as_slice().len());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&d.to_le_bytes());
    buf.extend_from_slice(&meta_len.to_le_bytes());
    buf.extend_from_slice(&meta);
    for v in set.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        Error::Corrupt(m) => Error::Corrupt(format!("{}: {m}", path.display())),
        Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

pub(crate) fn decode(bytes: &[u8]) -> Result<EmbeddingSet> {
    if bytes.len() >= 4 && bytes[..4] != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected \"EMB1\"",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Corrupt(format!(
            "truncated header: {} of {HEADER_LEN} bytes",
            bytes.len()
        )));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u32_at(bytes, 8) as usize;
    let d = u32_at(bytes, 12) as usize;
    let meta_len = u32_at(bytes, 16) as usize;

    let meta_end = HEADER_LEN
        .checked_add(meta_len)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| Error::Corrupt(format!("metadata block of {meta_len} bytes is truncated")))?;
    let meta_str = std::str::from_utf8(&bytes[HEADER_LEN..meta_end])
        .map_err(|e| Error::Format(format!("metadata is not UTF-8: {e}")))?;
    let meta: EmbeddingMeta =
        serde_json::from_str(meta_str).map_err(|e| Error::Format(format!("metadata is not valid JSON: {e}")))?;

    let expected = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| Error::Corrupt(format!("declared shape {n} x {d} overflows")))?;
    let payload = &bytes[meta_end..];
    if payload.len() != expected {
        return Err(Error::Corrupt(format!(
            "header declares {n} x {d} values ({expected} bytes) but payload has {} bytes",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    EmbeddingSet::new(data, n, d, meta)
}
