//! `.saix` index files.
//!
//! Layout, all integers little-endian `u64` unless noted:
//!
//! | field    | size        |
//! |----------|-------------|
//! | magic    | 8 bytes, `b"SAIX1\0\0\0"` |
//! | version  | 8 (= 1)     |
//! | flags    | 8 (bit 0: alphabet includes N) |
//! | n        | 8           |
//! | sigma    | 8           |
//! | text     | n bytes, one rank per residue |
//! | sa       | 8 * n       |
//! | lcp      | 8 * n       |
//! | crc32    | 8, CRC-32 of every preceding byte, high bits zero |
//!
//! RMQ structures are not stored; they are rebuilt from the LCP array.

use std::io::{Read, Write};

use thiserror::Error;

use crate::overlap::LcpQueryEngine;
use crate::rmq::RmqEngine;
use crate::sequence::RankedText;
use crate::suffix_index::{LcpArray, SuffixArray};

pub const MAGIC: [u8; 8] = *b"SAIX1\0\0\0";
pub const VERSION: u64 = 1;
pub const FLAG_N_ALPHABET: u64 = 1;
pub const EXTENSION: &str = "saix";

const HEADER_LEN: usize = 40;
const TRAILER_LEN: usize = 8;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("unsupported index version {0}")]
    UnsupportedVersion(u64),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("index truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("corrupt index: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Serializes `engine` into a byte vector.
pub fn encode_index(engine: &LcpQueryEngine) -> Vec<u8> {
    let text = engine.text();
    let n = text.len();
    let mut buf = Vec::with_capacity(HEADER_LEN + n * 17 + TRAILER_LEN);
    buf.extend_from_slice(&MAGIC);
    let flags = if text.sigma() >= 5 {
        FLAG_N_ALPHABET
    } else {
        0
    };
    for v in [VERSION, flags, n as u64, u64::from(text.sigma())] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(text.ranks());
    for &p in engine.sa().sa() {
        buf.extend_from_slice(&(p as u64).to_le_bytes());
    }
    for &l in engine.lcp().as_slice() {
        buf.extend_from_slice(&(l as u64).to_le_bytes());
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&u64::from(crc).to_le_bytes());
    buf
}

/// Writes `engine` to `destination`; returns the number of bytes written.
pub fn save_index<W: Write>(
    engine: &LcpQueryEngine,
    mut destination: W,
) -> Result<u64, IndexError> {
    let bytes = encode_index(engine);
    destination.write_all(&bytes)?;
    destination.flush()?;
    Ok(bytes.len() as u64)
}

pub fn load_index<R: Read>(source: R) -> Result<LcpQueryEngine, IndexError> {
    load_index_with(source, RmqEngine::Sparse)
}

pub fn load_index_with<R: Read>(
    mut source: R,
    engine: RmqEngine,
) -> Result<LcpQueryEngine, IndexError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    decode_index(&bytes, engine)
}

fn u64_at(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode_index(bytes: &[u8], engine: RmqEngine) -> Result<LcpQueryEngine, IndexError> {
    let actual = bytes.len() as u64;
    if bytes.len() < MAGIC.len() {
        return Err(IndexError::Truncated {
            expected: (HEADER_LEN + TRAILER_LEN) as u64,
            actual,
        });
    }
    if bytes[..8] != MAGIC {
        return Err(IndexError::BadMagic);
    }
    if bytes.len() < HEADER_LEN + TRAILER_LEN {
        return Err(IndexError::Truncated {
            expected: (HEADER_LEN + TRAILER_LEN) as u64,
            actual,
        });
    }
    let version = u64_at(bytes, 8);
    if version != VERSION {
        return Err(IndexError::UnsupportedVersion(version));
    }
    let flags = u64_at(bytes, 16);
    let n = u64_at(bytes, 24);
    let sigma = u64_at(bytes, 32);

    let expected = n
        .checked_mul(17)
        .and_then(|x| x.checked_add((HEADER_LEN + TRAILER_LEN) as u64))
        .ok_or_else(|| IndexError::Corrupt(format!("length field {n} overflows")))?;
    if actual < expected {
        return Err(IndexError::Truncated { expected, actual });
    }
    if actual > expected {
        return Err(IndexError::Corrupt(format!(
            "{} trailing bytes",
            actual - expected
        )));
    }

    let body_end = bytes.len() - TRAILER_LEN;
    let stored = u64_at(bytes, body_end);
    let computed = u64::from(crc32fast::hash(&bytes[..body_end]));
    if stored != computed {
        return Err(IndexError::ChecksumMismatch { stored, computed });
    }

    if flags & !FLAG_N_ALPHABET != 0 {
        return Err(IndexError::Corrupt(format!("unknown flag bits {flags:#x}")));
    }
    if !(1..=u64::from(u8::MAX)).contains(&sigma) {
        return Err(IndexError::Corrupt(format!("sigma {sigma} out of range")));
    }
    let n = n as usize;
    let text_at = HEADER_LEN;
    let sa_at = text_at + n;
    let lcp_at = sa_at + 8 * n;
    let text = RankedText::from_ranks(bytes[text_at..sa_at].to_vec(), sigma as u8)
        .ok_or_else(|| IndexError::Corrupt("text rank outside 1..=sigma".into()))?;
    let sa: Vec<usize> = (0..n)
        .map(|k| u64_at(bytes, sa_at + 8 * k) as usize)
        .collect();
    let sa = SuffixArray::from_sa(sa)
        .ok_or_else(|| IndexError::Corrupt("sa is not a permutation".into()))?;
    let lcp = LcpArray::from_vec(
        (0..n)
            .map(|k| u64_at(bytes, lcp_at + 8 * k) as usize)
            .collect(),
    );
    LcpQueryEngine::from_parts(text, sa, lcp, engine)
        .map_err(|e| IndexError::Corrupt(e.to_string()))
}
