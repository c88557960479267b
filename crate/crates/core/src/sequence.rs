//! DNA sequences: FASTA ingestion, rank encoding and seeded generation.
//!
//! Residues are encoded as small positive integers (`A=1, C=2, G=3, T=4`,
//! optionally `N=5`). Rank `0` is never produced; it is reserved as the
//! end-of-text padding symbol used by suffix-array construction.

use std::fmt;
use std::io::{BufRead, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Bases in rank order; index + 1 is the rank.
pub const BASES: [u8; 5] = *b"ACGTN";

/// How the ambiguity code `N` is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NPolicy {
    /// `N` is an error.
    #[default]
    Reject,
    /// `N` is kept and encoded as rank 5.
    KeepN,
}

impl NPolicy {
    fn allows(self, residue: u8) -> bool {
        match residue {
            b'A' | b'C' | b'G' | b'T' => true,
            b'N' => self == NPolicy::KeepN,
            _ => false,
        }
    }

    pub fn sigma(self) -> u8 {
        match self {
            NPolicy::Reject => 4,
            NPolicy::KeepN => 5,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SequenceError {
    #[error("line {line}: sequence data before any '>' header")]
    MissingHeader { line: usize },
    #[error("line {line}: header has an empty identifier")]
    EmptyId { line: usize },
    #[error("record '{id}', line {line}: illegal residue {:?} (0x{byte:02x})", *.byte as char)]
    IllegalResidue { id: String, line: usize, byte: u8 },
    #[error("record '{id}': residue 'N' at position {position} rejected by policy")]
    AmbiguousResidue { id: String, position: usize },
    #[error("weights must be nonnegative with a positive sum")]
    InvalidWeights,
    #[error("read error: {0}")]
    Io(String),
}

/// One FASTA record.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DnaSequence {
    pub id: String,
    pub description: String,
    pub residues: Vec<u8>,
}

impl DnaSequence {
    pub fn new(id: impl Into<String>, residues: impl Into<Vec<u8>>) -> Self {
        DnaSequence {
            id: id.into(),
            description: String::new(),
            residues: residues.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn as_str(&self) -> &str {
        // residues are validated ASCII
        std::str::from_utf8(&self.residues).unwrap_or("")
    }
}

/// Integer-encoded text over `1..=sigma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedText {
    ranks: Vec<u8>,
    sigma: u8,
}

impl RankedText {
    /// Wraps raw ranks. Every rank must lie in `1..=sigma`.
    pub fn from_ranks(ranks: Vec<u8>, sigma: u8) -> Option<Self> {
        if ranks.iter().all(|&r| r >= 1 && r <= sigma) {
            Some(RankedText { ranks, sigma })
        } else {
            None
        }
    }

    pub fn ranks(&self) -> &[u8] {
        &self.ranks
    }

    pub fn sigma(&self) -> u8 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

/// Parses FASTA text. Lines may wrap and may end in `\r\n`; residues are
/// uppercased and checked against `policy`.
pub fn parse_fasta<R: BufRead>(
    input: R,
    policy: NPolicy,
) -> Result<Vec<DnaSequence>, SequenceError> {
    let mut records: Vec<DnaSequence> = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| SequenceError::Io(e.to_string()))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if let Some(header) = line.strip_prefix('>') {
            let header = header.trim();
            let (id, description) = match header.split_once(char::is_whitespace) {
                Some((id, rest)) => (id, rest.trim()),
                None => (header, ""),
            };
            if id.is_empty() {
                return Err(SequenceError::EmptyId { line: line_no });
            }
            records.push(DnaSequence {
                id: id.to_string(),
                description: description.to_string(),
                residues: Vec::new(),
            });
            continue;
        }
        let body: Vec<u8> = line
            .bytes()
            .filter(|b| !b.is_ascii_whitespace())
            .map(|b| b.to_ascii_uppercase())
            .collect();
        if body.is_empty() {
            continue;
        }
        let Some(record) = records.last_mut() else {
            return Err(SequenceError::MissingHeader { line: line_no });
        };
        if let Some(&bad) = body.iter().find(|&&b| !policy.allows(b)) {
            return Err(SequenceError::IllegalResidue {
                id: record.id.clone(),
                line: line_no,
                byte: bad,
            });
        }
        record.residues.extend_from_slice(&body);
    }
    Ok(records)
}

/// Writes records as FASTA, wrapping sequence lines at `width` residues.
pub fn write_fasta<W: Write>(
    mut out: W,
    records: &[DnaSequence],
    width: usize,
) -> std::io::Result<()> {
    let width = width.max(1);
    for record in records {
        if record.description.is_empty() {
            writeln!(out, ">{}", record.id)?;
        } else {
            writeln!(out, ">{} {}", record.id, record.description)?;
        }
        for line in record.residues.chunks(width) {
            out.write_all(line)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn rank_of(residue: u8) -> Option<u8> {
    BASES
        .iter()
        .position(|&b| b == residue)
        .map(|p| p as u8 + 1)
}

/// Maps residues to ranks. `sigma` is 4, or 5 under [`NPolicy::KeepN`].
pub fn encode(seq: &DnaSequence, policy: NPolicy) -> Result<RankedText, SequenceError> {
    let mut ranks = Vec::with_capacity(seq.residues.len());
    for (position, &residue) in seq.residues.iter().enumerate() {
        let upper = residue.to_ascii_uppercase();
        if upper == b'N' && policy == NPolicy::Reject {
            return Err(SequenceError::AmbiguousResidue {
                id: seq.id.clone(),
                position,
            });
        }
        match rank_of(upper) {
            Some(r) => ranks.push(r),
            None => {
                return Err(SequenceError::IllegalResidue {
                    id: seq.id.clone(),
                    line: 0,
                    byte: residue,
                })
            }
        }
    }
    Ok(RankedText {
        ranks,
        sigma: policy.sigma(),
    })
}

/// Inverse of [`encode`].
pub fn decode(text: &RankedText) -> Vec<u8> {
    decode_ranks(text.ranks())
}

pub fn decode_ranks(ranks: &[u8]) -> Vec<u8> {
    ranks.iter().map(|&r| BASES[usize::from(r) - 1]).collect()
}

/// Generates `n` bases from a ChaCha8 stream seeded with `seed`, drawing
/// `A, C, G, T` with the given relative weights.
///
/// ChaCha8 output is specified bit-for-bit, so a fixture generated on one
/// platform is reproduced on any other.
pub fn gen_random(n: usize, seed: u64, weights: [f64; 4]) -> Result<DnaSequence, SequenceError> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
        return Err(SequenceError::InvalidWeights);
    }
    let dist = WeightedIndex::new(weights).map_err(|_| SequenceError::InvalidWeights)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let residues = (0..n).map(|_| BASES[dist.sample(&mut rng)]).collect();
    Ok(DnaSequence {
        id: format!("random_n{n}_s{seed}"),
        description: String::new(),
        residues,
    })
}

/// Uniform base weights.
pub const UNIFORM: [f64; 4] = [1.0, 1.0, 1.0, 1.0];

impl fmt::Display for DnaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, ">{}\n{}", self.id, self.as_str())
    }
}
