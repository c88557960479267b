//! LCP queries between arbitrary suffixes and the longest overlap region
//! (longest common substring) of two sequences.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rmq::{RangeMin, RmqEngine, RmqStructure};
use crate::sequence::{decode_ranks, encode, DnaSequence, NPolicy, RankedText};
use crate::suffix_index::{build_lcp, build_sa_dc3, LcpArray, SuffixArray};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("position {position} out of range for text of length {len}")]
    OutOfRange { position: usize, len: usize },
    #[error("suffix array, lcp array and text disagree in length")]
    Inconsistent,
}

/// Text plus suffix array, LCP array and an RMQ over the LCP array.
#[derive(Debug, Clone)]
pub struct LcpQueryEngine {
    text: RankedText,
    sa: SuffixArray,
    lcp: LcpArray,
    rmq: Option<RmqStructure>,
}

impl LcpQueryEngine {
    /// Builds SA (DC3), LCP and a sparse-table RMQ.
    pub fn build(text: RankedText) -> Self {
        Self::build_with(text, RmqEngine::Sparse)
    }

    pub fn build_with(text: RankedText, engine: RmqEngine) -> Self {
        let sa = build_sa_dc3(&text);
        let lcp = build_lcp(&text, &sa);
        Self::from_parts(text, sa, lcp, engine).expect("freshly built parts are consistent")
    }

    /// Assembles an engine from existing parts, rebuilding the RMQ.
    pub fn from_parts(
        text: RankedText,
        sa: SuffixArray,
        lcp: LcpArray,
        engine: RmqEngine,
    ) -> Result<Self, QueryError> {
        if sa.len() != text.len() || lcp.len() != text.len() {
            return Err(QueryError::Inconsistent);
        }
        let rmq = if lcp.is_empty() {
            None
        } else {
            Some(RmqStructure::build(lcp.as_slice(), engine).expect("non-empty"))
        };
        Ok(LcpQueryEngine { text, sa, lcp, rmq })
    }

    pub fn text(&self) -> &RankedText {
        &self.text
    }

    pub fn sa(&self) -> &SuffixArray {
        &self.sa
    }

    pub fn lcp(&self) -> &LcpArray {
        &self.lcp
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    /// Length of the longest common prefix of the suffixes at `i` and `j`.
    pub fn lcp_query(&self, i: usize, j: usize) -> Result<usize, QueryError> {
        let n = self.len();
        for position in [i, j] {
            if position >= n {
                return Err(QueryError::OutOfRange { position, len: n });
            }
        }
        if i == j {
            return Ok(n - i);
        }
        let (ri, rj) = (self.sa.rank()[i], self.sa.rank()[j]);
        let (p, q) = (ri.min(rj), ri.max(rj));
        let rmq = self.rmq.as_ref().expect("non-empty text has an RMQ");
        let at = rmq.argmin(p + 1, q).expect("ranks are in range");
        Ok(self.lcp.as_slice()[at])
    }
}

pub fn lcp_query(engine: &LcpQueryEngine, i: usize, j: usize) -> Result<usize, QueryError> {
    engine.lcp_query(i, j)
}

/// `A`, a separator, then `B`, with residue ranks shifted up by one so the
/// separator can take rank 1 and 0 stays free for padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedText {
    text: RankedText,
    len_a: usize,
    len_b: usize,
}

pub const SEPARATOR: u8 = 1;

impl GeneralizedText {
    pub fn new(a: &RankedText, b: &RankedText) -> Self {
        let sigma = a.sigma().max(b.sigma()) + 1;
        let mut ranks = Vec::with_capacity(a.len() + b.len() + 1);
        ranks.extend(a.ranks().iter().map(|r| r + 1));
        ranks.push(SEPARATOR);
        ranks.extend(b.ranks().iter().map(|r| r + 1));
        GeneralizedText {
            text: RankedText::from_ranks(ranks, sigma).expect("shifted ranks stay in range"),
            len_a: a.len(),
            len_b: b.len(),
        }
    }

    pub fn text(&self) -> &RankedText {
        &self.text
    }

    pub fn boundary(&self) -> usize {
        self.len_a
    }

    pub fn len_a(&self) -> usize {
        self.len_a
    }

    pub fn len_b(&self) -> usize {
        self.len_b
    }

    fn side(&self, p: usize) -> Side {
        match p.cmp(&self.len_a) {
            std::cmp::Ordering::Less => Side::A,
            std::cmp::Ordering::Equal => Side::Separator,
            std::cmp::Ordering::Greater => Side::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    A,
    Separator,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OverlapResult {
    pub length: usize,
    #[serde(rename = "posA")]
    pub pos_a: usize,
    #[serde(rename = "posB")]
    pub pos_b: usize,
}

/// Longest substring shared by `a` and `b`. Ties go to the smallest start in
/// `a`, then the smallest start in `b`. A zero-length result has both
/// positions at 0.
pub fn longest_overlap(
    a: &DnaSequence,
    b: &DnaSequence,
) -> Result<OverlapResult, crate::sequence::SequenceError> {
    let ea = encode(a, NPolicy::KeepN)?;
    let eb = encode(b, NPolicy::KeepN)?;
    Ok(longest_overlap_ranked(&ea, &eb))
}

pub fn longest_overlap_ranked(a: &RankedText, b: &RankedText) -> OverlapResult {
    if a.is_empty() || b.is_empty() {
        return OverlapResult::default();
    }
    let gt = GeneralizedText::new(a, b);
    let sa = build_sa_dc3(gt.text());
    let lcp = build_lcp(gt.text(), &sa);
    let (sa, lcp) = (sa.sa(), lcp.as_slice());

    let mut best = 0;
    for k in 1..sa.len() {
        let (x, y) = (gt.side(sa[k - 1]), gt.side(sa[k]));
        if matches!((x, y), (Side::A, Side::B) | (Side::B, Side::A)) {
            best = best.max(lcp[k]);
        }
    }
    if best == 0 {
        return OverlapResult::default();
    }

    // Every maximal run of suffixes sharing `best` characters is one
    // substring; keep the run with the leftmost A occurrence.
    let mut result: Option<(usize, usize)> = None;
    let mut k = 0;
    while k < sa.len() {
        let mut end = k + 1;
        while end < sa.len() && lcp[end] >= best {
            end += 1;
        }
        let mut min_a = None;
        let mut min_b = None;
        for &p in &sa[k..end] {
            match gt.side(p) {
                Side::A => min_a = Some(min_a.map_or(p, |m: usize| m.min(p))),
                Side::B => min_b = Some(min_b.map_or(p, |m: usize| m.min(p))),
                Side::Separator => {}
            }
        }
        if let (Some(pa), Some(pb)) = (min_a, min_b) {
            let cand = (pa, pb - gt.boundary() - 1);
            if result.is_none_or(|r| cand < r) {
                result = Some(cand);
            }
        }
        k = end;
    }
    let (pos_a, pos_b) = result.expect("a cross pair with the best lcp exists");
    OverlapResult {
        length: best,
        pos_a,
        pos_b,
    }
}

/// Human- and machine-readable form of an [`OverlapResult`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub length: usize,
    #[serde(rename = "posA")]
    pub pos_a: usize,
    #[serde(rename = "posB")]
    pub pos_b: usize,
    pub substring: String,
}

impl OverlapReport {
    pub fn result(&self) -> OverlapResult {
        OverlapResult {
            length: self.length,
            pos_a: self.pos_a,
            pos_b: self.pos_b,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

impl fmt::Display for OverlapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "overlap length {} at A[{}..{}] / B[{}..{}]: {}",
            self.length,
            self.pos_a,
            self.pos_a + self.length,
            self.pos_b,
            self.pos_b + self.length,
            if self.substring.is_empty() {
                "-"
            } else {
                &self.substring
            }
        )
    }
}

pub fn overlap_report(result: &OverlapResult, a: &DnaSequence, _b: &DnaSequence) -> OverlapReport {
    let substring = &a.residues[result.pos_a..result.pos_a + result.length];
    OverlapReport {
        length: result.length,
        pos_a: result.pos_a,
        pos_b: result.pos_b,
        substring: String::from_utf8_lossy(substring).into_owned(),
    }
}

/// Decoded common prefix of the suffixes at `i` and `j`.
pub fn common_prefix(engine: &LcpQueryEngine, i: usize, j: usize) -> Result<String, QueryError> {
    let len = engine.lcp_query(i, j)?;
    let bytes = decode_ranks(&engine.text().ranks()[i..i + len]);
    Ok(String::from_utf8(bytes).expect("bases are ASCII"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{gen_random, UNIFORM};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(s: &str) -> DnaSequence {
        DnaSequence::new("s", s)
    }

    fn engine(s: &str) -> LcpQueryEngine {
        LcpQueryEngine::build(encode(&seq(s), NPolicy::Reject).unwrap())
    }

    fn naive(t: &[u8], i: usize, j: usize) -> usize {
        t[i..]
            .iter()
            .zip(&t[j..])
            .take_while(|(a, b)| a == b)
            .count()
    }

    #[test]
    fn lcp_query_fixtures() {
        let e = engine("ATTGCTAC");
        assert_eq!(e.lcp_query(6, 0), Ok(1));
        assert_eq!(e.lcp_query(0, 6), Ok(1));
        assert_eq!(e.lcp_query(3, 3), Ok(5));
        assert_eq!(
            e.lcp_query(8, 0),
            Err(QueryError::OutOfRange {
                position: 8,
                len: 8
            })
        );
        assert_eq!(common_prefix(&e, 6, 0).unwrap(), "A");
        assert!(engine("").lcp_query(0, 0).is_err());
    }

    #[test]
    fn lcp_query_exhaustive_small() {
        for seed in 0..4 {
            let s = gen_random(200, seed, [3.0, 1.0, 1.0, 1.0]).unwrap();
            let t = encode(&s, NPolicy::Reject).unwrap();
            let sparse = LcpQueryEngine::build(t.clone());
            let euler = LcpQueryEngine::build_with(t.clone(), RmqEngine::EulerTour);
            for i in 0..200 {
                for j in 0..200 {
                    let expect = naive(t.ranks(), i, j);
                    assert_eq!(sparse.lcp_query(i, j), Ok(expect));
                    assert_eq!(euler.lcp_query(j, i), Ok(expect));
                    assert!(expect <= (200 - i).min(200 - j));
                }
            }
        }
    }

    #[test]
    fn overlap_fixtures() {
        let r = longest_overlap(&seq("ATTGCTAC"), &seq("GCTA")).unwrap();
        assert_eq!(
            r,
            OverlapResult {
                length: 4,
                pos_a: 3,
                pos_b: 0
            }
        );
        assert_eq!(
            longest_overlap(&seq("AAAA"), &seq("TTTT")).unwrap(),
            OverlapResult::default()
        );
        assert_eq!(
            longest_overlap(&seq(""), &seq("ACGT")).unwrap(),
            OverlapResult::default()
        );
        assert_eq!(
            longest_overlap(&seq("ACGT"), &seq("")).unwrap(),
            OverlapResult::default()
        );
    }

    #[test]
    fn overlap_tie_break_leftmost() {
        // "AC" and "GT" both length 2; A occurrence of AC is leftmost
        let r = longest_overlap(&seq("ACxGT".replace('x', "T").as_str()), &seq("GTTAC")).unwrap();
        assert_eq!(r.length, 2);
        assert_eq!((r.pos_a, r.pos_b), (0, 3));
        let r = longest_overlap(&seq("CA"), &seq("AAC")).unwrap();
        // "A" at posA 1 vs "C" at posA 0: both length 1, C wins; first C in B is 2
        assert_eq!(
            r,
            OverlapResult {
                length: 1,
                pos_a: 0,
                pos_b: 2
            }
        );
    }

    fn brute_lcs(a: &[u8], b: &[u8]) -> usize {
        let mut best = 0;
        for i in 0..a.len() {
            for j in 0..b.len() {
                best = best.max(naive_pair(&a[i..], &b[j..]));
            }
        }
        best
    }

    fn naive_pair(a: &[u8], b: &[u8]) -> usize {
        a.iter().zip(b).take_while(|(x, y)| x == y).count()
    }

    #[test]
    fn overlap_random_against_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..60 {
            let a = gen_random(rng.random_range(0..60), rng.random(), UNIFORM).unwrap();
            let b = gen_random(rng.random_range(0..60), rng.random(), UNIFORM).unwrap();
            let r = longest_overlap(&a, &b).unwrap();
            assert_eq!(r.length, brute_lcs(&a.residues, &b.residues));
            assert_eq!(
                &a.residues[r.pos_a..r.pos_a + r.length],
                &b.residues[r.pos_b..r.pos_b + r.length]
            );
            assert_eq!(longest_overlap(&b, &a).unwrap().length, r.length);
            // smallest posA among all maximal occurrences
            if r.length > 0 {
                let first = (0..a.len())
                    .find(|&i| {
                        (0..b.len())
                            .any(|j| naive_pair(&a.residues[i..], &b.residues[j..]) >= r.length)
                    })
                    .unwrap();
                assert_eq!(r.pos_a, first);
            }
        }
    }

    #[test]
    fn appended_shared_block() {
        let a = gen_random(80, 1, UNIFORM).unwrap();
        let b = gen_random(90, 2, UNIFORM).unwrap();
        let shared = gen_random(25, 3, UNIFORM).unwrap();
        let a2 = DnaSequence::new("a", [a.residues, shared.residues.clone()].concat());
        let b2 = DnaSequence::new("b", [b.residues, shared.residues].concat());
        assert!(longest_overlap(&a2, &b2).unwrap().length >= 25);
    }

    #[test]
    fn separator_layout() {
        let a = encode(&seq("AC"), NPolicy::Reject).unwrap();
        let b = encode(&seq("T"), NPolicy::Reject).unwrap();
        let g = GeneralizedText::new(&a, &b);
        assert_eq!(g.text().ranks(), &[2, 3, 1, 5]);
        assert_eq!(g.boundary(), 2);
        assert_eq!(
            g.text().ranks().iter().filter(|&&r| r == SEPARATOR).count(),
            1
        );
    }

    #[test]
    fn report_round_trip() {
        let a = seq("ATTGCTAC");
        let b = seq("GCTA");
        let r = longest_overlap(&a, &b).unwrap();
        let rep = overlap_report(&r, &a, &b);
        assert_eq!(rep.substring, "GCTA");
        assert_eq!(
            rep.to_json(),
            r#"{"length":4,"posA":3,"posB":0,"substring":"GCTA"}"#
        );
        let back = OverlapReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        assert_eq!(back.result(), r);
        let zero = overlap_report(&OverlapResult::default(), &seq("AAAA"), &seq("TTTT"));
        assert_eq!(zero.substring, "");
    }

    #[test]
    fn from_parts_checks_lengths() {
        let e = engine("ACGT");
        let r = LcpQueryEngine::from_parts(
            e.text().clone(),
            e.sa().clone(),
            LcpArray::from_vec(vec![0]),
            RmqEngine::Sparse,
        );
        assert_eq!(r.err(), Some(QueryError::Inconsistent));
    }
}
