//! Suffix arrays, inverse ranks and LCP arrays.
//!
//! [`build_sa_dc3`] is the linear-time difference-cover (mod 3) construction;
//! [`build_sa_oracle`] comparison-sorts every suffix and is kept as the
//! reference the DC3 path is checked against.
//!
//! Texts are treated as if extended with `0` symbols past the end, so every
//! triple `t[i], t[i+1], t[i+2]` is defined. Real symbols are always `>= 1`.

use std::collections::BTreeMap;

use crate::sequence::RankedText;

/// Suffix start positions in lexicographic order, with the inverse
/// permutation (`rank[sa[i]] == i`, 0-based).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SuffixArray {
    sa: Vec<usize>,
    rank: Vec<usize>,
}

impl SuffixArray {
    /// Builds from a permutation of `0..n`. Returns `None` if `sa` is not one.
    pub fn from_sa(sa: Vec<usize>) -> Option<Self> {
        let n = sa.len();
        let mut rank = vec![usize::MAX; n];
        for (i, &p) in sa.iter().enumerate() {
            if p >= n || rank[p] != usize::MAX {
                return None;
            }
            rank[p] = i;
        }
        Some(SuffixArray { sa, rank })
    }

    pub fn sa(&self) -> &[usize] {
        &self.sa
    }

    pub fn rank(&self) -> &[usize] {
        &self.rank
    }

    pub fn len(&self) -> usize {
        self.sa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sa.is_empty()
    }
}

/// `lcp[0] == 0`; `lcp[i]` is the longest common prefix of the suffixes at
/// `sa[i-1]` and `sa[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LcpArray {
    lcp: Vec<usize>,
}

impl LcpArray {
    pub fn from_vec(lcp: Vec<usize>) -> Self {
        LcpArray { lcp }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.lcp
    }

    pub fn len(&self) -> usize {
        self.lcp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lcp.is_empty()
    }
}

/// Comparison-sorts all suffixes. `O(n log n)` comparisons, each up to `O(n)`.
pub fn build_sa_oracle(text: &RankedText) -> SuffixArray {
    let t = text.ranks();
    let mut sa: Vec<usize> = (0..t.len()).collect();
    sa.sort_unstable_by(|&a, &b| t[a..].cmp(&t[b..]));
    SuffixArray::from_sa(sa).expect("sorted indices form a permutation")
}

/// Stable sort of records by an integer key in `0..=max_key`. DC3 performs
/// all of its ordering through this trait so the serial counting sort and the
/// parallel radix engine are interchangeable.
pub trait KeySort {
    fn sort_by_key<T, F>(&self, items: Vec<T>, key: F, max_key: u64) -> Vec<T>
    where
        T: Copy + Send + Sync,
        F: Fn(&T) -> u64 + Sync;
}

/// Widest digit a single counting pass handles; wider keys are split into
/// equal LSD digits so the bucket table stays cache resident.
const MAX_DIGIT_BITS: u32 = 8;

/// Stable counting sort; one pass per digit of the key.
#[derive(Debug, Clone, Copy, Default)]
pub struct CountingSort;

impl CountingSort {
    fn pass<T: Copy, F: Fn(&T) -> u64>(
        src: &[T],
        dst: &mut Vec<T>,
        key: &F,
        shift: u32,
        radix: usize,
    ) {
        let mask = (radix - 1) as u64;
        let mut starts = vec![0usize; radix + 1];
        for t in src {
            starts[((key(t) >> shift) & mask) as usize + 1] += 1;
        }
        for i in 1..starts.len() {
            starts[i] += starts[i - 1];
        }
        dst.clear();
        dst.reserve(src.len());
        let out = dst.spare_capacity_mut();
        for t in src {
            let d = ((key(t) >> shift) & mask) as usize;
            out[starts[d]].write(*t);
            starts[d] += 1;
        }
        // SAFETY: the starts partition 0..src.len(), so every slot was written.
        unsafe { dst.set_len(src.len()) };
    }
}

impl KeySort for CountingSort {
    fn sort_by_key<T, F>(&self, items: Vec<T>, key: F, max_key: u64) -> Vec<T>
    where
        T: Copy + Send + Sync,
        F: Fn(&T) -> u64 + Sync,
    {
        let bits = (u64::BITS - max_key.leading_zeros()).max(1);
        let passes = bits.div_ceil(MAX_DIGIT_BITS);
        let digit = bits.div_ceil(passes);
        let mut src = items;
        let mut dst = Vec::new();
        for p in 0..passes {
            Self::pass(&src, &mut dst, &key, p * digit, 1 << digit);
            std::mem::swap(&mut src, &mut dst);
        }
        src
    }
}

/// State of one DC3 level.
///
/// `b1` and `b2` are the sample positions (`i mod 3 == 1` and `== 2`); `b0`
/// the rest. When `n mod 3 == 1` the sample additionally contains position
/// `n`, a suffix made only of padding, so the last triple of the `b1` half
/// always exists.
#[derive(Debug, Clone)]
pub struct Dc3Workspace {
    text: Vec<u32>,
    n: usize,
    max_symbol: u32,
    pub b0: Vec<u32>,
    pub b1: Vec<u32>,
    pub b2: Vec<u32>,
    /// Names of the sample triples in `b1 ++ b2` order; the recursive text.
    pub names: Vec<u32>,
    /// Sample positions in sorted order.
    pub sample_order: Vec<u32>,
    /// 1-based rank of each sample position, 0 elsewhere. Length `n + 3`.
    pub sample_rank: Vec<u32>,
    /// Nonsample positions in sorted order.
    pub nonsample_order: Vec<u32>,
    /// Recursion levels entered below this one.
    pub depth: usize,
}

impl Dc3Workspace {
    /// Partitions positions of `text` (symbols in `1..=max_symbol`).
    pub fn new(text: &[u32], max_symbol: u32) -> Self {
        let n = text.len();
        let mut padded = Vec::with_capacity(n + 3);
        padded.extend_from_slice(text);
        padded.extend_from_slice(&[0, 0, 0]);
        let b0 = (0..n).step_by(3).map(|i| i as u32).collect();
        let mut b1: Vec<u32> = (1..n).step_by(3).map(|i| i as u32).collect();
        if n % 3 == 1 {
            b1.push(n as u32);
        }
        let b2 = (2..n).step_by(3).map(|i| i as u32).collect();
        Dc3Workspace {
            text: padded,
            n,
            max_symbol,
            b0,
            b1,
            b2,
            names: Vec::new(),
            sample_order: Vec::new(),
            sample_rank: Vec::new(),
            nonsample_order: Vec::new(),
            depth: 0,
        }
    }

    fn t(&self, i: u32) -> u32 {
        self.text[i as usize]
    }

    /// Index of sample position `p` in `b1 ++ b2`.
    fn sample_index(&self, p: u32) -> usize {
        if p % 3 == 1 {
            (p / 3) as usize
        } else {
            self.b1.len() + (p / 3) as usize
        }
    }

    /// Names sorted triples: equal neighbours share a name, names start at 1.
    /// Returns the sorted positions and the number of distinct names.
    fn name_sorted<T, K: PartialEq>(
        &mut self,
        order: &[T],
        key: impl Fn(&T) -> K,
        pos: impl Fn(&T) -> u32,
    ) -> (Vec<u32>, u32) {
        let mut names = vec![0u32; order.len()];
        let mut sorted = Vec::with_capacity(order.len());
        let mut name = 0u32;
        let mut prev = None;
        for r in order {
            let k = key(r);
            if prev.as_ref() != Some(&k) {
                name += 1;
                prev = Some(k);
            }
            let p = pos(r);
            names[self.sample_index(p)] = name;
            sorted.push(p);
        }
        self.names = names;
        (sorted, name)
    }

    /// Sorts the sample suffixes: radix-sort their triples, name them, and
    /// recurse on the names when they are not all distinct.
    pub fn sort_sample<S: KeySort>(&mut self, sorter: &S) {
        let t = &self.text;
        let m = self.b1.len() + self.b2.len();
        let radix = u64::from(self.max_symbol) + 1;
        let sample = self.b1.iter().chain(&self.b2);
        let (sorted, count) = if radix < 1 << 21 {
            // the triple read as one base-`radix` number; a single LSD sort on
            // it orders exactly as three passes on the symbols would
            let packed: Vec<(u64, u32)> = sample
                .map(|&p| {
                    let i = p as usize;
                    let key = (u64::from(t[i]) * radix + u64::from(t[i + 1])) * radix
                        + u64::from(t[i + 2]);
                    (key, p)
                })
                .collect();
            let order = sorter.sort_by_key(packed, |r: &(u64, u32)| r.0, radix * radix * radix - 1);
            self.name_sorted(&order, |r| r.0, |r| r.1)
        } else {
            let mut order: Vec<([u32; 3], u32)> = sample
                .map(|&p| {
                    let i = p as usize;
                    ([t[i], t[i + 1], t[i + 2]], p)
                })
                .collect();
            for k in [2usize, 1, 0] {
                order =
                    sorter.sort_by_key(order, |r: &([u32; 3], u32)| u64::from(r.0[k]), radix - 1);
            }
            self.name_sorted(&order, |r| r.0, |r| r.1)
        };

        if (count as usize) < m {
            let (sub_sa, sub_depth) = dc3(&self.names, count, sorter);
            let split = self.b1.len() as u32;
            self.sample_order = sub_sa
                .iter()
                .map(|&j| {
                    if j < split {
                        3 * j + 1
                    } else {
                        3 * (j - split) + 2
                    }
                })
                .collect();
            self.depth = sub_depth + 1;
        } else {
            self.sample_order = sorted;
            self.depth = 0;
        }

        self.sample_rank = vec![0u32; self.n + 3];
        for (r, &i) in self.sample_order.iter().enumerate() {
            self.sample_rank[i as usize] = r as u32 + 1;
        }
    }

    /// Orders the nonsample suffixes by `(t[i], rank(i + 1))`. Requires
    /// [`sort_sample`](Self::sort_sample) first.
    pub fn sort_nonsample<S: KeySort>(&mut self, sorter: &S) {
        // Sample order restricted to b1 already sorts b0 by rank(i + 1).
        let by_rank: Vec<(u32, u32)> = self
            .sample_order
            .iter()
            .filter(|&&p| p % 3 == 1)
            .map(|&p| (self.t(p - 1), p - 1))
            .collect();
        debug_assert_eq!(by_rank.len(), self.b0.len());
        self.nonsample_order = sorter
            .sort_by_key(
                by_rank,
                |r: &(u32, u32)| u64::from(r.0),
                u64::from(self.max_symbol),
            )
            .into_iter()
            .map(|r| r.1)
            .collect();
    }

    fn merge_key(&self, p: u32) -> MergeKey {
        let i = p as usize;
        MergeKey {
            pos: p,
            t0: self.text[i],
            t1: self.text[i + 1],
            r1: self.sample_rank[i + 1],
            r2: self.sample_rank[i + 2],
        }
    }

    /// Two-finger merge of the sorted sample and nonsample suffixes.
    pub fn merge(&self) -> Vec<u32> {
        let n = self.n as u32;
        // Comparison keys are gathered up front; the loads are independent
        // here, unlike inside the branchy merge loop.
        let sample: Vec<MergeKey> = self
            .sample_order
            .iter()
            .filter(|&&p| p < n)
            .map(|&p| self.merge_key(p))
            .collect();
        let nonsample: Vec<MergeKey> = self
            .nonsample_order
            .iter()
            .map(|&p| self.merge_key(p))
            .collect();
        let mut out = Vec::with_capacity(self.n);
        let (mut a, mut b) = (0, 0);
        while a < sample.len() && b < nonsample.len() {
            let (x, y) = (&sample[a], &nonsample[b]);
            let sample_first = if x.pos % 3 == 1 {
                (x.t0, x.r1) <= (y.t0, y.r1)
            } else {
                (x.t0, x.t1, x.r2) <= (y.t0, y.t1, y.r2)
            };
            if sample_first {
                out.push(x.pos);
                a += 1;
            } else {
                out.push(y.pos);
                b += 1;
            }
        }
        out.extend(sample[a..].iter().map(|k| k.pos));
        out.extend(nonsample[b..].iter().map(|k| k.pos));
        out
    }
}

/// Symbols and sample ranks a merge comparison can look at.
#[derive(Debug, Clone, Copy)]
struct MergeKey {
    pos: u32,
    t0: u32,
    t1: u32,
    r1: u32,
    r2: u32,
}

/// DC3 over `text` with symbols in `1..=max_symbol`. Returns the suffix array
/// and the recursion depth.
pub fn dc3<S: KeySort>(text: &[u32], max_symbol: u32, sorter: &S) -> (Vec<u32>, usize) {
    match text.len() {
        0 => return (Vec::new(), 0),
        1 => return (vec![0], 0),
        _ => {}
    }
    let mut ws = Dc3Workspace::new(text, max_symbol);
    ws.sort_sample(sorter);
    ws.sort_nonsample(sorter);
    (ws.merge(), ws.depth)
}

fn widen(text: &RankedText) -> Vec<u32> {
    text.ranks().iter().map(|&r| u32::from(r)).collect()
}

fn into_suffix_array(sa: Vec<u32>) -> SuffixArray {
    SuffixArray::from_sa(sa.into_iter().map(|p| p as usize).collect())
        .expect("DC3 yields a permutation")
}

/// Linear-time suffix array construction.
pub fn build_sa_dc3(text: &RankedText) -> SuffixArray {
    build_sa_dc3_with_depth(text).0
}

/// As [`build_sa_dc3`], also reporting how many recursion levels ran.
pub fn build_sa_dc3_with_depth(text: &RankedText) -> (SuffixArray, usize) {
    build_sa_with(text, &CountingSort)
}

pub(crate) fn build_sa_with<S: KeySort>(text: &RankedText, sorter: &S) -> (SuffixArray, usize) {
    assert!(
        text.len() < u32::MAX as usize - 3,
        "text too long for 32-bit positions"
    );
    let (sa, depth) = dc3(&widen(text), u32::from(text.sigma()), sorter);
    (into_suffix_array(sa), depth)
}

/// 1-based rank of every sample suffix (positions `i mod 3 != 0`, plus the
/// padding-only position `n` when `n mod 3 == 1`) among all sample suffixes.
pub fn sample_ranks(text: &RankedText) -> BTreeMap<usize, usize> {
    if text.is_empty() {
        return BTreeMap::new();
    }
    let mut ws = Dc3Workspace::new(&widen(text), u32::from(text.sigma()));
    ws.sort_sample(&CountingSort);
    ws.sample_order
        .iter()
        .enumerate()
        .map(|(r, &p)| (p as usize, r + 1))
        .collect()
}

/// Final DC3 step on a workspace whose sample and nonsample suffixes are
/// already sorted.
pub fn merge_sample_nonsample(workspace: &Dc3Workspace, text: &RankedText) -> SuffixArray {
    debug_assert_eq!(workspace.n, text.len());
    into_suffix_array(workspace.merge())
}

/// Kasai et al. linear-time LCP from the inverse rank array.
pub fn build_lcp(text: &RankedText, sa: &SuffixArray) -> LcpArray {
    build_lcp_slice(text.ranks(), sa)
}

pub(crate) fn build_lcp_slice<T: Eq>(t: &[T], sa: &SuffixArray) -> LcpArray {
    let n = t.len();
    let mut lcp = vec![0usize; n];
    let mut h = 0usize;
    for p in 0..n {
        let r = sa.rank()[p];
        if r == 0 {
            h = 0;
            continue;
        }
        let q = sa.sa()[r - 1];
        while p + h < n && q + h < n && t[p + h] == t[q + h] {
            h += 1;
        }
        lcp[r] = h;
        h = h.saturating_sub(1);
    }
    LcpArray { lcp }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{encode, gen_random, DnaSequence, NPolicy, UNIFORM};

    fn text(s: &str) -> RankedText {
        encode(&DnaSequence::new("t", s), NPolicy::Reject).unwrap()
    }

    fn naive_lcp(t: &[u8], a: usize, b: usize) -> usize {
        t[a..]
            .iter()
            .zip(&t[b..])
            .take_while(|(x, y)| x == y)
            .count()
    }

    #[test]
    fn oracle_fixtures() {
        assert_eq!(
            build_sa_oracle(&text("ATTGCTAC")).sa(),
            &[6, 0, 7, 4, 3, 5, 2, 1]
        );
        assert!(build_sa_oracle(&text("")).is_empty());
        assert_eq!(build_sa_oracle(&text("AAAA")).sa(), &[3, 2, 1, 0]);
    }

    #[test]
    fn dc3_fixture_and_ranks() {
        let sa = build_sa_dc3(&text("ATTGCTAC"));
        assert_eq!(sa.sa(), &[6, 0, 7, 4, 3, 5, 2, 1]);
        let one_based: Vec<usize> = sa.rank().iter().map(|r| r + 1).collect();
        assert_eq!(one_based, [2, 8, 7, 5, 4, 6, 1, 3]);
    }

    #[test]
    fn dc3_degenerate() {
        assert!(build_sa_dc3(&text("")).is_empty());
        assert_eq!(build_sa_dc3(&text("G")).sa(), &[0]);
        assert_eq!(build_sa_dc3(&text("GA")).sa(), &[1, 0]);
        assert_eq!(build_sa_dc3(&text("AAAA")).sa(), &[3, 2, 1, 0]);
    }

    #[test]
    fn dc3_matches_oracle_random() {
        let t = encode(&gen_random(1000, 7, UNIFORM).unwrap(), NPolicy::Reject).unwrap();
        assert_eq!(build_sa_dc3(&t), build_sa_oracle(&t));
        let t = encode(
            &gen_random(3000, 8, [8.0, 1.0, 1.0, 0.1]).unwrap(),
            NPolicy::Reject,
        )
        .unwrap();
        assert_eq!(build_sa_dc3(&t), build_sa_oracle(&t));
    }

    #[test]
    fn recursion_only_on_duplicate_names() {
        // All triples of ACGT... distinct at the top level.
        let (_, depth) = build_sa_dc3_with_depth(&text("ACGTTGCA"));
        assert_eq!(depth, 0);
        let (_, depth) = build_sa_dc3_with_depth(&text("AAAAAAAAAAAA"));
        assert!(depth > 0);
    }

    #[test]
    fn sample_ranks_fixture() {
        let ranks = sample_ranks(&text("ATTGCTAC"));
        let expected: BTreeMap<usize, usize> = [(1, 5), (2, 4), (4, 2), (5, 3), (7, 1)].into();
        assert_eq!(ranks, expected);
    }

    /// Sorts the sample suffixes of the zero-padded text by brute force.
    fn brute_sample_ranks(t: &[u8]) -> BTreeMap<usize, usize> {
        let n = t.len();
        let mut sample: Vec<usize> = (0..n).filter(|i| i % 3 != 0).collect();
        if n % 3 == 1 {
            sample.push(n);
        }
        sample.sort_by(|&a, &b| t[a.min(n)..].cmp(&t[b.min(n)..]));
        sample
            .into_iter()
            .enumerate()
            .map(|(r, p)| (p, r + 1))
            .collect()
    }

    #[test]
    fn sample_ranks_brute_force() {
        let aaaa = sample_ranks(&text("AAAA"));
        assert_eq!(aaaa, brute_sample_ranks(&[1, 1, 1, 1]));
        // longer sample suffixes rank later
        assert!(aaaa[&1] > aaaa[&2] && aaaa[&2] > aaaa[&4]);
        let single = sample_ranks(&text("A"));
        assert_eq!(single, BTreeMap::from([(1, 1)]));
        for seed in 0..20 {
            let t = encode(
                &gen_random(50 + seed as usize, seed, UNIFORM).unwrap(),
                NPolicy::Reject,
            )
            .unwrap();
            assert_eq!(sample_ranks(&t), brute_sample_ranks(t.ranks()));
        }
    }

    #[test]
    fn merge_orders_fixture_nonsample() {
        let t = text("ATTGCTAC");
        let mut ws = Dc3Workspace::new(&widen(&t), 4);
        ws.sort_sample(&CountingSort);
        ws.sort_nonsample(&CountingSort);
        // (A,1) <= (A,5) <= (G,2)
        assert_eq!(ws.nonsample_order, [6, 0, 3]);
        assert_eq!(
            merge_sample_nonsample(&ws, &t).sa(),
            &[6, 0, 7, 4, 3, 5, 2, 1]
        );
    }

    #[test]
    fn merge_with_empty_side() {
        let t = text("C");
        let mut ws = Dc3Workspace::new(&widen(&t), 4);
        ws.sort_sample(&CountingSort);
        ws.sort_nonsample(&CountingSort);
        assert_eq!(merge_sample_nonsample(&ws, &t).sa(), &[0]);
        let t = text("");
        let mut ws = Dc3Workspace::new(&widen(&t), 4);
        ws.sort_sample(&CountingSort);
        ws.sort_nonsample(&CountingSort);
        assert!(ws.nonsample_order.is_empty());
        assert!(merge_sample_nonsample(&ws, &t).is_empty());
    }

    #[test]
    fn lcp_fixtures() {
        let t = text("ATTGCTAC");
        assert_eq!(
            build_lcp(&t, &build_sa_dc3(&t)).as_slice(),
            &[0, 1, 0, 1, 0, 0, 1, 1]
        );
        let t = text("AAAA");
        assert_eq!(build_lcp(&t, &build_sa_dc3(&t)).as_slice(), &[0, 1, 2, 3]);
        let t = text("");
        assert!(build_lcp(&t, &build_sa_dc3(&t)).is_empty());
    }

    #[test]
    fn lcp_random_against_naive() {
        let t = encode(&gen_random(2000, 11, UNIFORM).unwrap(), NPolicy::Reject).unwrap();
        let sa = build_sa_dc3(&t);
        let lcp = build_lcp(&t, &sa);
        assert_eq!(lcp.as_slice()[0], 0);
        for i in 1..t.len() {
            assert_eq!(
                lcp.as_slice()[i],
                naive_lcp(t.ranks(), sa.sa()[i - 1], sa.sa()[i])
            );
        }
    }

    #[test]
    fn from_sa_rejects_non_permutations() {
        assert!(SuffixArray::from_sa(vec![0, 0]).is_none());
        assert!(SuffixArray::from_sa(vec![2, 0]).is_none());
        assert!(SuffixArray::from_sa(vec![1, 0]).is_some());
    }
}
