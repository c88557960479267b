//! Bulk-synchronous radix sort built on the split primitive.
//!
//! Work is laid out as contiguous *lanes*; each rayon call over the lanes is
//! one phase, and a phase only reads data committed by earlier phases. A
//! single split pass runs four phases:
//!
//! 1. flag: `b[i] = (key >> bit) & 1`, `e[i] = b[i] ^ 1`
//! 2. scan: `f` = exclusive prefix sum of `e` (lane-local scans, then a
//!    doubling scan over the lane totals, then offset fix-up)
//! 3. address: `total_false = f[n-1] + e[n-1]`,
//!    `d[i] = if b[i] { i - f[i] + total_false } else { f[i] }`
//! 4. scatter: `out[d[i]] = in[i]`
//!
//! Scatter writes go through disjoint per-lane output slices (zero-bit and
//! one-bit destinations of a lane are each contiguous), so no lane can observe
//! another's writes. Every result is a pure function of the input and the
//! digit configuration; worker count and chunk size only change how the work
//! is divided.

use std::ops::Range;

use rayon::prelude::*;
use thiserror::Error;

use crate::sequence::RankedText;
use crate::suffix_index::{build_sa_with, KeySort, SuffixArray};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SortError {
    #[error("invalid sort configuration: {0}")]
    Config(String),
    #[error("key {key} does not fit in {bits} bits")]
    KeyTooWide { key: u64, bits: u32 },
    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

/// Radix sort and chunking parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortConfig {
    /// Bits consumed per pass. 1 is the literal split kernel.
    pub digit_bits: u32,
    /// Key width; must be a multiple of `digit_bits`.
    pub total_bits: u32,
    pub chunk_size: usize,
    pub workers: usize,
    /// Round `chunk_size` up to a multiple of 32.
    pub align_chunks_to_32: bool,
}

impl Default for SortConfig {
    fn default() -> Self {
        SortConfig {
            digit_bits: 1,
            total_bits: 32,
            chunk_size: 4096,
            workers: default_workers(),
            align_chunks_to_32: false,
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl SortConfig {
    pub fn validate(&self) -> Result<(), SortError> {
        let bad = |msg: String| Err(SortError::Config(msg));
        if self.digit_bits == 0 || self.digit_bits > 16 {
            return bad(format!("digit width {} not in 1..=16", self.digit_bits));
        }
        if self.total_bits == 0 || self.total_bits > 64 {
            return bad(format!("total key bits {} not in 1..=64", self.total_bits));
        }
        if !self.total_bits.is_multiple_of(self.digit_bits) {
            return bad(format!(
                "total key bits {} not a multiple of digit width {}",
                self.total_bits, self.digit_bits
            ));
        }
        if self.chunk_size == 0 {
            return bad("chunk size must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("worker count must be at least 1".into());
        }
        Ok(())
    }

    pub fn effective_chunk(&self) -> usize {
        if self.align_chunks_to_32 {
            self.chunk_size.div_ceil(32) * 32
        } else {
            self.chunk_size
        }
    }

    pub fn chunk_is_multiple_of_32(&self) -> bool {
        self.effective_chunk().is_multiple_of(32)
    }
}

/// Contiguous, disjoint chunks covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPlan {
    pub chunks: Vec<Range<usize>>,
    pub chunk_size: usize,
    pub workers: usize,
}

impl ChunkPlan {
    pub fn new(n: usize, chunk_size: usize, workers: usize) -> Self {
        let chunk_size = chunk_size.max(1);
        let chunks = (0..n)
            .step_by(chunk_size)
            .map(|s| s..(s + chunk_size).min(n))
            .collect();
        ChunkPlan {
            chunks,
            chunk_size,
            workers,
        }
    }
}

/// Flags, scan and destinations of one split pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitState {
    pub b: Vec<u8>,
    pub e: Vec<u8>,
    pub f: Vec<usize>,
    pub total_false: usize,
    pub d: Vec<usize>,
}

impl SplitState {
    fn resize(&mut self, n: usize) {
        self.b.resize(n, 0);
        self.e.resize(n, 0);
        self.f.resize(n, 0);
        self.d.resize(n, 0);
    }
}

/// Smallest lane handed to a worker; below this the phase runs inline.
const MIN_LANE: usize = 4096;

fn lane_len(n: usize, workers: usize) -> usize {
    n.div_ceil(workers.max(1)).max(MIN_LANE)
}

/// Exclusive prefix sum by doubling: phase `k` adds the value `2^k`
/// positions back, reading only the previous phase's buffer. `O(log n)`
/// phases.
pub fn exclusive_scan(values: &[u64]) -> Vec<u64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut cur = values.to_vec();
    let mut next = vec![0u64; n];
    let mut offset = 1;
    while offset < n {
        let prev = &cur;
        let step = |(i, out): (usize, &mut u64)| {
            *out = if i >= offset {
                prev[i - offset] + prev[i]
            } else {
                prev[i]
            };
        };
        if n > MIN_LANE {
            next.par_iter_mut().enumerate().for_each(step);
        } else {
            next.iter_mut().enumerate().for_each(step);
        }
        std::mem::swap(&mut cur, &mut next);
        offset <<= 1;
    }
    // inclusive -> exclusive
    let mut out = Vec::with_capacity(n);
    out.push(0);
    out.extend_from_slice(&cur[..n - 1]);
    out
}

/// Splits `dst` into consecutive mutable pieces of the given lengths.
fn carve<T>(mut dst: &mut [T], lens: impl IntoIterator<Item = usize>) -> Vec<&mut [T]> {
    let mut pieces = Vec::new();
    for len in lens {
        let (head, tail) = std::mem::take(&mut dst).split_at_mut(len);
        pieces.push(head);
        dst = tail;
    }
    pieces
}

/// One split pass of `src` into `dst` on bit `bit`, lanes of `lane` items.
fn split_pass<T, K>(src: &[T], dst: &mut [T], key: &K, bit: u32, lane: usize, st: &mut SplitState)
where
    T: Copy + Send + Sync,
    K: Fn(&T) -> u64 + Sync,
{
    let n = src.len();
    st.resize(n);
    if n == 0 {
        st.total_false = 0;
        return;
    }
    let lanes = n.div_ceil(lane);

    // phase 1: flags
    let flag = |start: usize, b: &mut [u8], e: &mut [u8]| {
        for (k, (bk, ek)) in b.iter_mut().zip(e.iter_mut()).enumerate() {
            let bit = ((key(&src[start + k]) >> bit) & 1) as u8;
            *bk = bit;
            *ek = bit ^ 1;
        }
    };
    if lanes == 1 {
        flag(0, &mut st.b, &mut st.e);
    } else {
        st.b.par_chunks_mut(lane)
            .zip(st.e.par_chunks_mut(lane))
            .enumerate()
            .for_each(|(l, (b, e))| flag(l * lane, b, e));
    }

    // phase 2: exclusive scan of e
    let local_scan = |e: &[u8], f: &mut [usize], base: usize| {
        let mut acc = base;
        for (ek, fk) in e.iter().zip(f.iter_mut()) {
            *fk = acc;
            acc += usize::from(*ek);
        }
    };
    if lanes == 1 {
        local_scan(&st.e, &mut st.f, 0);
    } else {
        let totals: Vec<u64> =
            st.e.par_chunks(lane)
                .map(|e| e.iter().map(|&x| u64::from(x)).sum())
                .collect();
        let offsets = exclusive_scan(&totals);
        st.e.par_chunks(lane)
            .zip(st.f.par_chunks_mut(lane))
            .zip(offsets.par_iter())
            .for_each(|((e, f), &base)| local_scan(e, f, base as usize));
    }

    // phase 3: destinations
    let total_false = st.f[n - 1] + usize::from(st.e[n - 1]);
    st.total_false = total_false;
    let address = |start: usize, d: &mut [usize], b: &[u8], f: &[usize]| {
        for (k, dk) in d.iter_mut().enumerate() {
            let i = start + k;
            *dk = if b[k] == 1 {
                i - f[k] + total_false
            } else {
                f[k]
            };
        }
    };
    if lanes == 1 {
        address(0, &mut st.d, &st.b, &st.f);
    } else {
        st.d.par_chunks_mut(lane)
            .zip(st.b.par_chunks(lane))
            .zip(st.f.par_chunks(lane))
            .enumerate()
            .for_each(|(l, ((d, b), f))| address(l * lane, d, b, f));
    }

    // phase 4: scatter through disjoint slices
    let ranges: Vec<Range<usize>> = (0..lanes)
        .map(|l| l * lane..((l + 1) * lane).min(n))
        .collect();
    let zeros: Vec<usize> = ranges
        .iter()
        .map(|r| {
            let end_f = if r.end < n { st.f[r.end] } else { total_false };
            end_f - st.f[r.start]
        })
        .collect();
    let lens = zeros
        .iter()
        .copied()
        .chain(ranges.iter().zip(&zeros).map(|(r, z)| r.len() - z));
    let mut pieces = carve(dst, lens);
    let ones = pieces.split_off(lanes);
    let write = |r: &Range<usize>, zs: &mut [T], os: &mut [T]| {
        let (mut zi, mut oi) = (0, 0);
        for i in r.clone() {
            if st.b[i] == 0 {
                zs[zi] = src[i];
                zi += 1;
            } else {
                os[oi] = src[i];
                oi += 1;
            }
        }
    };
    if lanes == 1 {
        let (z, o) = (pieces.pop().unwrap(), ones.into_iter().next().unwrap());
        write(&ranges[0], z, o);
    } else {
        ranges
            .par_iter()
            .zip(pieces.into_par_iter())
            .zip(ones.into_par_iter())
            .for_each(|((r, z), o)| write(r, z, o));
    }
}

/// One multi-way pass on a `digit_bits`-wide digit: per-lane histograms,
/// bucket-major exclusive scan of the counts, scatter.
fn digit_pass<T, K>(src: &[T], dst: &mut [T], key: &K, shift: u32, digit_bits: u32, lane: usize)
where
    T: Copy + Send + Sync,
    K: Fn(&T) -> u64 + Sync,
{
    let n = src.len();
    if n == 0 {
        return;
    }
    let radix = 1usize << digit_bits;
    let mask = (radix - 1) as u64;
    let digit = |t: &T| ((key(t) >> shift) & mask) as usize;
    let lanes = n.div_ceil(lane);

    let histogram = |items: &[T]| {
        let mut h = vec![0u64; radix];
        for t in items {
            h[digit(t)] += 1;
        }
        h
    };
    let counts: Vec<Vec<u64>> = if lanes == 1 {
        vec![histogram(src)]
    } else {
        src.par_chunks(lane).map(histogram).collect()
    };

    // Consecutive pieces in bucket-major, lane-minor order start at the
    // exclusive scan of the counts in that order.
    let bucket_major: Vec<u64> = (0..radix)
        .flat_map(|d| counts.iter().map(move |c| c[d]))
        .collect();
    let mut pieces = carve(dst, bucket_major.iter().map(|&c| c as usize));

    // regroup pieces per lane: lane l owns pieces[d * lanes + l]
    let mut per_lane: Vec<Vec<&mut [T]>> = (0..lanes).map(|_| Vec::with_capacity(radix)).collect();
    for (idx, piece) in pieces.drain(..).enumerate() {
        per_lane[idx % lanes].push(piece);
    }
    let write = |items: &[T], mut slots: Vec<&mut [T]>| {
        let mut fill = vec![0usize; radix];
        for t in items {
            let d = digit(t);
            slots[d][fill[d]] = *t;
            fill[d] += 1;
        }
    };
    if lanes == 1 {
        write(src, per_lane.pop().unwrap());
    } else {
        src.par_chunks(lane)
            .zip(per_lane.into_par_iter())
            .for_each(|(items, slots)| write(items, slots));
    }
}

/// LSD radix sort of `items` by `key`, `bits` wide, in lanes of `lane` items.
fn radix_sort_by<T, K>(items: &[T], key: &K, bits: u32, digit_bits: u32, lane: usize) -> Vec<T>
where
    T: Copy + Send + Sync,
    K: Fn(&T) -> u64 + Sync,
{
    let mut src = items.to_vec();
    let mut dst = items.to_vec();
    let mut state = SplitState::default();
    let mut shift = 0;
    while shift < bits {
        if digit_bits == 1 {
            split_pass(&src, &mut dst, key, shift, lane, &mut state);
        } else {
            digit_pass(&src, &mut dst, key, shift, digit_bits, lane);
        }
        std::mem::swap(&mut src, &mut dst);
        shift += digit_bits;
    }
    src
}

fn bits_needed(max_key: u64) -> u32 {
    (u64::BITS - max_key.leading_zeros()).max(1)
}

fn check_keys(keys: &[u64], bits: u32) -> Result<(), SortError> {
    if bits < 64 {
        if let Some(&key) = keys.iter().find(|&&k| k >> bits != 0) {
            return Err(SortError::KeyTooWide { key, bits });
        }
    }
    Ok(())
}

/// Index of the first element of `b` that goes after `a[..i]` in a stable
/// merge producing `diag` outputs. Returns how many come from `a`.
fn merge_path<T, K: Fn(&T) -> u64>(a: &[T], b: &[T], diag: usize, key: &K) -> usize {
    let mut lo = diag.saturating_sub(b.len());
    let mut hi = diag.min(a.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if key(&a[mid]) <= key(&b[diag - mid - 1]) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Stable two-finger merge.
fn merge_into<T: Copy, K: Fn(&T) -> u64>(a: &[T], b: &[T], out: &mut [T], key: &K) {
    let (mut i, mut j) = (0, 0);
    for slot in out.iter_mut() {
        if j >= b.len() || (i < a.len() && key(&a[i]) <= key(&b[j])) {
            *slot = a[i];
            i += 1;
        } else {
            *slot = b[j];
            j += 1;
        }
    }
}

/// A piece of one merge round: `out` receives `a ⊕ b`.
struct MergeJob<'s, 'd, T> {
    a: &'s [T],
    b: &'s [T],
    out: &'d mut [T],
}

/// Sorts `items` through a worker pool, reusable across calls.
pub struct SortEngine {
    config: SortConfig,
    pool: rayon::ThreadPool,
}

impl std::fmt::Debug for SortEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SortEngine")
            .field("config", &self.config)
            .finish()
    }
}

impl SortEngine {
    pub fn new(config: SortConfig) -> Result<Self, SortError> {
        config.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| SortError::Pool(e.to_string()))?;
        Ok(SortEngine { config, pool })
    }

    pub fn config(&self) -> &SortConfig {
        &self.config
    }

    /// Whole-array radix sort; each pass is spread over all workers.
    pub fn radix_sort(&self, keys: &[u64]) -> Result<Vec<u64>, SortError> {
        check_keys(keys, self.config.total_bits)?;
        let lane = lane_len(keys.len(), self.config.workers);
        Ok(self.pool.install(|| {
            radix_sort_by(
                keys,
                &|k: &u64| *k,
                self.config.total_bits,
                self.config.digit_bits,
                lane,
            )
        }))
    }

    pub fn chunked_sort(&self, keys: &[u64]) -> Result<Vec<u64>, SortError> {
        check_keys(keys, self.config.total_bits)?;
        Ok(self.chunked_sort_by(keys, |k: &u64| *k, self.config.total_bits))
    }

    /// Radix-sorts each chunk on its own (one lane per chunk), then merges
    /// sorted runs pairwise in rounds until one remains.
    pub fn chunked_sort_by<T, K>(&self, items: &[T], key: K, bits: u32) -> Vec<T>
    where
        T: Copy + Send + Sync,
        K: Fn(&T) -> u64 + Sync,
    {
        let digit = self.config.digit_bits;
        let bits = bits.div_ceil(digit) * digit;
        let plan = ChunkPlan::new(
            items.len(),
            self.config.effective_chunk(),
            self.config.workers,
        );
        self.pool.install(|| {
            let sorted_chunks: Vec<Vec<T>> = plan
                .chunks
                .par_iter()
                .map(|r| radix_sort_by(&items[r.clone()], &key, bits, digit, usize::MAX))
                .collect();
            let mut src: Vec<T> = sorted_chunks.concat();
            let mut runs = plan.chunks.clone();
            let mut dst = src.clone();
            while runs.len() > 1 {
                self.merge_round(&src, &mut dst, &runs, &key);
                runs = runs
                    .chunks(2)
                    .map(|p| p[0].start..p[p.len() - 1].end)
                    .collect();
                std::mem::swap(&mut src, &mut dst);
            }
            src
        })
    }

    fn merge_round<T, K>(&self, src: &[T], dst: &mut [T], runs: &[Range<usize>], key: &K)
    where
        T: Copy + Send + Sync,
        K: Fn(&T) -> u64 + Sync,
    {
        let pairs = runs.len().div_ceil(2);
        // split large merges along merge paths so late rounds stay parallel
        let per_merge = (2 * self.config.workers).div_ceil(pairs).max(1);
        let mut specs: Vec<(&[T], &[T], usize)> = Vec::new();
        for pair in runs.chunks(2) {
            let a = &src[pair[0].clone()];
            let b = pair.get(1).map_or(&src[0..0], |r| &src[r.clone()]);
            let total = a.len() + b.len();
            let pieces = per_merge.min(total.div_ceil(MIN_LANE)).max(1);
            let mut prev = (0, 0);
            for p in 1..=pieces {
                let diag = total * p / pieces;
                let ia = merge_path(a, b, diag, key);
                let cut = (ia, diag - ia);
                specs.push((
                    &a[prev.0..cut.0],
                    &b[prev.1..cut.1],
                    diag - (prev.0 + prev.1),
                ));
                prev = cut;
            }
        }
        let outs = carve(dst, specs.iter().map(|s| s.2));
        let jobs: Vec<MergeJob<T>> = specs
            .into_iter()
            .zip(outs)
            .map(|((a, b, _), out)| MergeJob { a, b, out })
            .collect();
        jobs.into_par_iter()
            .for_each(|job| merge_into(job.a, job.b, job.out, key));
    }

    /// DC3 with every sort pass routed through [`chunked_sort_by`](Self::chunked_sort_by).
    pub fn build_sa(&self, text: &RankedText) -> SuffixArray {
        build_sa_with(text, self).0
    }
}

impl KeySort for SortEngine {
    fn sort_by_key<T, F>(&self, items: Vec<T>, key: F, max_key: u64) -> Vec<T>
    where
        T: Copy + Send + Sync,
        F: Fn(&T) -> u64 + Sync,
    {
        self.chunked_sort_by(&items, key, bits_needed(max_key))
    }
}

/// Stable split of `keys` on `bit`: zero-bit keys first, then one-bit keys.
pub fn split_by_bit(keys: &[u64], bit: u32) -> (Vec<u64>, SplitState) {
    split_with_lanes(keys, bit, lane_len(keys.len(), default_workers()))
}

pub(crate) fn split_with_lanes(keys: &[u64], bit: u32, lane: usize) -> (Vec<u64>, SplitState) {
    let mut out = vec![0u64; keys.len()];
    let mut state = SplitState::default();
    split_pass(keys, &mut out, &|k: &u64| *k, bit, lane.max(1), &mut state);
    (out, state)
}

pub fn radix_sort(keys: &[u64], config: &SortConfig) -> Result<Vec<u64>, SortError> {
    SortEngine::new(config.clone())?.radix_sort(keys)
}

pub fn chunked_sort(keys: &[u64], config: &SortConfig) -> Result<Vec<u64>, SortError> {
    SortEngine::new(config.clone())?.chunked_sort(keys)
}

pub fn parallel_build_sa(text: &RankedText, config: &SortConfig) -> Result<SuffixArray, SortError> {
    Ok(SortEngine::new(config.clone())?.build_sa(text))
}
