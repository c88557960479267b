//! Range-minimum queries.
//!
//! Two interchangeable engines answer `argmin values[i..=j]` in constant time:
//!
//! * [`SparseTable`]: `O(n log n)` table of window minima.
//! * [`LcaRmq`]: Cartesian tree, Euler tour (`E`, `L`, `R`) and a ±1 RMQ over
//!   the depth sequence `L`, using block decomposition with a lookup table
//!   per block type.
//!
//! All engines break ties towards the leftmost index, so their answers are
//! identical.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RmqError {
    #[error("cannot build a range-minimum structure over an empty array")]
    Empty,
    #[error("index {index} out of bounds for length {len}")]
    OutOfBounds { index: usize, len: usize },
}

fn check(i: usize, j: usize, len: usize) -> Result<(usize, usize), RmqError> {
    for index in [i, j] {
        if index >= len {
            return Err(RmqError::OutOfBounds { index, len });
        }
    }
    Ok((i.min(j), i.max(j)))
}

fn floor_log2(x: usize) -> usize {
    debug_assert!(x > 0);
    (usize::BITS - 1 - x.leading_zeros()) as usize
}

/// Leftmost-tie argmin of two candidates where `a <= b` as indices.
#[inline]
fn pick<T: Ord>(values: &[T], a: usize, b: usize) -> usize {
    if values[b] < values[a] {
        b
    } else {
        a
    }
}

/// Common interface of the RMQ engines. Ranges are inclusive and either
/// endpoint order is accepted.
pub trait RangeMin {
    fn len(&self) -> usize;

    fn argmin(&self, i: usize, j: usize) -> Result<usize, RmqError>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct SparseTable<T> {
    values: Vec<T>,
    /// `table[k][i]` is the argmin over `[i, i + 2^k)`.
    table: Vec<Vec<u32>>,
}

impl<T: Ord + Copy> SparseTable<T> {
    pub fn new(values: Vec<T>) -> Result<Self, RmqError> {
        let n = values.len();
        if n == 0 {
            return Err(RmqError::Empty);
        }
        let mut table = vec![(0..n as u32).collect::<Vec<u32>>()];
        let mut k = 1;
        while (1 << k) <= n {
            let half = 1 << (k - 1);
            let prev = &table[k - 1];
            let row = (0..=n - (1 << k))
                .map(|i| pick(&values, prev[i] as usize, prev[i + half] as usize) as u32)
                .collect();
            table.push(row);
            k += 1;
        }
        Ok(SparseTable { values, table })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Argmin over `[lo, hi]`, `lo <= hi`, no bounds check.
    fn query_unchecked(&self, lo: usize, hi: usize) -> usize {
        let k = floor_log2(hi - lo + 1);
        let row = &self.table[k];
        pick(
            &self.values,
            row[lo] as usize,
            row[hi + 1 - (1 << k)] as usize,
        )
    }
}

impl<T: Ord + Copy> RangeMin for SparseTable<T> {
    fn len(&self) -> usize {
        self.values.len()
    }

    fn argmin(&self, i: usize, j: usize) -> Result<usize, RmqError> {
        let (lo, hi) = check(i, j, self.values.len())?;
        Ok(self.query_unchecked(lo, hi))
    }
}

pub fn build_sparse<T: Ord + Copy>(values: &[T]) -> Result<SparseTable<T>, RmqError> {
    SparseTable::new(values.to_vec())
}

pub fn query_sparse<T: Ord + Copy>(
    st: &SparseTable<T>,
    i: usize,
    j: usize,
) -> Result<usize, RmqError> {
    st.argmin(i, j)
}

const NONE: u32 = u32::MAX;

/// Min-heap ordered binary tree whose in-order traversal is `0..n`. Among
/// equal values the leftmost is the ancestor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartesianTree {
    parent: Vec<u32>,
    left: Vec<u32>,
    right: Vec<u32>,
    root: usize,
}

fn link(x: u32) -> Option<usize> {
    (x != NONE).then_some(x as usize)
}

impl CartesianTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        link(self.parent[v])
    }

    pub fn left(&self, v: usize) -> Option<usize> {
        link(self.left[v])
    }

    pub fn right(&self, v: usize) -> Option<usize> {
        link(self.right[v])
    }

    pub fn in_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut cur = Some(self.root);
        while cur.is_some() || !stack.is_empty() {
            while let Some(v) = cur {
                stack.push(v);
                cur = self.left(v);
            }
            let v = stack.pop().unwrap();
            out.push(v);
            cur = self.right(v);
        }
        out
    }
}

/// Builds the Cartesian tree with a stack holding the rightmost spine.
pub fn build_cartesian<T: Ord>(values: &[T]) -> Result<CartesianTree, RmqError> {
    let n = values.len();
    if n == 0 {
        return Err(RmqError::Empty);
    }
    let mut parent = vec![NONE; n];
    let mut left = vec![NONE; n];
    let mut right = vec![NONE; n];
    let mut spine: Vec<u32> = Vec::with_capacity(n);
    for i in 0..n {
        let mut last = NONE;
        // strict: an equal earlier value stays the ancestor
        while let Some(&top) = spine.last() {
            if values[top as usize] > values[i] {
                last = spine.pop().unwrap();
            } else {
                break;
            }
        }
        if last != NONE {
            left[i] = last;
            parent[last as usize] = i as u32;
        }
        if let Some(&top) = spine.last() {
            right[top as usize] = i as u32;
            parent[i] = top;
        }
        spine.push(i as u32);
    }
    Ok(CartesianTree {
        parent,
        left,
        right,
        root: spine[0] as usize,
    })
}

/// Depth-first tour of a tree: node labels `e`, depths `l` (both `2n - 1`
/// long) and first occurrence `r` of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerTour {
    pub e: Vec<usize>,
    pub l: Vec<usize>,
    pub r: Vec<usize>,
}

pub fn euler_tour(tree: &CartesianTree) -> EulerTour {
    let n = tree.len();
    let mut e = Vec::with_capacity(2 * n - 1);
    let mut l = Vec::with_capacity(2 * n - 1);
    let mut r = vec![usize::MAX; n];
    // (node, depth, next child to visit: 0 = left, 1 = right, 2 = done)
    let mut stack: Vec<(usize, usize, u8)> = vec![(tree.root(), 0, 0)];
    r[tree.root()] = 0;
    e.push(tree.root());
    l.push(0);
    while let Some(frame) = stack.last_mut() {
        let (v, depth, state) = *frame;
        frame.2 += 1;
        let child = match state {
            0 => tree.left(v),
            1 => tree.right(v),
            _ => {
                stack.pop();
                if let Some(&(p, pd, _)) = stack.last() {
                    e.push(p);
                    l.push(pd);
                }
                continue;
            }
        };
        if let Some(c) = child {
            r[c] = e.len();
            e.push(c);
            l.push(depth + 1);
            stack.push((c, depth + 1, 0));
        }
    }
    EulerTour { e, l, r }
}

/// Constant-time RMQ over an array whose neighbours differ by exactly one.
#[derive(Debug, Clone)]
pub struct PlusMinusOneRmq {
    values: Vec<usize>,
    block: usize,
    /// argmin (global index) of each block
    block_min: Vec<usize>,
    block_table: SparseTable<(usize, usize)>,
    block_type: Vec<u32>,
    /// `lookup[type][i * block + j]`: in-block argmin over `[i, j]`.
    lookup: Vec<Vec<u8>>,
}

impl PlusMinusOneRmq {
    pub fn new(values: Vec<usize>) -> Result<Self, RmqError> {
        let m = values.len();
        if m == 0 {
            return Err(RmqError::Empty);
        }
        debug_assert!(values.windows(2).all(|w| w[0].abs_diff(w[1]) == 1));
        let block = (floor_log2(m) / 2).max(1);
        let blocks = m.div_ceil(block);

        let mut block_min = Vec::with_capacity(blocks);
        let mut block_type = Vec::with_capacity(blocks);
        for b in 0..blocks {
            let start = b * block;
            let end = (start + block).min(m);
            let mut best = start;
            let mut code = 0u32;
            for k in start + 1..start + block {
                // past the end: padded with ascents
                if k >= end || values[k] > values[k - 1] {
                    code |= 1 << (k - start - 1);
                }
                if k < end && values[k] < values[best] {
                    best = k;
                }
            }
            block_min.push(best);
            block_type.push(code);
        }

        let lookup = (0..1u32 << (block - 1))
            .map(|code| in_block_table(code, block))
            .collect();
        let keyed: Vec<(usize, usize)> = block_min.iter().map(|&p| (values[p], p)).collect();
        let block_table = SparseTable::new(keyed)?;
        Ok(PlusMinusOneRmq {
            values,
            block,
            block_min,
            block_table,
            block_type,
            lookup,
        })
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn block_types(&self) -> &[u32] {
        &self.block_type
    }

    /// In-block argmin (offset) for a block of the given type.
    pub fn in_block(&self, code: u32, i: usize, j: usize) -> usize {
        usize::from(self.lookup[code as usize][i * self.block + j])
    }

    fn within(&self, b: usize, i: usize, j: usize) -> usize {
        b * self.block + self.in_block(self.block_type[b], i, j)
    }

    fn query_unchecked(&self, lo: usize, hi: usize) -> usize {
        let (bl, bh) = (lo / self.block, hi / self.block);
        if bl == bh {
            return self.within(bl, lo % self.block, hi % self.block);
        }
        let mut best = self.within(bl, lo % self.block, self.block - 1);
        if bh > bl + 1 {
            let mid = self.block_table.query_unchecked(bl + 1, bh - 1);
            best = pick(&self.values, best, self.block_min[mid]);
        }
        let tail = self.within(bh, 0, hi % self.block);
        pick(&self.values, best, tail)
    }
}

/// Argmin table for one block type; depths are reconstructed from the code
/// relative to a start of 0.
fn in_block_table(code: u32, block: usize) -> Vec<u8> {
    let mut depth = vec![0i64; block];
    for k in 1..block {
        depth[k] = depth[k - 1] + if code >> (k - 1) & 1 == 1 { 1 } else { -1 };
    }
    let mut table = vec![0u8; block * block];
    for i in 0..block {
        let mut best = i;
        for j in i..block {
            if depth[j] < depth[best] {
                best = j;
            }
            table[i * block + j] = best as u8;
        }
    }
    table
}

impl RangeMin for PlusMinusOneRmq {
    fn len(&self) -> usize {
        self.values.len()
    }

    fn argmin(&self, i: usize, j: usize) -> Result<usize, RmqError> {
        let (lo, hi) = check(i, j, self.values.len())?;
        Ok(self.query_unchecked(lo, hi))
    }
}

pub fn query_pm1(structure: &PlusMinusOneRmq, i: usize, j: usize) -> Result<usize, RmqError> {
    structure.argmin(i, j)
}

/// RMQ answered as the lowest common ancestor in the Cartesian tree, found
/// by a ±1 RMQ over the Euler-tour depths.
#[derive(Debug, Clone)]
pub struct LcaRmq {
    tree: CartesianTree,
    tour: EulerTour,
    pm1: PlusMinusOneRmq,
}

impl LcaRmq {
    pub fn new<T: Ord>(values: &[T]) -> Result<Self, RmqError> {
        let tree = build_cartesian(values)?;
        let tour = euler_tour(&tree);
        let pm1 = PlusMinusOneRmq::new(tour.l.clone())?;
        Ok(LcaRmq { tree, tour, pm1 })
    }

    pub fn tree(&self) -> &CartesianTree {
        &self.tree
    }

    pub fn tour(&self) -> &EulerTour {
        &self.tour
    }

    pub fn pm1(&self) -> &PlusMinusOneRmq {
        &self.pm1
    }
}

impl RangeMin for LcaRmq {
    fn len(&self) -> usize {
        self.tree.len()
    }

    fn argmin(&self, i: usize, j: usize) -> Result<usize, RmqError> {
        check(i, j, self.tree.len())?;
        let (a, b) = (self.tour.r[i], self.tour.r[j]);
        let pos = self.pm1.query_unchecked(a.min(b), a.max(b));
        Ok(self.tour.e[pos])
    }
}

/// One-shot RMQ through the Cartesian-tree pipeline.
pub fn rmq_via_lca<T: Ord>(values: &[T], i: usize, j: usize) -> Result<usize, RmqError> {
    LcaRmq::new(values)?.argmin(i, j)
}

/// Which engine backs an [`RmqStructure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RmqEngine {
    #[default]
    Sparse,
    EulerTour,
}

/// RMQ over `usize` values with a selectable engine.
#[derive(Debug, Clone)]
pub enum RmqStructure {
    Sparse(SparseTable<usize>),
    EulerTour(Box<LcaRmq>),
}

impl RmqStructure {
    pub fn build(values: &[usize], engine: RmqEngine) -> Result<Self, RmqError> {
        Ok(match engine {
            RmqEngine::Sparse => RmqStructure::Sparse(build_sparse(values)?),
            RmqEngine::EulerTour => RmqStructure::EulerTour(Box::new(LcaRmq::new(values)?)),
        })
    }

    pub fn engine(&self) -> RmqEngine {
        match self {
            RmqStructure::Sparse(_) => RmqEngine::Sparse,
            RmqStructure::EulerTour(_) => RmqEngine::EulerTour,
        }
    }
}

impl RangeMin for RmqStructure {
    fn len(&self) -> usize {
        match self {
            RmqStructure::Sparse(s) => s.len(),
            RmqStructure::EulerTour(s) => s.len(),
        }
    }

    fn argmin(&self, i: usize, j: usize) -> Result<usize, RmqError> {
        match self {
            RmqStructure::Sparse(s) => s.argmin(i, j),
            RmqStructure::EulerTour(s) => s.argmin(i, j),
        }
    }
}
