//! Built-in fixture checks for `saix selftest`.

use std::collections::BTreeMap;

use saix_core::parallel_sort::{parallel_build_sa, split_by_bit, SortConfig};
use saix_core::rmq::{build_sparse, LcaRmq, RangeMin};
use saix_core::sequence::{encode, DnaSequence, NPolicy, RankedText};
use saix_core::suffix_index::{build_lcp, build_sa_dc3, build_sa_oracle, sample_ranks};

pub const FIXTURE_TEXT: &str = "ATTGCTAC";
pub const FIXTURE_SA: [usize; 8] = [6, 0, 7, 4, 3, 5, 2, 1];
pub const FIXTURE_SAMPLE_RANKS: [(usize, usize); 5] = [(1, 5), (2, 4), (4, 2), (5, 3), (7, 1)];
pub const FIXTURE_RANKS: [usize; 8] = [2, 8, 7, 5, 4, 6, 1, 3];
pub const FIXTURE_LCP: [usize; 8] = [0, 1, 0, 1, 0, 0, 1, 1];

pub fn fixture_text() -> RankedText {
    encode(&DnaSequence::new("fixture", FIXTURE_TEXT), NPolicy::Reject)
        .expect("fixture is valid DNA")
}

pub fn check_sa(sa: &[usize]) -> bool {
    sa == FIXTURE_SA
}

pub fn check_sample_ranks(ranks: &BTreeMap<usize, usize>) -> bool {
    ranks.iter().map(|(&p, &r)| (p, r)).eq(FIXTURE_SAMPLE_RANKS)
}

/// `rank` is 0-based; the table is 1-based.
pub fn check_ranks(rank: &[usize]) -> bool {
    rank.iter().map(|r| r + 1).eq(FIXTURE_RANKS)
}

pub fn check_lcp(lcp: &[usize]) -> bool {
    lcp == FIXTURE_LCP
}

pub fn check_split() -> bool {
    let (out, st) = split_by_bit(&[0b001, 0b100, 0b111, 0b101, 0b110], 0);
    st.e == [0, 1, 0, 0, 1]
        && st.f == [0, 0, 1, 1, 1]
        && st.total_false == 2
        && out == [0b100, 0b110, 0b001, 0b111, 0b101]
}

/// Sparse table and Euler-tour RMQ agree with a linear scan on every range of
/// deterministic pseudo-random arrays.
pub fn check_rmq_agreement() -> bool {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for round in 0..200 {
        let n = 1 + round % 64;
        let values: Vec<u64> = (0..n).map(|_| next() % 8).collect();
        let sparse = build_sparse(&values).expect("non-empty");
        let lca = LcaRmq::new(&values).expect("non-empty");
        for i in 0..n {
            let mut best = i;
            for j in i..n {
                if values[j] < values[best] {
                    best = j;
                }
                if sparse.argmin(i, j) != Ok(best) || lca.argmin(j, i) != Ok(best) {
                    return false;
                }
            }
        }
    }
    true
}

/// Runs every fixture; returns `(name, passed)` pairs.
pub fn run_all() -> Vec<(&'static str, bool)> {
    let text = fixture_text();
    let oracle = build_sa_oracle(&text);
    let dc3 = build_sa_dc3(&text);
    let config = SortConfig {
        chunk_size: 3,
        ..SortConfig::default()
    };
    let parallel = parallel_build_sa(&text, &config)
        .map(|sa| sa.sa().to_vec())
        .unwrap_or_default();
    vec![
        ("fixture suffix array (oracle)", check_sa(oracle.sa())),
        ("fixture suffix array (serial dc3)", check_sa(dc3.sa())),
        ("fixture suffix array (parallel dc3)", check_sa(&parallel)),
        (
            "fixture sample ranks",
            check_sample_ranks(&sample_ranks(&text)),
        ),
        ("fixture rank array", check_ranks(dc3.rank())),
        (
            "fixture lcp array",
            check_lcp(build_lcp(&text, &dc3).as_slice()),
        ),
        ("split e-array and destinations", check_split()),
        ("rmq sparse vs euler-tour agreement", check_rmq_agreement()),
    ]
}
