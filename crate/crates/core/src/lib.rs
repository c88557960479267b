//! Suffix-array indexing for DNA sequences.
//!
//! * [`sequence`]: FASTA parsing, rank encoding, seeded random sequences.
//! * [`suffix_index`]: DC3 and comparison-sort suffix arrays, LCP arrays.
//! * [`rmq`]: sparse-table and Cartesian-tree/Euler-tour range minima.
//! * [`overlap`]: LCP queries between suffixes, longest common substring.
//! * [`parallel_sort`]: split-based radix sort and the parallel DC3 driver.
//! * [`index_store`]: the `.saix` binary index format.
//! * [`bench`]: serial vs parallel construction timings.

pub mod bench;
pub mod index_store;
pub mod overlap;
pub mod parallel_sort;
pub mod rmq;
pub mod sequence;
pub mod suffix_index;

pub use overlap::{longest_overlap, LcpQueryEngine, OverlapReport, OverlapResult};
pub use parallel_sort::{parallel_build_sa, SortConfig, SortEngine};
pub use sequence::{encode, parse_fasta, DnaSequence, NPolicy, RankedText};
pub use suffix_index::{build_lcp, build_sa_dc3, build_sa_oracle, LcpArray, SuffixArray};
