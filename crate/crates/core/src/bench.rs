//! Serial vs parallel suffix-array construction timings.
//!
//! Each cell (size, seed) is generated once, cross-checked (all selected
//! implementations must produce the same suffix array), then timed: one
//! discarded warmup run followed by `repetitions` timed runs, of which the
//! median is recorded.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::parallel_sort::{SortConfig, SortEngine, SortError};
use crate::sequence::{encode, gen_random, NPolicy, RankedText, UNIFORM};
use crate::suffix_index::{build_sa_dc3, build_sa_oracle, SuffixArray};

/// Default size ladder.
pub const DEFAULT_SIZES: [usize; 7] = [256, 1024, 4096, 16384, 65536, 262144, 1048576];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("suffix arrays disagree for n={n} seed={seed}: {label} differs from serial-dc3")]
    Mismatch {
        n: usize,
        seed: u64,
        label: Implementation,
    },
    #[error("speedup needs matching cells: baseline n={baseline_n} seed={baseline_seed}, subject n={subject_n} seed={subject_seed}")]
    CellMismatch {
        baseline_n: usize,
        baseline_seed: u64,
        subject_n: usize,
        subject_seed: u64,
    },
    #[error("invalid benchmark parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad csv field {field}: {value:?}")]
    Parse { field: &'static str, value: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Implementation {
    SerialDc3,
    ParallelDc3,
    Oracle,
}

impl Implementation {
    pub const ALL: [Implementation; 3] = [
        Implementation::SerialDc3,
        Implementation::ParallelDc3,
        Implementation::Oracle,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Implementation::SerialDc3 => "serial-dc3",
            Implementation::ParallelDc3 => "parallel-dc3",
            Implementation::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Implementation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Implementation {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Implementation::ALL
            .into_iter()
            .find(|i| i.label() == s)
            .ok_or_else(|| BenchError::Parse {
                field: "label",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub label: Implementation,
    pub n: usize,
    pub seed: u64,
    pub chunk32: bool,
    pub reps: usize,
    /// Median wall time in seconds.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub n: usize,
    pub baseline: Implementation,
    pub subject: Implementation,
    /// `baseline.seconds / subject.seconds`, unrounded.
    pub ratio: f64,
}

impl SpeedupRow {
    /// Ratio rounded to two decimals.
    pub fn rounded(&self) -> f64 {
        round2(self.ratio)
    }
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

fn build(label: Implementation, text: &RankedText, engine: &SortEngine) -> SuffixArray {
    match label {
        Implementation::SerialDc3 => build_sa_dc3(text),
        Implementation::ParallelDc3 => engine.build_sa(text),
        Implementation::Oracle => build_sa_oracle(text),
    }
}

fn time_one(label: Implementation, text: &RankedText, engine: &SortEngine, reps: usize) -> f64 {
    std::hint::black_box(build(label, text, engine));
    let times = (0..reps)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(build(label, text, engine));
            start.elapsed().as_secs_f64().max(1e-9)
        })
        .collect();
    median(times)
}

/// Runs every implementation on every (size, seed) cell.
pub fn run_bench(
    sizes: &[usize],
    seeds: &[u64],
    config: &SortConfig,
    repetitions: usize,
) -> Result<Vec<BenchRecord>, BenchError> {
    run_bench_with(
        sizes,
        seeds,
        config,
        repetitions,
        &Implementation::ALL,
        |_| {},
    )
}

/// As [`run_bench`] over a chosen set of implementations; `progress` sees
/// each record as soon as it is measured.
pub fn run_bench_with(
    sizes: &[usize],
    seeds: &[u64],
    config: &SortConfig,
    repetitions: usize,
    implementations: &[Implementation],
    mut progress: impl FnMut(&BenchRecord),
) -> Result<Vec<BenchRecord>, BenchError> {
    if sizes.contains(&0) {
        return Err(BenchError::Params("sizes must be at least 1".into()));
    }
    if repetitions == 0 {
        return Err(BenchError::Params("repetitions must be at least 1".into()));
    }
    let engine = SortEngine::new(config.clone())?;
    let chunk32 = config.chunk_is_multiple_of_32();
    let mut records = Vec::new();
    for &n in sizes {
        for &seed in seeds {
            let seq = gen_random(n, seed, UNIFORM).expect("uniform weights are valid");
            let text = encode(&seq, NPolicy::Reject).expect("generated bases are valid");

            let reference = build_sa_dc3(&text);
            for &label in implementations {
                if label != Implementation::SerialDc3 && build(label, &text, &engine) != reference {
                    return Err(BenchError::Mismatch { n, seed, label });
                }
            }
            for &label in implementations {
                let record = BenchRecord {
                    label,
                    n,
                    seed,
                    chunk32,
                    reps: repetitions,
                    seconds: time_one(label, &text, &engine, repetitions),
                };
                progress(&record);
                records.push(record);
            }
        }
    }
    Ok(records)
}

/// Speedup of `subject` over `baseline`; both must come from the same cell.
pub fn compute_speedup(
    baseline: &BenchRecord,
    subject: &BenchRecord,
) -> Result<SpeedupRow, BenchError> {
    if baseline.n != subject.n || baseline.seed != subject.seed {
        return Err(BenchError::CellMismatch {
            baseline_n: baseline.n,
            baseline_seed: baseline.seed,
            subject_n: subject.n,
            subject_seed: subject.seed,
        });
    }
    Ok(SpeedupRow {
        n: baseline.n,
        baseline: baseline.label,
        subject: subject.label,
        ratio: baseline.seconds / subject.seconds,
    })
}

/// serial-dc3 over parallel-dc3 and oracle over serial-dc3, per cell.
pub fn speedup_rows(records: &[BenchRecord]) -> Vec<SpeedupRow> {
    let find = |label, n, seed| {
        records
            .iter()
            .find(|r| r.label == label && r.n == n && r.seed == seed)
    };
    let mut rows = Vec::new();
    for r in records
        .iter()
        .filter(|r| r.label == Implementation::SerialDc3)
    {
        for (base, subj) in [
            (Implementation::SerialDc3, Implementation::ParallelDc3),
            (Implementation::Oracle, Implementation::SerialDc3),
        ] {
            if let (Some(b), Some(s)) = (find(base, r.n, r.seed), find(subj, r.n, r.seed)) {
                rows.push(compute_speedup(b, s).expect("same cell"));
            }
        }
    }
    rows
}

/// Notes cells where serial construction got faster as n grew.
pub fn advisories(records: &[BenchRecord]) -> Vec<String> {
    let mut serial: Vec<&BenchRecord> = records
        .iter()
        .filter(|r| r.label == Implementation::SerialDc3)
        .collect();
    serial.sort_by_key(|r| (r.seed, r.n));
    serial
        .windows(2)
        .filter(|w| w[0].seed == w[1].seed && w[1].seconds < w[0].seconds)
        .map(|w| {
            format!(
                "serial-dc3 seed {}: n={} took {}s, less than n={} at {}s",
                w[0].seed, w[1].n, w[1].seconds, w[0].n, w[0].seconds
            )
        })
        .collect()
}

pub const RECORD_HEADER: [&str; 6] = ["label", "n", "seed", "chunk32", "reps", "seconds"];
pub const SPEEDUP_HEADER: [&str; 4] = ["n", "baseline", "subject", "ratio"];

/// Writes records sorted by label, n, seed. `seconds` uses the shortest
/// decimal that parses back to the same value.
pub fn write_csv<W: Write>(records: &[BenchRecord], sink: W) -> Result<(), BenchError> {
    let mut sorted: Vec<&BenchRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (a.label.label(), a.n, a.seed, a.chunk32).cmp(&(b.label.label(), b.n, b.seed, b.chunk32))
    });
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(RECORD_HEADER)?;
    for r in sorted {
        w.write_record([
            r.label.label().to_string(),
            r.n.to_string(),
            r.seed.to_string(),
            r.chunk32.to_string(),
            r.reps.to_string(),
            r.seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_speedup_csv<W: Write>(rows: &[SpeedupRow], sink: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(SPEEDUP_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.baseline.label().to_string(),
            r.subject.label().to_string(),
            format!("{:.2}", r.ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    name: &'static str,
) -> Result<T, BenchError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| BenchError::Parse {
        field: name,
        value: raw.to_string(),
    })
}

pub fn read_csv<R: Read>(source: R) -> Result<Vec<BenchRecord>, BenchError> {
    let mut r = csv::Reader::from_reader(source);
    let header = r.headers()?.clone();
    if header.iter().ne(RECORD_HEADER) {
        return Err(BenchError::Parse {
            field: "header",
            value: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(BenchRecord {
                label: field(&rec, 0, "label")?,
                n: field(&rec, 1, "n")?,
                seed: field(&rec, 2, "seed")?,
                chunk32: field(&rec, 3, "chunk32")?,
                reps: field(&rec, 4, "reps")?,
                seconds: field(&rec, 5, "seconds")?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(label: Implementation, n: usize, seconds: f64) -> BenchRecord {
        BenchRecord {
            label,
            n,
            seed: 1,
            chunk32: true,
            reps: 5,
            seconds,
        }
    }

    #[test]
    fn speedup_fixtures() {
        let base = record(Implementation::SerialDc3, 1048576, 98.253);
        let subj = record(Implementation::ParallelDc3, 1048576, 8.335);
        let row = compute_speedup(&base, &subj).unwrap();
        assert!((row.rounded() - 11.79).abs() < 1e-9);
        let same = compute_speedup(&base, &base).unwrap();
        assert_eq!(same.rounded(), 1.0);
        let slow = compute_speedup(
            &record(Implementation::SerialDc3, 256, 0.001),
            &record(Implementation::ParallelDc3, 256, 0.002),
        )
        .unwrap();
        assert_eq!(slow.rounded(), 0.5);
        let other = record(Implementation::ParallelDc3, 1024, 1.0);
        assert!(matches!(
            compute_speedup(&base, &other),
            Err(BenchError::CellMismatch { .. })
        ));
    }

    #[test]
    fn speedup_antisymmetric() {
        let a = record(Implementation::SerialDc3, 10, 0.37);
        let b = record(Implementation::ParallelDc3, 10, 0.11);
        let ab = compute_speedup(&a, &b).unwrap().ratio;
        let ba = compute_speedup(&b, &a).unwrap().ratio;
        assert!((ab * ba - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_shapes() {
        let mut out = Vec::new();
        write_csv(&[], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "label,n,seed,chunk32,reps,seconds\n"
        );
        let mut out = Vec::new();
        write_csv(
            &[record(Implementation::Oracle, 256, 0.000_000_1)],
            &mut out,
        )
        .unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(
            s,
            "label,n,seed,chunk32,reps,seconds\noracle,256,1,true,5,0.0000001\n"
        );
        let mut out = Vec::new();
        let row = compute_speedup(
            &record(Implementation::SerialDc3, 8, 3.0),
            &record(Implementation::ParallelDc3, 8, 2.0),
        )
        .unwrap();
        write_speedup_csv(&[row], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "n,baseline,subject,ratio\n8,serial-dc3,parallel-dc3,1.50\n"
        );
    }

    #[test]
    fn csv_round_trip_sorted() {
        let records = vec![
            record(Implementation::SerialDc3, 4096, 0.0123456789),
            record(Implementation::Oracle, 256, 1.5e-5),
            record(Implementation::SerialDc3, 256, 1.0 / 3.0),
            record(Implementation::ParallelDc3, 256, 123.0),
        ];
        let mut out = Vec::new();
        write_csv(&records, &mut out).unwrap();
        let back = read_csv(out.as_slice()).unwrap();
        let mut expect = records.clone();
        expect.sort_by(|a, b| (a.label.label(), a.n).cmp(&(b.label.label(), b.n)));
        assert_eq!(back, expect);
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn run_small_cell() {
        let config = SortConfig {
            workers: 2,
            chunk_size: 64,
            ..SortConfig::default()
        };
        let records = run_bench(&[256], &[3], &config, 1).unwrap();
        assert_eq!(records.len(), 3);
        assert!(records
            .iter()
            .all(|r| r.seconds > 0.0 && r.n == 256 && r.chunk32));
        assert_eq!(speedup_rows(&records).len(), 2);
        assert!(run_bench(&[0], &[1], &config, 1).is_err());
        assert!(run_bench(&[8], &[1], &config, 0).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
