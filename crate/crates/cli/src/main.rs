//! `saix`: build, query and benchmark suffix-array indexes of DNA sequences.

mod selftest;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use saix_core::bench::{self, BenchError, Implementation};
use saix_core::index_store::{self, IndexError};
use saix_core::overlap::{common_prefix, longest_overlap, overlap_report, QueryError};
use saix_core::parallel_sort::{default_workers, SortConfig, SortEngine};
use saix_core::sequence::{encode, parse_fasta, DnaSequence, NPolicy};
use saix_core::suffix_index::{build_lcp, build_sa_dc3};
use saix_core::LcpQueryEngine;

const EXIT_GENERIC: u8 = 1;
const EXIT_MISSING_INPUT: u8 = 2;
const EXIT_BAD_INPUT: u8 = 3;
const EXIT_BAD_QUERY: u8 = 4;
const EXIT_MISMATCH: u8 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "saix",
    version,
    about = "Suffix-array indexes and overlap queries for DNA sequences"
)]
struct Cli {
    /// Print extra diagnostics to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a .saix index from the single record of a FASTA file.
    Index {
        fasta: PathBuf,
        /// Output path; defaults to the input path with a .saix extension.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = EngineChoice::Serial)]
        engine: EngineChoice,
        /// Accept the ambiguity code N (encoded after T).
        #[arg(long)]
        allow_n: bool,
        #[command(flatten)]
        sort: SortArgs,
    },
    /// Longest common prefix of the suffixes starting at I and J.
    Query { index: PathBuf, i: usize, j: usize },
    /// Longest region shared by the first records of two FASTA files.
    Overlap {
        fasta_a: PathBuf,
        fasta_b: PathBuf,
        #[arg(long)]
        allow_n: bool,
    },
    /// Time serial vs parallel suffix-array construction.
    Bench {
        /// Comma-separated input sizes.
        #[arg(long, value_delimiter = ',', default_values_t = bench::DEFAULT_SIZES)]
        sizes: Vec<usize>,
        /// Comma-separated generator seeds.
        #[arg(long = "seed", visible_alias = "seeds", value_delimiter = ',', default_values_t = [1u64])]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Round the chunk size up to a multiple of 32.
        #[arg(long)]
        align32: bool,
        /// Skip the comparison-sort baseline.
        #[arg(long)]
        no_oracle: bool,
        #[arg(long, default_value = "bench.csv")]
        out: PathBuf,
        /// Speedup table; defaults to <out stem>_speedup.csv.
        #[arg(long)]
        speedup_out: Option<PathBuf>,
        #[command(flatten)]
        sort: SortArgs,
    },
    /// Check the built-in reference fixtures.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineChoice {
    Serial,
    Parallel,
}

#[derive(Debug, Args)]
struct SortArgs {
    /// Worker threads for the parallel engine (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 4096)]
    chunk: usize,
    /// Bits per radix pass; 1 runs the per-bit split kernel.
    #[arg(long, default_value_t = 1)]
    digit_bits: u32,
}

impl SortArgs {
    fn config(&self, align32: bool) -> SortConfig {
        let digit_bits = self.digit_bits;
        SortConfig {
            digit_bits,
            total_bits: 32u32.div_ceil(digit_bits.max(1)) * digit_bits.max(1),
            chunk_size: self.chunk,
            workers: self.workers.unwrap_or_else(default_workers),
            align_chunks_to_32: align32,
        }
    }
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| {
        let code = if e.kind() == io::ErrorKind::NotFound {
            EXIT_MISSING_INPUT
        } else {
            EXIT_GENERIC
        };
        CliError::new(code, format!("{}: {e}", path.display()))
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::new(EXIT_GENERIC, format!("{}: {e}", path.display())))
}

fn read_single_record(path: &Path, policy: NPolicy) -> Result<DnaSequence, CliError> {
    let records = parse_fasta(BufReader::new(open(path)?), policy)
        .map_err(|e| CliError::new(EXIT_BAD_INPUT, format!("{}: {e}", path.display())))?;
    match records.len() {
        1 => Ok(records.into_iter().next().unwrap()),
        0 => Err(CliError::new(EXIT_BAD_INPUT, format!("{}: no FASTA records", path.display()))),
        k => Err(CliError::new(
            EXIT_BAD_INPUT,
            format!(
                "{}: {k} records found; an index covers exactly one sequence (split the file, or use `saix overlap` to compare two)",
                path.display()
            ),
        )),
    }
}

fn policy(allow_n: bool) -> NPolicy {
    if allow_n {
        NPolicy::KeepN
    } else {
        NPolicy::Reject
    }
}

fn cmd_index(
    fasta: &Path,
    out: Option<PathBuf>,
    engine: EngineChoice,
    allow_n: bool,
    sort: &SortArgs,
) -> Result<(), CliError> {
    let config = sort.config(false);
    config
        .validate()
        .map_err(|e| CliError::new(EXIT_GENERIC, e.to_string()))?;
    let record = read_single_record(fasta, policy(allow_n))?;
    let text = encode(&record, policy(allow_n))
        .map_err(|e| CliError::new(EXIT_BAD_INPUT, e.to_string()))?;

    let start = Instant::now();
    let sa = match engine {
        EngineChoice::Serial => build_sa_dc3(&text),
        EngineChoice::Parallel => SortEngine::new(config)
            .map_err(|e| CliError::new(EXIT_GENERIC, e.to_string()))?
            .build_sa(&text),
    };
    let lcp = build_lcp(&text, &sa);
    let elapsed = start.elapsed().as_secs_f64();
    let (n, sigma) = (text.len(), text.sigma());
    let index = LcpQueryEngine::from_parts(text, sa, lcp, Default::default())
        .map_err(|e| CliError::new(EXIT_MISMATCH, e.to_string()))?;

    let out = out.unwrap_or_else(|| fasta.with_extension(index_store::EXTENSION));
    index_store::save_index(&index, create(&out)?)
        .map_err(|e| CliError::new(EXIT_GENERIC, format!("{}: {e}", out.display())))?;
    println!("indexed n={n} sigma={sigma} in {elapsed:.6}s");
    Ok(())
}

fn cmd_query(index: &Path, i: usize, j: usize) -> Result<(), CliError> {
    let engine = index_store::load_index(BufReader::new(open(index)?)).map_err(|e| {
        let code = match e {
            IndexError::Io(_) => EXIT_GENERIC,
            _ => EXIT_BAD_INPUT,
        };
        CliError::new(code, format!("{}: {e}", index.display()))
    })?;
    let prefix = common_prefix(&engine, i, j).map_err(|e| match e {
        QueryError::OutOfRange { .. } => CliError::new(EXIT_BAD_QUERY, e.to_string()),
        QueryError::Inconsistent => CliError::new(EXIT_MISMATCH, e.to_string()),
    })?;
    println!("{}", prefix.len());
    println!("{prefix}");
    Ok(())
}

fn cmd_overlap(a: &Path, b: &Path, allow_n: bool) -> Result<(), CliError> {
    let sa = read_single_record(a, policy(allow_n))?;
    let sb = read_single_record(b, policy(allow_n))?;
    let result =
        longest_overlap(&sa, &sb).map_err(|e| CliError::new(EXIT_BAD_INPUT, e.to_string()))?;
    let report = overlap_report(&result, &sa, &sb);
    println!("{}", report.to_json());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    sizes: &[usize],
    seeds: &[u64],
    reps: usize,
    align32: bool,
    no_oracle: bool,
    out: &Path,
    speedup_out: Option<PathBuf>,
    sort: &SortArgs,
    verbose: bool,
) -> Result<(), CliError> {
    let config = sort.config(align32);
    let implementations: Vec<Implementation> = Implementation::ALL
        .into_iter()
        .filter(|&i| !(no_oracle && i == Implementation::Oracle))
        .collect();
    let records = bench::run_bench_with(sizes, seeds, &config, reps, &implementations, |r| {
        if verbose {
            eprintln!(
                "{:<13} n={:<8} seed={} {:.6}s",
                r.label.label(),
                r.n,
                r.seed,
                r.seconds
            );
        }
    })
    .map_err(|e| match e {
        BenchError::Mismatch { .. } => CliError::new(EXIT_MISMATCH, e.to_string()),
        _ => CliError::new(EXIT_GENERIC, e.to_string()),
    })?;
    let rows = bench::speedup_rows(&records);

    let speedup_out = speedup_out.unwrap_or_else(|| {
        let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("bench");
        out.with_file_name(format!("{stem}_speedup.csv"))
    });
    let csv_err = |e: BenchError| CliError::new(EXIT_GENERIC, e.to_string());
    bench::write_csv(&records, create(out)?).map_err(csv_err)?;
    bench::write_speedup_csv(&rows, create(&speedup_out)?).map_err(csv_err)?;

    let mut stdout = io::stdout().lock();
    let _ = writeln!(
        stdout,
        "{:<13} {:>9} {:>6} {:>14}",
        "label", "n", "seed", "median s"
    );
    for r in &records {
        let _ = writeln!(
            stdout,
            "{:<13} {:>9} {:>6} {:>14.6}",
            r.label.label(),
            r.n,
            r.seed,
            r.seconds
        );
    }
    for row in &rows {
        let _ = writeln!(
            stdout,
            "speedup n={:<8} {} / {} = {:.2}",
            row.n,
            row.baseline.label(),
            row.subject.label(),
            row.ratio
        );
    }
    for note in bench::advisories(&records) {
        let _ = writeln!(stdout, "note: {note}");
    }
    let _ = writeln!(
        stdout,
        "wrote {} and {}",
        out.display(),
        speedup_out.display()
    );
    Ok(())
}

fn cmd_selftest() -> Result<(), CliError> {
    let results = selftest::run_all();
    for (name, ok) in &results {
        println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
    let failed = results.iter().filter(|(_, ok)| !ok).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::new(
            EXIT_MISMATCH,
            format!("{failed} fixture(s) failed"),
        ))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Index {
            fasta,
            out,
            engine,
            allow_n,
            sort,
        } => cmd_index(&fasta, out, engine, allow_n, &sort),
        Command::Query { index, i, j } => cmd_query(&index, i, j),
        Command::Overlap {
            fasta_a,
            fasta_b,
            allow_n,
        } => cmd_overlap(&fasta_a, &fasta_b, allow_n),
        Command::Bench {
            sizes,
            seeds,
            reps,
            align32,
            no_oracle,
            out,
            speedup_out,
            sort,
        } => cmd_bench(
            &sizes,
            &seeds,
            reps,
            align32,
            no_oracle,
            &out,
            speedup_out,
            &sort,
            cli.verbose,
        ),
        Command::Selftest => cmd_selftest(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_GENERIC)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("saix: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
