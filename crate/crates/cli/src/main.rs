use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use corank::coranker::co_rank_stats;
use corank::format::{read_keys, write_keys, FileFormat};
use corank::genbench::{run_experiment, verify_merge, write_csv, DistKind, Distribution, ExperimentConfig};
use corank::{merge_parallel_by, Execution};

#[derive(Parser)]
#[command(
    name = "corank",
    version,
    about = "Co-ranking queries and load-balanced parallel merging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the co-ranks of output rank I as "j k iterations comparisons".
    Corank {
        file_a: PathBuf,
        file_b: PathBuf,
        rank: usize,
        #[arg(long)]
        no_validate: bool,
    },
    /// Merge two sorted key files in parallel.
    Merge {
        file_a: PathBuf,
        file_b: PathBuf,
        out: PathBuf,
        #[arg(long, short = 't', default_value_t = 1)]
        threads: usize,
        /// Output format; defaults to the format of FILE_A.
        #[arg(long, value_parser = parse_format)]
        format: Option<FileFormat>,
        #[arg(long)]
        no_validate: bool,
    },
    /// Check that MERGED is the stable merge of FILE_A and FILE_B.
    Verify {
        file_a: PathBuf,
        file_b: PathBuf,
        merged: PathBuf,
        /// Above this many elements only sortedness and a checksum are checked.
        #[arg(long, default_value_t = usize::MAX)]
        verify_cap: usize,
    },
    /// Run generated benchmarks and write a CSV report.
    Bench {
        #[arg(long, default_value = "uniform", value_parser = parse_dist)]
        dist: DistKind,
        #[arg(long, default_value_t = 1_000_000)]
        m: usize,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        p_list: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = corank::genbench::DEFAULT_VERIFY_CAP)]
        verify_cap: usize,
    },
}

fn parse_dist(s: &str) -> Result<DistKind, String> {
    s.parse().map_err(|e: corank::Error| e.to_string())
}

fn parse_format(s: &str) -> Result<FileFormat, String> {
    match s {
        "text" => Ok(FileFormat::Text),
        "binary" => Ok(FileFormat::Binary),
        _ => Err(format!("unknown format `{s}` (expected text or binary)")),
    }
}

/// Exit codes: 0 success, 1 verification failure, 2 usage or contract error, 3 I/O error.
enum Failure {
    Verification(String),
    Contract(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Contract(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Contract(m) | Failure::Io(m) => m,
        }
    }
}

impl From<corank::Error> for Failure {
    fn from(e: corank::Error) -> Self {
        use corank::Error::*;
        match e {
            Io(_) | Format(_) | Csv(_) => Failure::Io(e.to_string()),
            _ => Failure::Contract(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn load(path: &Path, validate: bool) -> Result<(Vec<u64>, FileFormat), Failure> {
    read_keys(path, validate).map_err(|e| match e {
        corank::Error::Io(io) => Failure::Io(format!("{}: {io}", path.display())),
        other => other.into(),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    match cli.command {
        Command::Corank {
            file_a,
            file_b,
            rank,
            no_validate,
        } => {
            let (a, _) = load(&file_a, !no_validate)?;
            let (b, _) = load(&file_b, !no_validate)?;
            let s = co_rank_stats(rank, &a, &b, |x, y| x < y)?;
            writeln!(
                stdout,
                "{} {} {} {}",
                s.co_ranks.a, s.co_ranks.b, s.iterations, s.comparisons
            )?;
        }
        Command::Merge {
            file_a,
            file_b,
            out,
            threads,
            format,
            no_validate,
        } => {
            let (a, format_a) = load(&file_a, !no_validate)?;
            let (b, _) = load(&file_b, !no_validate)?;
            let mut merged = vec![0u64; a.len() + b.len()];
            let report = merge_parallel_by(&a, &b, &mut merged, threads, |x, y| x < y, Execution::Threads)?;
            write_keys(&out, &merged, format.unwrap_or(format_a))?;
            writeln!(
                stdout,
                "merged {} + {} keys with {} workers in {} ns; blocks {}..={}; {} comparisons",
                report.m,
                report.n,
                report.workers,
                report.wall_time.as_nanos(),
                report.min_block(),
                report.max_block(),
                report.comparisons
            )?;
        }
        Command::Verify {
            file_a,
            file_b,
            merged,
            verify_cap,
        } => {
            let (a, _) = load(&file_a, true)?;
            let (b, _) = load(&file_b, true)?;
            let (c, _) = load(&merged, false)?;
            let verdict = verify_merge(&a, &b, &c, verify_cap);
            if !verdict.is_verified() {
                return Err(Failure::Verification(verdict.to_string()));
            }
            writeln!(stdout, "{verdict}")?;
        }
        Command::Bench {
            dist,
            m,
            n,
            p_list,
            reps,
            seed,
            csv,
            verify_cap,
        } => {
            let mut config = ExperimentConfig::new(Distribution::new(dist, seed), m, n, p_list, reps);
            config.verify_cap = verify_cap;
            let records = run_experiment(&config)?;
            match csv {
                Some(path) => write_csv(BufWriter::new(File::create(path)?), &records)?,
                None => write_csv(&mut stdout, &records)?,
            }
            if let Some(bad) = records.iter().find(|r| !r.verified) {
                let why = bad.diagnostic.as_deref().unwrap_or("unverified");
                return Err(Failure::Verification(format!(
                    "p={} rep={}: {why}",
                    bad.report.workers, bad.rep
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
