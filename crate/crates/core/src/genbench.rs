//! Input generators, merge verification and the benchmark driver.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::parmerge::{merge_parallel_by, Execution, MergeReport};
use crate::seqmerge::{oracle_merge_tagged, tag, Origin, Tagged};
use crate::{Error, Result};

/// Key stored by every [`DistKind::AllEqual`] input.
pub const ALL_EQUAL_KEY: u64 = 42;

/// Inputs up to this combined length are checked against the tagged oracle.
pub const DEFAULT_VERIFY_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    UniformRandom,
    AllEqual,
    /// Keys drawn from `0..d`.
    FewDistinct(u64),
    /// Every key of A is below every key of B.
    DisjointAB,
    /// A holds even keys, B odd keys, no ties.
    InterleavedStrict,
    /// Sorted organ-pipe sequence: every key appears twice per input.
    OrganPipe,
    /// Runs of equal keys of the given length.
    RunsOfEqual(usize),
}

impl DistKind {
    pub const ALL: [DistKind; 7] = [
        DistKind::UniformRandom,
        DistKind::AllEqual,
        DistKind::FewDistinct(4),
        DistKind::DisjointAB,
        DistKind::InterleavedStrict,
        DistKind::OrganPipe,
        DistKind::RunsOfEqual(8),
    ];
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistKind::UniformRandom => f.write_str("uniform"),
            DistKind::AllEqual => f.write_str("all-equal"),
            DistKind::FewDistinct(d) => write!(f, "few-distinct:{d}"),
            DistKind::DisjointAB => f.write_str("disjoint"),
            DistKind::InterleavedStrict => f.write_str("interleaved"),
            DistKind::OrganPipe => f.write_str("organ-pipe"),
            DistKind::RunsOfEqual(r) => write!(f, "runs:{r}"),
        }
    }
}

impl FromStr for DistKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownDistribution(s.to_string());
        let (name, arg) = match s.split_once(':') {
            Some((name, arg)) => (name, Some(arg)),
            None => (s, None),
        };
        let positive = |default: u64| -> Result<u64> {
            match arg {
                None => Ok(default),
                Some(a) => a.parse::<u64>().ok().filter(|&v| v > 0).ok_or_else(unknown),
            }
        };
        let kind = match name {
            "uniform" => DistKind::UniformRandom,
            "all-equal" => DistKind::AllEqual,
            "few-distinct" => DistKind::FewDistinct(positive(4)?),
            "disjoint" => DistKind::DisjointAB,
            "interleaved" => DistKind::InterleavedStrict,
            "organ-pipe" => DistKind::OrganPipe,
            "runs" => DistKind::RunsOfEqual(positive(8)? as usize),
            _ => return Err(unknown()),
        };
        let takes_arg = matches!(kind, DistKind::FewDistinct(_) | DistKind::RunsOfEqual(_));
        if arg.is_some() && !takes_arg {
            return Err(unknown());
        }
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Distribution {
    pub kind: DistKind,
    pub seed: u64,
}

impl Distribution {
    pub fn new(kind: DistKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

/// Two sorted key arrays of lengths `m` and `n`, reproducible from
/// `(dist, m, n)`.
pub fn generate(dist: Distribution, m: usize, n: usize) -> (Vec<u64>, Vec<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(dist.seed);
    let (mut a, mut b) = match dist.kind {
        DistKind::UniformRandom => (random_keys(&mut rng, m, u64::MAX), random_keys(&mut rng, n, u64::MAX)),
        DistKind::AllEqual => (vec![ALL_EQUAL_KEY; m], vec![ALL_EQUAL_KEY; n]),
        DistKind::FewDistinct(d) => {
            let hi = d.max(1) - 1;
            (random_keys(&mut rng, m, hi), random_keys(&mut rng, n, hi))
        }
        DistKind::DisjointAB => {
            let split = 1u64 << 32;
            let a = random_keys(&mut rng, m, split - 1);
            let b = random_keys(&mut rng, n, split - 1)
                .into_iter()
                .map(|x| x + split)
                .collect();
            (a, b)
        }
        DistKind::InterleavedStrict => {
            let base = rng.gen_range(0..1u64 << 32);
            let a = (0..m as u64).map(|t| base + 2 * t).collect();
            let b = (0..n as u64).map(|t| base + 2 * t + 1).collect();
            (a, b)
        }
        DistKind::OrganPipe => (organ_pipe(m), organ_pipe(n)),
        DistKind::RunsOfEqual(run) => (runs(&mut rng, m, run), runs(&mut rng, n, run)),
    };
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

fn random_keys(rng: &mut ChaCha8Rng, len: usize, max: u64) -> Vec<u64> {
    (0..len).map(|_| rng.gen_range(0..=max)).collect()
}

/// `0, 1, .., h, h, .., 1, 0`, truncated to `len`.
fn organ_pipe(len: usize) -> Vec<u64> {
    let half = len.div_ceil(2);
    (0..len)
        .map(|t| if t < half { t } else { len - 1 - t } as u64)
        .collect()
}

fn runs(rng: &mut ChaCha8Rng, len: usize, run: usize) -> Vec<u64> {
    let run = run.max(1);
    let mut key = 0u64;
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let take = run.min(len - out.len());
        out.extend(std::iter::repeat_n(key, take));
        // Small steps keep the key ranges of A and B overlapping.
        key += rng.gen_range(1..=3);
    }
    out
}

/// True iff `view` is nondecreasing under `is_less`.
pub fn validate_sorted_by<T, F>(view: &[T], mut is_less: F) -> bool
where
    F: FnMut(&T, &T) -> bool,
{
    view.windows(2).all(|w| !is_less(&w[1], &w[0]))
}

pub fn validate_sorted<T: Ord>(view: &[T]) -> bool {
    validate_sorted_by(view, |x, y| x < y)
}

/// Outcome of checking a merged array against its inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Verified,
    LengthMismatch {
        expected: usize,
        actual: usize,
    },
    /// First position that differs from the reference merge.
    Mismatch {
        position: usize,
    },
    /// First position where the output decreases.
    Unsorted {
        position: usize,
    },
    ChecksumMismatch,
    /// An input was not sorted.
    InvalidInput(String),
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Verified => f.write_str("verified"),
            Verdict::LengthMismatch { expected, actual } => {
                write!(f, "length mismatch: expected {expected} elements, found {actual}")
            }
            Verdict::Mismatch { position } => write!(f, "differs from the stable merge at position {position}"),
            Verdict::Unsorted { position } => write!(f, "output decreases at position {position}"),
            Verdict::ChecksumMismatch => f.write_str("output is not a permutation of the inputs"),
            Verdict::InvalidInput(e) => write!(f, "invalid input: {e}"),
        }
    }
}

/// Checks `merged` against the stable merge of `a` and `b`.
///
/// Up to `cap` combined elements the reference merge is built and compared
/// element by element; above it only sortedness and an order-independent
/// checksum are checked.
pub fn verify_merge(a: &[u64], b: &[u64], merged: &[u64], cap: usize) -> Verdict {
    let expected = a.len() + b.len();
    if merged.len() != expected {
        return Verdict::LengthMismatch {
            expected,
            actual: merged.len(),
        };
    }
    if expected <= cap {
        let oracle = match oracle_merge_tagged(a, b) {
            Ok(o) => o,
            Err(e) => return Verdict::InvalidInput(e.to_string()),
        };
        return match oracle.iter().zip(merged).position(|(o, &x)| o.key != x) {
            Some(position) => Verdict::Mismatch { position },
            None => Verdict::Verified,
        };
    }
    if let Some(position) = (1..merged.len()).find(|&t| merged[t] < merged[t - 1]) {
        return Verdict::Unsorted { position };
    }
    if checksum(a.iter().chain(b)) != checksum(merged.iter()) {
        return Verdict::ChecksumMismatch;
    }
    Verdict::Verified
}

/// Checks a tagged merge (keys, origins and source indices) against the
/// oracle.
pub fn verify_tagged(a: &[u64], b: &[u64], merged: &[Tagged<u64>]) -> Verdict {
    let oracle = match oracle_merge_tagged(a, b) {
        Ok(o) => o,
        Err(e) => return Verdict::InvalidInput(e.to_string()),
    };
    if oracle.len() != merged.len() {
        return Verdict::LengthMismatch {
            expected: oracle.len(),
            actual: merged.len(),
        };
    }
    match oracle.iter().zip(merged).position(|(o, x)| o != x) {
        Some(position) => Verdict::Mismatch { position },
        None => Verdict::Verified,
    }
}

/// Order-independent multiset fingerprint.
fn checksum<'a>(keys: impl Iterator<Item = &'a u64>) -> (u64, u64) {
    keys.fold((0u64, 0u64), |(sum, xor), &k| {
        let h = splitmix64(k);
        (sum.wrapping_add(h), xor ^ h.rotate_left(17))
    })
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dist: Distribution,
    pub m: usize,
    pub n: usize,
    pub p_list: Vec<usize>,
    pub repetitions: usize,
    pub verify_cap: usize,
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn new(dist: Distribution, m: usize, n: usize, p_list: Vec<usize>, repetitions: usize) -> Self {
        Self {
            dist,
            m,
            n,
            p_list,
            repetitions,
            verify_cap: DEFAULT_VERIFY_CAP,
            execution: Execution::Threads,
        }
    }
}

/// One timed run of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub dist: Distribution,
    pub rep: usize,
    pub report: MergeReport,
    pub verified: bool,
    pub diagnostic: Option<String>,
    /// Median wall time at p = 1 over median wall time at this p, when the
    /// batch contains p = 1.
    pub speedup: Option<f64>,
    pub median_wall: Duration,
    pub min_wall: Duration,
}

/// Generates inputs once, then runs and verifies every `p` of the batch
/// `repetitions` times.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    if config.repetitions == 0 {
        return Err(Error::ZeroRepetitions);
    }
    if config.p_list.contains(&0) {
        return Err(Error::ZeroWorkers);
    }
    let (a, b) = generate(config.dist, config.m, config.n);
    let total = a.len() + b.len();
    let mut out = vec![0u64; total];
    let mut records = Vec::with_capacity(config.p_list.len() * config.repetitions);

    for &p in &config.p_list {
        // Stability is only observable on tagged elements.
        let stability = if total <= config.verify_cap {
            let (ta, tb) = (tag(&a, Origin::FromA), tag(&b, Origin::FromB));
            let mut tagged = vec![
                Tagged {
                    key: 0,
                    origin: Origin::FromA,
                    index: 0
                };
                total
            ];
            merge_parallel_by(&ta, &tb, &mut tagged, p, Tagged::key_less, config.execution)?;
            verify_tagged(&a, &b, &tagged)
        } else {
            Verdict::Verified
        };

        let first = records.len();
        for rep in 0..config.repetitions {
            out.fill(0);
            let report = merge_parallel_by(&a, &b, &mut out, p, |x, y| x < y, config.execution)?;
            let verdict = match verify_merge(&a, &b, &out, config.verify_cap) {
                Verdict::Verified => stability.clone(),
                v => v,
            };
            records.push(ExperimentRecord {
                dist: config.dist,
                rep,
                report,
                verified: verdict.is_verified(),
                diagnostic: (!verdict.is_verified()).then(|| verdict.to_string()),
                speedup: None,
                median_wall: Duration::ZERO,
                min_wall: Duration::ZERO,
            });
        }

        let mut walls: Vec<Duration> = records[first..].iter().map(|r| r.report.wall_time).collect();
        walls.sort_unstable();
        let (median, min) = (median(&walls), walls[0]);
        for r in &mut records[first..] {
            r.median_wall = median;
            r.min_wall = min;
        }
    }

    let baseline = records.iter().find(|r| r.report.workers == 1).map(|r| r.median_wall);
    if let Some(base) = baseline {
        for r in &mut records {
            r.speedup = Some(if r.report.workers == 1 {
                1.0
            } else {
                base.as_secs_f64() / r.median_wall.as_secs_f64().max(f64::MIN_POSITIVE)
            });
        }
    }
    Ok(records)
}

fn median(sorted: &[Duration]) -> Duration {
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2
    }
}

#[derive(Debug, Serialize)]
struct CsvRow {
    dist: String,
    seed: u64,
    m: usize,
    n: usize,
    p: usize,
    rep: usize,
    wall_ns: u128,
    comparisons: u64,
    max_block: usize,
    min_block: usize,
    verified: bool,
    speedup: Option<f64>,
}

/// Writes one CSV row per record with header
/// `dist,seed,m,n,p,rep,wall_ns,comparisons,max_block,min_block,verified,speedup`.
pub fn write_csv<W: Write>(writer: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    for r in records {
        csv.serialize(CsvRow {
            dist: r.dist.kind.to_string(),
            seed: r.dist.seed,
            m: r.report.m,
            n: r.report.n,
            p: r.report.workers,
            rep: r.rep,
            wall_ns: r.report.wall_time.as_nanos(),
            comparisons: r.report.comparisons,
            max_block: r.report.max_block(),
            min_block: r.report.min_block(),
            verified: r.verified,
            speedup: r.speedup,
        })?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_equal() {
        let (a, b) = generate(Distribution::new(DistKind::AllEqual, 7), 3, 2);
        assert_eq!(a, [ALL_EQUAL_KEY; 3]);
        assert_eq!(b, [ALL_EQUAL_KEY; 2]);
    }

    #[test]
    fn disjoint_really_is() {
        let (a, b) = generate(Distribution::new(DistKind::DisjointAB, 1), 500, 700);
        assert!(a.last().unwrap() < b.first().unwrap());
    }

    #[test]
    fn every_kind_sorted_and_deterministic() {
        for kind in DistKind::ALL {
            for (m, n) in [(0, 0), (0, 5), (1, 1), (37, 100), (1000, 999)] {
                let dist = Distribution::new(kind, 99);
                let (a, b) = generate(dist, m, n);
                assert_eq!((a.len(), b.len()), (m, n));
                assert!(validate_sorted(&a) && validate_sorted(&b), "{kind}");
                assert_eq!(generate(dist, m, n), (a, b));
            }
        }
    }

    #[test]
    fn seeds_differ() {
        let x = generate(Distribution::new(DistKind::UniformRandom, 1), 50, 50);
        let y = generate(Distribution::new(DistKind::UniformRandom, 2), 50, 50);
        assert_ne!(x, y);
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in DistKind::ALL
            .into_iter()
            .chain([DistKind::FewDistinct(17), DistKind::RunsOfEqual(3)])
        {
            assert_eq!(kind.to_string().parse::<DistKind>().unwrap(), kind);
        }
        assert_eq!("few-distinct".parse::<DistKind>().unwrap(), DistKind::FewDistinct(4));
        for bad in ["gaussian", "uniform:3", "runs:0", "few-distinct:x", ""] {
            assert!(
                matches!(bad.parse::<DistKind>(), Err(Error::UnknownDistribution(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn validate_sorted_examples() {
        assert!(validate_sorted::<u64>(&[]));
        assert!(validate_sorted(&[1, 2, 2, 3]));
        assert!(!validate_sorted(&[2, 1]));
    }

    #[test]
    fn corruption_is_flagged() {
        let (a, b) = generate(Distribution::new(DistKind::UniformRandom, 5), 300, 300);
        let oracle: Vec<u64> = oracle_merge_tagged(&a, &b)
            .unwrap()
            .into_iter()
            .map(|e| e.key)
            .collect();
        assert_eq!(verify_merge(&a, &b, &oracle, DEFAULT_VERIFY_CAP), Verdict::Verified);
        assert_eq!(verify_merge(&a, &b, &oracle, 0), Verdict::Verified);
        for t in [0, 100, 598] {
            let mut bad = oracle.clone();
            bad.swap(t, t + 1);
            assert_eq!(
                verify_merge(&a, &b, &bad, DEFAULT_VERIFY_CAP),
                Verdict::Mismatch { position: t }
            );
            assert_eq!(verify_merge(&a, &b, &bad, 0), Verdict::Unsorted { position: t + 1 });
        }
        let mut bad = oracle.clone();
        bad[10] = bad[11];
        assert_eq!(verify_merge(&a, &b, &bad, 0), Verdict::ChecksumMismatch);
        let short = &oracle[1..];
        assert!(verify_merge(&a, &b, short, 0).to_string().contains("length mismatch"));
    }

    #[test]
    fn experiment_small() {
        let cfg = ExperimentConfig::new(
            Distribution::new(DistKind::UniformRandom, 3),
            1000,
            1000,
            vec![1, 2, 4],
            3,
        );
        let records = run_experiment(&cfg).unwrap();
        assert_eq!(records.len(), 9);
        assert!(records.iter().all(|r| r.verified));
        assert!(records
            .iter()
            .filter(|r| r.report.workers == 1)
            .all(|r| r.speedup == Some(1.0)));
        for r in &records {
            assert!(r.report.max_block() - r.report.min_block() <= 1);
            assert_eq!(r.report.block_sizes.iter().sum::<usize>(), 2000);
        }
    }

    #[test]
    fn experiment_all_equal_is_stable() {
        for p in [1, 3, 16] {
            let mut cfg = ExperimentConfig::new(Distribution::new(DistKind::AllEqual, 0), 200, 300, vec![p], 1);
            cfg.execution = Execution::Sequential;
            let records = run_experiment(&cfg).unwrap();
            assert!(records[0].verified, "{:?}", records[0].diagnostic);
            // No p = 1 run in the batch, so no speedup.
            assert_eq!(records[0].speedup.is_some(), p == 1);
        }
    }

    #[test]
    fn experiment_rejects_bad_config() {
        let dist = Distribution::new(DistKind::AllEqual, 0);
        assert!(matches!(
            run_experiment(&ExperimentConfig::new(dist, 1, 1, vec![1], 0)),
            Err(Error::ZeroRepetitions)
        ));
        assert!(matches!(
            run_experiment(&ExperimentConfig::new(dist, 1, 1, vec![0], 1)),
            Err(Error::ZeroWorkers)
        ));
    }

    #[test]
    fn csv_header_and_rows() {
        let mut cfg = ExperimentConfig::new(Distribution::new(DistKind::FewDistinct(3), 11), 40, 60, vec![1, 2], 2);
        cfg.execution = Execution::Sequential;
        let records = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "dist,seed,m,n,p,rep,wall_ns,comparisons,max_block,min_block,verified,speedup"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].starts_with("few-distinct:3,11,40,60,1,0,"));
        assert!(rows[0].ends_with(",100,100,true,1.0"));
    }
}
