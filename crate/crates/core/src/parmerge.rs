//! Load-balanced parallel merge.
//!
//! The output is cut into `p` blocks whose sizes differ by at most one. Each
//! worker derives its own block boundaries arithmetically, co-ranks both ends
//! of its block, and merges the matching input ranges into its private slice
//! of the output. Workers share nothing but read-only inputs.

use std::ops::Range;
use std::sync::{Barrier, OnceLock};
use std::thread;
use std::time::{Duration, Instant};

use crate::coranker::{co_rank_stats, CoRanks, ComparisonCounter};
use crate::seqmerge::{stable_merge_counted, OutputView};
use crate::{Error, Result};

/// Start of worker `worker`'s output block: `floor(worker * total / workers)`.
///
/// `worker == workers` yields `total`, the end of the last block.
pub fn partition_output(total: usize, workers: usize, worker: usize) -> Result<usize> {
    if workers == 0 {
        return Err(Error::ZeroWorkers);
    }
    if worker > workers {
        return Err(Error::WorkerOutOfRange { worker, workers });
    }
    // Widened so `worker * total` cannot overflow.
    Ok((worker as u128 * total as u128 / workers as u128) as usize)
}

/// All `workers + 1` block boundaries of an output of length `total`.
pub fn partition_boundaries(total: usize, workers: usize) -> Result<Vec<usize>> {
    (0..=workers).map(|r| partition_output(total, workers, r)).collect()
}

/// Input and output ranges owned by one worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAssignment {
    pub worker: usize,
    pub output: Range<usize>,
    pub a: Range<usize>,
    pub b: Range<usize>,
}

impl BlockAssignment {
    /// Computes worker `worker`'s block from scratch: two co-rank searches,
    /// no input from any other worker.
    pub fn compute<T, F>(worker: usize, workers: usize, a: &[T], b: &[T], mut is_less: F) -> Result<Self>
    where
        F: FnMut(&T, &T) -> bool,
    {
        Ok(locate_block(worker, workers, a, b, &mut is_less)?.0)
    }

    pub fn len(&self) -> usize {
        self.output.len()
    }

    pub fn is_empty(&self) -> bool {
        self.output.is_empty()
    }
}

/// Co-ranked blocks for every worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergePlan {
    pub workers: usize,
    pub assignments: Vec<BlockAssignment>,
}

impl MergePlan {
    pub fn block_sizes(&self) -> Vec<usize> {
        self.assignments.iter().map(BlockAssignment::len).collect()
    }
}

/// Builds the plan centrally, still with two independent co-rank calls per
/// worker.
pub fn plan<T: Ord>(a: &[T], b: &[T], workers: usize) -> Result<MergePlan> {
    plan_by(a, b, workers, |x, y| x < y)
}

pub fn plan_by<T, F>(a: &[T], b: &[T], workers: usize, mut is_less: F) -> Result<MergePlan>
where
    F: FnMut(&T, &T) -> bool,
{
    if workers == 0 {
        return Err(Error::ZeroWorkers);
    }
    let assignments = (0..workers)
        .map(|r| BlockAssignment::compute(r, workers, a, b, &mut is_less))
        .collect::<Result<_>>()?;
    Ok(MergePlan { workers, assignments })
}

/// How the `p` logical workers are run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// One OS thread per worker.
    #[default]
    Threads,
    /// Workers run one after another on the calling thread; deterministic.
    Sequential,
}

/// Execution statistics of one parallel merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeReport {
    pub m: usize,
    pub n: usize,
    pub workers: usize,
    /// Wall time of the parallel region only.
    pub wall_time: Duration,
    pub block_sizes: Vec<usize>,
    /// Split-moving iterations of each co-rank call, in worker order.
    pub corank_iterations: Vec<u32>,
    pub corank_calls: usize,
    /// Key comparisons across co-ranking and block merging.
    pub comparisons: u64,
}

impl MergeReport {
    pub fn max_block(&self) -> usize {
        self.block_sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn min_block(&self) -> usize {
        self.block_sizes.iter().copied().min().unwrap_or(0)
    }
}

/// Stable parallel merge of `Ord` elements into `out`.
pub fn merge_parallel<T>(a: &[T], b: &[T], out: &mut [T], workers: usize) -> Result<MergeReport>
where
    T: Ord + Clone + Send + Sync,
{
    merge_parallel_by(a, b, out, workers, |x, y| x < y, Execution::Threads)
}

pub fn merge_parallel_by<T, F>(
    a: &[T],
    b: &[T],
    out: &mut [T],
    workers: usize,
    is_less: F,
    execution: Execution,
) -> Result<MergeReport>
where
    T: Clone + Send + Sync,
    F: Fn(&T, &T) -> bool + Sync,
{
    let views = split_output(out, a.len() + b.len(), workers)?;
    merge_parallel_views(a, b, views, is_less, execution)
}

/// Parallel merge into caller-supplied per-worker views. View `r` receives
/// worker `r`'s output block and must have exactly that block's length.
pub fn merge_parallel_views<T, O, F>(
    a: &[T],
    b: &[T],
    views: Vec<O>,
    is_less: F,
    execution: Execution,
) -> Result<MergeReport>
where
    T: Clone + Sync,
    O: OutputView<T> + Send,
    F: Fn(&T, &T) -> bool + Sync,
{
    let workers = views.len();
    let (m, n) = (a.len(), b.len());
    let total = m.checked_add(n).ok_or(Error::SizeOverflow { m, n })?;
    check_views(&views, total)?;

    let job = |r: usize, view: O| -> Result<WorkerOutcome> {
        let mut less = |x: &T, y: &T| is_less(x, y);
        let (block, stats) = locate_block(r, workers, a, b, &mut less)?;
        let mut counter = ComparisonCounter::new();
        stable_merge_counted(&a[block.a.clone()], &b[block.b.clone()], view, &is_less, &mut counter)?;
        Ok(WorkerOutcome {
            block_size: block.len(),
            iterations: vec![stats[0].0, stats[1].0],
            comparisons: stats[0].1 + stats[1].1 + counter.count(),
        })
    };

    let started = Instant::now();
    let outcomes = execute(views, execution, job);
    let wall_time = started.elapsed();
    summarize(m, n, workers, wall_time, outcomes)
}

/// Parallel merge where each worker co-ranks only its start and reads its end
/// from the next worker after one barrier. The last worker ends at `(m, n)`.
pub fn merge_parallel_synced_by<T, F>(
    a: &[T],
    b: &[T],
    out: &mut [T],
    workers: usize,
    is_less: F,
    execution: Execution,
) -> Result<MergeReport>
where
    T: Clone + Send + Sync,
    F: Fn(&T, &T) -> bool + Sync,
{
    let views = split_output(out, a.len() + b.len(), workers)?;
    merge_parallel_synced_views(a, b, views, is_less, execution)
}

pub fn merge_parallel_synced<T>(a: &[T], b: &[T], out: &mut [T], workers: usize) -> Result<MergeReport>
where
    T: Ord + Clone + Send + Sync,
{
    merge_parallel_synced_by(a, b, out, workers, |x, y| x < y, Execution::Threads)
}

pub fn merge_parallel_synced_views<T, O, F>(
    a: &[T],
    b: &[T],
    views: Vec<O>,
    is_less: F,
    execution: Execution,
) -> Result<MergeReport>
where
    T: Clone + Sync,
    O: OutputView<T> + Send,
    F: Fn(&T, &T) -> bool + Sync,
{
    let workers = views.len();
    let (m, n) = (a.len(), b.len());
    let total = m.checked_add(n).ok_or(Error::SizeOverflow { m, n })?;
    check_views(&views, total)?;

    let starts: Vec<OnceLock<CoRanks>> = (0..workers).map(|_| OnceLock::new()).collect();
    let start_phase = |r: usize| -> Result<(u32, u64)> {
        let rank = partition_output(total, workers, r)?;
        let stats = co_rank_stats(rank, a, b, &is_less)?;
        starts[r].set(stats.co_ranks).expect("each worker publishes once");
        Ok((stats.iterations, stats.comparisons))
    };
    let merge_phase = |r: usize, view: O, searched: (u32, u64)| -> Result<WorkerOutcome> {
        let begin = *starts[r].get().expect("published before the barrier");
        let end = match starts.get(r + 1) {
            Some(next) => *next.get().expect("published before the barrier"),
            None => CoRanks::new(m, n),
        };
        let mut counter = ComparisonCounter::new();
        stable_merge_counted(&a[begin.a..end.a], &b[begin.b..end.b], view, &is_less, &mut counter)?;
        Ok(WorkerOutcome {
            block_size: end.rank() - begin.rank(),
            iterations: vec![searched.0],
            comparisons: searched.1 + counter.count(),
        })
    };

    let started = Instant::now();
    let outcomes = match execution {
        Execution::Sequential => {
            let searched: Vec<Result<(u32, u64)>> = (0..workers).map(start_phase).collect();
            views
                .into_iter()
                .zip(searched)
                .enumerate()
                .map(|(r, (view, s))| s.and_then(|s| merge_phase(r, view, s)))
                .collect()
        }
        Execution::Threads => {
            let barrier = Barrier::new(workers);
            execute(views, Execution::Threads, |r, view| {
                let searched = start_phase(r);
                barrier.wait();
                merge_phase(r, view, searched?)
            })
        }
    };
    let wall_time = started.elapsed();
    summarize(m, n, workers, wall_time, outcomes)
}

/// Records every write as `(global index, value)` instead of storing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordingView<T> {
    pub worker: usize,
    pub offset: usize,
    len: usize,
    pub writes: Vec<(usize, T)>,
}

impl<T> RecordingView<T> {
    pub fn new(worker: usize, offset: usize, len: usize) -> Self {
        Self {
            worker,
            offset,
            len,
            writes: Vec::with_capacity(len),
        }
    }

    /// One recording view per worker, sized to the worker's output block.
    pub fn for_workers(total: usize, workers: usize) -> Result<Vec<Self>> {
        let bounds = partition_boundaries(total, workers)?;
        Ok(bounds
            .windows(2)
            .enumerate()
            .map(|(r, w)| Self::new(r, w[0], w[1] - w[0]))
            .collect())
    }
}

impl<T> OutputView<T> for RecordingView<T> {
    fn len(&self) -> usize {
        self.len
    }

    fn write(&mut self, index: usize, value: T) {
        // Out-of-block writes are recorded, not rejected, so audits can see them.
        self.writes.push((self.offset + index, value));
    }
}

/// A write-set violation found by [`assemble_recorded`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WriteConflict {
    #[error("index {index} written by workers {first} and {second}")]
    Overlap { index: usize, first: usize, second: usize },
    #[error("index {index} written twice by worker {worker}")]
    Repeated { index: usize, worker: usize },
    #[error("index {index} outside output of length {total}")]
    OutOfRange { index: usize, total: usize },
    #[error("index {index} never written")]
    Missing { index: usize },
}

/// Checks that every output index was written exactly once by exactly one
/// worker and rebuilds the output.
pub fn assemble_recorded<T>(views: Vec<RecordingView<T>>, total: usize) -> Result<Vec<T>, WriteConflict> {
    let mut slots: Vec<Option<(usize, T)>> = (0..total).map(|_| None).collect();
    for view in views {
        for (index, value) in view.writes {
            let slot = slots.get_mut(index).ok_or(WriteConflict::OutOfRange { index, total })?;
            if let Some((owner, _)) = slot {
                return Err(if *owner == view.worker {
                    WriteConflict::Repeated {
                        index,
                        worker: view.worker,
                    }
                } else {
                    WriteConflict::Overlap {
                        index,
                        first: *owner,
                        second: view.worker,
                    }
                });
            }
            *slot = Some((view.worker, value));
        }
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(index, s)| s.map(|(_, v)| v).ok_or(WriteConflict::Missing { index }))
        .collect()
}

struct WorkerOutcome {
    block_size: usize,
    iterations: Vec<u32>,
    comparisons: u64,
}

/// Returns the block and `(iterations, comparisons)` of both co-rank calls.
fn locate_block<T, F>(
    worker: usize,
    workers: usize,
    a: &[T],
    b: &[T],
    is_less: &mut F,
) -> Result<(BlockAssignment, [(u32, u64); 2])>
where
    F: FnMut(&T, &T) -> bool,
{
    if worker >= workers {
        return Err(if workers == 0 {
            Error::ZeroWorkers
        } else {
            Error::WorkerOutOfRange { worker, workers }
        });
    }
    let (m, n) = (a.len(), b.len());
    let total = m.checked_add(n).ok_or(Error::SizeOverflow { m, n })?;
    let begin = partition_output(total, workers, worker)?;
    let end = partition_output(total, workers, worker + 1)?;
    let lo = co_rank_stats(begin, a, b, &mut *is_less)?;
    let hi = co_rank_stats(end, a, b, &mut *is_less)?;
    let block = BlockAssignment {
        worker,
        output: begin..end,
        a: lo.co_ranks.a..hi.co_ranks.a,
        b: lo.co_ranks.b..hi.co_ranks.b,
    };
    Ok((
        block,
        [(lo.iterations, lo.comparisons), (hi.iterations, hi.comparisons)],
    ))
}

fn split_output<T>(out: &mut [T], total: usize, workers: usize) -> Result<Vec<&mut [T]>> {
    if out.len() != total {
        return Err(Error::LengthMismatch {
            expected: total,
            actual: out.len(),
        });
    }
    let bounds = partition_boundaries(total, workers)?;
    let mut rest = out;
    let mut views = Vec::with_capacity(workers);
    for w in bounds.windows(2) {
        let (head, tail) = std::mem::take(&mut rest).split_at_mut(w[1] - w[0]);
        views.push(head);
        rest = tail;
    }
    Ok(views)
}

fn check_views<T, O: OutputView<T>>(views: &[O], total: usize) -> Result<()> {
    let bounds = partition_boundaries(total, views.len())?;
    for (view, w) in views.iter().zip(bounds.windows(2)) {
        if view.len() != w[1] - w[0] {
            return Err(Error::LengthMismatch {
                expected: w[1] - w[0],
                actual: view.len(),
            });
        }
    }
    Ok(())
}

fn execute<O, R, J>(views: Vec<O>, execution: Execution, job: J) -> Vec<R>
where
    O: Send,
    R: Send,
    J: Fn(usize, O) -> R + Sync,
{
    match execution {
        Execution::Sequential => views.into_iter().enumerate().map(|(r, v)| job(r, v)).collect(),
        Execution::Threads => thread::scope(|scope| {
            let job = &job;
            let mut views = views.into_iter().enumerate();
            let first = views.next();
            let handles: Vec<_> = views.map(|(r, v)| scope.spawn(move || job(r, v))).collect();
            let mut results = Vec::with_capacity(handles.len() + 1);
            results.extend(first.map(|(r, v)| job(r, v)));
            for h in handles {
                results.push(h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)));
            }
            results
        }),
    }
}

fn summarize(
    m: usize,
    n: usize,
    workers: usize,
    wall_time: Duration,
    outcomes: Vec<Result<WorkerOutcome>>,
) -> Result<MergeReport> {
    let mut report = MergeReport {
        m,
        n,
        workers,
        wall_time,
        block_sizes: Vec::with_capacity(workers),
        corank_iterations: Vec::with_capacity(2 * workers),
        corank_calls: 0,
        comparisons: 0,
    };
    for outcome in outcomes {
        let outcome = outcome?;
        report.block_sizes.push(outcome.block_size);
        report.corank_calls += outcome.iterations.len();
        report.corank_iterations.extend(outcome.iterations);
        report.comparisons += outcome.comparisons;
    }
    Ok(report)
}
