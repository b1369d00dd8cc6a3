//! Stable merging of two sorted arrays by co-ranking.
//!
//! [`co_rank`] finds, for any position `i` of the merged output, how many
//! elements of each input precede it, using a logarithmic number of
//! comparisons and without merging. [`merge_parallel`] uses it to split the
//! output into `p` blocks of equal size (within one element) that workers
//! merge independently, with no communication between them.
//!
//! ```
//! let a = [1, 3, 5, 7];
//! let b = [2, 4, 6, 8];
//! let split = corank::co_rank(4, &a, &b).unwrap();
//! assert_eq!((split.a, split.b), (2, 2));
//!
//! let mut out = [0; 8];
//! corank::merge_parallel(&a, &b, &mut out, 3).unwrap();
//! assert_eq!(out, [1, 2, 3, 4, 5, 6, 7, 8]);
//! ```

pub mod coranker;
mod error;
pub mod format;
pub mod genbench;
pub mod parmerge;
pub mod seqmerge;

pub use coranker::{co_rank, co_rank_by, co_rank_counted, co_rank_stats, CoRanks, ComparisonCounter};
pub use error::{Error, Result};
pub use parmerge::{
    merge_parallel, merge_parallel_by, merge_parallel_synced, merge_parallel_synced_by, partition_output, plan,
    plan_by, BlockAssignment, Execution, MergePlan, MergeReport,
};
pub use seqmerge::{oracle_merge_tagged, stable_merge, stable_merge_by, Origin, OutputView, Tagged};
