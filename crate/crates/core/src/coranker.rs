//! Co-ranking: locate the split of two sorted inputs that produces a given
//! prefix of their stable merge, without merging.
//!
//! For an output rank `i` the co-ranks are the unique pair `(j, k)` with
//! `j + k = i` such that
//!
//! * `j == 0 || a[j - 1] <= b[k]`, and
//! * `k == 0 || b[k - 1] <  a[j]`.
//!
//! Reads past either end are never performed; the index tests stand in for
//! `-inf` / `+inf` sentinels. The strict second condition is what places equal
//! elements of `a` ahead of equal elements of `b`.

/// Prefix lengths of `a` and `b` whose stable merge is the first `a + b`
/// elements of the full merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CoRanks {
    pub a: usize,
    pub b: usize,
}

impl CoRanks {
    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    /// The output rank these co-ranks belong to.
    pub fn rank(&self) -> usize {
        self.a + self.b
    }
}

/// Counts key comparisons made through [`co_rank_counted`] or the counted
/// merge kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ComparisonCounter {
    count: u64,
}

impl ComparisonCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    #[inline]
    pub(crate) fn bump(&mut self) {
        self.count += 1;
    }

    /// Wraps a less-than predicate so that every call increments this counter.
    pub fn wrap<'c, T, F>(&'c mut self, mut is_less: F) -> impl FnMut(&T, &T) -> bool + 'c
    where
        F: FnMut(&T, &T) -> bool + 'c,
    {
        move |x, y| {
            self.bump();
            is_less(x, y)
        }
    }
}

/// Which condition an update step repaired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `a[j - 1] > b[k]`: too many elements taken from `a`.
    TooManyFromA,
    /// `b[k - 1] >= a[j]`: too many elements taken from `b`.
    TooManyFromB,
}

/// One update of the search state, recorded after the move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchStep {
    pub violation: Violation,
    pub delta: usize,
    pub a: usize,
    pub b: usize,
    pub a_low: usize,
    pub b_low: usize,
}

/// Result of an instrumented search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchStats {
    pub co_ranks: CoRanks,
    /// Number of loop iterations that moved the split.
    pub iterations: u32,
    pub comparisons: u64,
}

/// Co-ranks of `rank` for `Ord` keys.
pub fn co_rank<T: Ord>(rank: usize, a: &[T], b: &[T]) -> crate::Result<CoRanks> {
    co_rank_by(rank, a, b, |x, y| x < y)
}

/// Co-ranks of `rank` under the strict ordering `is_less`.
///
/// Both inputs must be sorted under `is_less`; this is not checked. Only a
/// less-than predicate is accepted so the strict and non-strict guards are
/// always derived consistently from it.
pub fn co_rank_by<T, F>(rank: usize, a: &[T], b: &[T], mut is_less: F) -> crate::Result<CoRanks>
where
    F: FnMut(&T, &T) -> bool,
{
    search(rank, a, b, &mut is_less, |_| {}).map(|(c, _)| c)
}

/// As [`co_rank_by`], adding the number of key comparisons performed to
/// `counter`.
pub fn co_rank_counted<T, F>(
    rank: usize,
    a: &[T],
    b: &[T],
    is_less: F,
    counter: &mut ComparisonCounter,
) -> crate::Result<CoRanks>
where
    F: FnMut(&T, &T) -> bool,
{
    let mut counted = counter.wrap(is_less);
    search(rank, a, b, &mut counted, |_| {}).map(|(c, _)| c)
}

/// Co-ranks together with iteration and comparison counts.
pub fn co_rank_stats<T, F>(rank: usize, a: &[T], b: &[T], is_less: F) -> crate::Result<SearchStats>
where
    F: FnMut(&T, &T) -> bool,
{
    let mut counter = ComparisonCounter::new();
    let (co_ranks, iterations) = {
        let mut counted = counter.wrap(is_less);
        search(rank, a, b, &mut counted, |_| {})?
    };
    Ok(SearchStats {
        co_ranks,
        iterations,
        comparisons: counter.count(),
    })
}

/// Co-ranks plus every intermediate search state, for visualisation.
pub fn co_rank_trace<T, F>(rank: usize, a: &[T], b: &[T], mut is_less: F) -> crate::Result<(CoRanks, Vec<SearchStep>)>
where
    F: FnMut(&T, &T) -> bool,
{
    let mut steps = Vec::new();
    let (co_ranks, _) = search(rank, a, b, &mut is_less, |s| steps.push(s))?;
    Ok((co_ranks, steps))
}

fn search<T, F, S>(rank: usize, a: &[T], b: &[T], is_less: &mut F, mut on_step: S) -> crate::Result<(CoRanks, u32)>
where
    F: FnMut(&T, &T) -> bool,
    S: FnMut(SearchStep),
{
    let (m, n) = (a.len(), b.len());
    let total = m.checked_add(n).ok_or(crate::Error::SizeOverflow { m, n })?;
    if rank > total {
        return Err(crate::Error::RankOutOfRange { rank, total });
    }

    // Start by taking as much as possible from `a`.
    let mut j = rank.min(m);
    let mut k = rank - j;
    let mut j_low = rank.saturating_sub(n);
    // Always overwritten in the first iteration; this is its analytic floor.
    let mut k_low = rank.saturating_sub(m);
    let mut iterations = 0u32;

    loop {
        let violation = if j > 0 && k < n && is_less(&b[k], &a[j - 1]) {
            let delta = (j - j_low).div_ceil(2);
            k_low = k;
            j -= delta;
            k += delta;
            (Violation::TooManyFromA, delta)
        } else if k > 0 && j < m && !is_less(&b[k - 1], &a[j]) {
            let delta = (k - k_low).div_ceil(2);
            j_low = j;
            j += delta;
            k -= delta;
            (Violation::TooManyFromB, delta)
        } else {
            break;
        };
        iterations += 1;
        on_step(SearchStep {
            violation: violation.0,
            delta: violation.1,
            a: j,
            b: k,
            a_low: j_low,
            b_low: k_low,
        });
    }

    Ok((CoRanks { a: j, b: k }, iterations))
}

/// Size of the initial search interval, `min(m, n, i, m + n - i)`.
///
/// Callers must pass `rank <= m + n`.
pub fn search_width(m: usize, n: usize, rank: usize) -> usize {
    let rest = (m + n) - rank;
    m.min(n).min(rank).min(rest)
}

/// `ceil(log2(max(1, min(m, n, i, m + n - i))))`.
pub fn log2_width_bound(m: usize, n: usize, rank: usize) -> u32 {
    ceil_log2(search_width(m, n, rank).max(1))
}

/// Worst-case number of split-moving iterations, `ceil(log2(w + 1))` for
/// search width `w`.
///
/// Exceeds [`log2_width_bound`] by one whenever `w` is a power of two: a
/// width-one interval still needs one move when the answer sits at its far
/// end (`a = [2]`, `b = [1]`, rank 1).
pub fn iteration_bound(m: usize, n: usize, rank: usize) -> u32 {
    let w = search_width(m, n, rank);
    if w == 0 {
        0
    } else {
        ceil_log2(w + 1)
    }
}

/// Worst-case key comparisons: at most two per pass through the loop,
/// including the final pass that detects termination.
pub fn comparison_bound(m: usize, n: usize, rank: usize) -> u64 {
    if search_width(m, n, rank) == 0 {
        // One of the index tests fails in both guards.
        0
    } else {
        2 * (u64::from(iteration_bound(m, n, rank)) + 1)
    }
}

pub(crate) fn ceil_log2(x: usize) -> u32 {
    debug_assert!(x >= 1);
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every `(j, i - j)` satisfying both split conditions, by exhaustive scan.
    fn brute_force(rank: usize, a: &[u32], b: &[u32]) -> Vec<CoRanks> {
        let (m, n) = (a.len(), b.len());
        let lo = rank.saturating_sub(n);
        let hi = rank.min(m);
        (lo..=hi)
            .map(|j| (j, rank - j))
            .filter(|&(j, k)| {
                let first = j == 0 || k == n || a[j - 1] <= b[k];
                let second = k == 0 || j == m || b[k - 1] < a[j];
                first && second
            })
            .map(|(j, k)| CoRanks::new(j, k))
            .collect()
    }

    /// Origin counts in the first `rank` slots of a naive stable merge.
    fn by_merging(rank: usize, a: &[u32], b: &[u32]) -> CoRanks {
        let (mut j, mut k) = (0, 0);
        while j + k < rank {
            if k == b.len() || (j < a.len() && a[j] <= b[k]) {
                j += 1;
            } else {
                k += 1;
            }
        }
        CoRanks::new(j, k)
    }

    fn sorted_vec(max_len: usize, max_key: u32) -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(0..=max_key, 0..=max_len).prop_map(|mut v| {
            v.sort_unstable();
            v
        })
    }

    #[test]
    fn endpoints() {
        let a = [3, 9, 9];
        let b = [1, 4];
        assert_eq!(co_rank(0, &a, &b).unwrap(), CoRanks::new(0, 0));
        assert_eq!(co_rank(5, &a, &b).unwrap(), CoRanks::new(3, 2));
        let stats = co_rank_stats(5, &a, &b, |x, y| x < y).unwrap();
        assert_eq!((stats.iterations, stats.comparisons), (0, 0));
    }

    #[test]
    fn worked_examples() {
        assert_eq!(by_merging(4, &[1, 3, 5, 7], &[2, 4, 6, 8]), CoRanks::new(2, 2));
        assert_eq!(co_rank(4, &[1, 3, 5, 7], &[2, 4, 6, 8]).unwrap(), CoRanks::new(2, 2));

        assert_eq!(by_merging(2, &[2, 2], &[2, 2]), CoRanks::new(2, 0));
        assert_eq!(co_rank(2, &[2, 2], &[2, 2]).unwrap(), CoRanks::new(2, 0));

        assert_eq!(by_merging(3, &[10, 20], &[1, 2, 3, 4, 5]), CoRanks::new(0, 3));
        assert_eq!(co_rank(3, &[10, 20], &[1, 2, 3, 4, 5]).unwrap(), CoRanks::new(0, 3));
    }

    #[test]
    fn rank_past_end_is_rejected() {
        let err = co_rank(5, &[1, 2], &[3, 4]).unwrap_err();
        assert!(matches!(err, crate::Error::RankOutOfRange { rank: 5, total: 4 }));
        assert!(err.to_string().contains("rank out of range"));
    }

    #[test]
    fn zero_sized_inputs_overflow_check() {
        let a = vec![(); usize::MAX];
        let b = vec![(); 1];
        let err = co_rank_by(0, &a, &b, |_, _| false).unwrap_err();
        assert!(matches!(err, crate::Error::SizeOverflow { .. }));
    }

    #[test]
    fn one_sided_inputs_skip_comparisons() {
        let b = [1u32, 2, 3, 4];
        for i in 0..=4 {
            let s = co_rank_stats(i, &[], &b, |x: &u32, y: &u32| x < y).unwrap();
            assert_eq!(s.co_ranks, CoRanks::new(0, i));
            assert_eq!(s.comparisons, 0);
            let s = co_rank_stats(i, &b, &[], |x: &u32, y: &u32| x < y).unwrap();
            assert_eq!(s.co_ranks, CoRanks::new(i, 0));
            assert_eq!(s.comparisons, 0);
        }
    }

    #[test]
    fn counter_deltas() {
        let mut counter = ComparisonCounter::new();
        let r = co_rank_counted(0, &[5], &[1], |x: &i32, y: &i32| x < y, &mut counter).unwrap();
        assert_eq!((r, counter.count()), (CoRanks::new(0, 0), 0));

        let r = co_rank_counted(1, &[1], &[2], |x: &i32, y: &i32| x < y, &mut counter).unwrap();
        assert_eq!(r, CoRanks::new(1, 0));
        assert!(counter.count() <= 2);
    }

    #[test]
    fn width_one_needs_a_move() {
        let s = co_rank_stats(1, &[2], &[1], |x: &i32, y: &i32| x < y).unwrap();
        assert_eq!(s.co_ranks, CoRanks::new(0, 1));
        assert_eq!(s.iterations, 1);
        assert_eq!(log2_width_bound(1, 1, 1), 0);
        assert_eq!(iteration_bound(1, 1, 1), 1);
    }

    #[test]
    fn ceil_log2_values() {
        let got: Vec<u32> = (1..=9).map(ceil_log2).collect();
        assert_eq!(got, [0, 1, 2, 2, 3, 3, 3, 3, 4]);
        assert_eq!(ceil_log2(usize::MAX), usize::BITS);
    }

    #[test]
    fn trace_ends_at_result() {
        let a = [1, 3, 5, 7, 9, 11];
        let b = [0, 2, 4];
        let (c, steps) = co_rank_trace(5, &a, &b, |x, y| x < y).unwrap();
        assert_eq!(c, by_merging(5, &a, &b));
        let last = steps.last().expect("rank 5 needs at least one move");
        assert_eq!((last.a, last.b), (c.a, c.b));
        assert!(steps.iter().all(|s| s.a + s.b == 5 && s.a_low <= s.a && s.b_low <= s.b));
    }

    #[test]
    fn exhaustive_small_with_duplicates() {
        // All sorted arrays over {0,1,2} up to length 6.
        fn sorted_arrays(len: usize) -> Vec<Vec<u32>> {
            let mut out = Vec::new();
            for zeros in 0..=len {
                for ones in 0..=len - zeros {
                    let mut v = vec![0; zeros];
                    v.extend(std::iter::repeat_n(1, ones));
                    v.extend(std::iter::repeat_n(2, len - zeros - ones));
                    out.push(v);
                }
            }
            out
        }
        for m in 0..=6 {
            for n in 0..=6 {
                for a in sorted_arrays(m) {
                    for b in sorted_arrays(n) {
                        for i in 0..=m + n {
                            let all = brute_force(i, &a, &b);
                            assert_eq!(all.len(), 1, "a={a:?} b={b:?} i={i}");
                            let s = co_rank_stats(i, &a, &b, |x, y| x < y).unwrap();
                            assert_eq!(s.co_ranks, all[0]);
                            assert!(s.iterations <= iteration_bound(m, n, i));
                            assert!(s.comparisons <= comparison_bound(m, n, i));
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn matches_brute_force(a in sorted_vec(64, 8), b in sorted_vec(64, 8), pick in any::<prop::sample::Index>()) {
            let i = pick.index(a.len() + b.len() + 1);
            let expected = brute_force(i, &a, &b);
            prop_assert_eq!(expected.len(), 1);
            prop_assert_eq!(co_rank(i, &a, &b).unwrap(), expected[0]);
            prop_assert_eq!(by_merging(i, &a, &b), expected[0]);
        }

        #[test]
        fn monotone_in_rank(a in sorted_vec(48, 5), b in sorted_vec(48, 5)) {
            let mut prev = CoRanks::default();
            for i in 0..=a.len() + b.len() {
                let c = co_rank(i, &a, &b).unwrap();
                prop_assert!(c.a >= prev.a && c.b >= prev.b);
                prop_assert_eq!(c.rank(), i);
                prev = c;
            }
        }

        #[test]
        fn pure_and_deterministic(a in sorted_vec(100, 20), b in sorted_vec(100, 20), pick in any::<prop::sample::Index>()) {
            let i = pick.index(a.len() + b.len() + 1);
            let (a0, b0) = (a.clone(), b.clone());
            let first = co_rank(i, &a, &b).unwrap();
            let second = co_rank(i, &a, &b).unwrap();
            prop_assert_eq!(first, second);
            prop_assert_eq!(a, a0);
            prop_assert_eq!(b, b0);
        }

        #[test]
        fn bounds_hold_at_1024(
            a in prop::collection::vec(any::<u64>(), 1024),
            b in prop::collection::vec(any::<u64>(), 1024),
            i in 0usize..=2048,
        ) {
            let (mut a, mut b) = (a, b);
            a.sort_unstable();
            b.sort_unstable();
            let s = co_rank_stats(i, &a, &b, |x, y| x < y).unwrap();
            prop_assert!(s.iterations <= iteration_bound(1024, 1024, i));
            prop_assert!(s.comparisons <= comparison_bound(1024, 1024, i));
        }
    }
}
