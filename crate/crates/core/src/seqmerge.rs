//! Sequential stable two-way merge, plus a tagged reference merge used as
//! ground truth in verification.

use crate::coranker::ComparisonCounter;
use crate::{Error, Result};

/// Writable, fixed-length destination for merged elements.
pub trait OutputView<T> {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn write(&mut self, index: usize, value: T);
}

impl<T> OutputView<T> for [T] {
    fn len(&self) -> usize {
        <[T]>::len(self)
    }

    #[inline]
    fn write(&mut self, index: usize, value: T) {
        self[index] = value;
    }
}

impl<T, O: OutputView<T> + ?Sized> OutputView<T> for &mut O {
    fn len(&self) -> usize {
        (**self).len()
    }

    #[inline]
    fn write(&mut self, index: usize, value: T) {
        (**self).write(index, value)
    }
}

/// Stable merge of `a` and `b` into `out` for `Ord` elements.
pub fn stable_merge<T: Ord + Clone>(a: &[T], b: &[T], out: &mut [T]) -> Result<()> {
    stable_merge_by(a, b, out, |x, y| x < y)
}

/// Stable merge under `is_less`. Ties go to `a`: an element of `b` is taken
/// only when it is strictly smaller than the head of `a`.
pub fn stable_merge_by<T, O, F>(a: &[T], b: &[T], mut out: O, mut is_less: F) -> Result<()>
where
    T: Clone,
    O: OutputView<T>,
    F: FnMut(&T, &T) -> bool,
{
    let expected = a.len() + b.len();
    if out.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: out.len(),
        });
    }

    let (mut j, mut k, mut t) = (0, 0, 0);
    while j < a.len() && k < b.len() {
        if is_less(&b[k], &a[j]) {
            out.write(t, b[k].clone());
            k += 1;
        } else {
            out.write(t, a[j].clone());
            j += 1;
        }
        t += 1;
    }
    for x in a[j..].iter().chain(&b[k..]) {
        out.write(t, x.clone());
        t += 1;
    }
    Ok(())
}

/// As [`stable_merge_by`], counting key comparisons into `counter`.
pub fn stable_merge_counted<T, O, F>(
    a: &[T],
    b: &[T],
    out: O,
    is_less: F,
    counter: &mut ComparisonCounter,
) -> Result<()>
where
    T: Clone,
    O: OutputView<T>,
    F: FnMut(&T, &T) -> bool,
{
    stable_merge_by(a, b, out, counter.wrap(is_less))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    FromA,
    FromB,
}

/// A key remembering which input it came from and where.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tagged<K> {
    pub key: K,
    pub origin: Origin,
    pub index: usize,
}

impl<K: Ord> Tagged<K> {
    /// Key-only ordering; origin and index never participate.
    pub fn key_less(x: &Self, y: &Self) -> bool {
        x.key < y.key
    }
}

/// Tags every key of `keys` with `origin` and its position.
pub fn tag<K: Clone>(keys: &[K], origin: Origin) -> Vec<Tagged<K>> {
    keys.iter()
        .enumerate()
        .map(|(index, key)| Tagged {
            key: key.clone(),
            origin,
            index,
        })
        .collect()
}

/// Reference stable merge with provenance, for checking other merges.
///
/// Validates both inputs first. Deliberately shares no code with the merge
/// kernels.
pub fn oracle_merge_tagged<K: Ord + Clone>(a: &[K], b: &[K]) -> Result<Vec<Tagged<K>>> {
    for (input, keys) in [("A", a), ("B", b)] {
        if let Some(p) = (1..keys.len()).find(|&p| keys[p] < keys[p - 1]) {
            return Err(Error::Unsorted {
                input: input.to_string(),
                position: p,
            });
        }
    }

    let mut merged = Vec::with_capacity(a.len() + b.len());
    let (mut ia, mut ib) = (0, 0);
    loop {
        let take_a = match (a.get(ia), b.get(ib)) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => x <= y,
        };
        if take_a {
            merged.push(Tagged {
                key: a[ia].clone(),
                origin: Origin::FromA,
                index: ia,
            });
            ia += 1;
        } else {
            merged.push(Tagged {
                key: b[ib].clone(),
                origin: Origin::FromB,
                index: ib,
            });
            ib += 1;
        }
    }
    Ok(merged)
}
