//! Subsets of variable indices as fixed-width bitmasks.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest number of variables a [`VariableSet`] can index.
pub const MAX_VARIABLES: usize = 63;

/// Largest set whose full power set may be enumerated into a table.
pub const MAX_ENUMERATION: usize = 25;

/// A subset of `{0, .., 62}`.
///
/// Ordering is lexicographic on the ascending element list, so `{0} < {0,1} <
/// {0,2} < {1}`. Reports and scans rely on this order being stable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VariableSet(u64);

impl VariableSet {
    pub const EMPTY: VariableSet = VariableSet(0);

    /// Panics if a bit at position 63 is set.
    pub fn from_bits(bits: u64) -> Self {
        assert!(
            bits >> MAX_VARIABLES == 0,
            "variable index 63 is out of range"
        );
        VariableSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_VARIABLES, "variable index {i} out of range");
        VariableSet(1 << i)
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_VARIABLES, "at most {MAX_VARIABLES} variables");
        if n == 0 {
            Self::EMPTY
        } else {
            VariableSet(u64::MAX >> (64 - n))
        }
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_VARIABLES && self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        self | Self::singleton(i)
    }

    pub fn without(self, i: usize) -> Self {
        VariableSet(self.0 & !(1u64 << i))
    }

    pub fn union(self, other: Self) -> Self {
        VariableSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        VariableSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        VariableSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Largest index plus one, or zero for the empty set.
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> Elements {
        Elements(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Every subset, including `∅` and `self`, in increasing bit order.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: Some(0),
        }
    }

    /// Subsets of exactly `k` elements, in lexicographic element order.
    pub fn subsets_of_size(self, k: usize) -> impl Iterator<Item = VariableSet> {
        let elems = self.to_vec();
        Combinations::new(elems.len(), k).map(move |idx| idx.iter().map(|&i| elems[i]).collect())
    }

    /// Index of `subset` in the dense numbering of `self`'s power set, where bit
    /// `r` of the result is set when the `r`-th smallest element of `self` is in
    /// `subset`.
    pub fn rank_within(self, subset: VariableSet) -> usize {
        let mut rank = 0usize;
        for (r, e) in self.iter().enumerate() {
            if subset.contains(e) {
                rank |= 1 << r;
            }
        }
        rank
    }

    /// Position of element `i` among the set's ascending elements.
    pub fn rank_index(self, i: usize) -> usize {
        (self.0 & ((1u64 << i) - 1)).count_ones() as usize
    }

    /// Inverse of [`rank_within`](Self::rank_within).
    pub fn unrank_within(self, mut rank: usize) -> VariableSet {
        let mut out = VariableSet::EMPTY;
        for e in self.iter() {
            if rank == 0 {
                break;
            }
            if rank & 1 == 1 {
                out = out.with(e);
            }
            rank >>= 1;
        }
        out
    }
}

impl std::ops::BitOr for VariableSet {
    type Output = VariableSet;
    fn bitor(self, rhs: Self) -> Self {
        self.union(rhs)
    }
}

impl std::ops::BitAnd for VariableSet {
    type Output = VariableSet;
    fn bitand(self, rhs: Self) -> Self {
        self.intersection(rhs)
    }
}

impl Ord for VariableSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for VariableSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<usize> for VariableSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(Self::EMPTY, |s, i| s.with(i))
    }
}

impl<const N: usize> From<[usize; N]> for VariableSet {
    fn from(items: [usize; N]) -> Self {
        items.into_iter().collect()
    }
}

impl From<&[usize]> for VariableSet {
    fn from(items: &[usize]) -> Self {
        items.iter().copied().collect()
    }
}

impl fmt::Debug for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Ascending element iterator.
pub struct Elements(u64);

impl Iterator for Elements {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Elements {}

/// Submask enumeration: walks `s = (s - mask) & mask` upward from zero.
pub struct Subsets {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = VariableSet;
    fn next(&mut self) -> Option<VariableSet> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            Some(cur.wrapping_sub(self.mask) & self.mask)
        };
        Some(VariableSet(cur))
    }
}

/// k-combinations of `0..n` in lexicographic order.
pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}
