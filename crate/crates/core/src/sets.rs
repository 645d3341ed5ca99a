//! Typed index sets over the two vertex sides of a restaking graph.
//!
//! Sets are `u128` bitmasks over file-order vertex indices, so services and
//! validators each top out at 128 per graph. That is far beyond anything the
//! exponential analyses can enumerate and keeps every set operation O(1).
//! Distinct marker types stop a service set from being used where a validator
//! set is expected.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::marker::PhantomData;

pub const MAX_VERTICES_PER_SIDE: usize = 128;

pub enum ServiceMarker {}
pub enum ValidatorMarker {}

pub type ServiceSet = IndexSet<ServiceMarker>;
pub type ValidatorSet = IndexSet<ValidatorMarker>;

pub struct IndexSet<M> {
    bits: u128,
    _side: PhantomData<M>,
}

impl<M> IndexSet<M> {
    pub const fn empty() -> Self {
        Self::from_bits(0)
    }

    pub const fn from_bits(bits: u128) -> Self {
        IndexSet {
            bits,
            _side: PhantomData,
        }
    }

    pub const fn bits(self) -> u128 {
        self.bits
    }

    /// The full set {0, .., n-1}.
    pub fn all(n: usize) -> Self {
        debug_assert!(n <= MAX_VERTICES_PER_SIDE);
        if n == MAX_VERTICES_PER_SIDE {
            Self::from_bits(u128::MAX)
        } else {
            Self::from_bits((1u128 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_VERTICES_PER_SIDE);
        Self::from_bits(1u128 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut bits = 0u128;
        for i in indices {
            debug_assert!(i < MAX_VERTICES_PER_SIDE);
            bits |= 1u128 << i;
        }
        Self::from_bits(bits)
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_VERTICES_PER_SIDE && self.bits & (1u128 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        debug_assert!(i < MAX_VERTICES_PER_SIDE);
        Self::from_bits(self.bits | (1u128 << i))
    }

    pub fn without(self, i: usize) -> Self {
        Self::from_bits(self.bits & !(1u128 << i))
    }

    pub fn union(self, other: Self) -> Self {
        Self::from_bits(self.bits | other.bits)
    }

    pub fn intersection(self, other: Self) -> Self {
        Self::from_bits(self.bits & other.bits)
    }

    pub fn difference(self, other: Self) -> Self {
        Self::from_bits(self.bits & !other.bits)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.bits & other.bits == 0
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn iter(self) -> Indices {
        Indices { bits: self.bits }
    }

    /// All subsets of this set in ascending numeric (bitmask) order, starting
    /// with the empty set and ending with the set itself.
    pub fn subsets(self) -> Submasks<M> {
        Submasks {
            mask: self.bits,
            next: Some(0),
            _side: PhantomData,
        }
    }

    /// All subsets in descending numeric order: the set itself first, the
    /// empty set last.
    pub fn subsets_descending(self) -> SubmasksDesc<M> {
        SubmasksDesc {
            mask: self.bits,
            next: Some(self.bits),
            _side: PhantomData,
        }
    }

    /// Canonical set order: compare the ascending index sequences
    /// lexicographically (so `{a}` < `{b}` and `{a}` < `{a, b}` when `a` is
    /// index 0 and `b` index 1). Used for deterministic tie-breaking among
    /// equal-weight witnesses.
    pub fn cmp_canonical(self, other: Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

#[derive(Clone, Copy)]
pub struct Indices {
    bits: u128,
}

impl Iterator for Indices {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.bits == 0 {
            return None;
        }
        let i = self.bits.trailing_zeros() as usize;
        self.bits &= self.bits - 1;
        Some(i)
    }
}

/// Carry-rippler submask enumeration, ascending.
pub struct Submasks<M> {
    mask: u128,
    next: Option<u128>,
    _side: PhantomData<M>,
}

impl<M> Iterator for Submasks<M> {
    type Item = IndexSet<M>;

    fn next(&mut self) -> Option<IndexSet<M>> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            Some(cur.wrapping_sub(self.mask) & self.mask)
        };
        Some(IndexSet::from_bits(cur))
    }
}

pub struct SubmasksDesc<M> {
    mask: u128,
    next: Option<u128>,
    _side: PhantomData<M>,
}

impl<M> Iterator for SubmasksDesc<M> {
    type Item = IndexSet<M>;

    fn next(&mut self) -> Option<IndexSet<M>> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            Some((cur - 1) & self.mask)
        };
        Some(IndexSet::from_bits(cur))
    }
}

// Manual impls: derives would demand bounds on the phantom marker.
impl<M> Clone for IndexSet<M> {
    fn clone(&self) -> Self {
        *self
    }
}
impl<M> Copy for IndexSet<M> {}
impl<M> PartialEq for IndexSet<M> {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits
    }
}
impl<M> Eq for IndexSet<M> {}
impl<M> Hash for IndexSet<M> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bits.hash(state);
    }
}
impl<M> Default for IndexSet<M> {
    fn default() -> Self {
        Self::empty()
    }
}
impl<M> fmt::Debug for IndexSet<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = ServiceSet::from_indices([0, 2]);
        let b = ServiceSet::from_indices([2, 3]);
        assert_eq!(a.union(b), ServiceSet::from_indices([0, 2, 3]));
        assert_eq!(a.intersection(b), ServiceSet::singleton(2));
        assert_eq!(a.difference(b), ServiceSet::singleton(0));
        assert!(a.intersection(b).is_subset(a));
        assert!(!a.is_subset(b));
        assert_eq!(a.len(), 2);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(ServiceSet::all(3).bits(), 0b111);
    }

    #[test]
    fn subsets_enumerate_everything_in_order() {
        let s = ValidatorSet::from_indices([0, 2, 3]);
        let all: Vec<u128> = s.subsets().map(|x| x.bits()).collect();
        assert_eq!(all.len(), 8);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted, "ascending enumeration");
        for m in &all {
            assert_eq!(m & !s.bits(), 0);
        }
        let desc: Vec<u128> = s.subsets_descending().map(|x| x.bits()).collect();
        let mut rev = all;
        rev.reverse();
        assert_eq!(desc, rev);
    }

    #[test]
    fn subsets_of_empty_set() {
        let subs: Vec<_> = ServiceSet::empty().subsets().collect();
        assert_eq!(subs, vec![ServiceSet::empty()]);
    }

    #[test]
    fn canonical_order_is_lexicographic_on_index_sequences() {
        let s = |ix: &[usize]| ValidatorSet::from_indices(ix.iter().copied());
        // Brute-force comparison of index vectors must agree.
        let universe: Vec<ValidatorSet> = ValidatorSet::all(4).subsets().collect();
        for &a in &universe {
            for &b in &universe {
                let expect = a.iter().collect::<Vec<_>>().cmp(&b.iter().collect::<Vec<_>>());
                assert_eq!(a.cmp_canonical(b), expect, "{a:?} vs {b:?}");
            }
        }
        // Spot checks: prefix-first, smaller leading index first.
        assert_eq!(s(&[0]).cmp_canonical(s(&[1])), Ordering::Less);
        assert_eq!(s(&[0]).cmp_canonical(s(&[0, 1])), Ordering::Less);
        assert_eq!(s(&[0, 2]).cmp_canonical(s(&[1])), Ordering::Less);
    }
}
