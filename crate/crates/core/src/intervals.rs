//! Finite unions of half-open intervals `[lo, hi)` with exact endpoints.
//!
//! The canonical form is sorted, pairwise disjoint, with adjacent intervals
//! merged, so equality of sets is equality of representations. No operation
//! introduces rounding; the scalar is any exact ordered field (used with
//! `BigRational` throughout the crate).

use crate::scalar::ExactScalar;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IntervalError {
    #[error("interval endpoints must satisfy 0 <= lo < hi")]
    BadEndpoints,
    #[error("need at least {need} values, got {got}")]
    TooFewValues { need: usize, got: usize },
    #[error("values must be sorted ascending")]
    Unsorted,
    #[error("window must be positive")]
    BadWindow,
}

/// Canonical finite union of half-open intervals in `[0, ∞)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalSet<T> {
    ivs: Vec<(T, T)>,
}

impl<T: ExactScalar> Default for IntervalSet<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: ExactScalar> IntervalSet<T> {
    pub fn empty() -> Self {
        IntervalSet { ivs: Vec::new() }
    }

    /// Build from arbitrary `[lo, hi)` pieces; overlapping and adjacent
    /// pieces merge into canonical form. Endpoints must be `0 <= lo < hi`.
    pub fn new(pieces: Vec<(T, T)>) -> Result<Self, IntervalError> {
        for (lo, hi) in &pieces {
            if lo.is_negative() || lo >= hi {
                return Err(IntervalError::BadEndpoints);
            }
        }
        let mut pieces = pieces;
        pieces.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut ivs: Vec<(T, T)> = Vec::with_capacity(pieces.len());
        for (lo, hi) in pieces {
            match ivs.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => ivs.push((lo, hi)),
            }
        }
        Ok(IntervalSet { ivs })
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.ivs
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    /// True iff `x` lies in the set (half-open membership).
    pub fn contains(&self, x: &T) -> bool {
        self.ivs
            .binary_search_by(|(lo, hi)| {
                if x < lo {
                    std::cmp::Ordering::Greater
                } else if x >= hi {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    /// Exact total length.
    pub fn measure(&self) -> T {
        self.ivs
            .iter()
            .fold(T::zero(), |acc, (lo, hi)| acc + (hi.clone() - lo.clone()))
    }

    /// Exact length of `self ∩ [0, t)`.
    pub fn measure_below(&self, t: &T) -> T {
        let mut acc = T::zero();
        for (lo, hi) in &self.ivs {
            if lo >= t {
                break;
            }
            let top = if hi < t { hi.clone() } else { t.clone() };
            acc = acc + (top - lo.clone());
        }
        acc
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut pieces = self.ivs.clone();
        pieces.extend(other.ivs.iter().cloned());
        IntervalSet::new(pieces).expect("canonical inputs")
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ivs.len() && j < other.ivs.len() {
            let (alo, ahi) = &self.ivs[i];
            let (blo, bhi) = &other.ivs[j];
            let lo = if alo > blo { alo } else { blo };
            let hi = if ahi < bhi { ahi } else { bhi };
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
            if ahi <= bhi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { ivs: out }
    }

    /// Set difference `self \ other`.
    pub fn minus(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for (lo, hi) in &self.ivs {
            let mut cur = lo.clone();
            for (blo, bhi) in &other.ivs {
                if bhi <= &cur {
                    continue;
                }
                if blo >= hi {
                    break;
                }
                if blo > &cur {
                    out.push((cur.clone(), blo.clone()));
                }
                if bhi < hi {
                    cur = bhi.clone();
                } else {
                    cur = hi.clone();
                    break;
                }
            }
            if &cur < hi {
                out.push((cur, hi.clone()));
            }
        }
        IntervalSet { ivs: out }
    }

    /// Complement within `[lo, hi)`.
    pub fn complement_within(&self, lo: T, hi: T) -> Result<Self, IntervalError> {
        if lo.is_negative() || lo >= hi {
            return Err(IntervalError::BadEndpoints);
        }
        let window = IntervalSet {
            ivs: vec![(lo, hi)],
        };
        Ok(window.minus(self))
    }

    /// Translate by `t >= 0`.
    pub fn translate(&self, t: &T) -> Self {
        debug_assert!(!t.is_negative());
        IntervalSet {
            ivs: self
                .ivs
                .iter()
                .map(|(lo, hi)| (lo.clone() + t.clone(), hi.clone() + t.clone()))
                .collect(),
        }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.minus(other).is_empty()
    }

    /// Length of the longest maximal gap of the set within `[0, window)`
    /// (zero when the window is fully covered).
    pub fn max_gap_within(&self, window: &T) -> Result<T, IntervalError> {
        if !(window > &T::zero()) {
            return Err(IntervalError::BadWindow);
        }
        let complement = self.complement_within(T::zero(), window.clone())?;
        Ok(complement
            .ivs
            .iter()
            .map(|(lo, hi)| hi.clone() - lo.clone())
            .max()
            .unwrap_or_else(T::zero))
    }
}

/// All pairwise differences `b_j - b_i` (`i < j`) of an ascending list,
/// deduplicated. Equal entries are allowed and contribute the difference 0.
pub fn difference_set<T: ExactScalar>(betas: &[T]) -> Result<Vec<T>, IntervalError> {
    if betas.len() < 2 {
        return Err(IntervalError::TooFewValues {
            need: 2,
            got: betas.len(),
        });
    }
    if betas.windows(2).any(|w| w[0] > w[1]) {
        return Err(IntervalError::Unsorted);
    }
    let mut diffs = Vec::new();
    for j in 1..betas.len() {
        for i in 0..j {
            diffs.push(betas[j].clone() - betas[i].clone());
        }
    }
    diffs.sort();
    diffs.dedup();
    Ok(diffs)
}

/// Does some pairwise difference of `betas` land in the set?
pub fn hits<T: ExactScalar>(set: &IntervalSet<T>, betas: &[T]) -> Result<bool, IntervalError> {
    Ok(difference_set(betas)?.iter().any(|d| set.contains(d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn set(pieces: &[(i64, i64, i64, i64)]) -> IntervalSet<BigRational> {
        IntervalSet::new(
            pieces
                .iter()
                .map(|&(a, b, c, d)| (rat(a, b), rat(c, d)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn canonical_merging() {
        let s = set(&[(1, 1, 2, 1), (2, 1, 3, 1), (5, 1, 6, 1)]);
        assert_eq!(s.intervals().len(), 2); // [1,3) and [5,6)
        let t = set(&[(5, 1, 6, 1), (1, 1, 3, 1)]);
        assert_eq!(s, t); // canonical form is order-independent
    }

    #[test]
    fn rejects_bad_endpoints() {
        assert!(IntervalSet::new(vec![(rat(1, 1), rat(1, 1))]).is_err());
        assert!(IntervalSet::new(vec![(rat(-1, 2), rat(1, 1))]).is_err());
    }

    #[test]
    fn measure_clips() {
        // [0,1/2) ∪ [1,3/2) within [0,2) has measure 1
        let s = set(&[(0, 1, 1, 2), (1, 1, 3, 2)]);
        assert_eq!(s.measure_below(&rat(2, 1)), rat(1, 1));
        assert_eq!(s.measure_below(&rat(0, 1)), rat(0, 1));
        assert_eq!(s.measure_below(&rat(5, 4)), rat(3, 4));
    }

    #[test]
    fn union_subadditive() {
        let a = set(&[(0, 1, 1, 1), (3, 1, 4, 1)]);
        let b = set(&[(1, 2, 2, 1)]);
        let u = a.union(&b);
        assert!(u.measure() <= a.measure() + b.measure());
        assert_eq!(u.measure(), rat(3, 1)); // [0,2) ∪ [3,4)
    }

    #[test]
    fn minus_and_complement() {
        let a = set(&[(0, 1, 4, 1)]);
        let b = set(&[(1, 1, 2, 1)]);
        let d = a.minus(&b);
        assert_eq!(d, set(&[(0, 1, 1, 1), (2, 1, 4, 1)]));
        let c = b.complement_within(rat(0, 1), rat(3, 1)).unwrap();
        assert_eq!(c, set(&[(0, 1, 1, 1), (2, 1, 3, 1)]));
        assert!(b.is_subset_of(&a));
        assert!(!a.is_subset_of(&b));
    }

    #[test]
    fn membership_is_half_open() {
        let s = set(&[(1, 1, 2, 1)]);
        assert!(s.contains(&rat(1, 1)));
        assert!(s.contains(&rat(3, 2)));
        assert!(!s.contains(&rat(2, 1)));
        assert!(!s.contains(&rat(0, 1)));
    }

    #[test]
    fn difference_set_examples() {
        let d = difference_set(&[rat(0, 1), rat(1, 1), rat(3, 1)]).unwrap();
        assert_eq!(d, vec![rat(1, 1), rat(2, 1), rat(3, 1)]);
        let d = difference_set(&[rat(0, 1), rat(1, 1), rat(2, 1)]).unwrap();
        assert_eq!(d, vec![rat(1, 1), rat(2, 1)]); // duplicate difference collapses
        let d = difference_set(&[rat(0, 1), rat(0, 1), rat(1, 1)]).unwrap();
        assert_eq!(d, vec![rat(0, 1), rat(1, 1)]); // equal betas allowed
        assert!(difference_set(&[rat(1, 1)]).is_err());
        assert!(difference_set(&[rat(2, 1), rat(1, 1)]).is_err());
    }

    #[test]
    fn hits_examples() {
        let s = set(&[(1, 1, 2, 1)]);
        assert!(hits(&s, &[rat(0, 1), rat(3, 2)]).unwrap());
        assert!(!hits(&s, &[rat(0, 1), rat(5, 1), rat(10, 1)]).unwrap());
    }

    #[test]
    fn hits_consistent_with_difference_set() {
        let s = set(&[(1, 2, 5, 4), (7, 2, 4, 1)]);
        let betas = [rat(0, 1), rat(3, 4), rat(2, 1), rat(15, 4)];
        let via_points = difference_set(&betas)
            .unwrap()
            .iter()
            .any(|d| s.contains(d));
        assert_eq!(hits(&s, &betas).unwrap(), via_points);
    }

    #[test]
    fn syndetic_gap_periodic() {
        // ∪ [n, n+1/2) for n < 10: complement gaps of length 1/2
        let pieces: Vec<_> = (0..10).map(|n| (rat(n, 1), rat(2 * n + 1, 2))).collect();
        let s = IntervalSet::new(pieces).unwrap();
        assert_eq!(s.max_gap_within(&rat(10, 1)).unwrap(), rat(1, 2));
    }

    #[test]
    fn syndetic_gap_full_cover_and_errors() {
        let s = set(&[(0, 1, 10, 1)]);
        assert_eq!(s.max_gap_within(&rat(10, 1)).unwrap(), rat(0, 1));
        assert!(s.max_gap_within(&rat(0, 1)).is_err());
    }

    #[test]
    fn intersect_walk() {
        let a = set(&[(0, 1, 2, 1), (3, 1, 5, 1)]);
        let b = set(&[(1, 1, 4, 1)]);
        assert_eq!(a.intersect(&b), set(&[(1, 1, 2, 1), (3, 1, 4, 1)]));
    }
}
