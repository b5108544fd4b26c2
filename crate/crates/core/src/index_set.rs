//! Decidable subsets of ℕ = {1, 2, ...}: finite sets and eventually periodic
//! sets, with membership, infinitude, boolean algebra, and enumeration all
//! computable from the descriptor.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::seq::UpSeq;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IndexSet {
    pub(crate) rep: UpSeq<bool>,
}

/// Spec-level view of an [`IndexSet`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SetKind {
    Finite(BTreeSet<u64>),
    EventuallyPeriodic(Vec<bool>, Vec<bool>),
}

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet {
            rep: UpSeq::constant(false),
        }
    }

    pub fn all() -> Self {
        IndexSet {
            rep: UpSeq::constant(true),
        }
    }

    pub fn finite(members: &BTreeSet<u64>) -> Result<Self> {
        let mut prefix = Vec::new();
        for &m in members {
            if m == 0 {
                return Err(Error::IndexOutOfRange);
            }
            let m = m as usize;
            if prefix.len() < m {
                prefix.resize(m, false);
            }
            prefix[m - 1] = true;
        }
        Ok(IndexSet {
            rep: UpSeq::new(prefix, vec![false]),
        })
    }

    pub fn eventually_periodic(prefix: Vec<bool>, period: Vec<bool>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        Ok(IndexSet {
            rep: UpSeq::new(prefix, period),
        })
    }

    /// Multiples of `step` shifted by `start`: {start, start+step, ...}.
    pub fn arithmetic(start: u64, step: u64) -> Self {
        assert!(start >= 1 && step >= 1);
        let mut period = vec![false; step as usize];
        period[0] = true;
        IndexSet {
            rep: UpSeq::new(vec![false; start as usize - 1], period),
        }
    }

    pub(crate) fn from_rep(rep: UpSeq<bool>) -> Self {
        IndexSet { rep }
    }

    pub fn kind(&self) -> SetKind {
        if self.is_finite() {
            SetKind::Finite(self.finite_members().unwrap())
        } else {
            SetKind::EventuallyPeriodic(self.rep.prefix.clone(), self.rep.period.clone())
        }
    }

    pub fn contains(&self, i: u64) -> bool {
        *self.rep.eval(i)
    }

    pub fn is_empty(&self) -> bool {
        self.rep.prefix.iter().all(|&b| !b) && self.rep.period.iter().all(|&b| !b)
    }

    pub fn is_finite(&self) -> bool {
        self.rep.period.iter().all(|&b| !b)
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    /// All members of a finite set.
    pub fn finite_members(&self) -> Option<BTreeSet<u64>> {
        if !self.is_finite() {
            return None;
        }
        Some(
            self.rep
                .prefix
                .iter()
                .enumerate()
                .filter_map(|(i, &b)| b.then_some(i as u64 + 1))
                .collect(),
        )
    }

    pub fn complement(&self) -> IndexSet {
        IndexSet {
            rep: self.rep.map(|&b| !b),
        }
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            rep: self.rep.zip(&other.rep, |&a, &b| a || b),
        }
    }

    pub fn intersect(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            rep: self.rep.zip(&other.rep, |&a, &b| a && b),
        }
    }

    pub fn minus(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            rep: self.rep.zip(&other.rep, |&a, &b| a && !b),
        }
    }

    /// {i + delta : i in self} ∩ ℕ.
    pub fn shifted(&self, delta: i64) -> IndexSet {
        if delta >= 0 {
            IndexSet {
                rep: self.rep.delay(delta as u64, false),
            }
        } else {
            IndexSet {
                rep: self.rep.advance((-delta) as u64),
            }
        }
    }

    /// Members in ascending order; unbounded for infinite sets.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (1u64..).filter(|&i| self.contains(i))
    }

    /// Members up to and including `bound`.
    pub fn members_up_to(&self, bound: u64) -> Vec<u64> {
        (1..=bound).filter(|&i| self.contains(i)).collect()
    }

    /// True when no two consecutive naturals both lie in the set.
    pub fn has_no_two_consecutive(&self) -> bool {
        let pairs = self.rep.zip(&self.rep.advance(1), |&a, &b| a && b);
        pairs.prefix.iter().all(|&b| !b) && pairs.period.iter().all(|&b| !b)
    }

    pub(crate) fn settle_point(&self) -> u64 {
        self.rep.settle_point()
    }

    pub(crate) fn period_len(&self) -> u64 {
        self.rep.period.len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evens() -> IndexSet {
        IndexSet::arithmetic(2, 2)
    }

    #[test]
    fn membership_and_infinitude() {
        let e = evens();
        assert!(e.contains(2) && e.contains(100) && !e.contains(7));
        assert!(e.is_infinite());
        let f = IndexSet::finite(&[3, 5].into()).unwrap();
        assert!(f.is_finite() && f.contains(5) && !f.contains(4));
        assert_eq!(f.finite_members().unwrap(), [3, 5].into());
    }

    #[test]
    fn boolean_algebra() {
        let e = evens();
        let odds = e.complement();
        assert!(odds.contains(1) && !odds.contains(2));
        assert!(e.union(&odds) == IndexSet::all());
        assert!(e.intersect(&odds).is_empty());
        let m4 = IndexSet::arithmetic(4, 4);
        assert_eq!(e.intersect(&m4), m4);
    }

    #[test]
    fn shifting_clips_at_one() {
        let s = IndexSet::finite(&[1, 2].into()).unwrap();
        let left = s.shifted(-1);
        assert_eq!(left.finite_members().unwrap(), [1].into());
        let right = s.shifted(3);
        assert_eq!(right.finite_members().unwrap(), [4, 5].into());
    }

    #[test]
    fn consecutive_detection() {
        assert!(evens().complement().has_no_two_consecutive());
        let m4 = IndexSet::arithmetic(4, 4);
        assert!(!m4.complement().has_no_two_consecutive());
        assert!(IndexSet::all().complement().has_no_two_consecutive());
    }

    #[test]
    fn canonical_equality() {
        let a = IndexSet::eventually_periodic(vec![false], vec![true, false]).unwrap();
        let b = IndexSet::arithmetic(2, 2);
        assert_eq!(a, b);
    }
}
