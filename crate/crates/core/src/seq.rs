//! Decidable descriptions of infinite sequences ℕ → K.
//!
//! The internal representation is always `prefix + repeating period`, kept
//! minimal, so structural equality coincides with pointwise equality. The
//! three spec-level views (finite support, eventually constant, eventually
//! periodic) are derived from the canonical data: an all-equal period
//! minimizes to length one, and a period of `[0]` means finite support.
//! Indices are 1-based throughout.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldId};
use crate::index_set::IndexSet;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Ultimately periodic stream of `T`, canonical and 1-based.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub(crate) struct UpSeq<T> {
    pub prefix: Vec<T>,
    pub period: Vec<T>,
}

impl<T: Clone + Eq> UpSeq<T> {
    pub fn new(prefix: Vec<T>, period: Vec<T>) -> Self {
        assert!(!period.is_empty());
        let mut s = UpSeq { prefix, period };
        s.canonicalize();
        s
    }

    pub fn constant(value: T) -> Self {
        UpSeq {
            prefix: Vec::new(),
            period: vec![value],
        }
    }

    pub fn eval(&self, i: u64) -> &T {
        assert!(i >= 1, "indices are 1-based");
        let i = i as usize;
        if i <= self.prefix.len() {
            &self.prefix[i - 1]
        } else {
            &self.period[(i - self.prefix.len() - 1) % self.period.len()]
        }
    }

    fn canonicalize(&mut self) {
        // Minimal period: the shortest divisor-length block that tiles it.
        let p = self.period.len();
        for d in 1..p {
            if p % d == 0 && (d..p).all(|i| self.period[i] == self.period[i % d]) {
                self.period.truncate(d);
                break;
            }
        }
        // Minimal prefix: absorb trailing prefix entries into the cycle.
        while let Some(last) = self.prefix.last() {
            if last == self.period.last().unwrap() {
                self.prefix.pop();
                self.period.rotate_right(1);
            } else {
                break;
            }
        }
    }

    pub fn map<U: Clone + Eq>(&self, f: impl Fn(&T) -> U) -> UpSeq<U> {
        UpSeq::new(
            self.prefix.iter().map(&f).collect(),
            self.period.iter().map(&f).collect(),
        )
    }

    pub fn try_map<U: Clone + Eq>(&self, f: impl Fn(&T) -> Result<U>) -> Result<UpSeq<U>> {
        Ok(UpSeq::new(
            self.prefix.iter().map(&f).collect::<Result<_>>()?,
            self.period.iter().map(&f).collect::<Result<_>>()?,
        ))
    }

    pub fn zip<U: Clone + Eq, V: Clone + Eq>(
        &self,
        other: &UpSeq<U>,
        f: impl Fn(&T, &U) -> V,
    ) -> UpSeq<V> {
        self.try_zip(other, |a, b| Ok(f(a, b))).unwrap()
    }

    pub fn try_zip<U: Clone + Eq, V: Clone + Eq>(
        &self,
        other: &UpSeq<U>,
        f: impl Fn(&T, &U) -> Result<V>,
    ) -> Result<UpSeq<V>> {
        let pre = self.prefix.len().max(other.prefix.len());
        let per = lcm(self.period.len(), other.period.len());
        let mut prefix = Vec::with_capacity(pre);
        for i in 1..=pre as u64 {
            prefix.push(f(self.eval(i), other.eval(i))?);
        }
        let mut period = Vec::with_capacity(per);
        for i in pre as u64 + 1..=(pre + per) as u64 {
            period.push(f(self.eval(i), other.eval(i))?);
        }
        Ok(UpSeq::new(prefix, period))
    }

    /// Drops the first `c` values: result(i) = self(i + c).
    pub fn advance(&self, c: u64) -> Self {
        let c = c as usize;
        if c <= self.prefix.len() {
            UpSeq::new(self.prefix[c..].to_vec(), self.period.clone())
        } else {
            let skip = (c - self.prefix.len()) % self.period.len();
            let mut period = self.period.clone();
            period.rotate_left(skip);
            UpSeq::new(Vec::new(), period)
        }
    }

    /// Prepends `c` copies of `fill`: result(i) = self(i - c) for i > c.
    pub fn delay(&self, c: u64, fill: T) -> Self {
        let mut prefix = vec![fill; c as usize];
        prefix.extend(self.prefix.iter().cloned());
        UpSeq::new(prefix, self.period.clone())
    }

    /// First index where every later value is given by the period.
    pub fn settle_point(&self) -> u64 {
        self.prefix.len() as u64 + 1
    }

    /// Smallest descriptor consistent with the given samples: the shortest
    /// period showing at least two full repetitions at the tail, otherwise a
    /// finite-support reading with `tail` beyond the samples.
    pub fn detect(samples: &[T], tail: T) -> Self {
        let n = samples.len();
        for per in 1..=n / 2 {
            // Longest suffix that is `per`-periodic.
            let mut pre = n - 2 * per;
            while pre > 0 && samples[pre - 1] == samples[pre - 1 + per] {
                pre -= 1;
            }
            if (pre..n - per).all(|i| samples[i] == samples[i + per]) && n - pre >= 2 * per {
                return UpSeq::new(
                    samples[..pre].to_vec(),
                    samples[pre..pre + per].to_vec(),
                );
            }
        }
        UpSeq::new(samples.to_vec(), vec![tail])
    }
}

/// A decidable description of an infinite sequence of field elements.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SeqDesc {
    field: FieldId,
    pub(crate) rep: UpSeq<FieldElem>,
}

/// Spec-level view of a [`SeqDesc`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SeqKind {
    /// Nonzero entries only at the listed indices.
    FiniteSupport(BTreeMap<u64, FieldElem>),
    /// `prefix` then `tail` forever, tail nonzero.
    EventuallyConstant(Vec<FieldElem>, FieldElem),
    /// `prefix` then `period` repeating, period length at least two.
    EventuallyPeriodic(Vec<FieldElem>, Vec<FieldElem>),
}

impl SeqDesc {
    pub fn zero(field: FieldId) -> Self {
        Self::constant(field.zero())
    }

    pub fn constant(value: FieldElem) -> Self {
        SeqDesc {
            field: value.field(),
            rep: UpSeq::constant(value),
        }
    }

    pub fn finite_support(field: FieldId, entries: &BTreeMap<u64, FieldElem>) -> Result<Self> {
        let mut prefix = Vec::new();
        for (&i, v) in entries {
            if i == 0 {
                return Err(Error::IndexOutOfRange);
            }
            if v.field() != field {
                return Err(Error::FieldMismatch);
            }
            if v.is_zero() {
                continue;
            }
            let i = i as usize;
            if prefix.len() < i {
                prefix.resize(i, field.zero());
            }
            prefix[i - 1] = v.clone();
        }
        Ok(SeqDesc {
            field,
            rep: UpSeq::new(prefix, vec![field.zero()]),
        })
    }

    pub fn eventually_constant(
        field: FieldId,
        prefix: Vec<FieldElem>,
        tail: FieldElem,
    ) -> Result<Self> {
        Self::eventually_periodic(field, prefix, vec![tail])
    }

    pub fn eventually_periodic(
        field: FieldId,
        prefix: Vec<FieldElem>,
        period: Vec<FieldElem>,
    ) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        for v in prefix.iter().chain(period.iter()) {
            if v.field() != field {
                return Err(Error::FieldMismatch);
            }
        }
        Ok(SeqDesc {
            field,
            rep: UpSeq::new(prefix, period),
        })
    }

    pub(crate) fn from_rep(field: FieldId, rep: UpSeq<FieldElem>) -> Self {
        SeqDesc { field, rep }
    }

    pub fn field(&self) -> FieldId {
        self.field
    }

    pub fn eval(&self, i: u64) -> FieldElem {
        self.rep.eval(i).clone()
    }

    /// Classification into the three descriptor variants.
    pub fn kind(&self) -> SeqKind {
        if self.rep.period.len() == 1 {
            let tail = &self.rep.period[0];
            if tail.is_zero() {
                let mut map = BTreeMap::new();
                for (i, v) in self.rep.prefix.iter().enumerate() {
                    if !v.is_zero() {
                        map.insert(i as u64 + 1, v.clone());
                    }
                }
                SeqKind::FiniteSupport(map)
            } else {
                SeqKind::EventuallyConstant(self.rep.prefix.clone(), tail.clone())
            }
        } else {
            SeqKind::EventuallyPeriodic(self.rep.prefix.clone(), self.rep.period.clone())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rep.prefix.iter().all(FieldElem::is_zero)
            && self.rep.period.iter().all(FieldElem::is_zero)
    }

    pub fn is_finite_support(&self) -> bool {
        self.rep.period.len() == 1 && self.rep.period[0].is_zero()
    }

    pub fn is_eventually_constant(&self) -> bool {
        self.rep.period.len() == 1
    }

    /// The constant tail value, when there is one.
    pub fn eventual_value(&self) -> Option<FieldElem> {
        if self.rep.period.len() == 1 {
            Some(self.rep.period[0].clone())
        } else {
            None
        }
    }

    /// Largest index that can carry a nonzero value, for finite support.
    pub fn support_bound(&self) -> Option<u64> {
        if self.is_finite_support() {
            Some(
                self.rep
                    .prefix
                    .iter()
                    .rposition(|v| !v.is_zero())
                    .map_or(0, |p| p as u64 + 1),
            )
        } else {
            None
        }
    }

    /// Sum of all entries of a finite-support sequence.
    pub fn finite_sum(&self) -> Result<FieldElem> {
        if !self.is_finite_support() {
            return Err(Error::NotInGlFr);
        }
        let mut acc = self.field.zero();
        for v in &self.rep.prefix {
            acc = acc.add(v)?;
        }
        Ok(acc)
    }

    pub fn add(&self, other: &SeqDesc) -> Result<SeqDesc> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(SeqDesc {
            field: self.field,
            rep: self.rep.try_zip(&other.rep, |a, b| a.add(b))?,
        })
    }

    pub fn sub(&self, other: &SeqDesc) -> Result<SeqDesc> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SeqDesc {
        SeqDesc {
            field: self.field,
            rep: self.rep.map(FieldElem::neg),
        }
    }

    pub fn mul_pointwise(&self, other: &SeqDesc) -> Result<SeqDesc> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(SeqDesc {
            field: self.field,
            rep: self.rep.try_zip(&other.rep, |a, b| a.mul(b))?,
        })
    }

    pub fn scale(&self, c: &FieldElem) -> Result<SeqDesc> {
        if self.field != c.field() {
            return Err(Error::FieldMismatch);
        }
        Ok(SeqDesc {
            field: self.field,
            rep: self.rep.try_map(|v| v.mul(c))?,
        })
    }

    /// result(i) = self(i + c).
    pub fn advance(&self, c: u64) -> SeqDesc {
        SeqDesc {
            field: self.field,
            rep: self.rep.advance(c),
        }
    }

    /// result(i) = self(i - c) for i > c, zero before.
    pub fn delay(&self, c: u64) -> SeqDesc {
        SeqDesc {
            field: self.field,
            rep: self.rep.delay(c, self.field.zero()),
        }
    }

    /// result(i) = self(i + delta) read as a partial reindexing over ℤ:
    /// positions whose source index would be < 1 become zero.
    pub fn offset(&self, delta: i64) -> SeqDesc {
        if delta >= 0 {
            self.advance(delta as u64)
        } else {
            self.delay((-delta) as u64)
        }
    }

    /// Zeroes all entries outside `set`.
    pub fn mask(&self, set: &IndexSet) -> SeqDesc {
        SeqDesc {
            field: self.field,
            rep: self.rep.zip(&set.rep, |v, &keep| {
                if keep {
                    v.clone()
                } else {
                    self.field.zero()
                }
            }),
        }
    }

    /// Set of indices with nonzero entries.
    pub fn support(&self) -> IndexSet {
        IndexSet::from_rep(self.rep.map(|v| !v.is_zero()))
    }

    /// Indices i with self(i) != self(i + 1).
    pub fn disagreement(&self) -> IndexSet {
        IndexSet::from_rep(self.rep.zip(&self.rep.advance(1), |a, b| a != b))
    }

    /// Pointwise inverse on the support; zero entries stay zero.
    pub fn invert_on_support(&self) -> Result<SeqDesc> {
        Ok(SeqDesc {
            field: self.field,
            rep: self.rep.try_map(|v| {
                if v.is_zero() {
                    Ok(v.clone())
                } else {
                    v.inv()
                }
            })?,
        })
    }

    pub(crate) fn settle_point(&self) -> u64 {
        self.rep.settle_point()
    }

    pub(crate) fn period_len(&self) -> u64 {
        self.rep.period.len() as u64
    }

    /// Sum of one full period of values.
    pub(crate) fn period_sum(&self) -> Result<FieldElem> {
        let mut acc = self.field.zero();
        for v in &self.rep.period {
            acc = acc.add(v)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(v: i64) -> FieldElem {
        FieldId::Rational.from_i64(v)
    }

    fn per(prefix: &[i64], period: &[i64]) -> SeqDesc {
        SeqDesc::eventually_periodic(
            FieldId::Rational,
            prefix.iter().map(|&v| q(v)).collect(),
            period.iter().map(|&v| q(v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn canonical_forms_collapse() {
        // A period that is a repeated block shrinks.
        assert_eq!(per(&[], &[1, 2, 1, 2]), per(&[], &[1, 2]));
        // A constant period of zero with no live prefix is the zero sequence.
        assert!(per(&[0, 0], &[0]).is_zero());
        // Prefix entries equal to the aligned period value are absorbed.
        assert_eq!(per(&[2], &[1, 2]), per(&[], &[2, 1]));
        // Eventually constant with zero tail is finite support.
        let s = SeqDesc::eventually_constant(FieldId::Rational, vec![q(5)], q(0)).unwrap();
        assert!(matches!(s.kind(), SeqKind::FiniteSupport(_)));
    }

    #[test]
    fn evaluation_is_total_and_exact() {
        let s = per(&[7], &[1, 2]);
        let got: Vec<i64> = (1..=6).map(|i| match s.eval(i) {
            FieldElem::Rational(r) => r.to_integer().try_into().unwrap(),
            _ => unreachable!(),
        }).collect();
        assert_eq!(got, vec![7, 1, 2, 1, 2, 1]);
    }

    #[test]
    fn disagreement_set_of_alternating_sequence() {
        let s = per(&[], &[0, 1]);
        let d = s.disagreement();
        assert!(d.is_infinite());
        assert!((1..20).all(|i| d.contains(i)));
    }

    #[test]
    fn detect_recovers_periodic_tail() {
        let samples: Vec<FieldElem> = [9, 1, 2, 1, 2, 1, 2].iter().map(|&v| q(v)).collect();
        let d = UpSeq::detect(&samples, q(0));
        assert_eq!(SeqDesc::from_rep(FieldId::Rational, d), per(&[9], &[1, 2]));
        let finite: Vec<FieldElem> = [3, 0, 5].iter().map(|&v| q(v)).collect();
        let d = UpSeq::detect(&finite, q(0));
        let s = SeqDesc::from_rep(FieldId::Rational, d);
        assert!(s.is_finite_support());
        assert_eq!(s.eval(3), q(5));
        assert_eq!(s.eval(9), q(0));
    }

    fn arb_seq() -> impl Strategy<Value = SeqDesc> {
        (
            prop::collection::vec(-3i64..4, 0..4),
            prop::collection::vec(-3i64..4, 1..4),
        )
            .prop_map(|(p, c)| per(&p, &c))
    }

    proptest! {
        #[test]
        fn structural_equality_is_pointwise_equality(a in arb_seq(), b in arb_seq()) {
            let horizon = 2 * (a.settle_point() + b.settle_point()
                + a.period_len() * b.period_len()) + 4;
            let pointwise = (1..=horizon).all(|i| a.eval(i) == b.eval(i));
            prop_assert_eq!(pointwise, a == b);
        }

        #[test]
        fn add_matches_pointwise(a in arb_seq(), b in arb_seq()) {
            let s = a.add(&b).unwrap();
            for i in 1..40 {
                prop_assert_eq!(s.eval(i), a.eval(i).add(&b.eval(i)).unwrap());
            }
        }

        #[test]
        fn offsets_compose(a in arb_seq(), c in 1u64..5) {
            let round = a.delay(c).advance(c);
            prop_assert_eq!(round, a.clone());
            let adv = a.advance(c);
            for i in 1..30 {
                prop_assert_eq!(adv.eval(i), a.eval(i + c));
            }
        }

        #[test]
        fn mask_and_support_agree(a in arb_seq()) {
            let supp = a.support();
            let masked = a.mask(&supp);
            prop_assert_eq!(masked, a.clone());
            for i in 1..30 {
                prop_assert_eq!(supp.contains(i), !a.eval(i).is_zero());
            }
        }
    }
}
