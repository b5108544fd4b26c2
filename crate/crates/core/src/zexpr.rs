//! The same expression grammar over ℤ×ℤ index sets. Descriptors are
//! two-sided: independent eventually periodic behavior toward +∞ and -∞,
//! with an explicit value at zero. Evaluation mirrors the ℕ-side grammar;
//! window machinery is not needed here because verification happens on the
//! ℕ side after transport.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::field::{FieldElem, FieldId};
use crate::index_set::IndexSet;
use crate::seq::SeqDesc;

/// Two-sided sequence ℤ → K.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ZSeq {
    /// Values at z <= -1, indexed by -z.
    pub neg: SeqDesc,
    pub at_zero: FieldElem,
    /// Values at z >= 1, indexed by z.
    pub pos: SeqDesc,
}

impl ZSeq {
    pub fn constant(value: FieldElem) -> Self {
        ZSeq {
            neg: SeqDesc::constant(value.clone()),
            at_zero: value.clone(),
            pos: SeqDesc::constant(value),
        }
    }

    pub fn finite(field: FieldId, entries: &BTreeMap<i64, FieldElem>) -> Result<Self> {
        let mut neg = BTreeMap::new();
        let mut pos = BTreeMap::new();
        let mut at_zero = field.zero();
        for (&z, v) in entries {
            match z.cmp(&0) {
                std::cmp::Ordering::Less => {
                    neg.insert((-z) as u64, v.clone());
                }
                std::cmp::Ordering::Equal => at_zero = v.clone(),
                std::cmp::Ordering::Greater => {
                    pos.insert(z as u64, v.clone());
                }
            }
        }
        Ok(ZSeq {
            neg: SeqDesc::finite_support(field, &neg)?,
            at_zero,
            pos: SeqDesc::finite_support(field, &pos)?,
        })
    }

    pub fn eval(&self, z: i64) -> FieldElem {
        match z.cmp(&0) {
            std::cmp::Ordering::Less => self.neg.eval((-z) as u64),
            std::cmp::Ordering::Equal => self.at_zero.clone(),
            std::cmp::Ordering::Greater => self.pos.eval(z as u64),
        }
    }
}

/// Two-sided decidable subset of ℤ.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ZSet {
    /// Membership of z <= -1, indexed by -z.
    pub neg: IndexSet,
    pub at_zero: bool,
    /// Membership of z >= 1, indexed by z.
    pub pos: IndexSet,
}

impl ZSet {
    pub fn all() -> Self {
        ZSet {
            neg: IndexSet::all(),
            at_zero: true,
            pos: IndexSet::all(),
        }
    }

    pub fn contains(&self, z: i64) -> bool {
        match z.cmp(&0) {
            std::cmp::Ordering::Less => self.neg.contains((-z) as u64),
            std::cmp::Ordering::Equal => self.at_zero,
            std::cmp::Ordering::Greater => self.pos.contains(z as u64),
        }
    }
}

/// Symbolic column-finite ℤ×ℤ matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ZMatExpr {
    Zero,
    ScalarE(FieldElem),
    Basis(i64, i64),
    FiniteLit(BTreeMap<(i64, i64), FieldElem>),
    Diag(ZSeq),
    Shift {
        offset: i64,
        rows: ZSet,
        weights: ZSeq,
    },
    RowMat {
        row: i64,
        seq: ZSeq,
    },
    Sum(Vec<ZMatExpr>),
    Scale(FieldElem, Box<ZMatExpr>),
    Prod(Box<ZMatExpr>, Box<ZMatExpr>),
    Bracket(Box<ZMatExpr>, Box<ZMatExpr>),
}

impl ZMatExpr {
    pub fn basis(i: i64, j: i64) -> ZMatExpr {
        ZMatExpr::Basis(i, j)
    }

    pub fn sum(terms: Vec<ZMatExpr>) -> ZMatExpr {
        ZMatExpr::Sum(terms)
    }

    pub fn prod(a: ZMatExpr, b: ZMatExpr) -> ZMatExpr {
        ZMatExpr::Prod(Box::new(a), Box::new(b))
    }

    pub fn bracket(a: ZMatExpr, b: ZMatExpr) -> ZMatExpr {
        ZMatExpr::Bracket(Box::new(a), Box::new(b))
    }

    pub fn scale(c: FieldElem, e: ZMatExpr) -> ZMatExpr {
        ZMatExpr::Scale(c, Box::new(e))
    }

    /// Exact (i, j) entry over ℤ indices.
    pub fn entry(&self, field: FieldId, i: i64, j: i64) -> Result<FieldElem> {
        match self {
            ZMatExpr::Zero => Ok(field.zero()),
            ZMatExpr::ScalarE(c) => Ok(if i == j { c.clone() } else { field.zero() }),
            ZMatExpr::Basis(a, b) => Ok(if i == *a && j == *b {
                field.one()
            } else {
                field.zero()
            }),
            ZMatExpr::FiniteLit(entries) => {
                Ok(entries.get(&(i, j)).cloned().unwrap_or_else(|| field.zero()))
            }
            ZMatExpr::Diag(s) => Ok(if i == j { s.eval(i) } else { field.zero() }),
            ZMatExpr::Shift {
                offset,
                rows,
                weights,
            } => Ok(if i + offset == j && rows.contains(i) {
                weights.eval(i)
            } else {
                field.zero()
            }),
            ZMatExpr::RowMat { row, seq } => Ok(if i == *row {
                seq.eval(j)
            } else {
                field.zero()
            }),
            ZMatExpr::Sum(terms) => {
                let mut acc = field.zero();
                for t in terms {
                    acc = acc.add(&t.entry(field, i, j)?)?;
                }
                Ok(acc)
            }
            ZMatExpr::Scale(c, e) => c.mul(&e.entry(field, i, j)?),
            ZMatExpr::Prod(a, b) => {
                let col = b.column(field, j)?;
                let mut acc = field.zero();
                for (k, v) in &col {
                    acc = acc.add(&a.entry(field, i, *k)?.mul(v)?)?;
                }
                Ok(acc)
            }
            ZMatExpr::Bracket(a, b) => {
                let ab = ZMatExpr::Prod(a.clone(), b.clone()).entry(field, i, j)?;
                let ba = ZMatExpr::Prod(b.clone(), a.clone()).entry(field, i, j)?;
                ab.sub(&ba)
            }
        }
    }

    /// Complete nonzero content of one column.
    pub fn column(&self, field: FieldId, j: i64) -> Result<BTreeMap<i64, FieldElem>> {
        let mut col = BTreeMap::new();
        match self {
            ZMatExpr::Zero => {}
            ZMatExpr::ScalarE(c) => {
                if !c.is_zero() {
                    col.insert(j, c.clone());
                }
            }
            ZMatExpr::Basis(a, b) => {
                if *b == j {
                    col.insert(*a, field.one());
                }
            }
            ZMatExpr::FiniteLit(entries) => {
                for (&(r, c), v) in entries {
                    if c == j && !v.is_zero() {
                        zadd(&mut col, r, v.clone())?;
                    }
                }
            }
            ZMatExpr::Diag(s) => {
                let v = s.eval(j);
                if !v.is_zero() {
                    col.insert(j, v);
                }
            }
            ZMatExpr::Shift {
                offset,
                rows,
                weights,
            } => {
                let i = j - offset;
                if rows.contains(i) {
                    let v = weights.eval(i);
                    if !v.is_zero() {
                        col.insert(i, v);
                    }
                }
            }
            ZMatExpr::RowMat { row, seq } => {
                let v = seq.eval(j);
                if !v.is_zero() {
                    col.insert(*row, v);
                }
            }
            ZMatExpr::Sum(terms) => {
                for t in terms {
                    for (r, v) in t.column(field, j)? {
                        zadd(&mut col, r, v)?;
                    }
                }
            }
            ZMatExpr::Scale(c, e) => {
                if !c.is_zero() {
                    for (r, v) in e.column(field, j)? {
                        zadd(&mut col, r, c.mul(&v)?)?;
                    }
                }
            }
            ZMatExpr::Prod(a, b) => {
                for (k, v) in b.column(field, j)? {
                    for (r, w) in a.column(field, k)? {
                        zadd(&mut col, r, w.mul(&v)?)?;
                    }
                }
            }
            ZMatExpr::Bracket(a, b) => {
                for (r, v) in ZMatExpr::Prod(a.clone(), b.clone()).column(field, j)? {
                    zadd(&mut col, r, v)?;
                }
                for (r, v) in ZMatExpr::Prod(b.clone(), a.clone()).column(field, j)? {
                    zadd(&mut col, r, v.neg())?;
                }
            }
        }
        col.retain(|_, v| !v.is_zero());
        Ok(col)
    }

    pub fn describe(&self) -> String {
        match self {
            ZMatExpr::Zero => "0".into(),
            ZMatExpr::ScalarE(c) => format!("{c} * I"),
            ZMatExpr::Basis(i, j) => format!("E({i},{j})"),
            ZMatExpr::FiniteLit(entries) => format!("finite{{{} entries}}", entries.len()),
            ZMatExpr::Diag(_) => "diag(..)".into(),
            ZMatExpr::Shift { offset, .. } => format!("shift({offset},..)"),
            ZMatExpr::RowMat { row, .. } => format!("row({row},..)"),
            ZMatExpr::Sum(terms) => format!("sum of {} terms", terms.len()),
            ZMatExpr::Scale(c, e) => format!("{c} * ({})", e.describe()),
            ZMatExpr::Prod(a, b) => format!("({}) * ({})", a.describe(), b.describe()),
            ZMatExpr::Bracket(a, b) => format!("[{}, {}]", a.describe(), b.describe()),
        }
    }
}

fn zadd(col: &mut BTreeMap<i64, FieldElem>, r: i64, v: FieldElem) -> Result<()> {
    match col.remove(&r) {
        Some(old) => {
            let s = old.add(&v)?;
            if !s.is_zero() {
                col.insert(r, s);
            }
        }
        None => {
            if !v.is_zero() {
                col.insert(r, v);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldId = FieldId::Rational;

    #[test]
    fn entry_and_column_over_z() {
        let e = ZMatExpr::basis(-3, 2);
        assert_eq!(e.entry(Q, -3, 2).unwrap(), Q.from_i64(1));
        assert_eq!(e.entry(Q, 2, -3).unwrap(), Q.from_i64(0));
        let s = ZMatExpr::Shift {
            offset: 1,
            rows: ZSet::all(),
            weights: ZSeq::constant(Q.from_i64(1)),
        };
        let col = s.column(Q, 0).unwrap();
        assert_eq!(col, [(-1, Q.from_i64(1))].into());
        let br = ZMatExpr::bracket(ZMatExpr::basis(0, 1), ZMatExpr::basis(1, 0));
        assert_eq!(br.entry(Q, 0, 0).unwrap(), Q.from_i64(1));
        assert_eq!(br.entry(Q, 1, 1).unwrap(), Q.from_i64(-1));
    }
}
