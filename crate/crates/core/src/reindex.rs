//! The isomorphism between the ℕ-indexed and ℤ-indexed algebras, realized by
//! the index bijection sending nonnegative x to 2x+1 and negative x to -2x.
//! Transport is entrywise: the image of a matrix has the source entry at the
//! mapped index pair, which makes the map linear, multiplicative, and
//! bracket-preserving.
//!
//! A constant ℤ-band splits under the bijection into an odd-indexed and an
//! even-indexed ℕ-band plus finitely many crossing entries, so shifts
//! transport as sums of two shifts. In the other direction only even offsets
//! transport: an odd ℕ-offset pairs rows and columns of opposite parity,
//! whose preimages drift apart linearly and fit no constant ℤ-band.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::MatExpr;
use crate::field::{FieldElem, FieldId};
use crate::index_set::IndexSet;
use crate::seq::SeqDesc;
use crate::zexpr::{ZMatExpr, ZSeq, ZSet};

/// The index bijection ℤ -> ℕ.
pub fn sigma(z: i64) -> u64 {
    if z >= 0 {
        (2 * z + 1) as u64
    } else {
        (-2 * z) as u64
    }
}

/// Its inverse ℕ -> ℤ; indices are 1-based.
pub fn sigma_inv(n: u64) -> i64 {
    assert!(n >= 1, "indices are 1-based");
    if n % 2 == 1 {
        ((n - 1) / 2) as i64
    } else {
        -((n / 2) as i64)
    }
}

/// Builds a sequence from evaluations with a declared prefix and period.
fn seq_from_fn(
    field: FieldId,
    prefix_len: u64,
    period_len: u64,
    f: impl Fn(u64) -> FieldElem,
) -> Result<SeqDesc> {
    let prefix = (1..=prefix_len).map(&f).collect();
    let period = (prefix_len + 1..=prefix_len + period_len).map(&f).collect();
    SeqDesc::eventually_periodic(field, prefix, period)
}

fn set_from_fn(
    prefix_len: u64,
    period_len: u64,
    f: impl Fn(u64) -> bool,
) -> Result<IndexSet> {
    let prefix = (1..=prefix_len).map(&f).collect();
    let period = (prefix_len + 1..=prefix_len + period_len).map(&f).collect();
    IndexSet::eventually_periodic(prefix, period)
}

fn lcm64(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// ℕ-side sequence t with t(σ(z)) = zs(z).
fn interleave_to_n(field: FieldId, zs: &ZSeq) -> Result<SeqDesc> {
    let prefix_len = 2 * (zs.pos.settle_point() + zs.neg.settle_point()) + 2;
    let period_len = 2 * lcm64(zs.pos.period_len(), zs.neg.period_len());
    seq_from_fn(field, prefix_len, period_len, |n| zs.eval(sigma_inv(n)))
}

fn interleave_set_to_n(zs: &ZSet) -> Result<IndexSet> {
    let prefix_len = 2 * (zs.pos.settle_point() + zs.neg.settle_point()) + 2;
    let period_len = 2 * lcm64(zs.pos.period_len(), zs.neg.period_len());
    set_from_fn(prefix_len, period_len, |n| zs.contains(sigma_inv(n)))
}

/// Decimates an ℕ-side sequence into the two-sided view: pos(z) = s(2z+1),
/// zero value s(1), neg(m) = s(2m).
fn split_to_z(field: FieldId, s: &SeqDesc) -> Result<ZSeq> {
    let pre = s.settle_point();
    let per = s.period_len();
    Ok(ZSeq {
        neg: seq_from_fn(field, pre, per, |m| s.eval(2 * m))?,
        at_zero: s.eval(1),
        pos: seq_from_fn(field, pre, per, |z| s.eval(2 * z + 1))?,
    })
}

fn split_set_to_z(s: &IndexSet) -> Result<ZSet> {
    let pre = s.settle_point();
    let per = s.period_len();
    Ok(ZSet {
        neg: set_from_fn(pre, per, |m| s.contains(2 * m))?,
        at_zero: s.contains(1),
        pos: set_from_fn(pre, per, |z| s.contains(2 * z + 1))?,
    })
}

/// Transports a ℤ-indexed expression to the ℕ-indexed grammar:
/// entry(result, σi, σj) = entry(input, i, j).
pub fn reindex_to_n(e: &ZMatExpr, field: FieldId) -> Result<MatExpr> {
    Ok(match e {
        ZMatExpr::Zero => MatExpr::Zero,
        ZMatExpr::ScalarE(c) => MatExpr::ScalarE(c.clone()),
        ZMatExpr::Basis(i, j) => MatExpr::basis(sigma(*i), sigma(*j)),
        ZMatExpr::FiniteLit(entries) => MatExpr::FiniteLit(
            entries
                .iter()
                .map(|(&(i, j), v)| ((sigma(i), sigma(j)), v.clone()))
                .collect(),
        ),
        ZMatExpr::Diag(zs) => MatExpr::Diag(interleave_to_n(field, zs)?),
        ZMatExpr::Shift {
            offset,
            rows,
            weights,
        } => {
            let k = *offset;
            let mut terms = Vec::new();
            let all = interleave_set_to_n(rows)?;
            let w = interleave_to_n(field, weights)?;
            // The sign-crossing boundary sits within 2|k| of the origin.
            let boundary = 2 * k.unsigned_abs() + 2;
            // Source rows with source and target on the nonnegative side:
            // odd target rows, target offset 2k.
            {
                let keep = set_from_fn(boundary, 2, |n| {
                    let z = sigma_inv(n);
                    n % 2 == 1 && z >= 0 && z + k >= 0
                })?;
                let masked = w.mask(&all.intersect(&keep));
                if !masked.is_zero() {
                    terms.push(MatExpr::Shift {
                        offset: 2 * k,
                        rows: masked.support(),
                        weights: masked,
                    });
                }
            }
            // Both on the negative side: even target rows, target offset -2k.
            {
                let keep = set_from_fn(boundary, 2, |n| {
                    let z = sigma_inv(n);
                    n % 2 == 0 && z < 0 && z + k < 0
                })?;
                let masked = w.mask(&all.intersect(&keep));
                if !masked.is_zero() {
                    terms.push(MatExpr::Shift {
                        offset: -2 * k,
                        rows: masked.support(),
                        weights: masked,
                    });
                }
            }
            // Crossings: finitely many source rows where the sign changes.
            let mut lit = BTreeMap::new();
            let lo = (-k).min(0);
            let hi = (-k).max(0);
            for z in lo..hi {
                let crosses = (z >= 0) != (z + k >= 0);
                if crosses && rows.contains(z) {
                    let v = weights.eval(z);
                    if !v.is_zero() {
                        lit.insert((sigma(z), sigma(z + k)), v);
                    }
                }
            }
            if !lit.is_empty() {
                terms.push(MatExpr::FiniteLit(lit));
            }
            match terms.len() {
                0 => MatExpr::Zero,
                1 => terms.pop().unwrap(),
                _ => MatExpr::Sum(terms),
            }
        }
        ZMatExpr::RowMat { row, seq } => MatExpr::RowMat {
            row: sigma(*row),
            seq: interleave_to_n(field, seq)?,
        },
        ZMatExpr::Sum(terms) => MatExpr::Sum(
            terms
                .iter()
                .map(|t| reindex_to_n(t, field))
                .collect::<Result<_>>()?,
        ),
        ZMatExpr::Scale(c, inner) => MatExpr::scale(c.clone(), reindex_to_n(inner, field)?),
        ZMatExpr::Prod(a, b) => {
            MatExpr::prod(reindex_to_n(a, field)?, reindex_to_n(b, field)?)
        }
        ZMatExpr::Bracket(a, b) => {
            MatExpr::bracket(reindex_to_n(a, field)?, reindex_to_n(b, field)?)
        }
    })
}

/// Transports an ℕ-indexed expression to the ℤ-indexed grammar. Shifts with
/// odd offsets and lazy solver nodes have no image.
pub fn reindex_to_z(e: &MatExpr, field: FieldId) -> Result<ZMatExpr> {
    Ok(match e {
        MatExpr::Zero => ZMatExpr::Zero,
        MatExpr::ScalarE(c) => ZMatExpr::ScalarE(c.clone()),
        MatExpr::Basis(i, j) => ZMatExpr::basis(sigma_inv(*i), sigma_inv(*j)),
        MatExpr::FiniteLit(entries) => ZMatExpr::FiniteLit(
            entries
                .iter()
                .map(|(&(i, j), v)| ((sigma_inv(i), sigma_inv(j)), v.clone()))
                .collect(),
        ),
        MatExpr::Diag(s) => ZMatExpr::Diag(split_to_z(field, s)?),
        MatExpr::Shift {
            offset,
            rows,
            weights,
        } => {
            if offset % 2 != 0 {
                return Err(Error::NotTransportable {
                    subterm: e.describe(),
                });
            }
            let masked = weights.mask(rows);
            let zs = split_to_z(field, &masked)?;
            let zset = split_set_to_z(rows)?;
            let mut terms = Vec::new();
            // Odd source rows stay on the nonnegative side with offset k/2.
            if !zs.pos.is_zero() || !zs.at_zero.is_zero() {
                terms.push(ZMatExpr::Shift {
                    offset: offset / 2,
                    rows: ZSet {
                        neg: IndexSet::empty(),
                        at_zero: zset.at_zero,
                        pos: zset.pos.clone(),
                    },
                    weights: ZSeq {
                        neg: SeqDesc::zero(field),
                        at_zero: zs.at_zero.clone(),
                        pos: zs.pos.clone(),
                    },
                });
            }
            // Even source rows land on the negative side with offset -k/2.
            if !zs.neg.is_zero() {
                terms.push(ZMatExpr::Shift {
                    offset: -offset / 2,
                    rows: ZSet {
                        neg: zset.neg.clone(),
                        at_zero: false,
                        pos: IndexSet::empty(),
                    },
                    weights: ZSeq {
                        neg: zs.neg.clone(),
                        at_zero: field.zero(),
                        pos: SeqDesc::zero(field),
                    },
                });
            }
            match terms.len() {
                0 => ZMatExpr::Zero,
                1 => terms.pop().unwrap(),
                _ => ZMatExpr::Sum(terms),
            }
        }
        MatExpr::RowMat { row, seq } => ZMatExpr::RowMat {
            row: sigma_inv(*row),
            seq: split_to_z(field, seq)?,
        },
        MatExpr::Sum(terms) => ZMatExpr::Sum(
            terms
                .iter()
                .map(|t| reindex_to_z(t, field))
                .collect::<Result<_>>()?,
        ),
        MatExpr::Scale(c, inner) => ZMatExpr::scale(c.clone(), reindex_to_z(inner, field)?),
        MatExpr::Prod(a, b) => {
            ZMatExpr::prod(reindex_to_z(a, field)?, reindex_to_z(b, field)?)
        }
        MatExpr::Bracket(a, b) => {
            ZMatExpr::bracket(reindex_to_z(a, field)?, reindex_to_z(b, field)?)
        }
        MatExpr::SolveShift(_) => {
            return Err(Error::NotTransportable {
                subterm: e.describe(),
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::{classify, IdealName};
    use crate::testkit::ExprGen;

    const Q: FieldId = FieldId::Rational;

    fn random_zfinite(gen: &mut ExprGen) -> ZMatExpr {
        let k = 1 + gen.below(4);
        let entries: BTreeMap<(i64, i64), FieldElem> = (0..k)
            .map(|_| {
                let i = gen.below(9) as i64 - 4;
                let j = gen.below(9) as i64 - 4;
                ((i, j), gen.scalar())
            })
            .collect();
        ZMatExpr::FiniteLit(entries)
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(0), 1);
        assert_eq!(sigma(-1), 2);
        assert_eq!(sigma(1), 3);
        assert_eq!(sigma(-2), 4);
        for z in -1000..=1000 {
            assert_eq!(sigma_inv(sigma(z)), z);
        }
        for n in 1..=2001 {
            assert_eq!(sigma(sigma_inv(n)), n);
        }
    }

    #[test]
    fn basis_transport() {
        let e = reindex_to_n(&ZMatExpr::basis(0, 1), Q).unwrap();
        assert_eq!(e, MatExpr::basis(1, 3));
        let id = reindex_to_n(&ZMatExpr::ScalarE(Q.from_i64(5)), Q).unwrap();
        assert_eq!(id, MatExpr::scalar(Q.from_i64(5)));
    }

    #[test]
    fn entries_are_preserved() {
        let mut gen = ExprGen::new(Q, 91);
        for _ in 0..30 {
            let a = random_zfinite(&mut gen);
            let n = reindex_to_n(&a, Q).unwrap();
            for i in -4..=4 {
                for j in -4..=4 {
                    assert_eq!(
                        a.entry(Q, i, j).unwrap(),
                        n.entry(Q, sigma(i), sigma(j)).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn band_transport_preserves_entries() {
        let band = ZMatExpr::Shift {
            offset: 2,
            rows: ZSet::all(),
            weights: ZSeq::constant(Q.from_i64(1)),
        };
        let n = reindex_to_n(&band, Q).unwrap();
        for i in -6..=6 {
            for j in -6..=6 {
                assert_eq!(
                    band.entry(Q, i, j).unwrap(),
                    n.entry(Q, sigma(i), sigma(j)).unwrap(),
                    "mismatch at ({i}, {j})"
                );
            }
        }
    }

    #[test]
    fn even_shift_round_trips_through_z() {
        let s = MatExpr::Shift {
            offset: 2,
            rows: IndexSet::arithmetic(1, 3),
            weights: crate::testkit::periodic(Q, &[], &[1, 2]),
        };
        let z = reindex_to_z(&s, Q).unwrap();
        for n in 1..=14u64 {
            for m in 1..=14u64 {
                assert_eq!(
                    s.entry(Q, n, m).unwrap(),
                    z.entry(Q, sigma_inv(n), sigma_inv(m)).unwrap()
                );
            }
        }
    }

    #[test]
    fn odd_shift_is_not_transportable() {
        let s = MatExpr::superdiagonal(Q);
        assert!(matches!(
            reindex_to_z(&s, Q),
            Err(Error::NotTransportable { .. })
        ));
    }

    #[test]
    fn homomorphism_on_windows() {
        let mut gen = ExprGen::new(Q, 55);
        for _ in 0..40 {
            let a = random_zfinite(&mut gen);
            let b = random_zfinite(&mut gen);
            let fa = reindex_to_n(&a, Q).unwrap();
            let fb = reindex_to_n(&b, Q).unwrap();
            let sum = reindex_to_n(&ZMatExpr::sum(vec![a.clone(), b.clone()]), Q).unwrap();
            assert!(sum
                .window_eq(&MatExpr::sum(vec![fa.clone(), fb.clone()]), Q, 20, 20)
                .unwrap());
            let prod = reindex_to_n(&ZMatExpr::prod(a.clone(), b.clone()), Q).unwrap();
            assert!(prod
                .window_eq(&MatExpr::prod(fa.clone(), fb.clone()), Q, 20, 20)
                .unwrap());
            let br = reindex_to_n(&ZMatExpr::bracket(a.clone(), b.clone()), Q).unwrap();
            assert!(br
                .window_eq(&MatExpr::bracket(fa.clone(), fb.clone()), Q, 20, 20)
                .unwrap());
            let c = gen.scalar();
            let scaled = reindex_to_n(&ZMatExpr::scale(c.clone(), a.clone()), Q).unwrap();
            assert!(scaled.window_eq(&MatExpr::scale(c, fa), Q, 20, 20).unwrap());
        }
    }

    #[test]
    fn finite_round_trip_is_identity() {
        let mut gen = ExprGen::new(Q, 77);
        for _ in 0..25 {
            let a = gen.finite_expr(8);
            let back = reindex_to_n(&reindex_to_z(&a, Q).unwrap(), Q).unwrap();
            assert!(a.window_eq(&back, Q, 20, 20).unwrap());
        }
    }

    #[test]
    fn classification_transports_traceless_elements() {
        let z = ZMatExpr::FiniteLit(
            [
                ((0i64, 1i64), Q.from_i64(2)),
                ((-1, -3), Q.from_i64(1)),
                ((2, 2), Q.from_i64(1)),
                ((-2, -2), Q.from_i64(-1)),
            ]
            .into(),
        );
        let n = reindex_to_n(&z, Q).unwrap();
        assert_eq!(classify(&n, Q).unwrap(), IdealName::SlFr);
    }
}
