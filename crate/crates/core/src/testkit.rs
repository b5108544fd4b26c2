//! Shared helpers for tests and for the acceptance suite: an independent
//! dense-window product oracle, deterministic random generators for fragment
//! expressions, and the fixture corpus used by the classifier checks.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::expr::MatExpr;
use crate::field::{FieldElem, FieldId};
use crate::index_set::IndexSet;
use crate::seq::SeqDesc;

pub fn periodic(field: FieldId, prefix: &[i64], period: &[i64]) -> SeqDesc {
    SeqDesc::eventually_periodic(
        field,
        prefix.iter().map(|&v| field.from_i64(v)).collect(),
        period.iter().map(|&v| field.from_i64(v)).collect(),
    )
    .unwrap()
}

pub fn fin_seq(field: FieldId, entries: &[(u64, i64)]) -> SeqDesc {
    let map: BTreeMap<u64, FieldElem> = entries
        .iter()
        .map(|&(i, v)| (i, field.from_i64(v)))
        .collect();
    SeqDesc::finite_support(field, &map).unwrap()
}

pub fn fin_lit(field: FieldId, entries: &[(u64, u64, i64)]) -> MatExpr {
    MatExpr::FiniteLit(
        entries
            .iter()
            .map(|&(i, j, v)| ((i, j), field.from_i64(v)))
            .collect(),
    )
}

/// Dense product of two exact dense blocks (row-major).
pub fn dense_mul(a: &[Vec<FieldElem>], b: &[Vec<FieldElem>]) -> Result<Vec<Vec<FieldElem>>> {
    let m = a.len();
    let k = if m > 0 { a[0].len() } else { 0 };
    assert_eq!(k, b.len());
    let n = if k > 0 { b[0].len() } else { 0 };
    let field = if m > 0 && k > 0 {
        a[0][0].field()
    } else {
        FieldId::Rational
    };
    let mut out = vec![vec![field.zero(); n]; m];
    for i in 0..m {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] = out[i][j].add(&a[i][t].mul(&b[t][j])?)?;
            }
        }
    }
    Ok(out)
}

/// Exact m×n window of A·B computed by dense multiplication of operand
/// windows, with the inner dimension padded to cover every nonzero entry of
/// the first n columns of B. This is an oracle path independent of the
/// product evaluation inside [`MatExpr::entry`].
pub fn window_oracle_mul(
    a: &MatExpr,
    b: &MatExpr,
    field: FieldId,
    m: u64,
    n: u64,
) -> Result<Vec<Vec<FieldElem>>> {
    let mut pad = 1u64;
    for j in 1..=n {
        pad = pad.max(b.column_bound(field, j)?);
    }
    let wa = a.window(field, m, pad)?;
    let wb = b.window(field, pad, n)?;
    dense_mul(&wa, &wb)
}

/// Exact m×n window of an arbitrary expression where every product node is
/// expanded through [`window_oracle_mul`] rather than entry recursion.
pub fn window_oracle_product(
    e: &MatExpr,
    field: FieldId,
    m: u64,
    n: u64,
) -> Result<Vec<Vec<FieldElem>>> {
    match e {
        MatExpr::Prod(a, b) => window_oracle_mul(a, b, field, m, n),
        MatExpr::Bracket(a, b) => {
            let ab = window_oracle_mul(a, b, field, m, n)?;
            let ba = window_oracle_mul(b, a, field, m, n)?;
            let mut out = ab;
            for (row, brow) in out.iter_mut().zip(ba) {
                for (v, w) in row.iter_mut().zip(brow) {
                    *v = v.sub(&w)?;
                }
            }
            Ok(out)
        }
        MatExpr::Sum(terms) => {
            let mut out = vec![vec![field.zero(); n as usize]; m as usize];
            for t in terms {
                let w = window_oracle_product(t, field, m, n)?;
                for (row, trow) in out.iter_mut().zip(w) {
                    for (v, u) in row.iter_mut().zip(trow) {
                        *v = v.add(&u)?;
                    }
                }
            }
            Ok(out)
        }
        MatExpr::Scale(c, inner) => {
            let mut w = window_oracle_product(inner, field, m, n)?;
            for row in &mut w {
                for v in row.iter_mut() {
                    *v = v.mul(c)?;
                }
            }
            Ok(w)
        }
        other => other.window(field, m, n),
    }
}

/// A small deterministic battery of product-free fragment expressions.
pub fn sample_fragment_exprs(field: FieldId) -> Vec<MatExpr> {
    let one = field.one();
    vec![
        MatExpr::Zero,
        MatExpr::scalar(field.from_i64(2)),
        MatExpr::basis(1, 2),
        MatExpr::basis(3, 1),
        fin_lit(field, &[(1, 1, 1), (2, 2, -1)]),
        fin_lit(field, &[(2, 5, 3), (4, 1, -2), (1, 1, 1)]),
        MatExpr::Diag(periodic(field, &[], &[1, 2])),
        MatExpr::Diag(periodic(field, &[5], &[3])),
        MatExpr::Shift {
            offset: 1,
            rows: IndexSet::all(),
            weights: SeqDesc::constant(one.clone()),
        },
        MatExpr::Shift {
            offset: -2,
            rows: IndexSet::arithmetic(2, 2),
            weights: periodic(field, &[], &[1, -1]),
        },
        MatExpr::Shift {
            offset: 3,
            rows: IndexSet::arithmetic(1, 3),
            weights: SeqDesc::constant(field.from_i64(2)),
        },
        MatExpr::RowMat {
            row: 2,
            seq: periodic(field, &[0], &[1, 0]),
        },
        MatExpr::RowMat {
            row: 1,
            seq: SeqDesc::constant(one.clone()),
        },
        MatExpr::sum(vec![
            MatExpr::scalar(field.from_i64(-1)),
            MatExpr::basis(1, 3),
            MatExpr::Diag(fin_seq(field, &[(2, 4)])),
        ]),
        MatExpr::scale(
            field.from_i64(3),
            MatExpr::Shift {
                offset: 2,
                rows: IndexSet::all(),
                weights: SeqDesc::constant(one),
            },
        ),
    ]
}

/// Deterministic pseudo-random generator over the flat fragment.
pub struct ExprGen {
    state: u64,
    pub field: FieldId,
}

impl ExprGen {
    pub fn new(field: FieldId, seed: u64) -> Self {
        ExprGen {
            state: seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1),
            field,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        // xorshift*; plenty for test-case shuffling.
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545f4914f6cdd1d)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn scalar(&mut self) -> FieldElem {
        let v = self.below(9) as i64 - 4;
        self.field.from_i64(v)
    }

    pub fn nonzero_scalar(&mut self) -> FieldElem {
        loop {
            let v = self.scalar();
            if !v.is_zero() {
                return v;
            }
        }
    }

    pub fn seq(&mut self) -> SeqDesc {
        match self.below(3) {
            0 => {
                let k = 1 + self.below(3);
                let entries: BTreeMap<u64, FieldElem> = (0..k)
                    .map(|_| (1 + self.below(6), self.scalar()))
                    .collect();
                SeqDesc::finite_support(self.field, &entries).unwrap()
            }
            1 => {
                let pre = (0..self.below(2)).map(|_| self.scalar()).collect();
                SeqDesc::eventually_constant(self.field, pre, self.scalar()).unwrap()
            }
            _ => {
                let pre = (0..self.below(2)).map(|_| self.scalar()).collect();
                let per = (0..1 + self.below(3)).map(|_| self.scalar()).collect();
                SeqDesc::eventually_periodic(self.field, pre, per).unwrap()
            }
        }
    }

    pub fn index_set(&mut self) -> IndexSet {
        match self.below(3) {
            0 => IndexSet::all(),
            1 => IndexSet::arithmetic(1 + self.below(3), 1 + self.below(3)),
            _ => {
                let pre = (0..self.below(3)).map(|_| self.below(2) == 0).collect();
                let per = (0..1 + self.below(3)).map(|_| self.below(2) == 0).collect();
                IndexSet::eventually_periodic(pre, per).unwrap()
            }
        }
    }

    /// Random finitely supported expression within the given index box.
    pub fn finite_expr(&mut self, max_index: u64) -> MatExpr {
        let k = 1 + self.below(5);
        let entries: BTreeMap<(u64, u64), FieldElem> = (0..k)
            .map(|_| {
                (
                    (1 + self.below(max_index), 1 + self.below(max_index)),
                    self.scalar(),
                )
            })
            .collect();
        MatExpr::FiniteLit(entries)
    }

    /// Random primitive from the flat fragment (no products).
    pub fn primitive(&mut self) -> MatExpr {
        match self.below(6) {
            0 => MatExpr::scalar(self.scalar()),
            1 => MatExpr::basis(1 + self.below(6), 1 + self.below(6)),
            2 => self.finite_expr(6),
            3 => MatExpr::Diag(self.seq()),
            4 => {
                let offset = loop {
                    let o = self.below(7) as i64 - 3;
                    if o != 0 {
                        break o;
                    }
                };
                MatExpr::Shift {
                    offset,
                    rows: self.index_set(),
                    weights: self.seq(),
                }
            }
            _ => MatExpr::RowMat {
                row: 1 + self.below(4),
                seq: self.seq(),
            },
        }
    }

    /// Random fragment expression with sums, scalings, brackets, products.
    pub fn fragment_expr(&mut self, depth: u64) -> MatExpr {
        if depth == 0 {
            return self.primitive();
        }
        match self.below(5) {
            0 => MatExpr::sum(
                (0..2 + self.below(2))
                    .map(|_| self.fragment_expr(depth - 1))
                    .collect(),
            ),
            1 => MatExpr::scale(self.scalar(), self.fragment_expr(depth - 1)),
            2 => MatExpr::prod(self.fragment_expr(depth - 1), self.fragment_expr(depth - 1)),
            3 => MatExpr::bracket(self.fragment_expr(depth - 1), self.fragment_expr(depth - 1)),
            _ => self.primitive(),
        }
    }

    /// Random finite-row expression (rows only; lies in gl_fr).
    pub fn finite_row_expr(&mut self) -> MatExpr {
        let k = 1 + self.below(3);
        let mut terms: Vec<MatExpr> = (0..k)
            .map(|_| MatExpr::RowMat {
                row: 1 + self.below(5),
                seq: self.seq(),
            })
            .collect();
        terms.push(self.finite_expr(5));
        MatExpr::sum(terms)
    }
}
