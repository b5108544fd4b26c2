//! Basis-matrix extraction chains: from a diagonal element with two distinct
//! diagonal entries, from any element with an off-diagonal pivot, and the
//! expansion of a whole traceless finite-row element from one seed basis
//! matrix.

use std::collections::BTreeMap;

use crate::chain::{BracketChain, ChainOperand};
use crate::error::{Error, Result};
use crate::expr::MatExpr;
use crate::field::{FieldElem, FieldId};
use crate::ideals::{classify, leq, IdealName};
use crate::normalize::{normal_expr, normalize};
use crate::seq::SeqDesc;

use super::push_bracket_step;

/// One bracket with an inverse-scaled basis probe extracts E_ij from a
/// diagonal element whose (i,i) and (j,j) entries differ.
pub fn eij_from_diag(a: &MatExpr, field: FieldId, i: u64, j: u64) -> Result<BracketChain> {
    if !field.has_inverses() {
        return Err(Error::RingNotSupported);
    }
    if i < 1 || j < 1 {
        return Err(Error::IndexOutOfRange);
    }
    let cf = normalize(a, field)?;
    if !cf.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    let di = a.entry(field, i, i)?;
    let dj = a.entry(field, j, j)?;
    let delta = di.sub(&dj)?;
    if delta.is_zero() {
        return Err(Error::EqualDiagonalEntries { i, j });
    }
    let coeff = delta.inv()?;
    let mut chain = BracketChain::new(field, Some(a.clone()), MatExpr::basis(i, j));
    chain.push_bracket(
        ChainOperand::Seed,
        ChainOperand::Expr(MatExpr::scale(coeff, MatExpr::basis(i, j))),
        MatExpr::basis(i, j),
        format!("bracket with the probe scaled by the inverse of the ({i},{i})-({j},{j}) gap"),
    );
    Ok(chain)
}

/// From an element with a nonzero (i, j) entry, i != j, derive some basis
/// matrix E_ik, k != i. Follows the case split on whether the mirrored
/// (j, i) entry vanishes; in the mirrored case the extracted index k avoids
/// both i and j, which keeps the construction uniform in characteristic two.
pub fn eij_from_offdiag(a: &MatExpr, field: FieldId, i: u64, j: u64) -> Result<BracketChain> {
    if !field.has_inverses() {
        return Err(Error::RingNotSupported);
    }
    if i == j || i < 1 || j < 1 {
        return Err(Error::IndexOutOfRange);
    }
    let a_ij = a.entry(field, i, j)?;
    if a_ij.is_zero() {
        return Err(Error::ZeroPivot { i, j });
    }
    let a_ji = a.entry(field, j, i)?;
    // Dummy target; replaced once the final step is known.
    let mut chain = BracketChain::new(field, Some(a.clone()), MatExpr::Zero);

    let s1 = push_bracket_step(
        &mut chain,
        ChainOperand::Seed,
        ChainOperand::Expr(MatExpr::basis(i, i)),
        &format!("project onto row and column {i}"),
    )?;
    let s2 = push_bracket_step(
        &mut chain,
        ChainOperand::Step(s1),
        ChainOperand::Expr(MatExpr::basis(j, j)),
        &format!("cut down to the ({i},{j}) and ({j},{i}) entries"),
    )?;

    if a_ji.is_zero() {
        // Step s2 result is -a_ij · E_ij; rescale.
        let coeff = a_ij.inv()?.neg();
        chain.push_combine(
            vec![(coeff, ChainOperand::Step(s2))],
            MatExpr::basis(i, j),
            "rescale the isolated entry",
        );
        chain.target = MatExpr::basis(i, j);
        return Ok(chain);
    }

    // Mirrored entry present: produce the diagonal difference, then extract
    // a basis matrix through a third index.
    let s3 = push_bracket_step(
        &mut chain,
        ChainOperand::Step(s2),
        ChainOperand::Expr(MatExpr::basis(i, j)),
        "collapse onto the diagonal difference",
    )?;
    // s3 = a_ji (E_ii - E_jj).
    let coeff = a_ji.inv()?;
    let diff = normal_expr(
        &MatExpr::sub(MatExpr::basis(i, i), MatExpr::basis(j, j), field),
        field,
    )?;
    let s4 = chain.push_combine(
        vec![(coeff, ChainOperand::Step(s3))],
        diff,
        "normalize the diagonal difference",
    );
    let k = (1..).find(|&k| k != i && k != j).unwrap();
    push_bracket_step(
        &mut chain,
        ChainOperand::Step(s4),
        ChainOperand::Expr(MatExpr::basis(i, k)),
        &format!("diagonal gap at ({i},{k}) is one in any characteristic"),
    )?;
    chain.target = MatExpr::basis(i, k);
    Ok(chain)
}

/// On-demand derivation of basis matrices E_mn from a base basis matrix
/// E_{bi,bj}, recording the steps into a chain and memoizing results.
pub struct BasisDeriver {
    base: ChainOperand,
    bi: u64,
    bj: u64,
    cache: BTreeMap<(u64, u64), ChainOperand>,
    diag_flip: Option<usize>,
}

impl BasisDeriver {
    /// `base` must denote E_{bi,bj} inside the chain, bi != bj.
    pub fn new(base: ChainOperand, bi: u64, bj: u64) -> Self {
        assert_ne!(bi, bj);
        let mut cache = BTreeMap::new();
        cache.insert((bi, bj), base.clone());
        BasisDeriver {
            base,
            bi,
            bj,
            cache,
            diag_flip: None,
        }
    }

    /// Operand for E_jj - E_ii (with base (i, j)), derived once.
    fn diag_flip(&mut self, chain: &mut BracketChain) -> Result<ChainOperand> {
        if let Some(k) = self.diag_flip {
            return Ok(ChainOperand::Step(k));
        }
        let (i, j) = (self.bi, self.bj);
        let result = normal_expr(
            &MatExpr::sub(MatExpr::basis(j, j), MatExpr::basis(i, i), chain.field),
            chain.field,
        )?;
        let k = chain.push_bracket(
            ChainOperand::Expr(MatExpr::basis(j, i)),
            self.base.clone(),
            result,
            format!("diagonal difference at {j} and {i}"),
        );
        self.diag_flip = Some(k);
        Ok(ChainOperand::Step(k))
    }

    /// Derives E_mn (m != n) and returns the operand denoting it.
    pub fn get(&mut self, chain: &mut BracketChain, m: u64, n: u64) -> Result<ChainOperand> {
        assert_ne!(m, n);
        if let Some(op) = self.cache.get(&(m, n)) {
            return Ok(op.clone());
        }
        let (i, j) = (self.bi, self.bj);
        let op = if m == i && n != j && n != i {
            // E_in = [E_ij, E_jn].
            let s = chain.push_bracket(
                self.base.clone(),
                ChainOperand::Expr(MatExpr::basis(j, n)),
                MatExpr::basis(i, n),
                format!("compose to reach column {n}"),
            );
            ChainOperand::Step(s)
        } else if n == j && m != i && m != j {
            // E_mj = [E_mi, E_ij].
            let s = chain.push_bracket(
                ChainOperand::Expr(MatExpr::basis(m, i)),
                self.base.clone(),
                MatExpr::basis(m, j),
                format!("compose to reach row {m}"),
            );
            ChainOperand::Step(s)
        } else if m == j && n != i && n != j {
            // [E_jj - E_ii, E_jn] = E_jn for n outside {i, j}.
            let flip = self.diag_flip(chain)?;
            let s = chain.push_bracket(
                flip,
                ChainOperand::Expr(MatExpr::basis(j, n)),
                MatExpr::basis(j, n),
                format!("unit diagonal gap opens row {j}"),
            );
            ChainOperand::Step(s)
        } else if n == i && m != i && m != j {
            // [E_jj - E_ii, E_mi] = E_mi for m outside {i, j}.
            let flip = self.diag_flip(chain)?;
            let s = chain.push_bracket(
                flip,
                ChainOperand::Expr(MatExpr::basis(m, i)),
                MatExpr::basis(m, i),
                format!("unit diagonal gap opens column {i}"),
            );
            ChainOperand::Step(s)
        } else if (m, n) == (j, i) {
            // Route through a third index to avoid characteristic issues.
            let k = (1..).find(|&k| k != i && k != j).unwrap();
            let a = self.get(chain, j, k)?;
            let b = self.get(chain, k, i)?;
            let s = chain.push_bracket(
                a,
                b,
                MatExpr::basis(j, i),
                format!("compose through index {k}"),
            );
            ChainOperand::Step(s)
        } else {
            // Generic m, n away from the base: go through E_mj.
            let mj = self.get(chain, m, j)?;
            let s = chain.push_bracket(
                mj,
                ChainOperand::Expr(MatExpr::basis(j, n)),
                MatExpr::basis(m, n),
                format!("compose to ({m},{n})"),
            );
            ChainOperand::Step(s)
        };
        self.cache.insert((m, n), op.clone());
        Ok(op)
    }
}

/// Expands a traceless finite-row element from a seed basis matrix E_{si,sj}.
///
/// Finitely supported elements decompose into derived basis matrices and
/// diagonal differences; elements with infinite rows are reassembled from one
/// row-matrix bracket per row, where the spurious corner terms cancel across
/// the combination exactly because the trace vanishes.
pub fn express_in_slfr(
    b: &MatExpr,
    field: FieldId,
    seed: (u64, u64),
) -> Result<BracketChain> {
    let (si, sj) = seed;
    if si == sj || si < 1 || sj < 1 {
        return Err(Error::IndexOutOfRange);
    }
    let class = classify(b, field)?;
    if !leq(class, IdealName::SlFr) {
        return Err(Error::NotInSlFr);
    }
    let cf = normalize(b, field)?;
    debug_assert!(cf.alpha.is_zero() && cf.tail.is_empty() && cf.fr_trace.is_zero());

    if cf.is_zero() {
        return Ok(BracketChain::new(field, None, MatExpr::Zero));
    }

    let target = cf.to_expr();
    let mut chain = BracketChain::new(field, Some(MatExpr::basis(si, sj)), target.clone());
    let mut deriver = BasisDeriver::new(ChainOperand::Seed, si, sj);

    if cf.is_row_finite() {
        // Elementary route: entry-by-entry.
        let mut terms: Vec<(FieldElem, ChainOperand)> = Vec::new();
        let mut diag: Vec<(u64, FieldElem)> = Vec::new();
        for (&r, s) in &cf.fr {
            let bound = s.support_bound().unwrap();
            for c in 1..=bound {
                let v = s.eval(c);
                if v.is_zero() {
                    continue;
                }
                if r == c {
                    diag.push((r, v));
                } else {
                    let op = deriver.get(&mut chain, r, c)?;
                    terms.push((v, op));
                }
            }
        }
        if !diag.is_empty() {
            // Σ d_r E_rr with Σ d_r = 0 is Σ d_r (E_rr - E_NN) over r != N.
            let pivot = diag.last().unwrap().0;
            for (r, v) in diag {
                if r == pivot {
                    continue;
                }
                let rn = deriver.get(&mut chain, r, pivot)?;
                let nr = deriver.get(&mut chain, pivot, r)?;
                let result = normal_expr(
                    &MatExpr::sub(MatExpr::basis(r, r), MatExpr::basis(pivot, pivot), field),
                    field,
                )?;
                let s = chain.push_bracket(
                    rn,
                    nr,
                    result,
                    format!("diagonal difference at {r} and {pivot}"),
                );
                terms.push((v, ChainOperand::Step(s)));
            }
        }
        chain.push_combine(terms, target, "assemble the element");
    } else {
        // Row route: one bracket per row against a row matrix supported on a
        // fresh auxiliary row q; the q-corner terms sum to the trace, zero.
        let q = (1..).find(|k| !cf.fr.contains_key(k)).unwrap();
        let mut terms: Vec<(FieldElem, ChainOperand)> = Vec::new();
        for (&r, s) in &cf.fr {
            let rq = deriver.get(&mut chain, r, q)?;
            let row = MatExpr::RowMat {
                row: q,
                seq: s.clone(),
            };
            let result = row_bracket_result(field, q, s, r)?;
            let step = chain.push_bracket(
                ChainOperand::Expr(row),
                rq,
                result,
                format!("carry row contents into row {r}"),
            );
            terms.push((field.one().neg(), ChainOperand::Step(step)));
        }
        chain.push_combine(terms, target, "assemble; corner terms cancel by tracelessness");
    }
    Ok(chain)
}

/// [RowMat(q, s), E_rq] = s(r)·E_qq - RowMat(r, s).
fn row_bracket_result(field: FieldId, q: u64, s: &SeqDesc, r: u64) -> Result<MatExpr> {
    let corner = s.eval(r);
    let mut terms = Vec::new();
    if !corner.is_zero() {
        terms.push(MatExpr::scale(corner, MatExpr::basis(q, q)));
    }
    terms.push(MatExpr::scale(
        field.one().neg(),
        MatExpr::RowMat {
            row: r,
            seq: s.clone(),
        },
    ));
    normal_expr(&MatExpr::Sum(terms), field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::verify_chain;
    use crate::testkit::{fin_lit, periodic, ExprGen};

    const Q: FieldId = FieldId::Rational;
    const F2: FieldId = FieldId::Prime(2);

    #[test]
    fn diag_extraction_examples() {
        // diag(1, 2, 2, ...): probe coefficient is (1-2)^{-1} = -1.
        let a = MatExpr::Diag(periodic(Q, &[1], &[2]));
        let chain = eij_from_diag(&a, Q, 1, 2).unwrap();
        assert!(verify_chain(&chain, 30).unwrap().is_pass());

        // Alternating 0,1 diagonal at (2, 3): coefficient inv(1-0) = 1.
        let d = MatExpr::Diag(periodic(Q, &[], &[0, 1]));
        let chain = eij_from_diag(&d, Q, 2, 3).unwrap();
        assert!(verify_chain(&chain, 30).unwrap().is_pass());
        match &chain.steps[0].rule {
            crate::chain::StepRule::Bracket { rhs, .. } => match rhs {
                ChainOperand::Expr(MatExpr::Scale(c, _)) => assert!(c.is_one()),
                other => panic!("unexpected probe {other:?}"),
            },
            _ => unreachable!(),
        }

        let scalar = MatExpr::scalar(Q.from_i64(5));
        assert!(matches!(
            eij_from_diag(&scalar, Q, 1, 2),
            Err(Error::EqualDiagonalEntries { i: 1, j: 2 })
        ));
        assert!(matches!(
            eij_from_diag(&MatExpr::basis(1, 2), Q, 1, 2),
            Err(Error::NotDiagonal)
        ));
    }

    #[test]
    fn offdiag_extraction_direct_branch() {
        let a = MatExpr::basis(1, 2);
        let chain = eij_from_offdiag(&a, Q, 1, 2).unwrap();
        assert_eq!(chain.target, MatExpr::basis(1, 2));
        assert!(verify_chain(&chain, 30).unwrap().is_pass());
    }

    #[test]
    fn offdiag_extraction_mirrored_branch() {
        let a = MatExpr::sum(vec![MatExpr::basis(1, 2), MatExpr::basis(2, 1)]);
        let chain = eij_from_offdiag(&a, Q, 1, 2).unwrap();
        // The mirrored branch routes through a third index.
        assert_eq!(chain.target, MatExpr::basis(1, 3));
        assert!(verify_chain(&chain, 30).unwrap().is_pass());
    }

    #[test]
    fn offdiag_extraction_char_two() {
        let a = MatExpr::sum(vec![MatExpr::basis(1, 2), MatExpr::basis(2, 1)]);
        let chain = eij_from_offdiag(&a, F2, 1, 2).unwrap();
        assert_eq!(chain.target, MatExpr::basis(1, 3));
        assert!(verify_chain(&chain, 30).unwrap().is_pass());
    }

    #[test]
    fn zero_pivot_is_rejected() {
        assert!(matches!(
            eij_from_offdiag(&MatExpr::basis(1, 2), Q, 2, 1),
            Err(Error::ZeroPivot { i: 2, j: 1 })
        ));
    }

    #[test]
    fn express_examples() {
        let chain = express_in_slfr(&MatExpr::basis(3, 4), Q, (1, 2)).unwrap();
        assert!(verify_chain(&chain, 30).unwrap().is_pass());

        let diff = MatExpr::sub(MatExpr::basis(1, 1), MatExpr::basis(2, 2), Q);
        let chain = express_in_slfr(&diff, Q, (1, 2)).unwrap();
        assert!(verify_chain(&chain, 30).unwrap().is_pass());

        let chain = express_in_slfr(&MatExpr::Zero, Q, (1, 2)).unwrap();
        assert!(chain.steps.is_empty());
        assert!(verify_chain(&chain, 30).unwrap().is_pass());

        assert!(matches!(
            express_in_slfr(&MatExpr::basis(1, 1), Q, (1, 2)),
            Err(Error::NotInSlFr)
        ));
    }

    #[test]
    fn express_infinite_row_element() {
        // A constant row plus a compensating diagonal entry, trace zero.
        let b = MatExpr::sum(vec![
            MatExpr::RowMat {
                row: 2,
                seq: periodic(Q, &[], &[1, -1]),
            },
            MatExpr::scale(Q.from_i64(1), MatExpr::basis(4, 4)),
        ]);
        assert_eq!(classify(&b, Q).unwrap(), IdealName::SlFr);
        let chain = express_in_slfr(&b, Q, (1, 2)).unwrap();
        assert!(verify_chain(&chain, 40).unwrap().is_pass());
    }

    #[test]
    fn express_random_traceless_elements() {
        let mut gen = ExprGen::new(Q, 31);
        let mut done = 0;
        while done < 30 {
            let raw = gen.finite_expr(6);
            // Make it traceless by cancelling the trace at a fresh slot.
            let t = crate::normalize::trace_fr(&raw, Q).unwrap();
            let fixed = MatExpr::sum(vec![
                raw,
                MatExpr::scale(t.neg(), MatExpr::basis(7, 7)),
            ]);
            if classify(&fixed, Q).unwrap() == IdealName::Zero {
                continue;
            }
            let chain = express_in_slfr(&fixed, Q, (1, 2)).unwrap();
            assert!(verify_chain(&chain, 20).unwrap().is_pass());
            done += 1;
        }
    }

    #[test]
    fn express_over_char_two() {
        let b = fin_lit(F2, &[(1, 1, 1), (3, 3, 1), (2, 5, 1)]);
        let chain = express_in_slfr(&b, F2, (1, 2)).unwrap();
        assert!(verify_chain(&chain, 20).unwrap().is_pass());
    }
}
