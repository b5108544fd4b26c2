//! Executable witnesses: every operation here returns either a bracket-chain
//! certificate or an explicit counterexample probe, and every certificate is
//! checkable by exact window arithmetic through [`crate::chain::verify_chain`].

mod basis;
mod pipeline;
mod solve;

pub use basis::{eij_from_diag, eij_from_offdiag, express_in_slfr, BasisDeriver};
pub use pipeline::{complete_superdiag, enlarge_set, extract_diag, superdiag_from_diag};
pub use solve::{perfect_witness, solve_shift_bracket};

use crate::chain::{BracketChain, ChainOperand};
use crate::error::Result;
use crate::expr::MatExpr;
use crate::field::{FieldElem, FieldId};
use crate::ideals::{classify, IdealName};
use crate::normalize::{normal_expr, normalize, TailPart};

/// Outcome of the centrality check.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CentralVerdict {
    /// The element commutes with everything (it is scalar or zero).
    Central,
    /// A basis probe with a nonzero bracket against the element.
    NonCentral {
        probe: MatExpr,
        entry: (u64, u64),
        value: FieldElem,
    },
}

/// Decides centrality and, for non-central elements, produces a basis matrix
/// whose bracket with the element is visibly nonzero.
pub fn center_witness(e: &MatExpr, field: FieldId) -> Result<CentralVerdict> {
    let class = classify(e, field)?;
    if class == IdealName::Zero || class == IdealName::Dsc {
        return Ok(CentralVerdict::Central);
    }
    let cf = normalize(e, field)?;

    // An off-diagonal pivot (i, j) makes E_jj a witness: [A, E_jj] keeps the
    // (i, j) entry of A.
    let mut pivot: Option<(u64, u64)> = None;
    'outer: for (&r, s) in &cf.fr {
        let supp = s.support();
        let horizon = supp.settle_point() + supp.period_len();
        for c in supp.members_up_to(horizon) {
            if c != r {
                pivot = Some((r, c));
                break 'outer;
            }
        }
    }
    if pivot.is_none() {
        for t in &cf.tail {
            if let TailPart::Shift { offset, rows, .. } = t {
                let horizon = rows.settle_point() + rows.period_len();
                if let Some(i) = rows.members_up_to(horizon).first() {
                    pivot = Some((*i, (*i as i64 + offset) as u64));
                    break;
                }
            }
        }
    }
    if let Some((i, j)) = pivot {
        let probe = MatExpr::basis(j, j);
        let value = MatExpr::bracket(e.clone(), probe.clone()).entry(field, i, j)?;
        debug_assert!(!value.is_zero());
        return Ok(CentralVerdict::NonCentral {
            probe,
            entry: (i, j),
            value,
        });
    }

    // Purely diagonal and non-scalar: probe across an adjacent disagreement.
    let diag = cf.diag_desc()?;
    let dis = diag.disagreement();
    let horizon = dis.settle_point() + dis.period_len();
    let i = *dis
        .members_up_to(horizon)
        .first()
        .expect("non-scalar diagonal has an adjacent disagreement");
    let probe = MatExpr::basis(i, i + 1);
    let value = MatExpr::bracket(e.clone(), probe.clone()).entry(field, i, i + 1)?;
    debug_assert!(!value.is_zero());
    Ok(CentralVerdict::NonCentral {
        probe,
        entry: (i, i + 1),
        value,
    })
}

/// Canonical closed expression for a bracket of two flat-fragment operands;
/// used to record step results that the verifier then recomputes.
pub(crate) fn bracket_result(a: &MatExpr, b: &MatExpr, field: FieldId) -> Result<MatExpr> {
    normal_expr(&MatExpr::bracket(a.clone(), b.clone()), field)
}

/// Pushes `result = [lhs, rhs]` with the result computed canonically.
pub(crate) fn push_bracket_step(
    chain: &mut BracketChain,
    lhs: ChainOperand,
    rhs: ChainOperand,
    note: &str,
) -> Result<usize> {
    let l = chain.resolve(&lhs)?;
    let r = chain.resolve(&rhs)?;
    let result = bracket_result(&l, &r, chain.field)?;
    Ok(chain.push_bracket(lhs, rhs, result, note))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::SeqDesc;
    use crate::testkit::periodic;

    const Q: FieldId = FieldId::Rational;

    #[test]
    fn scalars_are_central() {
        let e = MatExpr::scalar(Q.from_i64(7));
        assert_eq!(center_witness(&e, Q).unwrap(), CentralVerdict::Central);
        assert_eq!(center_witness(&MatExpr::Zero, Q).unwrap(), CentralVerdict::Central);
    }

    #[test]
    fn basis_element_is_not_central() {
        match center_witness(&MatExpr::basis(1, 2), Q).unwrap() {
            CentralVerdict::NonCentral { probe, entry, value } => {
                assert_eq!(probe, MatExpr::basis(2, 2));
                assert_eq!(entry, (1, 2));
                assert_eq!(value, Q.from_i64(1));
            }
            CentralVerdict::Central => panic!("E_12 is not central"),
        }
    }

    #[test]
    fn alternating_diagonal_is_not_central() {
        let e = MatExpr::Diag(periodic(Q, &[], &[0, 1]));
        match center_witness(&e, Q).unwrap() {
            CentralVerdict::NonCentral { probe, entry, value } => {
                assert_eq!(probe, MatExpr::basis(1, 2));
                assert_eq!(entry, (1, 2));
                assert_eq!(value, Q.from_i64(-1));
            }
            CentralVerdict::Central => panic!("non-constant diagonal is not central"),
        }
    }

    #[test]
    fn infinite_row_non_central_probe() {
        let e = MatExpr::RowMat {
            row: 2,
            seq: SeqDesc::constant(Q.from_i64(1)),
        };
        match center_witness(&e, Q).unwrap() {
            CentralVerdict::NonCentral { entry, value, .. } => {
                let br = MatExpr::bracket(e.clone(), MatExpr::basis(entry.1, entry.1));
                assert_eq!(br.entry(Q, entry.0, entry.1).unwrap(), value);
                assert!(!value.is_zero());
            }
            CentralVerdict::Central => panic!("row matrix is not central"),
        }
    }
}
