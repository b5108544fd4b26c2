//! Machine-checkable bracket chains: certificates that a target matrix lies
//! in the ideal generated by a seed element.
//!
//! A chain is a list of steps; each step is either a bracket whose operands
//! are the seed, a prior result, or a free algebra element, or a declared
//! linear combination of seed and prior results. The ideal-closure
//! discipline is structural: every bracket step must keep one operand inside
//! the growing ideal, and combinations may only mix seed and prior results.
//! The verifier re-evaluates every step by exact window arithmetic, with the
//! inner dimension of each product padded so that the window of the product
//! is exact, and reports the first failing step and differing entry.

use crate::error::{Error, Result};
use crate::expr::MatExpr;
use crate::field::{FieldElem, FieldId};

/// Operand of a chain step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ChainOperand {
    /// The seed element generating the ideal.
    Seed,
    /// The result of an earlier step (0-based).
    Step(usize),
    /// An arbitrary algebra element (the free multiplier side).
    Expr(MatExpr),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepRule {
    /// result = [lhs, rhs].
    Bracket {
        lhs: ChainOperand,
        rhs: ChainOperand,
    },
    /// result = Σ coeff · operand, operands restricted to seed/prior results.
    Combine {
        terms: Vec<(FieldElem, ChainOperand)>,
    },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChainStep {
    pub rule: StepRule,
    pub result: MatExpr,
    pub note: String,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BracketChain {
    pub field: FieldId,
    pub seed: Option<MatExpr>,
    pub steps: Vec<ChainStep>,
    pub target: MatExpr,
}

/// Outcome of verification.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ChainVerdict {
    Pass,
    Fail(ChainFailure),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChainFailure {
    /// Failing step, or `None` for the final target comparison or a
    /// structural discipline violation.
    pub step: Option<usize>,
    /// First differing entry, when the failure is a value mismatch.
    pub entry: Option<(u64, u64)>,
    pub detail: String,
}

impl ChainVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, ChainVerdict::Pass)
    }
}

impl BracketChain {
    pub fn new(field: FieldId, seed: Option<MatExpr>, target: MatExpr) -> Self {
        BracketChain {
            field,
            seed,
            steps: Vec::new(),
            target,
        }
    }

    pub fn push_bracket(
        &mut self,
        lhs: ChainOperand,
        rhs: ChainOperand,
        result: MatExpr,
        note: impl Into<String>,
    ) -> usize {
        self.steps.push(ChainStep {
            rule: StepRule::Bracket { lhs, rhs },
            result,
            note: note.into(),
        });
        self.steps.len() - 1
    }

    pub fn push_combine(
        &mut self,
        terms: Vec<(FieldElem, ChainOperand)>,
        result: MatExpr,
        note: impl Into<String>,
    ) -> usize {
        self.steps.push(ChainStep {
            rule: StepRule::Combine { terms },
            result,
            note: note.into(),
        });
        self.steps.len() - 1
    }

    /// The expression a step operand refers to.
    pub fn resolve(&self, op: &ChainOperand) -> Result<MatExpr> {
        match op {
            ChainOperand::Seed => self
                .seed
                .clone()
                .ok_or_else(|| Error::NotNormalizable {
                    subterm: "seed reference in a seedless chain".into(),
                }),
            ChainOperand::Step(k) => Ok(self.steps[*k].result.clone()),
            ChainOperand::Expr(e) => Ok(e.clone()),
        }
    }

    /// The expression established by the whole chain.
    pub fn last_result(&self) -> MatExpr {
        match self.steps.last() {
            Some(s) => s.result.clone(),
            None => self
                .seed
                .clone()
                .unwrap_or(MatExpr::Zero),
        }
    }

    /// Appends all steps of `other`, remapping its operand references.
    /// `other`'s seed references are rewired to `seed_as`.
    pub fn absorb(&mut self, other: BracketChain, seed_as: ChainOperand) {
        let base = self.steps.len();
        for mut step in other.steps {
            let remap = |op: ChainOperand| match op {
                ChainOperand::Seed => seed_as.clone(),
                ChainOperand::Step(k) => ChainOperand::Step(k + base),
                e => e,
            };
            step.rule = match step.rule {
                StepRule::Bracket { lhs, rhs } => StepRule::Bracket {
                    lhs: remap(lhs),
                    rhs: remap(rhs),
                },
                StepRule::Combine { terms } => StepRule::Combine {
                    terms: terms.into_iter().map(|(c, op)| (c, remap(op))).collect(),
                },
            };
            self.steps.push(step);
        }
    }
}

/// Exact m×n window of A·B via dense multiplication with a padded inner
/// dimension covering every nonzero row of the first n columns of B.
pub fn product_window(
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
    let mut out = vec![vec![field.zero(); n as usize]; m as usize];
    for i in 0..m as usize {
        for t in 0..pad as usize {
            if wa[i][t].is_zero() {
                continue;
            }
            for j in 0..n as usize {
                out[i][j] = out[i][j].add(&wa[i][t].mul(&wb[t][j])?)?;
            }
        }
    }
    Ok(out)
}

/// Exact m×n window of [A, B] through [`product_window`].
pub fn bracket_window(
    a: &MatExpr,
    b: &MatExpr,
    field: FieldId,
    m: u64,
    n: u64,
) -> Result<Vec<Vec<FieldElem>>> {
    let ab = product_window(a, b, field, m, n)?;
    let ba = product_window(b, a, field, m, n)?;
    let mut out = ab;
    for (row, brow) in out.iter_mut().zip(ba) {
        for (v, w) in row.iter_mut().zip(brow) {
            *v = v.sub(&w)?;
        }
    }
    Ok(out)
}

fn first_diff(
    got: &[Vec<FieldElem>],
    want: &[Vec<FieldElem>],
) -> Option<((u64, u64), FieldElem, FieldElem)> {
    for (i, (grow, wrow)) in got.iter().zip(want).enumerate() {
        for (j, (g, w)) in grow.iter().zip(wrow).enumerate() {
            if g != w {
                return Some(((i as u64 + 1, j as u64 + 1), g.clone(), w.clone()));
            }
        }
    }
    None
}

/// Re-evaluates every step of the chain at the given window size.
pub fn verify_chain(chain: &BracketChain, size: u64) -> Result<ChainVerdict> {
    let field = chain.field;
    // Structural discipline first.
    for (i, step) in chain.steps.iter().enumerate() {
        let in_ideal = |op: &ChainOperand| match op {
            ChainOperand::Seed => chain.seed.is_some(),
            ChainOperand::Step(k) => *k < i,
            ChainOperand::Expr(_) => false,
        };
        match &step.rule {
            StepRule::Bracket { lhs, rhs } => {
                if let ChainOperand::Step(k) = lhs {
                    if *k >= i {
                        return Ok(fail(i, None, "forward step reference"));
                    }
                }
                if let ChainOperand::Step(k) = rhs {
                    if *k >= i {
                        return Ok(fail(i, None, "forward step reference"));
                    }
                }
                if !in_ideal(lhs) && !in_ideal(rhs) {
                    return Ok(fail(
                        i,
                        None,
                        "bracket step has no operand inside the ideal",
                    ));
                }
            }
            StepRule::Combine { terms } => {
                if terms.is_empty() {
                    return Ok(fail(i, None, "empty combination"));
                }
                for (_, op) in terms {
                    if !in_ideal(op) {
                        return Ok(fail(
                            i,
                            None,
                            "combination term outside seed and prior results",
                        ));
                    }
                }
            }
        }
    }

    for (i, step) in chain.steps.iter().enumerate() {
        let want = match &step.rule {
            StepRule::Bracket { lhs, rhs } => {
                let l = chain.resolve(lhs)?;
                let r = chain.resolve(rhs)?;
                bracket_window(&l, &r, field, size, size)?
            }
            StepRule::Combine { terms } => {
                let mut acc = vec![vec![field.zero(); size as usize]; size as usize];
                for (c, op) in terms {
                    let w = chain.resolve(op)?.window(field, size, size)?;
                    for (arow, wrow) in acc.iter_mut().zip(w) {
                        for (a, v) in arow.iter_mut().zip(wrow) {
                            *a = a.add(&c.mul(&v)?)?;
                        }
                    }
                }
                acc
            }
        };
        let got = step.result.window(field, size, size)?;
        if let Some((entry, g, w)) = first_diff(&got, &want) {
            return Ok(ChainVerdict::Fail(ChainFailure {
                step: Some(i),
                entry: Some(entry),
                detail: format!(
                    "step {i} ({}): declared result has {g} at ({}, {}), recomputation gives {w}",
                    step.note, entry.0, entry.1
                ),
            }));
        }
    }

    let last = chain.last_result();
    let got = last.window(field, size, size)?;
    let want = chain.target.window(field, size, size)?;
    if let Some((entry, g, w)) = first_diff(&got, &want) {
        return Ok(ChainVerdict::Fail(ChainFailure {
            step: None,
            entry: Some(entry),
            detail: format!(
                "target mismatch at ({}, {}): chain gives {g}, target has {w}",
                entry.0, entry.1
            ),
        }));
    }
    Ok(ChainVerdict::Pass)
}

fn fail(step: usize, entry: Option<(u64, u64)>, detail: &str) -> ChainVerdict {
    ChainVerdict::Fail(ChainFailure {
        step: Some(step),
        entry,
        detail: detail.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldId = FieldId::Rational;

    fn qv(v: i64) -> FieldElem {
        Q.from_i64(v)
    }

    #[test]
    fn empty_chain_with_zero_target_passes() {
        let chain = BracketChain::new(Q, None, MatExpr::Zero);
        assert!(verify_chain(&chain, 10).unwrap().is_pass());
    }

    #[test]
    fn one_step_extraction_passes() {
        // diag(1,2,2,2,...) brackets with -E_12 to produce E_12.
        let d = MatExpr::Diag(crate::testkit::periodic(Q, &[1], &[2]));
        let mut chain = BracketChain::new(Q, Some(d), MatExpr::basis(1, 2));
        chain.push_bracket(
            ChainOperand::Seed,
            ChainOperand::Expr(MatExpr::scale(qv(-1), MatExpr::basis(1, 2))),
            MatExpr::basis(1, 2),
            "bracket with inverse-scaled basis probe",
        );
        assert!(verify_chain(&chain, 20).unwrap().is_pass());
    }

    #[test]
    fn corrupted_coefficient_fails_at_first_entry() {
        let d = MatExpr::Diag(crate::testkit::periodic(Q, &[1], &[2]));
        let mut chain = BracketChain::new(Q, Some(d), MatExpr::basis(1, 2));
        // Wrong sign on the probe: the recomputed bracket is -E_12.
        chain.push_bracket(
            ChainOperand::Seed,
            ChainOperand::Expr(MatExpr::basis(1, 2)),
            MatExpr::basis(1, 2),
            "corrupted",
        );
        match verify_chain(&chain, 20).unwrap() {
            ChainVerdict::Fail(f) => {
                assert_eq!(f.step, Some(0));
                assert_eq!(f.entry, Some((1, 2)));
            }
            ChainVerdict::Pass => panic!("corrupted chain must fail"),
        }
    }

    #[test]
    fn discipline_requires_an_ideal_operand() {
        let mut chain = BracketChain::new(Q, Some(MatExpr::basis(1, 2)), MatExpr::Zero);
        chain.push_bracket(
            ChainOperand::Expr(MatExpr::basis(1, 1)),
            ChainOperand::Expr(MatExpr::basis(1, 1)),
            MatExpr::Zero,
            "both operands free",
        );
        assert!(!verify_chain(&chain, 8).unwrap().is_pass());
    }

    #[test]
    fn combine_of_seed_and_prior_results() {
        let seed = MatExpr::basis(1, 2);
        let target = MatExpr::sum(vec![
            MatExpr::basis(1, 2),
            MatExpr::scale(qv(3), MatExpr::basis(1, 3)),
        ]);
        let mut chain = BracketChain::new(Q, Some(seed), target);
        chain.push_bracket(
            ChainOperand::Seed,
            ChainOperand::Expr(MatExpr::basis(2, 3)),
            MatExpr::basis(1, 3),
            "compose to reach column 3",
        );
        chain.push_combine(
            vec![
                (qv(1), ChainOperand::Seed),
                (qv(3), ChainOperand::Step(0)),
            ],
            MatExpr::sum(vec![
                MatExpr::basis(1, 2),
                MatExpr::scale(qv(3), MatExpr::basis(1, 3)),
            ]),
            "linear combination",
        );
        assert!(verify_chain(&chain, 12).unwrap().is_pass());
    }

    #[test]
    fn combine_rejects_free_expressions() {
        let mut chain = BracketChain::new(Q, Some(MatExpr::basis(1, 2)), MatExpr::basis(1, 1));
        chain.push_combine(
            vec![(qv(1), ChainOperand::Expr(MatExpr::basis(1, 1)))],
            MatExpr::basis(1, 1),
            "smuggled element",
        );
        assert!(!verify_chain(&chain, 8).unwrap().is_pass());
    }
}
