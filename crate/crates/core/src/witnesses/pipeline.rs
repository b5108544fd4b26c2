//! The staged pipeline that turns any element outside scalar + finite-row
//! into a certificate generating the whole algebra: extract a diagonal with
//! infinitely many adjacent disagreements, bracket it into a partial
//! superdiagonal, enlarge the support until its complement has no two
//! consecutive members, and complete to the full superdiagonal.

use std::collections::{BTreeMap, HashMap};

use crate::chain::{BracketChain, ChainOperand};
use crate::error::{Error, Result};
use crate::expr::MatExpr;
use crate::field::FieldId;
use crate::index_set::IndexSet;
use crate::normalize::{normal_expr, normalize, TailPart};
use crate::seq::SeqDesc;

use super::basis::BasisDeriver;
use super::{eij_from_offdiag, push_bracket_step};

/// From an element with an irreducible tail, derive a diagonal element whose
/// adjacent-disagreement set is infinite, together with the chain realizing
/// it.
///
/// Supported inputs: a tail containing an off-diagonal band (the selection
/// walks the band), or finitely many off-diagonal entries next to a
/// non-constant diagonal tail (the entries are subtracted via derived basis
/// matrices). Anything else, including infinite rows with no band, is outside
/// the implemented fragment.
pub fn extract_diag(a: &MatExpr, field: FieldId) -> Result<(MatExpr, BracketChain)> {
    if !field.has_inverses() {
        return Err(Error::RingNotSupported);
    }
    let cf = normalize(a, field)?;
    let shift_tail = cf.tail.iter().find_map(|t| match t {
        TailPart::Shift {
            offset, weights, ..
        } => Some((*offset, weights.clone())),
        TailPart::Diag(_) => None,
    });

    if let Some((k, weights)) = shift_tail {
        return extract_from_band(a, &cf, field, k, &weights);
    }

    // No band. The fragment covers finitely many off-diagonal entries over a
    // non-constant diagonal.
    if cf.tail.is_empty() || !cf.is_row_finite() {
        return Err(Error::UnsupportedTail);
    }

    let mut offdiag: Vec<(u64, u64)> = Vec::new();
    for (&r, s) in &cf.fr {
        let bound = s.support_bound().unwrap();
        for c in 1..=bound {
            if c != r && !s.eval(c).is_zero() {
                offdiag.push((r, c));
            }
        }
    }

    if offdiag.is_empty() {
        // Already diagonal.
        let d = cf.to_expr();
        let chain = BracketChain::new(field, Some(a.clone()), d.clone());
        return Ok((d, chain));
    }

    let (i0, j0) = offdiag[0];
    let sub = eij_from_offdiag(a, field, i0, j0)?;
    let (bi, bj) = match &sub.target {
        MatExpr::Basis(i, j) => (*i, *j),
        _ => unreachable!(),
    };
    let mut chain = BracketChain::new(field, Some(a.clone()), MatExpr::Zero);
    chain.absorb(sub, ChainOperand::Seed);
    let base = ChainOperand::Step(chain.steps.len() - 1);
    let mut deriver = BasisDeriver::new(base, bi, bj);

    let mut terms = vec![(field.one(), ChainOperand::Seed)];
    let mut removed = vec![a.clone()];
    for (m, n) in offdiag {
        let v = a.entry(field, m, n)?;
        let op = deriver.get(&mut chain, m, n)?;
        terms.push((v.neg(), op));
        removed.push(MatExpr::scale(v.neg(), MatExpr::basis(m, n)));
    }
    let d = normal_expr(&MatExpr::Sum(removed), field)?;
    chain.push_combine(terms, d.clone(), "subtract the off-diagonal entries");
    chain.target = d.clone();

    let diag = normalize(&d, field)?.diag_desc()?;
    debug_assert!(diag.disagreement().is_infinite());
    Ok((d, chain))
}

/// Band case: select entries along the band, widely spaced so that no other
/// band of the matrix, no finite-row content, and no index collision can
/// interfere, then run the four projection brackets.
fn extract_from_band(
    a: &MatExpr,
    cf: &crate::normalize::CanonicalForm,
    field: FieldId,
    k: i64,
    weights: &SeqDesc,
) -> Result<(MatExpr, BracketChain)> {
    let mut offsets: Vec<i64> = vec![0];
    for t in &cf.tail {
        if let TailPart::Shift { offset, .. } = t {
            offsets.push(*offset);
        }
    }
    let max_fr = cf.fr.keys().copied().max().unwrap_or(0);
    let max_off = offsets.iter().map(|o| o.unsigned_abs()).max().unwrap_or(0);
    let deepest = offsets.iter().map(|o| (-o).max(0) as u64).max().unwrap_or(0);

    // Gaps at least this large rule out every offset coincidence used below.
    let min_gap = max_off + k.unsigned_abs() + 4;
    let step = min_gap.max(k.unsigned_abs() + deepest + 2);
    let start = [
        2i64,
        2 - k,
        max_fr as i64 + 1,
        max_fr as i64 + 2 - k,
        weights.settle_point() as i64,
    ]
    .into_iter()
    .max()
    .unwrap() as u64;

    let selected = select_periodic(&weights.support(), start, step)?;
    let i_set = &selected;
    let j_set = selected.shifted(k);

    let upper = k > 0;
    let (h_set, h_minus_j) = if upper {
        (selected.shifted(-1), -(k + 1))
    } else {
        (selected.shifted(1), 1 - k)
    };

    let mut chain = BracketChain::new(field, Some(a.clone()), MatExpr::Zero);
    let s1 = push_bracket_step(
        &mut chain,
        ChainOperand::Expr(MatExpr::indicator_diag(field, i_set)),
        ChainOperand::Seed,
        "project onto the selected rows and columns",
    )?;
    let s2 = push_bracket_step(
        &mut chain,
        ChainOperand::Step(s1),
        ChainOperand::Expr(MatExpr::indicator_diag(field, &j_set)),
        "cut to the selected entries and their mirrors",
    )?;
    let shifter = if upper {
        MatExpr::superdiagonal(field)
    } else {
        MatExpr::indicator_shift(field, -1, IndexSet::all())
    };
    let s3 = push_bracket_step(
        &mut chain,
        ChainOperand::Expr(shifter),
        ChainOperand::Step(s2),
        "slide the selected entries one row aside",
    )?;
    let s4 = push_bracket_step(
        &mut chain,
        ChainOperand::Expr(MatExpr::indicator_diag(field, &h_set)),
        ChainOperand::Step(s3),
        "isolate the slid copies",
    )?;
    let s5 = push_bracket_step(
        &mut chain,
        ChainOperand::Step(s4),
        ChainOperand::Expr(MatExpr::indicator_shift(field, h_minus_j, j_set.clone())),
        "fold into a diagonal of differences",
    )?;
    let d = chain.steps[s5].result.clone();
    chain.target = d.clone();

    let dcf = normalize(&d, field)?;
    debug_assert!(dcf.is_diagonal());
    let diag = dcf.diag_desc()?;
    if !diag.disagreement().is_infinite() {
        return Err(Error::UnsupportedTail);
    }
    Ok((d, chain))
}

/// Picks members of an infinite eventually periodic set with consecutive
/// gaps of at least `step`, starting at or after `start`, and returns the
/// resulting set, which is again eventually periodic: beyond the settle
/// point the next pick depends only on the current pick modulo the period,
/// so the gap pattern cycles.
fn select_periodic(supp: &IndexSet, start: u64, step: u64) -> Result<IndexSet> {
    if !supp.is_infinite() {
        return Err(Error::UnsupportedTail);
    }
    let period = supp.period_len();
    let settle = supp.settle_point();
    let horizon = 4 * (period + step + settle) + 16;

    let first = (start.max(settle)..)
        .take(horizon as usize)
        .find(|&m| supp.contains(m))
        .expect("infinite set has a member past any bound");

    let mut picks = vec![first];
    let mut seen: HashMap<u64, usize> = HashMap::new();
    seen.insert(first % period, 0);
    loop {
        let prev = *picks.last().unwrap();
        let next = (prev + step..)
            .take(horizon as usize)
            .find(|&m| supp.contains(m))
            .expect("infinite set has a member past any bound");
        let r = next % period;
        if let Some(&idx) = seen.get(&r) {
            // Cycle: picks repeat with period next - picks[idx].
            let cycle_start = picks[idx];
            let cycle_len = next - cycle_start;
            let mut prefix = vec![false; cycle_start as usize - 1];
            for &p in &picks[..idx] {
                prefix[p as usize - 1] = true;
            }
            let mut per = vec![false; cycle_len as usize];
            for &p in &picks[idx..] {
                per[(p - cycle_start) as usize] = true;
            }
            return IndexSet::eventually_periodic(prefix, per);
        }
        seen.insert(r, picks.len());
        picks.push(next);
    }
}

/// One bracket with inverse-gap weights turns a diagonal with infinite
/// adjacent disagreement into the superdiagonal over the disagreement set.
pub fn superdiag_from_diag(d: &MatExpr, field: FieldId) -> Result<(IndexSet, BracketChain)> {
    if !field.has_inverses() {
        return Err(Error::RingNotSupported);
    }
    let cf = normalize(d, field)?;
    if !cf.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    let diag = cf.diag_desc()?;
    let h = diag.disagreement();
    if !h.is_infinite() {
        return Err(Error::FiniteDisagreement);
    }
    let delta = diag.sub(&diag.advance(1))?;
    debug_assert_eq!(delta.support(), h);
    let probe_weights = delta.invert_on_support()?;
    let target = MatExpr::indicator_shift(field, 1, h.clone());
    let mut chain = BracketChain::new(field, Some(d.clone()), target.clone());
    chain.push_bracket(
        ChainOperand::Seed,
        ChainOperand::Expr(MatExpr::Shift {
            offset: 1,
            rows: h.clone(),
            weights: probe_weights,
        }),
        target,
        "bracket with inverse-gap superdiagonal probe",
    );
    Ok((h, chain))
}

/// Result of one enlargement round: positions to fill and, grouped by the
/// offset f(z) - z, the rows z whose filler is f(z).
struct FillRound {
    z: IndexSet,
    groups: BTreeMap<u64, IndexSet>,
}

/// Grows the support of a partial superdiagonal until its complement has no
/// two consecutive members. Each round brackets against a displacement
/// matrix built from a strictly increasing assignment z -> f(z) into the
/// current set with f(z) > z, then adds the new superdiagonal entries. The
/// assignment is chosen with bounded displacement so every multiplier splits
/// into finitely many constant-offset shifts; one round suffices unless the
/// set is locally much sparser than its gaps.
pub fn enlarge_set(h: &IndexSet, field: FieldId) -> Result<(IndexSet, BracketChain)> {
    if !h.is_infinite() {
        return Err(Error::NotInfinite);
    }
    let seed_expr = MatExpr::indicator_shift(field, 1, h.clone());
    let mut chain = BracketChain::new(field, Some(seed_expr), MatExpr::Zero);
    let mut g = h.clone();
    let mut current = ChainOperand::Seed;

    let mut rounds = 0;
    while !g.complement().has_no_two_consecutive() {
        rounds += 1;
        assert!(rounds <= 64, "enlargement failed to converge");
        let round = fill_round(&g)?;
        assert!(!round.z.is_empty());

        let mut lift_terms = Vec::new(); // Σ_z E_{z, f(z)}
        let mut lifted = Vec::new(); // Σ_z E_{z, f(z)+1}
        let mut lower_terms = Vec::new(); // Σ_z E_{f(z)+1, z+1}
        for (&off, rows) in &round.groups {
            lift_terms.push(MatExpr::indicator_shift(field, off as i64, rows.clone()));
            lifted.push(MatExpr::indicator_shift(field, off as i64 + 1, rows.clone()));
            lower_terms.push(MatExpr::indicator_shift(
                field,
                -(off as i64),
                rows.shifted(off as i64 + 1),
            ));
        }
        let s1 = push_bracket_step(
            &mut chain,
            ChainOperand::Expr(MatExpr::Sum(lift_terms)),
            current.clone(),
            "lift filler entries one column right",
        )?;
        debug_assert!(chain.steps[s1]
            .result
            .window_eq(
                &normal_expr(&MatExpr::Sum(lifted), field)?,
                field,
                40,
                40
            )?);
        let s2 = push_bracket_step(
            &mut chain,
            ChainOperand::Step(s1),
            ChainOperand::Expr(MatExpr::Sum(lower_terms)),
            "project down to the new superdiagonal entries",
        )?;
        let union = g.union(&round.z);
        let result = MatExpr::indicator_shift(field, 1, union.clone());
        let s3 = chain.push_combine(
            vec![
                (field.one(), current.clone()),
                (field.one(), ChainOperand::Step(s2)),
            ],
            result,
            "merge old and new entries",
        );
        g = union;
        current = ChainOperand::Step(s3);
    }
    chain.target = MatExpr::indicator_shift(field, 1, g.clone());
    Ok((g, chain))
}

/// One scan of the gap-filling state machine. A position z is fillable when
/// neither z nor z-1 lies in the set, the previous position was not filled,
/// and a filler f(z) beyond both z and the last used filler exists within
/// the displacement cap. The scan state is eventually periodic, so the
/// filled set and the per-offset groups are too.
fn fill_round(g: &IndexSet) -> Result<FillRound> {
    let period = g.period_len();
    let settle = g.settle_point();
    let cap = 2 * (period + settle) + 8;
    let iter_cap = (settle + 16 * period * (cap + 4) + 64) as usize;

    let mut bits: Vec<bool> = Vec::new();
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let mut last_f = 0u64;
    let mut prev_filled = false;
    let mut seen: HashMap<(u64, i64, bool), u64> = HashMap::new();

    let mut p = 1u64;
    let (cycle_start, cycle_len) = loop {
        assert!((p as usize) < iter_cap, "fill scan failed to cycle");
        // State before deciding position p.
        if p > settle {
            let lag = (last_f as i64 - p as i64).max(-1);
            let key = (p % period, lag, prev_filled);
            if let Some(&p0) = seen.get(&key) {
                break (p0, p - p0);
            }
            seen.insert(key, p);
        }
        let mut filled = false;
        if p >= 2 && !g.contains(p) && !g.contains(p - 1) && !prev_filled {
            let lo = p.max(last_f) + 1;
            let f = (lo..lo + 2 * (period + settle) + 2).find(|&m| g.contains(m));
            if let Some(f) = f {
                if f - p <= cap {
                    filled = true;
                    pairs.push((p, f));
                    last_f = f;
                }
            }
        }
        bits.push(filled);
        prev_filled = filled;
        p += 1;
    };

    let take = |marks: &[u64]| -> Result<IndexSet> {
        let mut pre = vec![false; cycle_start as usize - 1];
        let mut per = vec![false; cycle_len as usize];
        for &m in marks {
            if m < cycle_start {
                pre[m as usize - 1] = true;
            } else if m < cycle_start + cycle_len {
                per[(m - cycle_start) as usize] = true;
            }
        }
        IndexSet::eventually_periodic(pre, per)
    };

    let z_marks: Vec<u64> = bits
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i as u64 + 1))
        .filter(|&z| z < cycle_start + cycle_len)
        .collect();
    let z = take(&z_marks)?;

    let mut group_marks: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &(zp, f) in &pairs {
        if zp < cycle_start + cycle_len {
            group_marks.entry(f - zp).or_default().push(zp);
        }
    }
    let mut groups = BTreeMap::new();
    for (off, marks) in group_marks {
        groups.insert(off, take(&marks)?);
    }
    Ok(FillRound { z, groups })
}

/// Completes a gap-free partial superdiagonal to the full one: ensure the
/// first index is present, split the complement into two sparse halves, and
/// fill each half with a subdiagonal bracket pass.
pub fn complete_superdiag(g: &IndexSet, field: FieldId) -> Result<BracketChain> {
    if !g.complement().has_no_two_consecutive() {
        return Err(Error::GapPropertyViolated);
    }
    let target = MatExpr::superdiagonal(field);
    let seed_expr = MatExpr::indicator_shift(field, 1, g.clone());
    let mut chain = BracketChain::new(field, Some(seed_expr), target.clone());
    let mut current = ChainOperand::Seed;
    let mut g = g.clone();

    if !g.contains(1) {
        // The complement cannot also contain 2; route E_12 through row 2.
        debug_assert!(g.contains(2));
        let sa = push_bracket_step(
            &mut chain,
            ChainOperand::Expr(MatExpr::basis(2, 2)),
            current.clone(),
            "peel off the entry at (2,3)",
        )?;
        let sb = push_bracket_step(
            &mut chain,
            ChainOperand::Expr(MatExpr::basis(1, 2)),
            ChainOperand::Step(sa),
            "move it to row 1",
        )?;
        let sc = push_bracket_step(
            &mut chain,
            ChainOperand::Step(sb),
            ChainOperand::Expr(MatExpr::basis(3, 2)),
            "land on the (1,2) entry",
        )?;
        let union = g.union(&IndexSet::finite(&[1].into())?);
        let sd = chain.push_combine(
            vec![
                (field.one(), current.clone()),
                (field.one(), ChainOperand::Step(sc)),
            ],
            MatExpr::indicator_shift(field, 1, union.clone()),
            "include index 1",
        );
        g = union;
        current = ChainOperand::Step(sd);
    }

    let complement = g.complement();
    let (z1, z2) = alternate_split(&complement)?;
    for z in [z1, z2] {
        if z.is_empty() {
            continue;
        }
        let s1 = push_bracket_step(
            &mut chain,
            ChainOperand::Expr(MatExpr::indicator_shift(field, -1, z.clone())),
            current.clone(),
            "build the diagonal marker of the missing indices",
        )?;
        let s2 = push_bracket_step(
            &mut chain,
            ChainOperand::Step(s1),
            ChainOperand::Expr(MatExpr::indicator_shift(field, 1, z.clone())),
            "emit the missing superdiagonal entries",
        )?;
        let union = g.union(&z);
        let s3 = chain.push_combine(
            vec![
                (field.one(), current.clone()),
                (field.one(), ChainOperand::Step(s2)),
            ],
            MatExpr::indicator_shift(field, 1, union.clone()),
            "merge",
        );
        g = union;
        current = ChainOperand::Step(s3);
    }
    debug_assert_eq!(g, IndexSet::all());
    Ok(chain)
}

/// Splits a set into its odd-ranked and even-ranked members.
fn alternate_split(c: &IndexSet) -> Result<(IndexSet, IndexSet)> {
    if let Some(members) = c.finite_members() {
        let mut odd = std::collections::BTreeSet::new();
        let mut even = std::collections::BTreeSet::new();
        for (idx, m) in members.into_iter().enumerate() {
            if idx % 2 == 0 {
                odd.insert(m);
            } else {
                even.insert(m);
            }
        }
        return Ok((IndexSet::finite(&odd)?, IndexSet::finite(&even)?));
    }
    let period = c.period_len();
    let settle = c.settle_point();
    let mut odd_marks = Vec::new();
    let mut even_marks = Vec::new();
    let mut parity = false; // false: next member gets odd rank
    let mut seen: HashMap<(u64, bool), u64> = HashMap::new();
    let mut p = 1u64;
    let (cycle_start, cycle_len) = loop {
        assert!(p < settle + 8 * period + 64, "split scan failed to cycle");
        if p > settle {
            let key = (p % period, parity);
            if let Some(&p0) = seen.get(&key) {
                break (p0, p - p0);
            }
            seen.insert(key, p);
        }
        if c.contains(p) {
            if !parity {
                odd_marks.push(p);
            } else {
                even_marks.push(p);
            }
            parity = !parity;
        }
        p += 1;
    };
    let take = |marks: &[u64]| -> Result<IndexSet> {
        let mut pre = vec![false; cycle_start as usize - 1];
        let mut per = vec![false; cycle_len as usize];
        for &m in marks {
            if m < cycle_start {
                pre[m as usize - 1] = true;
            } else if m < cycle_start + cycle_len {
                per[(m - cycle_start) as usize] = true;
            }
        }
        IndexSet::eventually_periodic(pre, per)
    };
    Ok((take(&odd_marks)?, take(&even_marks)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::verify_chain;
    use crate::testkit::periodic;

    const Q: FieldId = FieldId::Rational;

    #[test]
    fn extract_from_plain_band() {
        let a = MatExpr::Shift {
            offset: 2,
            rows: IndexSet::all(),
            weights: SeqDesc::constant(Q.from_i64(1)),
        };
        let (d, chain) = extract_diag(&a, Q).unwrap();
        assert!(verify_chain(&chain, 80).unwrap().is_pass());
        let cf = normalize(&d, Q).unwrap();
        assert!(cf.is_diagonal());
        assert!(cf.diag_desc().unwrap().disagreement().is_infinite());
    }

    #[test]
    fn extract_from_masked_band() {
        let a = MatExpr::Shift {
            offset: 1,
            rows: IndexSet::arithmetic(2, 2),
            weights: SeqDesc::constant(Q.from_i64(1)),
        };
        let (_, chain) = extract_diag(&a, Q).unwrap();
        assert!(verify_chain(&chain, 80).unwrap().is_pass());
    }

    #[test]
    fn extract_from_lower_band_with_clutter() {
        let a = MatExpr::sum(vec![
            MatExpr::Shift {
                offset: -1,
                rows: IndexSet::all(),
                weights: periodic(Q, &[], &[1, 2]),
            },
            MatExpr::scalar(Q.from_i64(3)),
            MatExpr::basis(2, 5),
        ]);
        let (d, chain) = extract_diag(&a, Q).unwrap();
        assert!(verify_chain(&chain, 80).unwrap().is_pass());
        assert!(normalize(&d, Q).unwrap().is_diagonal());
    }

    #[test]
    fn extract_finite_offdiag_branch() {
        let a = MatExpr::sum(vec![
            MatExpr::Diag(periodic(Q, &[], &[1, 2])),
            MatExpr::basis(1, 3),
            MatExpr::scale(Q.from_i64(2), MatExpr::basis(4, 2)),
        ]);
        let (d, chain) = extract_diag(&a, Q).unwrap();
        assert!(verify_chain(&chain, 60).unwrap().is_pass());
        let cf = normalize(&d, Q).unwrap();
        assert!(cf.is_diagonal());
        assert!(cf.diag_desc().unwrap().disagreement().is_infinite());
    }

    #[test]
    fn extract_rejects_rows_without_bands() {
        let a = MatExpr::sum(vec![
            MatExpr::Diag(periodic(Q, &[], &[1, 2])),
            MatExpr::RowMat {
                row: 1,
                seq: SeqDesc::constant(Q.from_i64(1)),
            },
        ]);
        assert!(matches!(extract_diag(&a, Q), Err(Error::UnsupportedTail)));
    }

    #[test]
    fn superdiag_examples() {
        let d = MatExpr::Diag(periodic(Q, &[], &[0, 1]));
        let (h, chain) = superdiag_from_diag(&d, Q).unwrap();
        assert_eq!(h, IndexSet::all());
        assert_eq!(chain.steps.len(), 1);
        assert!(verify_chain(&chain, 60).unwrap().is_pass());

        assert!(matches!(
            superdiag_from_diag(&MatExpr::scalar(Q.from_i64(4)), Q),
            Err(Error::FiniteDisagreement)
        ));
        assert!(matches!(
            superdiag_from_diag(&MatExpr::basis(1, 2), Q),
            Err(Error::NotDiagonal)
        ));
    }

    #[test]
    fn enlarge_multiples_of_four() {
        let h = IndexSet::arithmetic(4, 4);
        let (g, chain) = enlarge_set(&h, Q).unwrap();
        assert!(g.complement().has_no_two_consecutive());
        assert!(verify_chain(&chain, 60).unwrap().is_pass());
        // Alternate gaps fill: evens.
        assert_eq!(g, IndexSet::arithmetic(2, 2));
    }

    #[test]
    fn enlarge_all_is_empty_chain() {
        let (g, chain) = enlarge_set(&IndexSet::all(), Q).unwrap();
        assert_eq!(g, IndexSet::all());
        assert!(chain.steps.is_empty());
        assert!(verify_chain(&chain, 40).unwrap().is_pass());
    }

    #[test]
    fn enlarge_keeps_good_sets() {
        let h = IndexSet::arithmetic(2, 2);
        let (g, chain) = enlarge_set(&h, Q).unwrap();
        assert_eq!(g, h);
        assert!(chain.steps.is_empty());
    }

    #[test]
    fn enlarge_sparse_set_needs_rounds() {
        let h = IndexSet::arithmetic(10, 10);
        let (g, chain) = enlarge_set(&h, Q).unwrap();
        assert!(g.complement().has_no_two_consecutive());
        assert!(verify_chain(&chain, 80).unwrap().is_pass());
    }

    #[test]
    fn complete_with_periodic_gaps() {
        // Complement {3, 7, 11, ...}.
        let g = IndexSet::arithmetic(3, 4).complement();
        let chain = complete_superdiag(&g, Q).unwrap();
        assert!(verify_chain(&chain, 60).unwrap().is_pass());
    }

    #[test]
    fn complete_full_set_is_empty_chain() {
        let chain = complete_superdiag(&IndexSet::all(), Q).unwrap();
        assert!(chain.steps.is_empty());
        assert!(verify_chain(&chain, 40).unwrap().is_pass());
    }

    #[test]
    fn complete_rejects_adjacent_gaps() {
        let g = IndexSet::finite(&[2, 3].into()).unwrap().complement();
        assert!(matches!(
            complete_superdiag(&g, Q),
            Err(Error::GapPropertyViolated)
        ));
    }

    #[test]
    fn complete_without_index_one() {
        // Complement {1, 5, 9, ...}: no two consecutive, but 1 is missing.
        let g = IndexSet::arithmetic(1, 4).complement();
        assert!(!g.contains(1));
        let chain = complete_superdiag(&g, Q).unwrap();
        assert!(verify_chain(&chain, 60).unwrap().is_pass());
    }

    #[test]
    fn full_pipeline_composes() {
        let a = MatExpr::Shift {
            offset: 1,
            rows: IndexSet::arithmetic(3, 3),
            weights: periodic(Q, &[], &[2, 1, 1]),
        };
        let (d, c1) = extract_diag(&a, Q).unwrap();
        assert!(verify_chain(&c1, 80).unwrap().is_pass());
        let (h, c2) = superdiag_from_diag(&d, Q).unwrap();
        assert!(verify_chain(&c2, 80).unwrap().is_pass());
        let (g, c3) = enlarge_set(&h, Q).unwrap();
        assert!(verify_chain(&c3, 80).unwrap().is_pass());
        let c4 = complete_superdiag(&g, Q).unwrap();
        assert!(verify_chain(&c4, 80).unwrap().is_pass());
    }
}
