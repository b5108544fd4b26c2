//! The seven-element ideal lattice of the column-finite matrix algebra and
//! the classifier sending each expression to the smallest ideal containing
//! it.
//!
//! Classification reads the canonical form directly. A nonempty tail puts
//! the element outside scalar + finite-row, and the constructive machinery
//! in the witnesses module shows any such element generates the whole
//! algebra, so the minimal ideal is the top. Within scalar + finite-row the
//! minimal ideal is determined by which components are present and by the
//! finite-row trace; minimality per class holds because every interval
//! between neighbouring ideals in the lattice has codimension one or is
//! collapsed by the basis-extraction chains, so no intermediate ideals fit.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::MatExpr;
use crate::field::FieldId;
use crate::normalize::normalize;

/// One of the seven ideals, ordered by inclusion.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum IdealName {
    Zero,
    Dsc,
    SlFr,
    GlFr,
    DscSlFr,
    DscGlFr,
    GlCf,
}

pub const ALL_IDEALS: [IdealName; 7] = [
    IdealName::Zero,
    IdealName::Dsc,
    IdealName::SlFr,
    IdealName::GlFr,
    IdealName::DscSlFr,
    IdealName::DscGlFr,
    IdealName::GlCf,
];

/// Covering edges of the Hasse diagram.
pub const HASSE_EDGES: [(IdealName, IdealName); 8] = [
    (IdealName::Zero, IdealName::Dsc),
    (IdealName::Zero, IdealName::SlFr),
    (IdealName::SlFr, IdealName::GlFr),
    (IdealName::SlFr, IdealName::DscSlFr),
    (IdealName::Dsc, IdealName::DscSlFr),
    (IdealName::GlFr, IdealName::DscGlFr),
    (IdealName::DscSlFr, IdealName::DscGlFr),
    (IdealName::DscGlFr, IdealName::GlCf),
];

impl IdealName {
    /// Serialized name used by the CLI and JSON output.
    pub fn as_str(self) -> &'static str {
        match self {
            IdealName::Zero => "0",
            IdealName::Dsc => "d_sc",
            IdealName::SlFr => "sl_fr",
            IdealName::GlFr => "gl_fr",
            IdealName::DscSlFr => "d_sc+sl_fr",
            IdealName::DscGlFr => "d_sc+gl_fr",
            IdealName::GlCf => "gl_cf",
        }
    }

    pub fn parse(text: &str) -> Option<IdealName> {
        ALL_IDEALS.into_iter().find(|i| i.as_str() == text)
    }

    /// Whether the component decomposition (scalar part, finite-row part of
    /// given trace kind, tail) fits inside this ideal.
    fn admits(self, scalar: bool, traceless_fr: bool, traced_fr: bool, tail: bool) -> bool {
        let (s, l, g, t) = match self {
            IdealName::Zero => (false, false, false, false),
            IdealName::Dsc => (true, false, false, false),
            IdealName::SlFr => (false, true, false, false),
            IdealName::GlFr => (false, true, true, false),
            IdealName::DscSlFr => (true, true, false, false),
            IdealName::DscGlFr => (true, true, true, false),
            IdealName::GlCf => (true, true, true, true),
        };
        (!scalar || s) && (!traceless_fr || l) && (!traced_fr || g) && (!tail || t)
    }
}

impl fmt::Display for IdealName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Inclusion order of the lattice.
pub fn leq(a: IdealName, b: IdealName) -> bool {
    // a <= b iff everything a admits, b admits too.
    let probes = [
        (true, false, false, false),
        (false, true, false, false),
        (false, false, true, false),
        (false, false, false, true),
    ];
    probes
        .iter()
        .all(|&(s, l, g, t)| !a.admits(s, l, g, t) || b.admits(s, l, g, t))
}

/// Least upper bound.
pub fn join(a: IdealName, b: IdealName) -> IdealName {
    let ubs: Vec<IdealName> = ALL_IDEALS
        .into_iter()
        .filter(|&c| leq(a, c) && leq(b, c))
        .collect();
    let mut best = IdealName::GlCf;
    for &c in &ubs {
        if leq(c, best) {
            best = c;
        }
    }
    debug_assert!(ubs.iter().all(|&c| leq(best, c)));
    best
}

/// Greatest lower bound.
pub fn meet(a: IdealName, b: IdealName) -> IdealName {
    let lbs: Vec<IdealName> = ALL_IDEALS
        .into_iter()
        .filter(|&c| leq(c, a) && leq(c, b))
        .collect();
    let mut best = IdealName::Zero;
    for &c in &lbs {
        if leq(best, c) {
            best = c;
        }
    }
    debug_assert!(lbs.iter().all(|&c| leq(c, best)));
    best
}

/// The smallest ideal containing the denoted matrix.
pub fn classify(e: &MatExpr, field: FieldId) -> Result<IdealName> {
    if !field.has_inverses() {
        return Err(Error::RingNotSupported);
    }
    let cf = normalize(e, field)?;
    if !cf.tail.is_empty() {
        return Ok(IdealName::GlCf);
    }
    let scalar = !cf.alpha.is_zero();
    let fr = !cf.fr.is_empty();
    let traced = fr && !cf.fr_trace.is_zero();
    Ok(match (scalar, fr) {
        (false, false) => IdealName::Zero,
        (true, false) => IdealName::Dsc,
        (false, true) => {
            if traced {
                IdealName::GlFr
            } else {
                IdealName::SlFr
            }
        }
        (true, true) => {
            if traced {
                IdealName::DscGlFr
            } else {
                IdealName::DscSlFr
            }
        }
    })
}

/// Membership: whether the element lies in the named ideal.
pub fn in_ideal(e: &MatExpr, ideal: IdealName, field: FieldId) -> Result<bool> {
    Ok(leq(classify(e, field)?, ideal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;
    use IdealName::*;

    const Q: FieldId = FieldId::Rational;

    #[test]
    fn order_examples() {
        assert!(!leq(Dsc, SlFr));
        assert!(!leq(SlFr, Dsc));
        assert!(leq(SlFr, DscSlFr));
        for i in ALL_IDEALS {
            assert!(leq(i, i));
            assert!(leq(Zero, i));
            assert!(leq(i, GlCf));
        }
        assert!(!leq(Dsc, GlFr));
        assert!(!leq(GlFr, DscSlFr));
        assert!(!leq(DscSlFr, GlFr));
    }

    #[test]
    fn join_meet_examples() {
        assert_eq!(join(Dsc, SlFr), DscSlFr);
        assert_eq!(meet(DscGlFr, DscSlFr), DscSlFr);
        assert_eq!(meet(Dsc, GlFr), Zero);
        assert_eq!(join(GlFr, DscSlFr), DscGlFr);
        assert_eq!(meet(GlFr, DscSlFr), SlFr);
    }

    #[test]
    fn lattice_laws() {
        for a in ALL_IDEALS {
            for b in ALL_IDEALS {
                let j = join(a, b);
                let m = meet(a, b);
                assert!(leq(a, j) && leq(b, j));
                assert!(leq(m, a) && leq(m, b));
                assert_eq!(join(a, b), join(b, a));
                assert_eq!(meet(a, b), meet(b, a));
                // Consistency with the order.
                assert_eq!(leq(a, b), join(a, b) == b);
                assert_eq!(leq(a, b), meet(a, b) == a);
            }
        }
    }

    #[test]
    fn hasse_edges_cover_the_order() {
        // Each edge is a strict covering relation.
        for (lo, hi) in HASSE_EDGES {
            assert!(leq(lo, hi) && lo != hi);
            for mid in ALL_IDEALS {
                if mid != lo && mid != hi {
                    assert!(!(leq(lo, mid) && leq(mid, hi)), "{lo} < {mid} < {hi}");
                }
            }
        }
        // And the transitive closure of the edges is the full order.
        let reach = |from: IdealName, to: IdealName| -> bool {
            let mut seen = vec![from];
            let mut frontier = vec![from];
            while let Some(x) = frontier.pop() {
                for (lo, hi) in HASSE_EDGES {
                    if lo == x && !seen.contains(&hi) {
                        seen.push(hi);
                        frontier.push(hi);
                    }
                }
            }
            seen.contains(&to)
        };
        for a in ALL_IDEALS {
            for b in ALL_IDEALS {
                assert_eq!(leq(a, b), a == b || reach(a, b));
            }
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&MatExpr::basis(1, 2), Q).unwrap(), SlFr);
        let e = MatExpr::sum(vec![MatExpr::scalar(Q.from_i64(1)), MatExpr::basis(1, 1)]);
        assert_eq!(classify(&e, Q).unwrap(), DscGlFr);
        assert_eq!(classify(&MatExpr::superdiagonal(Q), Q).unwrap(), GlCf);
    }

    #[test]
    fn membership_examples() {
        assert!(in_ideal(&MatExpr::basis(1, 2), GlFr, Q).unwrap());
        assert!(!in_ideal(&MatExpr::scalar(Q.from_i64(3)), SlFr, Q).unwrap());
        assert!(in_ideal(&MatExpr::Zero, Zero, Q).unwrap());
    }

    #[test]
    fn rings_are_rejected() {
        assert!(matches!(
            classify(&MatExpr::Zero, FieldId::Integer),
            Err(crate::error::Error::RingNotSupported)
        ));
    }

    #[test]
    fn scaling_invariance_and_sum_monotonicity() {
        let mut gen = testkit::ExprGen::new(Q, 4242);
        for _ in 0..60 {
            let a = gen.fragment_expr(1);
            let b = gen.fragment_expr(1);
            let c = gen.nonzero_scalar();
            let ca = classify(&a, Q).unwrap();
            let cb = classify(&b, Q).unwrap();
            assert_eq!(classify(&MatExpr::scale(c, a.clone()), Q).unwrap(), ca);
            let sum = classify(&MatExpr::sum(vec![a, b]), Q).unwrap();
            assert!(leq(sum, join(ca, cb)));
        }
    }

    #[test]
    fn ideal_closure_under_brackets() {
        let mut gen = testkit::ExprGen::new(Q, 71);
        for _ in 0..60 {
            let a = gen.fragment_expr(1);
            let b = gen.fragment_expr(1);
            let ca = classify(&a, Q).unwrap();
            let cbr = classify(&MatExpr::bracket(a, b), Q).unwrap();
            assert!(leq(cbr, ca), "bracket left ideal {ca}");
        }
    }

    #[test]
    fn finite_truncation_demo() {
        // Restricted to finite blocks, only the zero, traceless, and traced
        // finite classes appear: a finite block is never scalar or a tail in
        // the infinite algebra, so the classifier image shrinks compared to
        // the four-ideal picture of a finite matrix algebra.
        let mut gen = testkit::ExprGen::new(Q, 9);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let e = gen.finite_expr(4);
            seen.insert(classify(&e, Q).unwrap().as_str());
        }
        for c in &seen {
            assert!(["0", "sl_fr", "gl_fr"].contains(c));
        }
        assert!(seen.contains("sl_fr") && seen.contains("gl_fr"));
    }
}
