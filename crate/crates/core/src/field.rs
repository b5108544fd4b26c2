//! Exact scalar arithmetic: arbitrary-precision rationals, prime fields F_p,
//! and the integers as a ring (no inverses).
//!
//! Every value carries the id of its ambient field; arithmetic across
//! different fields is an error, never a silent coercion. Rationals are kept
//! in lowest terms with positive denominator, residues in `[0, p-1]`.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

use crate::error::Error;

/// Identifies the field (or ring) a scalar lives in.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum FieldId {
    /// Arbitrary-precision rationals.
    Rational,
    /// Prime field F_p, p < 2^31.
    Prime(u32),
    /// The ring of integers. No inverses; only the derivation module accepts it.
    Integer,
}

impl FieldId {
    /// Whether every nonzero element has a multiplicative inverse.
    pub fn has_inverses(self) -> bool {
        !matches!(self, FieldId::Integer)
    }

    pub fn characteristic(self) -> u64 {
        match self {
            FieldId::Prime(p) => u64::from(p),
            _ => 0,
        }
    }

    pub fn zero(self) -> FieldElem {
        self.from_i64(0)
    }

    pub fn one(self) -> FieldElem {
        self.from_i64(1)
    }

    pub fn from_i64(self, v: i64) -> FieldElem {
        match self {
            FieldId::Rational => FieldElem::Rational(BigRational::from_integer(BigInt::from(v))),
            FieldId::Prime(p) => {
                let m = i64::from(p);
                FieldElem::Prime {
                    value: v.rem_euclid(m) as u64,
                    modulus: p,
                }
            }
            FieldId::Integer => FieldElem::Integer(BigInt::from(v)),
        }
    }

    /// Builds a/b in this field. Fails on b = 0, and on non-exact division
    /// over the integers.
    pub fn from_ratio(self, a: i64, b: i64) -> Result<FieldElem, Error> {
        if b == 0 {
            return Err(Error::DivisionByZero);
        }
        self.from_i64(a).div(&self.from_i64(b))
    }

    /// Parses the textual form produced by `Display`: `n`, `n/d`, or `k mod p`.
    pub fn parse(self, text: &str) -> Result<FieldElem, Error> {
        let text = text.trim();
        let bad = || Error::InvalidScalar {
            text: text.to_string(),
        };
        if let Some((k, p)) = text.split_once(" mod ") {
            let p: u32 = p.trim().parse().map_err(|_| bad())?;
            if self != FieldId::Prime(p) {
                return Err(Error::FieldMismatch);
            }
            let k: i64 = k.trim().parse().map_err(|_| bad())?;
            return Ok(self.from_i64(k));
        }
        if let Some((n, d)) = text.split_once('/') {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            return match self {
                FieldId::Rational => Ok(FieldElem::Rational(BigRational::new(n, d))),
                FieldId::Prime(_) => {
                    let num = self.from_bigint(&n);
                    let den = self.from_bigint(&d);
                    num.div(&den)
                }
                FieldId::Integer => {
                    let q = BigRational::new(n, d);
                    if q.is_integer() {
                        Ok(FieldElem::Integer(q.to_integer()))
                    } else {
                        Err(Error::NoInverse)
                    }
                }
            };
        }
        let n = BigInt::from_str(text).map_err(|_| bad())?;
        Ok(self.from_bigint(&n))
    }

    pub fn from_bigint(self, v: &BigInt) -> FieldElem {
        match self {
            FieldId::Rational => FieldElem::Rational(BigRational::from_integer(v.clone())),
            FieldId::Prime(p) => {
                let m = BigInt::from(p);
                let r = ((v % &m) + &m) % &m;
                let (_, digits) = r.to_u64_digits();
                FieldElem::Prime {
                    value: digits.first().copied().unwrap_or(0),
                    modulus: p,
                }
            }
            FieldId::Integer => FieldElem::Integer(v.clone()),
        }
    }
}

impl fmt::Display for FieldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldId::Rational => write!(f, "q"),
            FieldId::Prime(p) => write!(f, "fp:{p}"),
            FieldId::Integer => write!(f, "z"),
        }
    }
}

/// An exact scalar tagged with its ambient field.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum FieldElem {
    Rational(BigRational),
    Prime { value: u64, modulus: u32 },
    Integer(BigInt),
}

impl FieldElem {
    pub fn field(&self) -> FieldId {
        match self {
            FieldElem::Rational(_) => FieldId::Rational,
            FieldElem::Prime { modulus, .. } => FieldId::Prime(*modulus),
            FieldElem::Integer(_) => FieldId::Integer,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Rational(r) => r.is_zero(),
            FieldElem::Prime { value, .. } => *value == 0,
            FieldElem::Integer(n) => n.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElem::Rational(r) => r.is_one(),
            FieldElem::Prime { value, .. } => *value == 1,
            FieldElem::Integer(n) => n.is_one(),
        }
    }

    fn check_same(&self, other: &FieldElem) -> Result<(), Error> {
        if self.field() == other.field() {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn add(&self, other: &FieldElem) -> Result<FieldElem, Error> {
        self.check_same(other)?;
        Ok(match (self, other) {
            (FieldElem::Rational(a), FieldElem::Rational(b)) => FieldElem::Rational(a + b),
            (FieldElem::Prime { value: a, modulus }, FieldElem::Prime { value: b, .. }) => {
                FieldElem::Prime {
                    value: (a + b) % u64::from(*modulus),
                    modulus: *modulus,
                }
            }
            (FieldElem::Integer(a), FieldElem::Integer(b)) => FieldElem::Integer(a + b),
            _ => unreachable!(),
        })
    }

    pub fn sub(&self, other: &FieldElem) -> Result<FieldElem, Error> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FieldElem {
        match self {
            FieldElem::Rational(a) => FieldElem::Rational(-a),
            FieldElem::Prime { value, modulus } => FieldElem::Prime {
                value: if *value == 0 {
                    0
                } else {
                    u64::from(*modulus) - value
                },
                modulus: *modulus,
            },
            FieldElem::Integer(a) => FieldElem::Integer(-a),
        }
    }

    pub fn mul(&self, other: &FieldElem) -> Result<FieldElem, Error> {
        self.check_same(other)?;
        Ok(match (self, other) {
            (FieldElem::Rational(a), FieldElem::Rational(b)) => FieldElem::Rational(a * b),
            (FieldElem::Prime { value: a, modulus }, FieldElem::Prime { value: b, .. }) => {
                // p < 2^31, so the product fits in u64.
                FieldElem::Prime {
                    value: (a * b) % u64::from(*modulus),
                    modulus: *modulus,
                }
            }
            (FieldElem::Integer(a), FieldElem::Integer(b)) => FieldElem::Integer(a * b),
            _ => unreachable!(),
        })
    }

    /// Multiplicative inverse. Errors on zero and on non-unit integers.
    pub fn inv(&self) -> Result<FieldElem, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self {
            FieldElem::Rational(a) => Ok(FieldElem::Rational(a.recip())),
            FieldElem::Prime { value, modulus } => Ok(FieldElem::Prime {
                value: mod_inverse(*value, u64::from(*modulus)).ok_or(Error::NoInverse)?,
                modulus: *modulus,
            }),
            FieldElem::Integer(a) => {
                if a.is_one() || (-a).is_one() {
                    Ok(FieldElem::Integer(a.clone()))
                } else {
                    Err(Error::NoInverse)
                }
            }
        }
    }

    pub fn div(&self, other: &FieldElem) -> Result<FieldElem, Error> {
        self.check_same(other)?;
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match (self, other) {
            (FieldElem::Integer(a), FieldElem::Integer(b)) => {
                let (q, r) = (a / b, a % b);
                if r.is_zero() {
                    Ok(FieldElem::Integer(q))
                } else {
                    Err(Error::NoInverse)
                }
            }
            _ => self.mul(&other.inv()?),
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElem::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            FieldElem::Prime { value, modulus } => write!(f, "{value} mod {modulus}"),
            FieldElem::Integer(n) => write!(f, "{n}"),
        }
    }
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (i128::from(a), i128::from(m));
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(i128::from(m)) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> FieldElem {
        FieldId::Rational.from_ratio(a, b).unwrap()
    }

    fn fp(p: u32, v: i64) -> FieldElem {
        FieldId::Prime(p).from_i64(v)
    }

    // Independent oracle for modular inverse: Fermat's little theorem.
    fn pow_inverse(a: u64, p: u64) -> u64 {
        let mut base = a % p;
        let mut exp = p - 2;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        acc
    }

    #[test]
    fn rational_examples() {
        assert_eq!(q(1, 2).add(&q(1, 3)).unwrap(), q(5, 6));
        assert_eq!(q(2, 3).mul(&q(3, 4)).unwrap(), q(1, 2));
        assert_eq!(q(2, 3).inv().unwrap(), q(3, 2));
        let a = q(-7, 3);
        assert_eq!(a.add(&FieldId::Rational.zero()).unwrap(), a);
        assert_eq!(a.mul(&FieldId::Rational.one()).unwrap(), a);
    }

    #[test]
    fn prime_field_examples() {
        assert_eq!(fp(5, 3).add(&fp(5, 4)).unwrap(), fp(5, 2));
        assert_eq!(fp(5, 2).mul(&fp(5, 3)).unwrap(), fp(5, 1));
        // Value fixed by the Fermat oracle: 3^(7-2) mod 7 = 5, and 3*5 = 15 = 1 mod 7.
        assert_eq!(pow_inverse(3, 7), 5);
        assert_eq!(fp(7, 3).inv().unwrap(), fp(7, 5));
        assert_eq!(fp(7, 1).inv().unwrap(), fp(7, 1));
    }

    #[test]
    fn mixing_fields_is_an_error() {
        assert!(matches!(
            q(1, 2).add(&fp(5, 1)),
            Err(Error::FieldMismatch)
        ));
        assert!(matches!(
            fp(5, 1).mul(&fp(7, 1)),
            Err(Error::FieldMismatch)
        ));
    }

    #[test]
    fn zero_inverse_is_an_error() {
        assert!(matches!(
            FieldId::Rational.zero().inv(),
            Err(Error::DivisionByZero)
        ));
        assert!(matches!(fp(5, 0).inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn integer_ring_has_no_general_inverses() {
        let two = FieldId::Integer.from_i64(2);
        assert!(matches!(two.inv(), Err(Error::NoInverse)));
        assert_eq!(
            FieldId::Integer.from_i64(-1).inv().unwrap(),
            FieldId::Integer.from_i64(-1)
        );
        assert!(!FieldId::Integer.has_inverses());
        assert!(FieldId::Prime(2).has_inverses());
    }

    #[test]
    fn display_parse_round_trip() {
        for e in [q(5, 6), q(-3, 1), fp(7, 4), FieldId::Integer.from_i64(-12)] {
            let shown = e.to_string();
            assert_eq!(e.field().parse(&shown).unwrap(), e);
        }
    }

    fn arb_rational() -> impl Strategy<Value = FieldElem> {
        (any::<i32>(), 1..1000i64).prop_map(|(a, b)| q(i64::from(a), b))
    }

    fn arb_fp() -> impl Strategy<Value = FieldElem> {
        any::<i64>().prop_map(|v| fp(10007, v))
    }

    proptest! {
        #[test]
        fn add_associative(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            let lhs = a.add(&b).unwrap().add(&c).unwrap();
            let rhs = a.add(&b.add(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn mul_distributes(a in arb_fp(), b in arb_fp(), c in arb_fp()) {
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn inverse_cancels(a in arb_fp()) {
            if !a.is_zero() {
                prop_assert!(a.mul(&a.inv().unwrap()).unwrap().is_one());
            }
        }

        #[test]
        fn rational_inverse_cancels(a in arb_rational()) {
            if !a.is_zero() {
                prop_assert!(a.mul(&a.inv().unwrap()).unwrap().is_one());
            }
        }

        #[test]
        fn displayed_form_parses_back(a in arb_rational()) {
            prop_assert_eq!(FieldId::Rational.parse(&a.to_string()).unwrap(), a);
        }
    }
}
