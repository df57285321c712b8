//! Exact arithmetic in `Q(√D)` for a squarefree `D ≥ 2`.
//!
//! Every scalar in the crate is a [`FieldElement`] `a + b√D` with rational
//! `a`, `b`. When `b = 0` the element carries no `D` tag, so pure rationals
//! mix freely with elements of any quadratic field. Two irrational elements
//! with different tags cannot be combined.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("mismatched quadratic fields: sqrt({0}) and sqrt({1})")]
    MismatchedRadicand(u64, u64),
    #[error("radicand {0} is not a squarefree integer >= 2")]
    BadRadicand(u64),
    #[error("irrational part given without a radicand")]
    MissingRadicand,
    #[error("malformed rational {0:?}")]
    MalformedRational(String),
}

/// Returns true iff `d ≥ 2` has no square factor.
pub fn is_squarefree(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut p = 2u64;
    let mut rest = d;
    while p.saturating_mul(p) <= rest {
        if rest % p == 0 {
            rest /= p;
            if rest % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Parses `"p/q"` or `"p"` into a rational.
pub fn parse_rational(text: &str) -> Result<Rational, FieldError> {
    let bad = || FieldError::MalformedRational(text.to_string());
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Formats a rational as `"p/q"` (the denominator is always written).
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn rational_floor(q: &Rational) -> BigInt {
    q.numer().div_floor(q.denom())
}

/// The field `Q(√D)`, or `Q` itself when `radicand` is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadField {
    radicand: Option<u64>,
}

impl QuadField {
    pub fn rational() -> Self {
        QuadField { radicand: None }
    }

    pub fn new(d: u64) -> Result<Self, FieldError> {
        if !is_squarefree(d) {
            return Err(FieldError::BadRadicand(d));
        }
        Ok(QuadField { radicand: Some(d) })
    }

    pub fn radicand(&self) -> Option<u64> {
        self.radicand
    }

    pub fn element(&self, r: Rational, s: Rational) -> Result<FieldElement, FieldError> {
        if s.is_zero() {
            return Ok(FieldElement::from_rational(r));
        }
        match self.radicand {
            Some(d) => Ok(FieldElement::raw(r, s, Some(d))),
            None => Err(FieldError::MissingRadicand),
        }
    }

    /// `√D` itself.
    pub fn sqrt_d(&self) -> Result<FieldElement, FieldError> {
        self.element(Rational::zero(), Rational::one())
    }

    /// The tag check used when an element from outside is brought into
    /// this field.
    pub fn admits(&self, x: &FieldElement) -> bool {
        x.d.is_none() || x.d == self.radicand
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// An exact element `r + s·√D` of `Q(√D)`.
///
/// The representation is canonical: `d` is `None` exactly when `s = 0`, so
/// derived equality and hashing are semantic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    r: Rational,
    s: Rational,
    d: Option<u64>,
}

impl FieldElement {
    fn raw(r: Rational, s: Rational, d: Option<u64>) -> Self {
        if s.is_zero() {
            FieldElement { r, s, d: None }
        } else {
            debug_assert!(d.is_some());
            FieldElement { r, s, d }
        }
    }

    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_rational(Rational::from_integer(n))
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        Self::from_rational(Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn from_rational(r: Rational) -> Self {
        FieldElement {
            r,
            s: Rational::zero(),
            d: None,
        }
    }

    /// Rational part `a`.
    pub fn rational_part(&self) -> &Rational {
        &self.r
    }

    /// Coefficient `b` of `√D`.
    pub fn irrational_part(&self) -> &Rational {
        &self.s
    }

    pub fn radicand(&self) -> Option<u64> {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.s.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.s.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.r)
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.r.is_integer()
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.r.to_integer())
    }

    fn merge_tag(&self, other: &FieldElement) -> Result<Option<u64>, FieldError> {
        match (self.d, other.d) {
            (Some(a), Some(b)) if a != b => Err(FieldError::MismatchedRadicand(a, b)),
            (Some(a), _) | (_, Some(a)) => Ok(Some(a)),
            (None, None) => Ok(None),
        }
    }

    fn radicand_rational(d: Option<u64>) -> Rational {
        Rational::from_integer(BigInt::from(d.unwrap_or(0)))
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let d = self.merge_tag(other)?;
        Ok(Self::raw(&self.r + &other.r, &self.s + &other.s, d))
    }

    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let d = self.merge_tag(other)?;
        Ok(Self::raw(&self.r - &other.r, &self.s - &other.s, d))
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let d = self.merge_tag(other)?;
        if self.s.is_zero() {
            return Ok(Self::raw(&self.r * &other.r, &self.r * &other.s, d));
        }
        if other.s.is_zero() {
            return Ok(Self::raw(&self.r * &other.r, &self.s * &other.r, d));
        }
        let dd = Self::radicand_rational(d);
        let r = &self.r * &other.r + &self.s * &other.s * dd;
        let s = &self.r * &other.s + &other.r * &self.s;
        Ok(Self::raw(r, s, d))
    }

    /// `a − b√D`.
    pub fn conjugate(&self) -> FieldElement {
        Self::raw(self.r.clone(), -self.s.clone(), self.d)
    }

    /// `a² − D b²`, the field norm.
    pub fn norm(&self) -> Rational {
        if self.s.is_zero() {
            return &self.r * &self.r;
        }
        &self.r * &self.r - &self.s * &self.s * Self::radicand_rational(self.d)
    }

    pub fn checked_inv(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if self.s.is_zero() {
            return Ok(Self::from_rational(self.r.recip()));
        }
        let n = self.norm();
        Ok(Self::raw(&self.r / &n, -(&self.s / &n), self.d))
    }

    pub fn checked_div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        if other.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        self.merge_tag(other)?;
        if other.s.is_zero() {
            return Ok(Self::raw(&self.r / &other.r, &self.s / &other.r, self.d));
        }
        self.checked_mul(&other.checked_inv()?)
    }

    /// Exact sign of the real number `a + b√D`.
    pub fn sign(&self) -> Ordering {
        let sa = sign_of(&self.r);
        let sb = sign_of(&self.s);
        match (sa, sb) {
            (a, Ordering::Equal) => a,
            (Ordering::Equal, b) => b,
            (a, b) if a == b => a,
            // opposite signs: compare a² with D b²
            (a, _) => match sign_of(&self.norm()) {
                Ordering::Greater => a,
                Ordering::Less => a.reverse(),
                Ordering::Equal => unreachable!("sqrt(D) is irrational"),
            },
        }
    }

    pub fn signum(&self) -> i32 {
        match self.sign() {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }

    pub fn abs(&self) -> FieldElement {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// The unique integer `z` with `z ≤ x < z + 1`.
    pub fn floor(&self) -> BigInt {
        if self.s.is_zero() {
            return rational_floor(&self.r);
        }
        // floor(a) + floor(b√D) is within one of the answer; fix it up with
        // exact sign tests.
        let d = BigInt::from(self.d.expect("irrational element has a radicand"));
        let (p, q) = (self.s.numer(), self.s.denom());
        let root = (p * p * &d).sqrt(); // floor(|p|√D)
        let s_floor = if p.is_positive() {
            root.div_floor(q)
        } else {
            // -|p|√D/q; |p|√D is never an integer
            (-(root + BigInt::one())).div_floor(q)
        };
        let mut z = rational_floor(&self.r) + s_floor;
        loop {
            let diff = self - &Self::from_bigint(z.clone());
            if diff.is_negative() {
                z -= 1;
            } else if (&diff - &Self::one()).sign() != Ordering::Less {
                z += 1;
            } else {
                return z;
            }
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// Nearest integer, ties rounded up.
    pub fn round(&self) -> BigInt {
        (self + &Self::from_ratio(1, 2)).floor()
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.r.to_f64().unwrap_or(f64::NAN);
        if self.s.is_zero() {
            return a;
        }
        let b = self.s.to_f64().unwrap_or(f64::NAN);
        a + b * (self.d.unwrap_or(0) as f64).sqrt()
    }

    /// Exact square root inside the same field, when it exists.
    pub fn sqrt_exact(&self) -> Option<FieldElement> {
        match self.sign() {
            Ordering::Less => return None,
            Ordering::Equal => return Some(Self::zero()),
            Ordering::Greater => {}
        }
        if self.s.is_zero() {
            if let Some(root) = rational_sqrt(&self.r) {
                return Some(Self::from_rational(root));
            }
            return None;
        }
        // (p + q√D)² = p² + Dq² + 2pq√D
        let d = self.d?;
        let dd = Self::radicand_rational(Some(d));
        let disc = rational_sqrt(&self.norm())?;
        let two = Rational::from_integer(BigInt::from(2));
        for p2 in [(&self.r + &disc) / &two, (&self.r - &disc) / &two] {
            if p2.is_zero() {
                continue;
            }
            if let Some(p) = rational_sqrt(&p2) {
                let q = &self.s / (&two * &p);
                let cand = Self::raw(p, q, Some(d));
                if &(&cand * &cand) == self {
                    return Some(cand.abs());
                }
            }
        }
        // (q√D)² = D q²
        if let Some(q) = rational_sqrt(&(&self.r / &dd)) {
            let cand = Self::raw(Rational::zero(), q, Some(d));
            if &(&cand * &cand) == self {
                return Some(cand);
            }
        }
        None
    }

    pub fn arith(x: &FieldElement, y: &FieldElement, op: ArithOp) -> Result<FieldElement, FieldError> {
        match op {
            ArithOp::Add => x.checked_add(y),
            ArithOp::Sub => x.checked_sub(y),
            ArithOp::Mul => x.checked_mul(y),
            ArithOp::Div => x.checked_div(y),
        }
    }
}

fn sign_of(q: &Rational) -> Ordering {
    q.numer().sign().cmp(&Sign::NoSign)
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Rational::new(n, d))
}

impl Default for FieldElement {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for FieldElement {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigInt> for FieldElement {
    fn from(n: BigInt) -> Self {
        Self::from_bigint(n)
    }
}

impl From<Rational> for FieldElement {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.s.is_zero() {
            return write!(f, "{}", self.r);
        }
        let d = self.d.unwrap_or(0);
        if self.r.is_zero() {
            write!(f, "{}·√{}", self.s, d)
        } else if self.s.is_negative() {
            write!(f, "{} − {}·√{}", self.r, -self.s.clone(), d)
        } else {
            write!(f, "{} + {}·√{}", self.r, self.s, d)
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Panics when the two elements live in different quadratic fields.
impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).sign()
    }
}

// Operator impls panic on mismatched radicands; use the `checked_*`
// methods at trust boundaries.
macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{}", e))
            }
        }
        impl $trait<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
        impl $trait<FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::raw(-self.r.clone(), -self.s.clone(), self.d)
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q2() -> QuadField {
        QuadField::new(2).unwrap()
    }

    fn el(a: (i64, i64), b: (i64, i64)) -> FieldElement {
        q2().element(
            Rational::new(a.0.into(), a.1.into()),
            Rational::new(b.0.into(), b.1.into()),
        )
        .unwrap()
    }

    #[test]
    fn conjugate_product() {
        let x = el((1, 1), (1, 1));
        let y = el((1, 1), (-1, 1));
        assert_eq!(&x * &y, FieldElement::from_int(-1));
    }

    #[test]
    fn sqrt_d_squared() {
        let r = q2().sqrt_d().unwrap();
        assert_eq!(&r * &r, FieldElement::from_int(2));
        assert!((&r * &r).radicand().is_none());
    }

    #[test]
    fn componentwise_addition() {
        let x = el((3, 2), (0, 1));
        let y = el((1, 2), (2, 1));
        assert_eq!(&x + &y, el((2, 1), (2, 1)));
    }

    #[test]
    fn signs() {
        assert_eq!(el((1, 1), (-1, 1)).signum(), -1);
        assert_eq!(el((3, 2), (-1, 1)).signum(), 1);
        assert_eq!(FieldElement::zero().signum(), 0);
        assert_eq!(el((-3, 2), (1, 1)).signum(), -1);
        assert_eq!(el((-1, 1), (1, 1)).signum(), 1);
    }

    #[test]
    fn floors() {
        assert_eq!(q2().sqrt_d().unwrap().floor(), BigInt::from(1));
        assert_eq!(FieldElement::from_ratio(-1, 2).floor(), BigInt::from(-1));
        // 9/4 + √2 ≈ 3.664
        let x = el((9, 4), (1, 1));
        assert_eq!(x.floor(), BigInt::from(3));
        assert!((&x - &FieldElement::from_int(3)).is_positive());
        assert!((&FieldElement::from_int(4) - &x).is_positive());
        assert_eq!(el((0, 1), (-1, 1)).floor(), BigInt::from(-2));
        assert_eq!(el((0, 1), (-1, 1)).ceil(), BigInt::from(-1));
    }

    #[test]
    fn division_errors() {
        let x = el((1, 1), (1, 1));
        assert_eq!(
            x.checked_div(&FieldElement::zero()),
            Err(FieldError::DivisionByZero)
        );
        let y = QuadField::new(3).unwrap().sqrt_d().unwrap();
        assert_eq!(
            FieldElement::arith(&x, &y, ArithOp::Add),
            Err(FieldError::MismatchedRadicand(2, 3))
        );
        // a pure rational combines with either field
        let z = FieldElement::from_int(5);
        assert!(FieldElement::arith(&z, &y, ArithOp::Mul).is_ok());
    }

    #[test]
    fn radicand_validation() {
        assert!(QuadField::new(2).is_ok());
        assert!(QuadField::new(6).is_ok());
        assert_eq!(QuadField::new(8), Err(FieldError::BadRadicand(8)));
        assert_eq!(QuadField::new(1), Err(FieldError::BadRadicand(1)));
        assert_eq!(
            QuadField::rational().element(Rational::zero(), Rational::one()),
            Err(FieldError::MissingRadicand)
        );
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("6/4").unwrap(), Rational::new(3.into(), 2.into()));
        assert_eq!(parse_rational(" -7 ").unwrap(), Rational::from_integer((-7).into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/2").is_err());
        assert_eq!(format_rational(&Rational::from_integer(1.into())), "1/1");
    }

    #[test]
    fn exact_square_roots() {
        // (1 + √2)² = 3 + 2√2
        let x = el((3, 1), (2, 1));
        assert_eq!(x.sqrt_exact(), Some(el((1, 1), (1, 1))));
        assert_eq!(FieldElement::from_ratio(9, 4).sqrt_exact(), Some(FieldElement::from_ratio(3, 2)));
        assert_eq!(FieldElement::from_int(2).sqrt_exact(), None);
        assert_eq!(el((8, 1), (0, 1)).sqrt_exact(), None);
    }

    fn arb_el() -> impl Strategy<Value = FieldElement> {
        (-50i64..50, 1i64..12, -50i64..50, 1i64..12).prop_map(|(a, b, c, d)| el((a, b), (c, d)))
    }

    proptest! {
        #[test]
        fn field_axioms(x in arb_el(), y in arb_el(), z in arb_el()) {
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            if !x.is_zero() {
                prop_assert_eq!(&x * &x.checked_inv().unwrap(), FieldElement::one());
            }
        }

        #[test]
        fn sign_matches_interval(x in arb_el()) {
            let a = x.rational_part().to_f64().unwrap();
            let b = x.irrational_part().to_f64().unwrap();
            let v = a + b * 2f64.sqrt();
            let err = 1e-12 * (1.0 + a.abs() + b.abs());
            if v.abs() > err {
                prop_assert_eq!(x.signum(), if v > 0.0 { 1 } else { -1 });
            }
        }

        #[test]
        fn floor_brackets(x in arb_el()) {
            let z = FieldElement::from_bigint(x.floor());
            prop_assert!((&x - &z).signum() >= 0);
            prop_assert_eq!((&(&x - &z) - &FieldElement::one()).signum(), -1);
        }
    }
}
