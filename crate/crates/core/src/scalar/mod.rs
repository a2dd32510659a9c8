//! Euclidean numbers as truncated generalized power series in one infinite
//! unit `α`.
//!
//! A value is a finite sum `Σ cₖ·α^qₖ` with exact rational exponents and
//! floating-point coefficients, kept sorted by strictly decreasing exponent.
//! Negative exponents are infinitesimals, positive ones infinite numbers.
//! Only the `order` dominant terms are retained after every operation, so two
//! numbers that agree on their leading `order` terms are indistinguishable.

mod complex;
mod expr;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use complex::ComplexEuclidean;
pub use expr::{evaluate, Value};

/// Rational exponent of the infinite unit.
pub type Exponent = Ratio<i64>;

/// Default number of retained terms.
pub const DEFAULT_ORDER: usize = 16;

/// One `coefficient·α^exponent` monomial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub exponent: Exponent,
    pub coefficient: f64,
}

impl Term {
    pub fn new(coefficient: f64, exponent: Exponent) -> Self {
        Term {
            exponent,
            coefficient,
        }
    }
}

/// A Euclidean number in truncated series form.
#[derive(Clone, Debug)]
pub struct EuclideanScalar {
    terms: Vec<Term>,
    order: usize,
}

/// Magnitude class of a Euclidean number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderTag {
    Infinitesimal,
    FiniteNonzeroSt,
    Infinite,
}

/// Result of [`EuclideanScalar::classify`]. A `leading_exponent` of `None`
/// stands for `−∞` and only occurs for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderClass {
    pub tag: OrderTag,
    pub leading_exponent: Option<Exponent>,
}

/// How far apart two Euclidean numbers are.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Same monad: the difference is infinitesimal.
    InfinitelyClose,
    /// Same galaxy but different monads.
    FinitelySeparated,
    /// Different galaxies.
    InfinitelySeparated,
}

impl EuclideanScalar {
    pub fn zero() -> Self {
        Self::with_order(Vec::new(), DEFAULT_ORDER)
    }

    pub fn one() -> Self {
        Self::from_real(1.0)
    }

    pub fn from_real(value: f64) -> Self {
        Self::monomial(value, Exponent::zero())
    }

    /// The infinite unit `α`.
    pub fn alpha() -> Self {
        Self::monomial(1.0, Exponent::from_integer(1))
    }

    pub fn monomial(coefficient: f64, exponent: Exponent) -> Self {
        Self::from_terms(std::iter::once(Term::new(coefficient, exponent)))
    }

    /// Builds a number from arbitrary terms: equal exponents are merged,
    /// zero coefficients dropped and the result truncated to
    /// [`DEFAULT_ORDER`] terms.
    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Self {
        Self::with_order(terms.into_iter().collect(), DEFAULT_ORDER)
    }

    /// Like [`from_terms`](Self::from_terms) with an explicit truncation order.
    pub fn with_order(terms: Vec<Term>, order: usize) -> Self {
        let order = order.max(1);
        let mut out = EuclideanScalar {
            terms: normalize(terms),
            order,
        };
        out.terms.truncate(order);
        out
    }

    /// Same value, new truncation order (truncating if needed).
    pub fn truncated(&self, order: usize) -> Self {
        Self::with_order(self.terms.clone(), order)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<Term> {
        self.terms.first().copied()
    }

    /// Coefficient of `α^exponent` (zero when absent).
    pub fn coefficient(&self, exponent: Exponent) -> f64 {
        self.terms
            .iter()
            .find(|t| t.exponent == exponent)
            .map_or(0.0, |t| t.coefficient)
    }

    pub fn signum(&self) -> Ordering {
        match self.leading() {
            None => Ordering::Equal,
            Some(t) if t.coefficient > 0.0 => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse by geometric-series expansion around the
    /// leading term.
    ///
    /// Writing `x = c·α^e·(1 + y)`, the result is `c⁻¹·α^(−e)·Σ (−y)ᵏ`
    /// truncated to `order` terms. The residual `x·x⁻¹ − 1` only contains
    /// exponents below `−(order − 1)·g`, `g` being the exponent lattice gap
    /// returned by [`exponent_lattice_gap`](Self::exponent_lattice_gap).
    pub fn invert(&self) -> Result<Self> {
        let lead = self
            .leading()
            .ok_or_else(|| Error::domain("cannot invert zero"))?;
        let order = self.order;
        let Some(gap) = self.exponent_lattice_gap() else {
            return Ok(Self::with_order(
                vec![Term::new(1.0 / lead.coefficient, -lead.exponent)],
                order,
            ));
        };
        // y = x/(c α^e) − 1, every exponent of y is ≤ −min_gap.
        let y: Vec<Term> = self.terms[1..]
            .iter()
            .map(|t| Term::new(t.coefficient / lead.coefficient, t.exponent - lead.exponent))
            .collect();
        let min_gap = -y[0].exponent;
        let floor = -(gap * Exponent::from_integer(order as i64 - 1));
        let neg_y: Vec<Term> = y.iter().map(|t| Term::new(-t.coefficient, t.exponent)).collect();
        // Only powers that can reach exponents ≥ floor contribute to the
        // retained terms.
        let max_power = (-floor / min_gap).floor().to_integer().max(0) as usize;

        let mut sum = vec![Term::new(1.0, Exponent::zero())];
        let mut power = sum.clone();
        for _ in 0..max_power {
            power = convolve(&power, &neg_y);
            power.retain(|t| t.exponent >= floor);
            if power.is_empty() {
                break;
            }
            sum.extend(power.iter().copied());
            sum = normalize(sum);
        }
        let scale = 1.0 / lead.coefficient;
        let shifted = sum
            .into_iter()
            .map(|t| Term::new(t.coefficient * scale, t.exponent - lead.exponent))
            .collect();
        Ok(Self::with_order(shifted, order))
    }

    /// Greatest common divisor of the gaps between the leading exponent and
    /// every other exponent; `None` for monomials and zero.
    pub fn exponent_lattice_gap(&self) -> Option<Exponent> {
        let lead = self.leading()?.exponent;
        self.terms[1..]
            .iter()
            .map(|t| lead - t.exponent)
            .reduce(rational_gcd)
    }

    /// Exact total order: the sign of the leading coefficient of `self − other`.
    pub fn compare(&self, other: &Self) -> Ordering {
        // Subtraction without truncation so that the first differing term
        // decides even beyond `order` terms.
        let diff = normalize(
            self.terms
                .iter()
                .copied()
                .chain(other.terms.iter().map(|t| Term::new(-t.coefficient, t.exponent)))
                .collect(),
        );
        match diff.first() {
            None => Ordering::Equal,
            Some(t) if t.coefficient > 0.0 => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    /// Standard part: the real coefficient of `α⁰` for finite numbers and
    /// `±∞` (signed by the leading coefficient) for infinite ones.
    pub fn standard_part(&self) -> f64 {
        match self.leading() {
            None => 0.0,
            Some(t) if t.exponent > Exponent::zero() => {
                if t.coefficient > 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            Some(_) => self.coefficient(Exponent::zero()),
        }
    }

    pub fn classify(&self) -> OrderClass {
        match self.leading() {
            None => OrderClass {
                tag: OrderTag::Infinitesimal,
                leading_exponent: None,
            },
            Some(t) => OrderClass {
                tag: match t.exponent.cmp(&Exponent::zero()) {
                    Ordering::Less => OrderTag::Infinitesimal,
                    Ordering::Equal => OrderTag::FiniteNonzeroSt,
                    Ordering::Greater => OrderTag::Infinite,
                },
                leading_exponent: Some(t.exponent),
            },
        }
    }

    pub fn is_infinitesimal(&self) -> bool {
        self.classify().tag == OrderTag::Infinitesimal
    }

    pub fn is_finite(&self) -> bool {
        self.classify().tag != OrderTag::Infinite
    }

    /// Monad/galaxy relation between two numbers.
    pub fn relate(&self, other: &Self) -> Relation {
        let diff = self.clone() - other.clone();
        match diff.classify().tag {
            OrderTag::Infinitesimal => Relation::InfinitelyClose,
            OrderTag::FiniteNonzeroSt => Relation::FinitelySeparated,
            OrderTag::Infinite => Relation::InfinitelySeparated,
        }
    }

    fn combine_order(&self, other: &Self) -> usize {
        self.order.max(other.order)
    }
}

fn rational_gcd(a: Exponent, b: Exponent) -> Exponent {
    let num = a.numer().abs().gcd(&b.numer().abs());
    let den = a.denom().lcm(b.denom());
    Exponent::new(num, den)
}

/// Sort by decreasing exponent, merge duplicates, drop exact zeros.
fn normalize(mut terms: Vec<Term>) -> Vec<Term> {
    terms.sort_by_key(|t| std::cmp::Reverse(t.exponent));
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if last.exponent == t.exponent => last.coefficient += t.coefficient,
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coefficient != 0.0);
    out
}

fn convolve(a: &[Term], b: &[Term]) -> Vec<Term> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(Term::new(x.coefficient * y.coefficient, x.exponent + y.exponent));
        }
    }
    normalize(out)
}

impl PartialEq for EuclideanScalar {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for EuclideanScalar {}

impl PartialOrd for EuclideanScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EuclideanScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl Default for EuclideanScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<f64> for EuclideanScalar {
    fn from(value: f64) -> Self {
        Self::from_real(value)
    }
}

impl Add for EuclideanScalar {
    type Output = EuclideanScalar;

    fn add(self, rhs: Self) -> Self {
        let order = self.combine_order(&rhs);
        let mut terms = self.terms;
        terms.extend(rhs.terms);
        Self::with_order(terms, order)
    }
}

impl Sub for EuclideanScalar {
    type Output = EuclideanScalar;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for EuclideanScalar {
    type Output = EuclideanScalar;

    fn neg(mut self) -> Self {
        for t in &mut self.terms {
            t.coefficient = -t.coefficient;
        }
        self
    }
}

impl Mul for EuclideanScalar {
    type Output = EuclideanScalar;

    fn mul(self, rhs: Self) -> Self {
        let order = self.combine_order(&rhs);
        Self::with_order(convolve(&self.terms, &rhs.terms), order)
    }
}

impl<'a> Add<&'a EuclideanScalar> for &'a EuclideanScalar {
    type Output = EuclideanScalar;

    fn add(self, rhs: &EuclideanScalar) -> EuclideanScalar {
        self.clone() + rhs.clone()
    }
}

impl<'a> Mul<&'a EuclideanScalar> for &'a EuclideanScalar {
    type Output = EuclideanScalar;

    fn mul(self, rhs: &EuclideanScalar) -> EuclideanScalar {
        self.clone() * rhs.clone()
    }
}

fn fmt_exponent(e: &Exponent) -> String {
    if e.is_integer() {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

/// Canonical rendering `c0 + c1*a^q1 - c2*a^q2 …`; parses back exactly.
impl fmt::Display for EuclideanScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let c = t.coefficient;
            if i == 0 {
                write!(f, "{c}")?;
            } else if c < 0.0 {
                write!(f, " - {}", -c)?;
            } else {
                write!(f, " + {c}")?;
            }
            if !t.exponent.is_zero() {
                write!(f, "*a^{}", fmt_exponent(&t.exponent))?;
            }
        }
        Ok(())
    }
}

impl FromStr for EuclideanScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match evaluate(s)? {
            Value::Scalar(x) => Ok(x),
            other => Err(Error::parse(format!("expected a Euclidean number, got {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Exponent {
        Exponent::new(n, d)
    }

    fn s(text: &str) -> EuclideanScalar {
        text.parse().unwrap()
    }

    #[test]
    fn addition_examples() {
        assert_eq!(s("2 + 3*a^-1") + s("1 - a^-1"), s("3 + 2*a^-1"));
        assert!((EuclideanScalar::alpha() + -EuclideanScalar::alpha()).is_zero());
        let x = s("4*a^2 - 0.5 + 7*a^-3/2");
        assert_eq!(EuclideanScalar::zero() + x.clone(), x);
    }

    #[test]
    fn multiplication_examples() {
        let a = EuclideanScalar::alpha();
        assert_eq!(a.clone() * a.invert().unwrap(), EuclideanScalar::one());
        assert_eq!(s("1 + a^-1") * s("1 - a^-1"), s("1 - a^-2"));
        assert_eq!(s("2*a + 1") * s("3*a"), s("6*a^2 + 3*a"));
    }

    #[test]
    fn invert_geometric_series() {
        let x = s("1 + a^-1");
        let inv = x.invert().unwrap();
        assert_eq!(inv.terms().len(), DEFAULT_ORDER);
        for (k, t) in inv.terms().iter().enumerate() {
            assert_eq!(t.exponent, q(-(k as i64), 1));
            assert_eq!(t.coefficient, if k % 2 == 0 { 1.0 } else { -1.0 });
        }
        let residual = x * inv - EuclideanScalar::one();
        assert!(residual
            .terms()
            .iter()
            .all(|t| t.exponent <= q(-(DEFAULT_ORDER as i64), 1)));
        assert!(matches!(EuclideanScalar::zero().invert(), Err(Error::Domain(_))));
        assert_eq!(EuclideanScalar::alpha().invert().unwrap(), s("a^-1"));
    }

    #[test]
    fn invert_mixed_lattice() {
        let x = s("2*a^1/2 + a^1/6 - 3*a^-1/3");
        assert_eq!(x.exponent_lattice_gap(), Some(q(1, 6)));
        let r = x.clone() * x.invert().unwrap() - EuclideanScalar::one();
        let bound = -(q(1, 6) * Exponent::from_integer(DEFAULT_ORDER as i64 - 1));
        for t in r.terms() {
            assert!(t.exponent < bound || t.coefficient.abs() < 1e-9, "{t:?}");
        }
    }

    #[test]
    fn comparisons() {
        let zero = EuclideanScalar::zero();
        assert_eq!(s("a^-1").compare(&zero), Ordering::Greater);
        assert_eq!(EuclideanScalar::alpha().compare(&1e6.into()), Ordering::Greater);
        assert_eq!(s("3 + a^-1").compare(&3.0.into()), Ordering::Greater);
        assert_eq!(s("-a^-5").compare(&zero), Ordering::Less);
    }

    #[test]
    fn standard_parts() {
        assert_eq!(s("3 + 5*a^-1 - 2*a^-2").standard_part(), 3.0);
        assert_eq!(EuclideanScalar::alpha().standard_part(), f64::INFINITY);
        assert_eq!(s("-2*a^1/3 + 4").standard_part(), f64::NEG_INFINITY);
        assert_eq!(EuclideanScalar::from_real(7.0).standard_part(), 7.0);
        assert_eq!(s("a^-3").standard_part(), 0.0);
    }

    #[test]
    fn relations() {
        let three = EuclideanScalar::from_real(3.0);
        assert_eq!(three.relate(&s("3 + a^-1")), Relation::InfinitelyClose);
        let a = EuclideanScalar::alpha();
        assert_eq!(a.relate(&s("a + 5")), Relation::FinitelySeparated);
        assert_eq!(EuclideanScalar::zero().relate(&a), Relation::InfinitelySeparated);
    }

    #[test]
    fn classification() {
        assert_eq!(s("a^-2").classify().tag, OrderTag::Infinitesimal);
        assert_eq!(s("3 + a^-1").classify().tag, OrderTag::FiniteNonzeroSt);
        let c = s("a^1/2").classify();
        assert_eq!(c.tag, OrderTag::Infinite);
        assert_eq!(c.leading_exponent, Some(q(1, 2)));
        assert_eq!(EuclideanScalar::zero().classify().leading_exponent, None);
    }

    #[test]
    fn truncation_keeps_dominant_terms() {
        let terms = (0..20).map(|k| Term::new(1.0, q(-k, 1))).collect();
        let x = EuclideanScalar::with_order(terms, 4);
        assert_eq!(x.terms().len(), 4);
        assert_eq!(x.terms()[3].exponent, q(-3, 1));
    }

    #[test]
    fn rendering_round_trips() {
        for text in ["0", "3 + 5*a^-1", "-2*a^3/4 + 0.1 - 1e-300*a^-7", "0.30000000000000004*a^-1/2"] {
            let x = s(text);
            assert_eq!(s(&x.to_string()), x, "{text}");
        }
        assert_eq!(s("3 + 5*a^-1").to_string(), "3 + 5*a^-1");
        assert_eq!(s("1 - a^-1/2").to_string(), "1 - 1*a^-1/2");
    }
}
