//! Closed intervals with plain (correlation-free) interval arithmetic.

use std::fmt;

use num_traits::Num;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntervalError {
    #[error("divisor interval contains zero")]
    DivisorContainsZero,
    #[error("empty interval: lower bound above upper bound")]
    Empty,
}

/// `[lo, hi]` with `lo ≤ hi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Clone + PartialOrd + Num> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self, IntervalError> {
        if lo > hi {
            return Err(IntervalError::Empty);
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: T) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn lo(&self) -> &T {
        &self.lo
    }

    pub fn hi(&self) -> &T {
        &self.hi
    }

    pub fn contains(&self, x: &T) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&T::zero())
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Self) -> Self {
        let lo = if other.lo < self.lo { other.lo.clone() } else { self.lo.clone() };
        let hi = if other.hi > self.hi { other.hi.clone() } else { self.hi.clone() };
        Self { lo, hi }
    }

    /// Grows both ends by `eps ≥ 0`.
    pub fn widen(&self, eps: &T) -> Self {
        Self { lo: self.lo.clone() - eps.clone(), hi: self.hi.clone() + eps.clone() }
    }

    /// Largest absolute value in the interval.
    pub fn magnitude(&self) -> T {
        let a = T::zero() - self.lo.clone();
        let b = self.hi.clone();
        let a = if a < T::zero() { T::zero() - a } else { a };
        let b = if b < T::zero() { T::zero() - b } else { b };
        if a > b {
            a
        } else {
            b
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { lo: self.lo.clone() + o.lo.clone(), hi: self.hi.clone() + o.hi.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { lo: self.lo.clone() - o.hi.clone(), hi: self.hi.clone() - o.lo.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = [
            self.lo.clone() * o.lo.clone(),
            self.lo.clone() * o.hi.clone(),
            self.hi.clone() * o.lo.clone(),
            self.hi.clone() * o.hi.clone(),
        ];
        Self::span(p)
    }

    /// Quotient; the divisor must not contain zero.
    pub fn div(&self, o: &Self) -> Result<Self, IntervalError> {
        if o.contains_zero() {
            return Err(IntervalError::DivisorContainsZero);
        }
        let p = [
            self.lo.clone() / o.lo.clone(),
            self.lo.clone() / o.hi.clone(),
            self.hi.clone() / o.lo.clone(),
            self.hi.clone() / o.hi.clone(),
        ];
        Ok(Self::span(p))
    }

    fn span(p: [T; 4]) -> Self {
        let mut lo = p[0].clone();
        let mut hi = p[0].clone();
        for v in &p[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        Self { lo, hi }
    }
}

impl<T: fmt::Display> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;
    use crate::Rational;

    fn iv(lo: &str, hi: &str) -> Interval<Rational> {
        Interval::new(parse_rational(lo).unwrap(), parse_rational(hi).unwrap()).unwrap()
    }

    #[test]
    fn spec_style_examples() {
        assert_eq!(iv("-1", "1").mul(&iv("-1", "1")), iv("-1", "1"));
        let x = iv("-1", "2");
        assert_eq!(x.sub(&x), iv("-3", "3"));
        assert_eq!(iv("1", "2").div(&iv("2", "4")).unwrap(), iv("0.25", "1"));
        assert_eq!(iv("1", "2").div(&iv("-1", "4")), Err(IntervalError::DivisorContainsZero));
    }

    #[test]
    fn float_intervals() {
        let a = Interval::new(-2.0f64, 3.0).unwrap();
        let b = Interval::new(0.5f64, 1.0).unwrap();
        assert_eq!(a.mul(&b), Interval::new(-2.0, 3.0).unwrap());
        assert_eq!(a.div(&b).unwrap(), Interval::new(-4.0, 6.0).unwrap());
        assert_eq!(a.magnitude(), 3.0);
        assert!(Interval::new(1.0f64, 0.0).is_err());
    }
}
