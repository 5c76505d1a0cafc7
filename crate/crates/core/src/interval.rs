//! Closed intervals with exact rational endpoints.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{rat_to_string, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "empty interval");
        Interval { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn zero() -> Self {
        Interval::point(Rational::zero())
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn excludes_zero(&self) -> bool {
        self.lo.is_positive() || self.hi.is_negative()
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Interval {
        let (a, b) = (&self.lo * c, &self.hi * c);
        if c.is_negative() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: a, hi: b }
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().expect("four products").clone();
        let hi = products.iter().max().expect("four products").clone();
        Interval { lo, hi }
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", rat_to_string(&self.lo))
        } else {
            write!(f, "[{}, {}]", rat_to_string(&self.lo), rat_to_string(&self.hi))
        }
    }
}

/// `sum_i c_i * x_i` for exact coefficients and interval values.
pub fn dot(coeffs: &[Rational], values: &[Interval]) -> Interval {
    coeffs.iter().zip(values).fold(Interval::zero(), |acc, (c, x)| acc.add(&x.scale(c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    #[test]
    fn arithmetic_encloses() {
        let a = Interval::new(rat(-1, 2), rat(1, 3));
        let b = Interval::new(rat(2, 1), rat(3, 1));
        let p = a.mul(&b);
        assert_eq!(p, Interval::new(rat(-3, 2), rat(1, 1)));
        assert_eq!(a.scale(&rat(-2, 1)), Interval::new(rat(-2, 3), rat(1, 1)));
        assert!(a.overlaps(&Interval::point(rat(0, 1))));
        assert!(!a.excludes_zero());
        assert!(b.excludes_zero());
        assert_eq!(a.add(&b).width(), rat(11, 6));
    }
}
