//! Dense polynomials over a residue field, coefficients in ascending degree.

use super::gf::GaloisField;

/// Trailing zero coefficients are always stripped; the zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly(pub Vec<u32>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: u32) -> Self {
        Poly(vec![c]).trimmed()
    }

    pub fn monomial(c: u32, deg: usize) -> Self {
        let mut v = vec![0; deg + 1];
        v[deg] = c;
        Poly(v).trimmed()
    }

    pub fn trimmed(mut self) -> Self {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> u32 {
        self.0.last().copied().unwrap_or(0)
    }

    pub fn coeff(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// Order of vanishing at `t = 0`; `None` for the zero polynomial.
    pub fn order(&self) -> Option<usize> {
        self.0.iter().position(|&c| c != 0)
    }

    pub fn add(&self, other: &Poly, f: &GaloisField) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly((0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect()).trimmed()
    }

    pub fn sub(&self, other: &Poly, f: &GaloisField) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly((0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect()).trimmed()
    }

    pub fn neg(&self, f: &GaloisField) -> Poly {
        Poly(self.0.iter().map(|&c| f.neg(c)).collect())
    }

    pub fn mul(&self, other: &Poly, f: &GaloisField) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0u32; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly(out).trimmed()
    }

    pub fn scale(&self, c: u32, f: &GaloisField) -> Poly {
        Poly(self.0.iter().map(|&a| f.mul(a, c)).collect()).trimmed()
    }

    /// Multiplication by `t^k`.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![0; k];
        v.extend_from_slice(&self.0);
        Poly(v)
    }

    /// Exact division by `t^k`; low coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Poly {
        debug_assert!(self.0.iter().take(k).all(|&c| c == 0));
        Poly(self.0.iter().skip(k).copied().collect())
    }

    /// Euclidean division; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Poly, f: &GaloisField) -> (Poly, Poly) {
        let db = divisor.degree().expect("division by zero polynomial");
        let lead_inv = f.inv(divisor.lead()).expect("nonzero lead");
        let mut rem = self.0.clone();
        if rem.len() <= db {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![0u32; rem.len() - db];
        while rem.len() > db {
            let top = rem.len() - 1;
            let c = f.mul(rem[top], lead_inv);
            let shift = top - db;
            quot[shift] = c;
            if c != 0 {
                for (k, &b) in divisor.0.iter().enumerate() {
                    rem[shift + k] = f.sub(rem[shift + k], f.mul(c, b));
                }
            }
            rem.pop();
        }
        (Poly(quot).trimmed(), Poly(rem).trimmed())
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly, f: &GaloisField) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b, f);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    pub fn monic(&self, f: &GaloisField) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(f.inv(self.lead()).expect("nonzero lead"), f)
    }

    pub fn eval_zero(&self) -> u32 {
        self.coeff(0)
    }
}
