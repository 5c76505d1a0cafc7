//! Exact scalars of a dense subfield of the local field.
//!
//! Equal characteristic: rational functions over GF(q) in the uniformizer `t`.
//! Mixed characteristic: rational numbers with the `p`-adic valuation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::gf::{prime_power, GaloisField, MAX_RESIDUE_SIZE};
use super::poly::Poly;
use crate::error::{Error, Result};

/// Discrete valuation with `Infinite` standing for the valuation of zero.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Valuation::Infinite
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldModel {
    /// `F_q((t))` with uniformizer `t`.
    EquiChar { q: u64 },
    /// `Q_p` with uniformizer `p`.
    MixedChar { p: u64 },
}

impl FieldModel {
    pub fn equi(q: u64) -> Result<Self> {
        if prime_power(q).is_none() || q > MAX_RESIDUE_SIZE {
            return Err(Error::BadResidueSize(q));
        }
        Ok(FieldModel::EquiChar { q })
    }

    pub fn mixed(p: u64) -> Result<Self> {
        match prime_power(p) {
            Some((_, 1)) if p <= MAX_RESIDUE_SIZE => Ok(FieldModel::MixedChar { p }),
            _ => Err(Error::BadResidueSize(p)),
        }
    }

    /// Residue field size.
    pub fn q(&self) -> u64 {
        match *self {
            FieldModel::EquiChar { q } => q,
            FieldModel::MixedChar { p } => p,
        }
    }

    pub fn characteristic(&self) -> u64 {
        match *self {
            FieldModel::EquiChar { q } => prime_power(q).expect("validated").0 as u64,
            FieldModel::MixedChar { p } => p,
        }
    }

    pub fn residue_field(&self) -> &'static GaloisField {
        GaloisField::get(self.q()).expect("validated model")
    }

    /// `q^{-v}` as an exact rational.
    pub fn norm_of_valuation(&self, v: i64) -> BigRational {
        q_pow(self.q(), -v)
    }
}

/// `q^e` for any integer exponent.
pub fn q_pow(q: u64, e: i64) -> BigRational {
    let base = BigInt::from(q).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

/// Exact element of the dense subfield, carrying its own model.
pub trait LocalScalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn model(&self) -> FieldModel;
    fn zero(model: FieldModel) -> Self;
    fn one(model: FieldModel) -> Self;
    fn from_int(model: FieldModel, n: i64) -> Self;
    /// `t` or `p`.
    fn uniformizer(model: FieldModel) -> Self;
    /// `sum_i d_i * pi^i` with digits `d_i` in `0..q` (residue codes).
    fn from_digits(model: FieldModel, digits: &[u32]) -> Self;
    fn parse(model: FieldModel, s: &str) -> Result<Self>;

    fn is_zero(&self) -> bool;
    fn val(&self) -> Valuation;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    /// First `depth` digits of the expansion of an integral element.
    fn residue_digits(&self, depth: u32) -> Result<Vec<u32>>;

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul(&i))
    }

    fn pow_uniformizer(model: FieldModel, k: i64) -> Self {
        let t = Self::uniformizer(model);
        let base = if k >= 0 { t } else { t.inv().expect("uniformizer is invertible") };
        (0..k.unsigned_abs()).fold(Self::one(model), |acc, _| acc.mul(&base))
    }

    /// `|x| = q^{-val(x)}`, zero for zero.
    fn norm(&self) -> BigRational {
        match self.val() {
            Valuation::Finite(v) => self.model().norm_of_valuation(v),
            Valuation::Infinite => BigRational::zero(),
        }
    }

    fn is_integral(&self) -> bool {
        self.val() >= Valuation::Finite(0)
    }
}

/// Element of `F_q(t)`: `num/den` in lowest terms with `den` monic.
#[derive(Clone)]
pub struct EquiScalar {
    field: &'static GaloisField,
    num: Poly,
    den: Poly,
}

impl EquiScalar {
    pub fn new(model: FieldModel, num: Poly, den: Poly) -> Option<Self> {
        let FieldModel::EquiChar { .. } = model else {
            panic!("EquiScalar requires an equal-characteristic model")
        };
        if den.is_zero() {
            return None;
        }
        Some(Self::normalized(model.residue_field(), num, den))
    }

    fn normalized(field: &'static GaloisField, num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return EquiScalar { field, num, den: Poly::constant(1) };
        }
        let g = num.gcd(&den, field);
        let (mut n, _) = num.div_rem(&g, field);
        let (mut d, _) = den.div_rem(&g, field);
        let li = field.inv(d.lead()).expect("nonzero");
        n = n.scale(li, field);
        d = d.scale(li, field);
        EquiScalar { field, num: n, den: d }
    }

    pub fn from_poly(model: FieldModel, num: Poly) -> Self {
        Self::new(model, num, Poly::constant(1)).expect("unit denominator")
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }
}

impl PartialEq for EquiScalar {
    fn eq(&self, other: &Self) -> bool {
        self.field.size() == other.field.size() && self.num == other.num && self.den == other.den
    }
}

impl fmt::Debug for EquiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn fmt_poly(p: &Poly) -> String {
    let parts: Vec<String> = p.0.iter().map(|c| c.to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn parse_poly(s: &str, q: u32) -> Result<Poly> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected coefficient list, got {s:?}")))?;
    if inner.trim().is_empty() {
        return Ok(Poly::zero());
    }
    let coeffs = inner
        .split(',')
        .map(|c| {
            let v: u32 = c.trim().parse().map_err(|_| Error::Parse(format!("bad coefficient {c:?}")))?;
            if v >= q {
                return Err(Error::Parse(format!("coefficient {v} outside residue field of size {q}")));
            }
            Ok(v)
        })
        .collect::<Result<Vec<u32>>>()?;
    Ok(Poly(coeffs).trimmed())
}

impl fmt::Display for EquiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", fmt_poly(&self.num), fmt_poly(&self.den))
    }
}

impl LocalScalar for EquiScalar {
    fn model(&self) -> FieldModel {
        FieldModel::EquiChar { q: self.field.size() as u64 }
    }

    fn zero(model: FieldModel) -> Self {
        Self::from_poly(model, Poly::zero())
    }

    fn one(model: FieldModel) -> Self {
        Self::from_poly(model, Poly::constant(1))
    }

    fn from_int(model: FieldModel, n: i64) -> Self {
        let c = model.residue_field().from_int(n);
        Self::from_poly(model, Poly::constant(c))
    }

    fn uniformizer(model: FieldModel) -> Self {
        Self::from_poly(model, Poly::monomial(1, 1))
    }

    fn from_digits(model: FieldModel, digits: &[u32]) -> Self {
        Self::from_poly(model, Poly(digits.to_vec()).trimmed())
    }

    fn parse(model: FieldModel, s: &str) -> Result<Self> {
        let q = model.q() as u32;
        let (a, b) = match s.split_once('/') {
            Some((a, b)) => (parse_poly(a, q)?, parse_poly(b, q)?),
            None => (parse_poly(s, q)?, Poly::constant(1)),
        };
        Self::new(model, a, b).ok_or_else(|| Error::Parse("zero denominator".into()))
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn val(&self) -> Valuation {
        match (self.num.order(), self.den.order()) {
            (Some(a), Some(b)) => Valuation::Finite(a as i64 - b as i64),
            _ => Valuation::Infinite,
        }
    }

    fn add(&self, o: &Self) -> Self {
        let f = self.field;
        let num = self.num.mul(&o.den, f).add(&o.num.mul(&self.den, f), f);
        Self::normalized(f, num, self.den.mul(&o.den, f))
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn mul(&self, o: &Self) -> Self {
        let f = self.field;
        Self::normalized(f, self.num.mul(&o.num, f), self.den.mul(&o.den, f))
    }

    fn neg(&self) -> Self {
        EquiScalar { field: self.field, num: self.num.neg(self.field), den: self.den.clone() }
    }

    fn inv(&self) -> Option<Self> {
        (!self.is_zero()).then(|| Self::normalized(self.field, self.den.clone(), self.num.clone()))
    }

    fn residue_digits(&self, depth: u32) -> Result<Vec<u32>> {
        let depth = depth as usize;
        let Valuation::Finite(v) = self.val() else {
            return Ok(vec![0; depth]);
        };
        if v < 0 {
            return Err(Error::NotIntegral);
        }
        let v = v as usize;
        if v >= depth {
            return Ok(vec![0; depth]);
        }
        let f = self.field;
        let na = self.num.order().expect("nonzero");
        let nb = self.den.order().expect("nonzero");
        let a = self.num.shift_down(na);
        let b = self.den.shift_down(nb);
        let b0_inv = f.inv(b.coeff(0)).expect("unit constant term");
        let mut out = vec![0u32; depth];
        let len = depth.saturating_sub(v);
        let mut c = vec![0u32; len];
        for k in 0..len {
            let mut acc = a.coeff(k);
            for j in 1..=k {
                acc = f.sub(acc, f.mul(b.coeff(j), c[k - j]));
            }
            c[k] = f.mul(acc, b0_inv);
        }
        out[v..].copy_from_slice(&c);
        Ok(out)
    }
}

/// Element of `Q` with the `p`-adic valuation.
#[derive(Clone, PartialEq)]
pub struct MixedScalar {
    p: u64,
    value: BigRational,
}

fn p_adic_order(n: &BigInt, p: u64) -> u64 {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut k = 0;
    while n.is_multiple_of(&p) {
        n /= &p;
        k += 1;
    }
    k
}

impl MixedScalar {
    pub fn new(model: FieldModel, value: BigRational) -> Self {
        let FieldModel::MixedChar { p } = model else {
            panic!("MixedScalar requires a mixed-characteristic model")
        };
        MixedScalar { p, value }
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }
}

impl fmt::Debug for MixedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MixedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.value.numer(), self.value.denom())
    }
}

impl LocalScalar for MixedScalar {
    fn model(&self) -> FieldModel {
        FieldModel::MixedChar { p: self.p }
    }

    fn zero(model: FieldModel) -> Self {
        Self::new(model, BigRational::zero())
    }

    fn one(model: FieldModel) -> Self {
        Self::new(model, BigRational::one())
    }

    fn from_int(model: FieldModel, n: i64) -> Self {
        Self::new(model, BigRational::from_integer(BigInt::from(n)))
    }

    fn uniformizer(model: FieldModel) -> Self {
        Self::from_int(model, model.q() as i64)
    }

    fn from_digits(model: FieldModel, digits: &[u32]) -> Self {
        let p = BigInt::from(model.q());
        let n = digits.iter().rev().fold(BigInt::zero(), |acc, &d| acc * &p + BigInt::from(d));
        Self::new(model, BigRational::from_integer(n))
    }

    fn parse(model: FieldModel, s: &str) -> Result<Self> {
        let err = || Error::Parse(format!("bad rational {s:?}"));
        let (a, b) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s.trim(), "1"),
        };
        let a: BigInt = a.parse().map_err(|_| err())?;
        let b: BigInt = b.parse().map_err(|_| err())?;
        if b.is_zero() {
            return Err(err());
        }
        Ok(Self::new(model, BigRational::new(a, b)))
    }

    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn val(&self) -> Valuation {
        if self.value.is_zero() {
            return Valuation::Infinite;
        }
        let a = p_adic_order(self.value.numer(), self.p) as i64;
        let b = p_adic_order(self.value.denom(), self.p) as i64;
        Valuation::Finite(a - b)
    }

    fn add(&self, o: &Self) -> Self {
        MixedScalar { p: self.p, value: &self.value + &o.value }
    }

    fn sub(&self, o: &Self) -> Self {
        MixedScalar { p: self.p, value: &self.value - &o.value }
    }

    fn mul(&self, o: &Self) -> Self {
        MixedScalar { p: self.p, value: &self.value * &o.value }
    }

    fn neg(&self) -> Self {
        MixedScalar { p: self.p, value: -&self.value }
    }

    fn inv(&self) -> Option<Self> {
        (!self.is_zero()).then(|| MixedScalar { p: self.p, value: self.value.recip() })
    }

    fn residue_digits(&self, depth: u32) -> Result<Vec<u32>> {
        if self.val() < Valuation::Finite(0) {
            return Err(Error::NotIntegral);
        }
        let p = BigInt::from(self.p);
        let modulus = p.pow(depth);
        let den = self.value.denom().mod_floor(&modulus);
        let ext = den.extended_gcd(&modulus);
        debug_assert!(ext.gcd.is_one());
        let mut x = (self.value.numer() * ext.x).mod_floor(&modulus);
        let mut out = Vec::with_capacity(depth as usize);
        for _ in 0..depth {
            let (quo, rem) = x.div_mod_floor(&p);
            out.push(rem.to_u32().expect("digit below p"));
            x = quo;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq2() -> FieldModel {
        FieldModel::equi(2).unwrap()
    }

    #[test]
    fn digits_of_elements_deeper_than_the_precision() {
        let m = eq2();
        let t3 = EquiScalar::pow_uniformizer(m, 3);
        assert_eq!(t3.residue_digits(2).unwrap(), vec![0, 0]);
        let p = FieldModel::mixed(3).unwrap();
        assert_eq!(MixedScalar::from_int(p, 27).residue_digits(2).unwrap(), vec![0, 0]);
    }

    #[test]
    fn valuation_examples() {
        let m = eq2();
        assert_eq!(EquiScalar::one(m).val(), Valuation::Finite(0));
        let t2 = EquiScalar::pow_uniformizer(m, 2);
        let x = t2.mul(&EquiScalar::from_digits(m, &[1, 1]));
        assert_eq!(x.val(), Valuation::Finite(2));
        let m5 = FieldModel::mixed(5).unwrap();
        let y = MixedScalar::parse(m5, "5/3").unwrap();
        assert_eq!(y.val(), Valuation::Finite(1));
        assert_eq!(MixedScalar::zero(m5).val(), Valuation::Infinite);
    }

    #[test]
    fn valuation_axioms_on_samples() {
        let m = FieldModel::equi(3).unwrap();
        let xs: Vec<EquiScalar> = [
            "[1,2]/[1]", "[0,0,1]/[1,1]", "[2]/[0,1]", "[0,1,2]/[2,0,1]", "[1,1,1]/[1,2]",
        ]
        .iter()
        .map(|s| EquiScalar::parse(m, s).unwrap())
        .collect();
        for a in &xs {
            for b in &xs {
                assert_eq!(a.mul(b).val(), a.val() + b.val());
                assert!(a.add(b).val() >= a.val().min(b.val()));
            }
        }
    }

    #[test]
    fn serialization_round_trip() {
        let m = FieldModel::equi(3).unwrap();
        let x = EquiScalar::parse(m, "[0,1,2]/[2,1]").unwrap();
        assert_eq!(EquiScalar::parse(m, &x.to_string()).unwrap(), x);
        let mm = FieldModel::mixed(3).unwrap();
        let y = MixedScalar::parse(mm, "-14/10").unwrap();
        assert_eq!(y.to_string(), "-7/5");
        assert_eq!(MixedScalar::parse(mm, &y.to_string()).unwrap(), y);
    }

    #[test]
    fn residue_digits_of_series() {
        let m = eq2();
        // 1/(1+t) = 1 + t + t^2 + ... over GF(2).
        let x = EquiScalar::parse(m, "[1]/[1,1]").unwrap();
        assert_eq!(x.residue_digits(5).unwrap(), vec![1, 1, 1, 1, 1]);
        let mm = FieldModel::mixed(3).unwrap();
        // -1 = 2 + 2*3 + 2*9 + ... in Z_3.
        let y = MixedScalar::from_int(mm, -1);
        assert_eq!(y.residue_digits(3).unwrap(), vec![2, 2, 2]);
        let z = MixedScalar::parse(mm, "1/2").unwrap();
        let d = z.residue_digits(4).unwrap();
        let back = d.iter().rev().fold(0u64, |a, &c| a * 3 + c as u64);
        assert_eq!(back * 2 % 81, 1);
        assert!(MixedScalar::parse(mm, "1/3").unwrap().residue_digits(2).is_err());
    }

    #[test]
    fn prime_power_field_scalars() {
        let m = FieldModel::equi(4).unwrap();
        let x = EquiScalar::parse(m, "[2,3]/[1]").unwrap();
        let y = x.inv().unwrap();
        assert_eq!(x.mul(&y), EquiScalar::one(m));
        assert_eq!(y.val(), Valuation::Finite(0));
    }
}
