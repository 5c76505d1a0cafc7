//! Finite residue fields GF(p^e) with table arithmetic.
//!
//! Elements are integers `0..q` read as base-p digit strings: digit `i` is the
//! coefficient of `x^i` modulo a fixed monic irreducible polynomial of degree `e`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest residue field handled by the table layer.
pub const MAX_RESIDUE_SIZE: u64 = 256;

#[derive(Debug)]
pub struct GaloisField {
    p: u32,
    e: u32,
    q: u32,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

/// Returns `(p, e)` with `q = p^e`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut m = q;
    let mut e = 0;
    while m.is_multiple_of(p) {
        m /= p;
        e += 1;
    }
    (m == 1).then_some((p as u32, e))
}

fn digits(x: u32, p: u32, e: u32) -> Vec<u32> {
    let mut x = x;
    (0..e)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Multiplies two residues as polynomials over GF(p) modulo the monic `modulus`.
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let e = modulus.len() - 1;
    let mut prod = vec![0u32; 2 * e];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for deg in (e..prod.len()).rev() {
        let c = prod[deg];
        if c != 0 {
            for (k, &m) in modulus.iter().enumerate() {
                let idx = deg - e + k;
                prod[idx] = (prod[idx] + p * p - c * m % p) % p;
            }
        }
    }
    prod.truncate(e);
    prod
}

fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    // A degree-e monic polynomial is irreducible iff it has no monic factor of degree <= e/2.
    let e = modulus.len() - 1;
    if e == 1 {
        return true;
    }
    for d in 1..=e / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut f = digits(code as u32, p, d as u32);
            f.push(1);
            if poly_rem(modulus, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = mod_inv(b[db], p);
    while r.len() > db {
        let c = r[r.len() - 1] * lead_inv % p;
        let shift = r.len() - 1 - db;
        for (k, &bk) in b.iter().enumerate() {
            r[shift + k] = (r[shift + k] + p * p - c * bk % p) % p;
        }
        r.pop();
    }
    r
}

fn mod_inv(a: u32, p: u32) -> u32 {
    (1..p).find(|&x| a * x % p == 1).expect("nonzero residue")
}

impl GaloisField {
    fn build(q: u64) -> Result<Self> {
        let (p, e) = prime_power(q).ok_or(Error::BadResidueSize(q))?;
        if q > MAX_RESIDUE_SIZE {
            return Err(Error::BadResidueSize(q));
        }
        let q = q as u32;
        let modulus = if e == 1 {
            vec![0, 1]
        } else {
            (0..p.pow(e))
                .map(|code| {
                    let mut m = digits(code, p, e);
                    m.push(1);
                    m
                })
                .find(|m| is_irreducible(m, p))
                .expect("irreducible polynomials exist in every degree")
        };
        let qs = q as usize;
        let mut add = vec![0u16; qs * qs];
        let mut mul = vec![0u16; qs * qs];
        let mut neg = vec![0u16; qs];
        let mut inv = vec![0u16; qs];
        for a in 0..q {
            let da = digits(a, p, e);
            let dn: Vec<u32> = da.iter().map(|&c| (p - c) % p).collect();
            neg[a as usize] = undigits(&dn, p) as u16;
            for b in 0..q {
                let db = digits(b, p, e);
                let ds: Vec<u32> = da.iter().zip(&db).map(|(&x, &y)| (x + y) % p).collect();
                add[a as usize * qs + b as usize] = undigits(&ds, p) as u16;
                let dm = if e == 1 {
                    vec![da[0] * db[0] % p]
                } else {
                    poly_mulmod(&da, &db, &modulus, p)
                };
                mul[a as usize * qs + b as usize] = undigits(&dm, p) as u16;
            }
        }
        for a in 1..qs {
            inv[a] = (1..qs).find(|&b| mul[a * qs + b] == 1).expect("field") as u16;
        }
        Ok(Self { p, e, q, add, mul, neg, inv })
    }

    /// Shared instance for residue size `q`; tables are built once per process.
    pub fn get(q: u64) -> Result<&'static GaloisField> {
        static REGISTRY: OnceLock<Mutex<HashMap<u64, &'static GaloisField>>> = OnceLock::new();
        let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = reg.lock().expect("registry lock");
        if let Some(f) = guard.get(&q) {
            return Ok(f);
        }
        let f: &'static GaloisField = Box::leak(Box::new(Self::build(q)?));
        guard.insert(q, f);
        Ok(f)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn size(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[a as usize * self.q as usize + b as usize] as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.q as usize + b as usize] as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize] as u32
    }

    /// Multiplicative inverse; `inv(0)` is `None`.
    #[inline]
    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.inv[a as usize] as u32)
    }

    /// Image of the integer `n` under the prime-field embedding.
    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(2), Some((2, 1)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(1), None);
        assert_eq!(prime_power(49), Some((7, 2)));
    }

    #[test]
    fn field_axioms_small() {
        for q in [2u64, 3, 4, 5, 8, 9] {
            let f = GaloisField::get(q).unwrap();
            let q = q as u32;
            for a in 0..q {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                    }
                }
            }
        }
    }

    #[test]
    fn non_prime_power_rejected() {
        assert!(GaloisField::get(6).is_err());
        assert!(GaloisField::get(512).is_err());
    }
}
