//! The finite chain ring `O/m^d` and matrices over it.
//!
//! Elements are `u64` values below `q^d`. In mixed characteristic they are the
//! integers mod `p^d`; in equal characteristic they pack the digits of
//! `sum a_i t^i` in base `q`. In both models division by `t^v` of a multiple of
//! `t^v` is integer division by `q^v`, and `t`-adic valuation is the number of
//! trailing base-`q` zero digits.

use crate::error::{Error, Result};
use crate::field::gf::GaloisField;
use crate::field::{FieldModel, LocalScalar};
use crate::linalg::Matrix;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
enum Arith {
    Integer,
    Binary,
    Digits,
}

#[derive(Copy, Clone, Debug)]
pub struct ChainRing {
    model: FieldModel,
    q: u64,
    depth: u32,
    modulus: u64,
    arith: Arith,
    field: &'static GaloisField,
}

impl PartialEq for ChainRing {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model && self.depth == other.depth
    }
}

impl Eq for ChainRing {}

impl std::hash::Hash for ChainRing {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.model.hash(state);
        self.depth.hash(state);
    }
}

/// Largest depth `d` with `q^d` representable and products safe in `u128`.
pub fn max_depth(q: u64) -> u32 {
    let mut d = 0;
    let mut m: u64 = 1;
    while let Some(next) = m.checked_mul(q) {
        if next > (1u64 << 62) {
            break;
        }
        m = next;
        d += 1;
    }
    d
}

impl ChainRing {
    pub fn new(model: FieldModel, depth: u32) -> Result<Self> {
        let q = model.q();
        let cap = max_depth(q);
        if depth > cap {
            return Err(Error::Precision { needed: depth, available: cap });
        }
        let arith = match model {
            FieldModel::MixedChar { .. } => Arith::Integer,
            FieldModel::EquiChar { q: 2 } => Arith::Binary,
            FieldModel::EquiChar { .. } => Arith::Digits,
        };
        Ok(ChainRing { model, q, depth, modulus: q.pow(depth), arith, field: model.residue_field() })
    }

    /// Same ring at another depth.
    pub fn at_depth(&self, depth: u32) -> Result<Self> {
        ChainRing::new(self.model, depth)
    }

    pub fn model(&self) -> FieldModel {
        self.model
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue_field(&self) -> &'static GaloisField {
        self.field
    }

    /// `q^k` as an integer; `k <= depth` of the widest ring in use.
    pub fn q_pow(&self, k: u32) -> u64 {
        self.q.pow(k)
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.modulus
    }

    pub fn digits(&self, x: u64) -> Vec<u32> {
        let mut x = x;
        (0..self.depth)
            .map(|_| {
                let d = (x % self.q) as u32;
                x /= self.q;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u32]) -> u64 {
        digits
            .iter()
            .take(self.depth as usize)
            .rev()
            .fold(0u64, |acc, &d| acc * self.q + d as u64)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        match self.arith {
            Arith::Integer => (a + b) % self.modulus,
            Arith::Binary => a ^ b,
            Arith::Digits => self.digitwise(a, b, |x, y| self.field.add(x, y)),
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        match self.arith {
            Arith::Integer => (self.modulus - a % self.modulus) % self.modulus,
            Arith::Binary => a,
            Arith::Digits => self.digitwise(a, 0, |x, _| self.field.neg(x)),
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        match self.arith {
            Arith::Integer => (a + self.modulus - b) % self.modulus,
            Arith::Binary => a ^ b,
            Arith::Digits => self.digitwise(a, b, |x, y| self.field.sub(x, y)),
        }
    }

    fn digitwise(&self, a: u64, b: u64, op: impl Fn(u32, u32) -> u32) -> u64 {
        let (mut a, mut b) = (a, b);
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.depth {
            let d = op((a % self.q) as u32, (b % self.q) as u32);
            out += d as u64 * place;
            place = place.wrapping_mul(self.q);
            a /= self.q;
            b /= self.q;
        }
        out
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match self.arith {
            Arith::Integer => ((a as u128 * b as u128) % self.modulus as u128) as u64,
            Arith::Binary => {
                let mut acc = 0u64;
                let mut a = a;
                let mut shift = 0;
                while a != 0 {
                    if a & 1 == 1 {
                        acc ^= b << shift;
                    }
                    a >>= 1;
                    shift += 1;
                }
                acc & (self.modulus - 1)
            }
            Arith::Digits => {
                let da = self.digits(a);
                let db = self.digits(b);
                let d = self.depth as usize;
                let mut out = vec![0u32; d];
                for (i, &x) in da.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in db.iter().take(d - i).enumerate() {
                        if y != 0 {
                            out[i + j] = self.field.add(out[i + j], self.field.mul(x, y));
                        }
                    }
                }
                self.from_digits(&out)
            }
        }
    }

    /// `t`-adic valuation; `depth` for zero.
    #[inline]
    pub fn val(&self, x: u64) -> u32 {
        if x == 0 {
            return self.depth;
        }
        if self.arith == Arith::Binary {
            return x.trailing_zeros();
        }
        let mut x = x;
        let mut v = 0;
        while x.is_multiple_of(self.q) {
            x /= self.q;
            v += 1;
        }
        v
    }

    #[inline]
    pub fn is_unit(&self, x: u64) -> bool {
        !x.is_multiple_of(self.q)
    }

    /// Division by `t^v` of a multiple of `t^v`; the result is exact mod `t^{d-v}`.
    #[inline]
    pub fn shr(&self, x: u64, v: u32) -> u64 {
        x / self.q.pow(v)
    }

    /// Multiplication by `t^v`.
    #[inline]
    pub fn shl(&self, x: u64, v: u32) -> u64 {
        if v >= self.depth {
            return 0;
        }
        ((x as u128 * self.q.pow(v) as u128) % self.modulus as u128) as u64
    }

    pub fn one(&self) -> u64 {
        1 % self.modulus
    }

    pub fn from_int(&self, n: i64) -> u64 {
        match self.arith {
            Arith::Integer => n.rem_euclid(self.modulus as i64) as u64,
            _ => self.field.from_int(n) as u64,
        }
    }

    pub fn unit_inv(&self, a: u64) -> u64 {
        assert!(self.is_unit(a), "inverse of a non-unit");
        match self.arith {
            Arith::Integer => {
                let (mut r0, mut r1) = (self.modulus as i128, a as i128);
                let (mut s0, mut s1) = (0i128, 1i128);
                while r1 != 0 {
                    let qt = r0 / r1;
                    (r0, r1) = (r1, r0 - qt * r1);
                    (s0, s1) = (s1, s0 - qt * s1);
                }
                s0.rem_euclid(self.modulus as i128) as u64
            }
            _ => {
                let da = self.digits(a);
                let d = self.depth as usize;
                let a0_inv = self.field.inv(da[0]).expect("unit");
                let mut b = vec![0u32; d];
                b[0] = a0_inv;
                for k in 1..d {
                    let mut acc = 0u32;
                    for j in 1..=k {
                        acc = self.field.add(acc, self.field.mul(da[j], b[k - j]));
                    }
                    b[k] = self.field.mul(self.field.neg(acc), a0_inv);
                }
                self.from_digits(&b)
            }
        }
    }

    /// Reduction of an integral scalar.
    pub fn from_scalar<S: LocalScalar>(&self, x: &S) -> Result<u64> {
        Ok(self.from_digits(&x.residue_digits(self.depth)?))
    }

    /// Canonical representative of `x` as an exact scalar.
    pub fn to_scalar<S: LocalScalar>(&self, x: u64) -> S {
        S::from_digits(self.model, &self.digits(x))
    }

    /// Entry string in the ascending coefficient-list notation.
    pub fn format(&self, x: u64) -> String {
        let mut d = self.digits(x);
        while d.last() == Some(&0) {
            d.pop();
        }
        let parts: Vec<String> = d.iter().map(|c| c.to_string()).collect();
        format!("[{}]", parts.join(","))
    }

    pub fn parse(&self, s: &str) -> Result<u64> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("expected coefficient list, got {s:?}")))?;
        if inner.trim().is_empty() {
            return Ok(0);
        }
        let digits = inner
            .split(',')
            .map(|c| {
                let v: u32 = c.trim().parse().map_err(|_| Error::Parse(format!("bad digit {c:?}")))?;
                if v as u64 >= self.q {
                    return Err(Error::Parse(format!("digit {v} out of range")));
                }
                Ok(v)
            })
            .collect::<Result<Vec<u32>>>()?;
        if digits.len() > self.depth as usize {
            return Err(Error::Parse(format!("{} digits exceed depth {}", digits.len(), self.depth)));
        }
        Ok(self.from_digits(&digits))
    }

    pub fn mat_mul(&self, a: &Matrix<u64>, b: &Matrix<u64>) -> Matrix<u64> {
        assert_eq!(a.cols(), b.rows());
        Matrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).fold(0, |acc, k| self.add(acc, self.mul(*a.get(i, k), *b.get(k, j))))
        })
    }

    pub fn identity(&self, n: usize) -> Matrix<u64> {
        Matrix::from_fn(n, n, |i, j| if i == j { self.one() } else { 0 })
    }

    pub fn reduce_matrix(&self, m: &Matrix<u64>) -> Matrix<u64> {
        m.map(|&x| self.reduce(x))
    }

    fn row_axpy(&self, m: &mut Matrix<u64>, dst: usize, src: usize, c: u64) {
        for j in 0..m.cols() {
            let v = self.add(*m.get(dst, j), self.mul(c, *m.get(src, j)));
            m.set(dst, j, v);
        }
    }

    fn col_axpy(&self, m: &mut Matrix<u64>, dst: usize, src: usize, c: u64) {
        for i in 0..m.rows() {
            let v = self.add(*m.get(i, dst), self.mul(c, *m.get(i, src)));
            m.set(i, dst, v);
        }
    }

    /// Smith form over `O/m^d`. Exponents equal `depth` on zero diagonal entries.
    pub fn smith(&self, m: &Matrix<u64>) -> RingSmith {
        let (rows, cols) = (m.rows(), m.cols());
        let mut a = m.clone();
        let mut u = self.identity(rows);
        let mut u_inv = self.identity(rows);
        let mut v = self.identity(cols);
        let mut v_inv = self.identity(cols);
        let mut exps = Vec::with_capacity(rows.min(cols));
        for k in 0..rows.min(cols) {
            let mut best = (k, k, self.depth);
            for i in k..rows {
                for j in k..cols {
                    let val = self.val(*a.get(i, j));
                    if val < best.2 {
                        best = (i, j, val);
                    }
                }
            }
            let (pi, pj, pv) = best;
            if pv == self.depth {
                exps.extend(std::iter::repeat_n(self.depth, rows.min(cols) - k));
                break;
            }
            a.swap_rows(k, pi);
            u.swap_rows(k, pi);
            swap_cols(&mut u_inv, k, pi);
            swap_cols(&mut a, k, pj);
            swap_cols(&mut v, k, pj);
            v_inv.swap_rows(k, pj);
            let unit = self.shr(*a.get(k, k), pv);
            let unit_inv = self.unit_inv(unit);
            for i in k + 1..rows {
                let x = *a.get(i, k);
                if x == 0 {
                    continue;
                }
                let c = self.neg(self.mul(self.shr(x, pv), unit_inv));
                self.row_axpy(&mut a, i, k, c);
                self.row_axpy(&mut u, i, k, c);
                self.col_axpy(&mut u_inv, k, i, self.neg(c));
            }
            for j in k + 1..cols {
                let x = *a.get(k, j);
                if x == 0 {
                    continue;
                }
                let c = self.neg(self.mul(self.shr(x, pv), unit_inv));
                self.col_axpy(&mut a, j, k, c);
                self.col_axpy(&mut v, j, k, c);
                self.row_axpy(&mut v_inv, k, j, self.neg(c));
            }
            for j in 0..cols {
                let x = self.mul(*a.get(k, j), unit_inv);
                a.set(k, j, x);
            }
            for j in 0..rows {
                let x = self.mul(*u.get(k, j), unit_inv);
                u.set(k, j, x);
            }
            for i in 0..rows {
                let x = self.mul(*u_inv.get(i, k), unit);
                u_inv.set(i, k, x);
            }
            exps.push(pv);
        }
        RingSmith { exps, u, v, u_inv, v_inv }
    }

    /// Smith exponents only, destroying a scratch copy.
    pub fn smith_exponents(&self, m: &Matrix<u64>) -> Vec<u32> {
        let (rows, cols) = (m.rows(), m.cols());
        let mut a = m.clone();
        let mut exps = Vec::with_capacity(rows.min(cols));
        for k in 0..rows.min(cols) {
            let mut best = (k, k, self.depth);
            'scan: for i in k..rows {
                for j in k..cols {
                    let val = self.val(*a.get(i, j));
                    if val < best.2 {
                        best = (i, j, val);
                        if val == 0 {
                            break 'scan;
                        }
                    }
                }
            }
            let (pi, pj, pv) = best;
            if pv == self.depth {
                exps.extend(std::iter::repeat_n(self.depth, rows.min(cols) - k));
                break;
            }
            a.swap_rows(k, pi);
            swap_cols(&mut a, k, pj);
            let unit_inv = self.unit_inv(self.shr(*a.get(k, k), pv));
            for i in k + 1..rows {
                let x = *a.get(i, k);
                if x == 0 {
                    continue;
                }
                let c = self.neg(self.mul(self.shr(x, pv), unit_inv));
                self.row_axpy(&mut a, i, k, c);
            }
            for j in k + 1..cols {
                let x = *a.get(k, j);
                if x != 0 {
                    a.set(k, j, 0);
                }
            }
            exps.push(pv);
        }
        exps
    }

    /// Inverse of a matrix in `GL_n(O/m^d)`, or `None` if not invertible.
    pub fn inverse(&self, m: &Matrix<u64>) -> Option<Matrix<u64>> {
        let sf = self.smith(m);
        if sf.exps.iter().any(|&e| e != 0) {
            return None;
        }
        // u m v = I  =>  m^{-1} = v u.
        Some(self.mat_mul(&sf.v, &sf.u))
    }
}

fn swap_cols(m: &mut Matrix<u64>, a: usize, b: usize) {
    if a != b {
        for i in 0..m.rows() {
            let x = *m.get(i, a);
            let y = *m.get(i, b);
            m.set(i, a, y);
            m.set(i, b, x);
        }
    }
}

#[derive(Clone, Debug)]
pub struct RingSmith {
    /// Weakly increasing exponents in `0..=depth`.
    pub exps: Vec<u32>,
    pub u: Matrix<u64>,
    pub v: Matrix<u64>,
    pub u_inv: Matrix<u64>,
    pub v_inv: Matrix<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::EquiScalar;

    fn rings() -> Vec<ChainRing> {
        vec![
            ChainRing::new(FieldModel::equi(2).unwrap(), 5).unwrap(),
            ChainRing::new(FieldModel::equi(3).unwrap(), 4).unwrap(),
            ChainRing::new(FieldModel::equi(4).unwrap(), 3).unwrap(),
            ChainRing::new(FieldModel::mixed(3).unwrap(), 4).unwrap(),
        ]
    }

    #[test]
    fn ring_axioms_exhaustive() {
        for r in rings() {
            let m = r.modulus().min(64);
            for a in 0..m {
                assert_eq!(r.add(a, r.neg(a)), 0);
                if r.is_unit(a) {
                    assert_eq!(r.mul(a, r.unit_inv(a)), r.one());
                }
                for b in 0..m {
                    assert_eq!(r.mul(a, b), r.mul(b, a));
                    assert_eq!(r.sub(r.add(a, b), b), a);
                    let c = (a * 7 + b * 3) % r.modulus();
                    assert_eq!(r.mul(a, r.add(b, c)), r.add(r.mul(a, b), r.mul(a, c)));
                    assert!(r.val(r.mul(a, b)) >= (r.val(a) + r.val(b)).min(r.depth()));
                }
            }
        }
    }

    #[test]
    fn shift_is_uniformizer_division() {
        for r in rings() {
            let t = r.q();
            for a in 0..r.modulus().min(200) {
                let ta = r.mul(t, a);
                assert_eq!(ta, r.shl(a, 1));
                assert_eq!(r.shr(ta, 1), a % r.q_pow(r.depth() - 1));
            }
        }
    }

    #[test]
    fn scalar_round_trip() {
        let m = FieldModel::equi(3).unwrap();
        let r = ChainRing::new(m, 4).unwrap();
        let x = EquiScalar::parse(m, "[1,2]/[2,1]").unwrap();
        let y = EquiScalar::parse(m, "[0,1,1]/[1]").unwrap();
        let (rx, ry) = (r.from_scalar(&x).unwrap(), r.from_scalar(&y).unwrap());
        assert_eq!(r.from_scalar(&x.mul(&y)).unwrap(), r.mul(rx, ry));
        assert_eq!(r.from_scalar(&x.add(&y)).unwrap(), r.add(rx, ry));
        let back: EquiScalar = r.to_scalar(ry);
        assert_eq!(back, y);
        assert_eq!(r.parse(&r.format(rx)).unwrap(), rx);
    }

    #[test]
    fn ring_smith_reconstructs() {
        for r in rings() {
            let mut seed = 12345u64;
            for _ in 0..40 {
                let m = Matrix::from_fn(3, 4, |_, _| {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let x = (seed >> 33) % r.modulus();
                    // bias toward non-units
                    if seed.is_multiple_of(3) { r.shl(x, 1) } else { x }
                });
                let sf = r.smith(&m);
                let d = r.mat_mul(&r.mat_mul(&sf.u, &m), &sf.v);
                for i in 0..3 {
                    for j in 0..4 {
                        let expect = if i == j { r.shl(1, sf.exps[i]) } else { 0 };
                        assert_eq!(*d.get(i, j), expect);
                    }
                }
                assert_eq!(r.mat_mul(&sf.u, &sf.u_inv), r.identity(3));
                assert_eq!(r.mat_mul(&sf.v_inv, &sf.v), r.identity(4));
                assert_eq!(r.smith_exponents(&m), sf.exps);
            }
        }
    }
}
