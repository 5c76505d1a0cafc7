//! Exact Haar expectations of lattice contents.
//!
//! `expected(s, t, a, c)` is `E[q^{-Σ e_j}]` where `e_j` are the elementary
//! divisors of the `s x t` matrix `diag(t^{a_1}, ..) + t^c Z` with `Z` Haar on
//! `O^{s x t}`. Unit pivots split off by a Schur complement that keeps the
//! remaining block Haar-distributed; a common factor `t^μ` scales the content
//! by `q^{-μ min(s,t)}`; at `c = 0` the rank of `Z mod t` gives a linear
//! self-referential equation solved in closed form.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::field::q_pow;
use crate::linalg::Rational;
use crate::ring::ChainRing;
use crate::grassmann::{canonicalize, GrassPoint};
use crate::linalg::Matrix;

type MemoKey = (usize, usize, Vec<u32>, u32);

#[derive(Debug)]
pub struct ContentRecursion {
    q: u64,
    haar: Mutex<HashMap<(usize, usize), Rational>>,
    memo: Mutex<HashMap<MemoKey, Rational>>,
}

/// Number of `s x t` matrices of rank `rho` over `GF(q)`.
pub fn rank_count(s: usize, t: usize, rho: usize, q: u64) -> BigInt {
    if rho > s.min(t) {
        return BigInt::zero();
    }
    let q = BigInt::from(q);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for k in 0..rho {
        let qk = q.pow(k as u32);
        num *= (q.pow(s as u32) - &qk) * (q.pow(t as u32) - &qk);
        den *= q.pow(rho as u32) - &qk;
    }
    num / den
}

impl ContentRecursion {
    pub fn new(q: u64) -> Self {
        ContentRecursion { q, haar: Mutex::new(HashMap::new()), memo: Mutex::new(HashMap::new()) }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Probability that a Haar `s x t` matrix has residue rank `rho`.
    pub fn rank_probability(&self, s: usize, t: usize, rho: usize) -> Rational {
        let total = BigInt::from(self.q).pow((s * t) as u32);
        Rational::new(rank_count(s, t, rho, self.q), total)
    }

    /// `E[content]` for a Haar `s x t` matrix.
    pub fn haar(&self, s: usize, t: usize) -> Rational {
        let m = s.min(t);
        if m == 0 {
            return Rational::one();
        }
        if let Some(v) = self.haar.lock().expect("memo").get(&(s, t)) {
            return v.clone();
        }
        // H = Σ_ρ P(ρ) q^{-(m-ρ)} H_{s-ρ,t-ρ}; the ρ = 0 term contains H itself.
        let mut rest = Rational::zero();
        for rho in 1..=m {
            rest += self.rank_probability(s, t, rho)
                * q_pow(self.q, -((m - rho) as i64))
                * self.haar(s - rho, t - rho);
        }
        let self_coeff = self.rank_probability(s, t, 0) * q_pow(self.q, -(m as i64));
        let value = rest / (Rational::one() - self_coeff);
        self.haar.lock().expect("memo").insert((s, t), value.clone());
        value
    }

    /// `E[q^{-Σ e_j(diag(t^a) + t^c Z)}]`; `a` lists the diagonal exponents.
    pub fn expected(&self, s: usize, t: usize, a: &[u32], c: u32) -> Rational {
        let mut a: Vec<u32> = a.iter().copied().filter(|&x| x < c).collect();
        a.sort_unstable();
        self.expected_sorted(s, t, a, c)
    }

    fn expected_sorted(&self, s: usize, t: usize, a: Vec<u32>, c: u32) -> Rational {
        if s.min(t) == 0 {
            return Rational::one();
        }
        let units = a.iter().take_while(|&&x| x == 0).count();
        if units > 0 {
            return self.expected_sorted(s - units, t - units, a[units..].to_vec(), c);
        }
        if c == 0 {
            return self.haar(s, t);
        }
        let key = (s, t, a.clone(), c);
        if let Some(v) = self.memo.lock().expect("memo").get(&key) {
            return v.clone();
        }
        let mu = a.first().copied().unwrap_or(c).min(c);
        let shifted: Vec<u32> = a.iter().map(|x| x - mu).collect();
        let value =
            q_pow(self.q, -((mu as usize * s.min(t)) as i64)) * self.expected_sorted(s, t, shifted, c - mu);
        self.memo.lock().expect("memo").insert(key, value.clone());
        value
    }
}

/// Reduction of the cell integral `∫_{N ∈ cell} s(E, N) dN` to `expected`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub s: usize,
    /// Smith exponents of the transversality block; `r` marks "zero mod m^r".
    pub exps: Vec<u32>,
}

/// `n x n` matrix whose first rows are those of `e` followed by unit vectors
/// at the non-pivot columns; it lies in `GL_n(O/m^r)`.
pub fn completion(ring: &ChainRing, e: &GrassPoint) -> Matrix<u64> {
    let n = e.n();
    let pivots = e.pivots(ring);
    let extra: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    Matrix::from_fn(n, n, |i, j| {
        if i < e.k() {
            e.entry(i, j)
        } else if j == extra[i - e.k()] {
            ring.one()
        } else {
            0
        }
    })
}

/// Moves `cell` by `g^{-1}` where `g` is the completion of `e`, so that `e`
/// becomes the span of the first `k` basis vectors.
pub fn transport_to_standard(ring: &ChainRing, e: &GrassPoint, cell: &GrassPoint) -> GrassPoint {
    let g_inv = ring.inverse(&completion(ring, e)).expect("completion is invertible");
    canonicalize(ring, &ring.mat_mul(&cell.matrix(), &g_inv)).expect("GL_n preserves summands")
}

/// Transversality block of a cell relative to `span(e_1..e_i)`: rows of the
/// canonical form with pivot before `i`, non-pivot columns from `i` on.
pub fn transversality_block(ring: &ChainRing, i: usize, cell: &GrassPoint) -> Matrix<u64> {
    let pivots = cell.pivots(ring);
    let rows: Vec<usize> = (0..cell.k()).filter(|&a| pivots[a] < i).collect();
    let cols: Vec<usize> = (i..cell.n()).filter(|c| !pivots.contains(c)).collect();
    debug_assert_eq!(rows.len(), cols.len());
    Matrix::from_fn(rows.len(), cols.len(), |a, b| cell.entry(rows[a], cols[b]))
}

pub fn cell_key(ring: &ChainRing, e: &GrassPoint, cell: &GrassPoint) -> CellKey {
    assert_eq!(e.k() + cell.k(), e.n(), "complementary dimensions");
    let moved = transport_to_standard(ring, e, cell);
    let block = transversality_block(ring, e.k(), &moved);
    let exps = if block.rows() == 0 { Vec::new() } else { ring.smith_exponents(&block) };
    CellKey { s: block.rows(), exps }
}

/// `E[s(E, N) | N ∈ cell]`: the integral divided by the Haar mass of the cell.
pub fn conditional_kernel_mean(rec: &ContentRecursion, ring: &ChainRing, key: &CellKey) -> Rational {
    rec.expected(key.s, key.s, &key.exps, ring.depth())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    #[test]
    fn rank_counts_sum_to_total() {
        for q in [2u64, 3] {
            for s in 0..4 {
                for t in 0..4 {
                    let total: BigInt = (0..=s.min(t)).map(|r| rank_count(s, t, r, q)).sum();
                    assert_eq!(total, BigInt::from(q).pow((s * t) as u32));
                }
            }
        }
    }

    #[test]
    fn haar_one_by_one() {
        // E|z| over Haar z is q/(q+1).
        for q in [2u64, 3, 5] {
            let r = ContentRecursion::new(q);
            assert_eq!(r.haar(1, 1), rat(q as i64, q as i64 + 1));
        }
    }

    #[test]
    fn haar_two_by_two_by_series() {
        // Independent oracle: E|det Z| = Σ_v P(val det = v) q^{-v}, with
        // P(val det = v) from the orbit-counting zeta function of Z_p^{2x2}:
        // E|det|^1 = (1 - q^{-1})(1 - q^{-2}) / ((1 - q^{-2})(1 - q^{-3})).
        for q in [2i64, 3] {
            let rec = ContentRecursion::new(q as u64);
            let qi = |k: i64| rat(1, q.pow(k as u32));
            let one = rat(1, 1);
            let expect = (&one - qi(1)) * (&one - qi(2)) / ((&one - qi(2)) * (&one - qi(3)));
            assert_eq!(rec.haar(2, 2), expect);
        }
    }

    #[test]
    fn shift_and_units() {
        let r = ContentRecursion::new(2);
        assert_eq!(r.expected(1, 1, &[], 1), rat(1, 2) * r.haar(1, 1));
        assert_eq!(r.expected(1, 1, &[0], 3), rat(1, 1));
        assert_eq!(r.expected(1, 1, &[2], 3), rat(1, 4));
        assert_eq!(r.expected(2, 2, &[0, 1], 1), r.expected(1, 1, &[], 1));
    }
}
