use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::point::{GrassPoint, GrassPointJson};
use crate::error::{Error, Result};
use crate::ring::ChainRing;

pub const DEFAULT_POINT_CAP: u128 = 1_000_000;

/// `[n choose k]_q`.
pub fn gaussian_binomial(n: usize, k: usize, q: u64) -> u128 {
    if k > n {
        return 0;
    }
    let q = q as u128;
    let (mut num, mut den) = (1u128, 1u128);
    for i in 0..k {
        num *= q.pow((n - i) as u32) - 1;
        den *= q.pow((i + 1) as u32) - 1;
    }
    num / den
}

/// `|Gr_k((O/m^r)^n)| = [n choose k]_q * q^{(r-1)k(n-k)}`.
pub fn level_count(n: usize, k: usize, q: u64, r: u32) -> u128 {
    gaussian_binomial(n, k, q) * (q as u128).pow((r - 1) * (k * (n - k)) as u32)
}

/// All points of one level Grassmannian in lexicographic order.
#[derive(Clone, Debug)]
pub struct LevelIndex {
    ring: ChainRing,
    n: usize,
    k: usize,
    points: Vec<GrassPoint>,
    lookup: HashMap<GrassPoint, usize>,
}

impl LevelIndex {
    pub fn ring(&self) -> &ChainRing {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn level(&self) -> u32 {
        self.ring.depth()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[GrassPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &GrassPoint {
        &self.points[i]
    }

    pub fn position(&self, x: &GrassPoint) -> Option<usize> {
        self.lookup.get(x).copied()
    }

    fn from_points(ring: ChainRing, n: usize, k: usize, mut points: Vec<GrassPoint>) -> Self {
        points.sort();
        let lookup = points.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        LevelIndex { ring, n, k, points, lookup }
    }

    pub fn to_json(&self) -> LevelIndexJson {
        LevelIndexJson {
            model: self.ring.model(),
            n: self.n,
            k: self.k,
            r: self.level(),
            points: self.points.iter().map(|p| p.to_json(&self.ring).rows).collect(),
        }
    }

    pub fn from_json(json: &LevelIndexJson) -> Result<Self> {
        let ring = ChainRing::new(json.model, json.r)?;
        let points = json
            .points
            .iter()
            .map(|rows| {
                GrassPoint::from_json(&GrassPointJson {
                    model: json.model,
                    n: json.n,
                    k: json.k,
                    q: json.model.q(),
                    r: json.r,
                    rows: rows.clone(),
                })
                .map(|(_, p)| p)
            })
            .collect::<Result<Vec<_>>>()?;
        let expected = level_count(json.n, json.k, json.model.q(), json.r);
        if points.len() as u128 != expected {
            return Err(Error::Parse(format!("index holds {} points, expected {expected}", points.len())));
        }
        Ok(LevelIndex::from_points(ring, json.n, json.k, points))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelIndexJson {
    pub model: crate::field::FieldModel,
    pub n: usize,
    pub k: usize,
    pub r: u32,
    pub points: Vec<Vec<Vec<String>>>,
}

fn pivot_patterns(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            if n - c < k - cur.len() {
                break;
            }
            cur.push(c);
            rec(c + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Free entries of the canonical form with pivot columns `pivots`:
/// `(flat index, divisible by t)`.
pub(crate) fn free_slots(n: usize, pivots: &[usize]) -> Vec<(usize, bool)> {
    let mut slots = Vec::new();
    for (a, &p) in pivots.iter().enumerate() {
        for c in 0..n {
            if !pivots.contains(&c) {
                slots.push((a * n + c, c < p));
            }
        }
    }
    slots
}

pub(crate) fn patterns(n: usize, k: usize) -> Vec<Vec<usize>> {
    pivot_patterns(n, k)
}

/// Enumerates `Gr_k((O/m^r)^n)` with `r = ring.depth()`; refuses beyond `cap` points.
pub fn enumerate(ring: &ChainRing, n: usize, k: usize, cap: Option<u128>) -> Result<LevelIndex> {
    if k > n {
        return Err(Error::Dimension(format!("k = {k} exceeds n = {n}")));
    }
    let count = level_count(n, k, ring.q(), ring.depth());
    let cap = cap.unwrap_or(DEFAULT_POINT_CAP);
    if count > cap {
        return Err(Error::ResourceCap { count, cap });
    }
    let q = ring.q();
    let modulus = ring.modulus();
    let points: Vec<GrassPoint> = pivot_patterns(n, k)
        .into_par_iter()
        .flat_map_iter(|pivots| {
            let slots = free_slots(n, &pivots);
            let mut base = vec![0u64; n * k];
            for (a, &p) in pivots.iter().enumerate() {
                base[a * n + p] = 1 % modulus;
            }
            let sizes: Vec<u64> = slots.iter().map(|&(_, t)| if t { modulus / q } else { modulus }).collect();
            let total: u64 = sizes.iter().product();
            let depth = ring.depth();
            (0..total).map(move |code| {
                let mut e = base.clone();
                let mut c = code;
                for (&(idx, divisible), &size) in slots.iter().zip(&sizes).rev() {
                    let d = c % size;
                    c /= size;
                    e[idx] = if divisible { d * q } else { d };
                }
                GrassPoint::from_canonical(n, k, depth, e)
            })
        })
        .collect();
    debug_assert_eq!(points.len() as u128, count);
    Ok(LevelIndex::from_points(*ring, n, k, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldModel;
    use crate::grassmann::canonicalize;
    use crate::linalg::Matrix;
    use std::collections::HashSet;

    fn ring(q: u64, r: u32) -> ChainRing {
        ChainRing::new(FieldModel::equi(q).unwrap(), r).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate(&ring(2, 1), 3, 1, None).unwrap().len(), 7);
        assert_eq!(enumerate(&ring(2, 2), 2, 1, None).unwrap().len(), 6);
        assert_eq!(enumerate(&ring(2, 1), 3, 0, None).unwrap().len(), 1);
        for q in [2, 3] {
            for r in 1..=2 {
                for n in 0..=4 {
                    for k in 0..=n {
                        let idx = enumerate(&ring(q, r), n, k, None).unwrap();
                        assert_eq!(idx.len() as u128, level_count(n, k, q, r));
                    }
                }
            }
        }
    }

    #[test]
    fn brute_force_matches() {
        // Canonicalize every k x n matrix over O/m^r and collect distinct summands.
        for (q, r, n, k) in [(2u64, 1u32, 3usize, 1usize), (2, 2, 3, 2), (3, 1, 3, 2), (2, 2, 2, 1), (3, 2, 2, 1)] {
            let ring = ring(q, r);
            let m = ring.modulus();
            let idx = enumerate(&ring, n, k, None).unwrap();
            let mut seen = HashSet::new();
            for code in 0..m.pow((n * k) as u32) {
                let mut c = code;
                let mat = Matrix::from_fn(k, n, |_, _| {
                    let d = c % m;
                    c /= m;
                    d
                });
                if let Ok(p) = canonicalize(&ring, &mat) {
                    assert!(idx.position(&p).is_some());
                    seen.insert(p);
                }
            }
            assert_eq!(seen.len(), idx.len());
        }
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            enumerate(&ring(3, 2), 4, 2, Some(100)),
            Err(Error::ResourceCap { count: 10530, cap: 100 })
        ));
    }

    #[test]
    fn order_is_sorted_and_json_stable() {
        let idx = enumerate(&ring(3, 2), 3, 1, None).unwrap();
        assert!(idx.points().windows(2).all(|w| w[0] < w[1]));
        let back = LevelIndex::from_json(&idx.to_json()).unwrap();
        assert_eq!(back.points(), idx.points());
    }
}
