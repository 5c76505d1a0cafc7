use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldModel, LocalScalar, Subspace};
use crate::linalg::Matrix;
use crate::ring::ChainRing;

/// Canonical generator matrix of a point of `Gr_k((O/m^r)^n)`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GrassPoint {
    n: u8,
    k: u8,
    r: u8,
    entries: Vec<u64>,
}

impl GrassPoint {
    pub(crate) fn from_canonical(n: usize, k: usize, r: u32, entries: Vec<u64>) -> Self {
        debug_assert_eq!(entries.len(), n * k);
        GrassPoint { n: n as u8, k: k as u8, r: r as u8, entries }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn level(&self) -> u32 {
        self.r as u32
    }

    pub fn entry(&self, row: usize, col: usize) -> u64 {
        self.entries[row * self.n() + col]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn matrix(&self) -> Matrix<u64> {
        Matrix::from_fn(self.k(), self.n(), |i, j| self.entry(i, j))
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.entries[i * self.n()..(i + 1) * self.n()]
    }

    /// Pivot column of each row: the identity columns of the canonical form.
    pub fn pivots(&self, ring: &ChainRing) -> Vec<usize> {
        (0..self.k())
            .map(|a| (0..self.n()).find(|&c| ring.is_unit(self.entry(a, c))).expect("canonical row has a unit"))
            .collect()
    }

    pub fn to_json(&self, ring: &ChainRing) -> GrassPointJson {
        GrassPointJson {
            model: ring.model(),
            n: self.n(),
            k: self.k(),
            q: ring.q(),
            r: self.level(),
            rows: (0..self.k())
                .map(|i| (0..self.n()).map(|j| ring.format(self.entry(i, j))).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &GrassPointJson) -> Result<(ChainRing, GrassPoint)> {
        if json.q != json.model.q() {
            return Err(Error::ModelMismatch(format!("q = {} but model has q = {}", json.q, json.model.q())));
        }
        let ring = ChainRing::new(json.model, json.r)?;
        if json.rows.len() != json.k || json.rows.iter().any(|r| r.len() != json.n) {
            return Err(Error::Dimension("rows do not match (k, n)".into()));
        }
        let m = Matrix::from_rows(
            json.rows
                .iter()
                .map(|row| row.iter().map(|e| ring.parse(e)).collect::<Result<Vec<u64>>>())
                .collect::<Result<Vec<_>>>()?,
        );
        let p = canonicalize(&ring, &m)?;
        Ok((ring, p))
    }
}

/// JSON form `{n, k, q, r, rows}`; entries are ascending coefficient lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrassPointJson {
    pub model: FieldModel,
    pub n: usize,
    pub k: usize,
    pub q: u64,
    pub r: u32,
    pub rows: Vec<Vec<String>>,
}

/// Canonical form of the summand generated by the rows of `m`.
pub fn canonicalize(ring: &ChainRing, m: &Matrix<u64>) -> Result<GrassPoint> {
    let (k, n) = (m.rows(), m.cols());
    let mut w = ring.reduce_matrix(m);
    let mut cur = 0;
    for c in 0..n {
        if cur == k {
            break;
        }
        let Some(p) = (cur..k).find(|&i| ring.is_unit(*w.get(i, c))) else {
            continue;
        };
        w.swap_rows(cur, p);
        let inv = ring.unit_inv(*w.get(cur, c));
        for j in 0..n {
            let v = ring.mul(*w.get(cur, j), inv);
            w.set(cur, j, v);
        }
        for i in 0..k {
            if i == cur {
                continue;
            }
            let f = *w.get(i, c);
            if f == 0 {
                continue;
            }
            for j in 0..n {
                let v = ring.sub(*w.get(i, j), ring.mul(f, *w.get(cur, j)));
                w.set(i, j, v);
            }
        }
        cur += 1;
    }
    if cur < k {
        return Err(Error::NotFreeSummand);
    }
    Ok(GrassPoint::from_canonical(n, k, ring.depth(), w.data().to_vec()))
}

/// Reduction of a deeper point to the level of `ring`.
pub fn reduce(ring: &ChainRing, x: &GrassPoint) -> GrassPoint {
    assert!(ring.depth() <= x.level(), "reduce goes to a shallower level");
    // Truncation keeps the identity at the pivots, hence stays canonical.
    GrassPoint::from_canonical(x.n(), x.k(), ring.depth(), x.entries.iter().map(|&e| ring.reduce(e)).collect())
}

/// All lifts of `x` to the level of `deep`, in lexicographic order.
pub fn fiber(shallow: &ChainRing, deep: &ChainRing, x: &GrassPoint) -> Vec<GrassPoint> {
    assert!(shallow.depth() <= deep.depth());
    let pivots = x.pivots(shallow);
    let extra = deep.depth() - shallow.depth();
    let step = shallow.modulus();
    let choices = deep.q_pow(extra);
    let free: Vec<usize> = (0..x.k())
        .flat_map(|a| (0..x.n()).filter(|c| !pivots.contains(c)).map(move |c| a * x.n() + c))
        .collect();
    let total = choices.pow(free.len() as u32);
    let mut out = Vec::with_capacity(total as usize);
    for code in 0..total {
        let mut e = x.entries.clone();
        let mut c = code;
        for &idx in free.iter().rev() {
            e[idx] += (c % choices) * step;
            c /= choices;
        }
        out.push(GrassPoint::from_canonical(x.n(), x.k(), deep.depth(), e));
    }
    out
}

/// `x^⊥` under the standard pairing of `(O/m^r)^n` with itself.
pub fn annihilator(ring: &ChainRing, x: &GrassPoint) -> GrassPoint {
    let (n, k) = (x.n(), x.k());
    let pivots = x.pivots(ring);
    let nonpivots: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    // f_c = e_c - sum_a x[a][c] e_{p_a} pairs to zero with every row of x.
    let m = Matrix::from_fn(n - k, n, |i, j| {
        let c = nonpivots[i];
        if j == c {
            ring.one()
        } else if let Some(a) = pivots.iter().position(|&p| p == j) {
            ring.neg(x.entry(a, c))
        } else {
            0
        }
    });
    canonicalize(ring, &m).expect("annihilator of a free summand is a free summand")
}

/// `small ⊆ big` as submodules.
pub fn contains(ring: &ChainRing, big: &GrassPoint, small: &GrassPoint) -> bool {
    let pivots = big.pivots(ring);
    (0..small.k()).all(|i| {
        (0..big.n()).all(|c| {
            let combo = pivots
                .iter()
                .enumerate()
                .fold(0, |acc, (a, &p)| ring.add(acc, ring.mul(small.entry(i, p), big.entry(a, c))));
            combo == small.entry(i, c)
        })
    })
}

/// Exact subspace spanned by the canonical rows read as polynomials or integers.
pub fn lift_subspace<S: LocalScalar>(ring: &ChainRing, x: &GrassPoint) -> Subspace<S> {
    let rows: Vec<Vec<S>> =
        (0..x.k()).map(|i| (0..x.n()).map(|j| ring.to_scalar(x.entry(i, j))).collect()).collect();
    Subspace::span(ring.model(), x.n(), &rows)
}

/// Level class of an exact subspace: its lattice `E ∩ O^n` mod `m^r`.
pub fn reduce_subspace<S: LocalScalar>(ring: &ChainRing, e: &Subspace<S>) -> Result<GrassPoint> {
    let n = e.ambient_dim();
    let rows = e
        .basis()
        .iter()
        .map(|v| v.iter().map(|x| ring.from_scalar(x)).collect::<Result<Vec<u64>>>())
        .collect::<Result<Vec<_>>>()?;
    let m = if rows.is_empty() { Matrix::from_fn(0, n, |_, _| 0) } else { Matrix::from_rows(rows) };
    canonicalize(ring, &m)
}

/// Smith exponents of the stacked generators of two summands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairInvariant {
    pub k: usize,
    pub l: usize,
    pub exponents: Vec<u32>,
}

impl PairInvariant {
    /// Rank of `x̄ ∩ ȳ` over the residue field.
    pub fn residue_intersection_dim(&self) -> usize {
        self.k + self.l - self.exponents.iter().filter(|&&e| e == 0).count()
    }
}

/// Invariant of the pair under the simultaneous level-r general linear group;
/// at level 1 it is determined by, and determines, `dim(x ∩ y)`.
pub fn pair_orbit_invariant(ring: &ChainRing, x: &GrassPoint, y: &GrassPoint) -> PairInvariant {
    assert_eq!(x.n(), y.n());
    let stacked = x.matrix().vstack(&y.matrix());
    PairInvariant { k: x.k(), l: y.k(), exponents: ring.smith_exponents(&stacked) }
}
