//! Level-r valuations: coefficient vectors over a level Grassmannian.
//!
//! The coefficient at `E` multiplies the normalized measure `vol_E` with
//! `vol_E(E ∩ Λ) = 1`. Degree 0 and degree n carry a single coefficient.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldModel;
use crate::grassmann::{GrassPoint, LevelIndex};
use crate::linalg::{rat_parse, rat_to_string, RatMatrix, Rational};

/// Which space the Grassmannian lives in, and the power of `D(V)^*` attached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValuationMeta {
    pub model: FieldModel,
    pub n: usize,
    pub k: usize,
    pub r: u32,
    /// `true` for valuations on the dual space `V^∨`.
    pub dual: bool,
    /// Exponent of the twist by `D(V)^*` (Fourier images carry one).
    pub twist: i32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelValuation {
    pub meta: ValuationMeta,
    pub coeffs: Vec<Rational>,
}

impl LevelValuation {
    pub fn new(meta: ValuationMeta, coeffs: Vec<Rational>) -> Self {
        LevelValuation { meta, coeffs }
    }

    pub fn meta_for(index: &LevelIndex) -> ValuationMeta {
        ValuationMeta {
            model: index.ring().model(),
            n: index.n(),
            k: index.k(),
            r: index.level(),
            dual: false,
            twist: 0,
        }
    }

    pub fn from_fn(index: &LevelIndex, f: impl Fn(&GrassPoint) -> Rational) -> Self {
        LevelValuation::new(Self::meta_for(index), index.points().iter().map(f).collect())
    }

    pub fn zero(index: &LevelIndex) -> Self {
        Self::from_fn(index, |_| Rational::zero())
    }

    pub fn degree(&self) -> usize {
        self.meta.k
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn at(&self, index: &LevelIndex, x: &GrassPoint) -> Result<&Rational> {
        index
            .position(x)
            .map(|i| &self.coeffs[i])
            .ok_or_else(|| Error::Dimension("point does not belong to this level index".into()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        LevelValuation::new(self.meta, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        LevelValuation::new(self.meta, self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect())
    }

    /// Applies an operator matrix whose columns are indexed like `self`.
    pub fn apply(&self, m: &RatMatrix, meta: ValuationMeta) -> Self {
        LevelValuation::new(meta, m.mul_vec(&self.coeffs))
    }

    pub fn to_json(&self) -> LevelValuationJson {
        LevelValuationJson { meta: self.meta, coeffs: self.coeffs.iter().map(rat_to_string).collect() }
    }

    pub fn from_json(json: &LevelValuationJson) -> Result<Self> {
        let coeffs = json
            .coeffs
            .iter()
            .map(|s| rat_parse(s).ok_or_else(|| Error::Parse(format!("bad rational {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let expected = crate::grassmann::level_count(json.meta.n, json.meta.k, json.meta.model.q(), json.meta.r);
        if coeffs.len() as u128 != expected {
            return Err(Error::Dimension(format!("{} coefficients, index has {expected}", coeffs.len())));
        }
        Ok(LevelValuation::new(json.meta, coeffs))
    }
}

/// JSON form `{meta, coeffs}` with coefficients aligned to the index order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelValuationJson {
    pub meta: ValuationMeta,
    pub coeffs: Vec<String>,
}

/// The `GL(Λ)`-invariant valuation: all coefficients 1.
pub fn spherical(index: &LevelIndex) -> LevelValuation {
    LevelValuation::from_fn(index, |_| Rational::one())
}

/// Column-space basis of a cosine matrix: the level-r part of `Val_k`.
#[derive(Clone, Debug)]
pub struct ValSubspaceBasis {
    pub meta: ValuationMeta,
    pub basis: Vec<LevelValuation>,
}

impl ValSubspaceBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Columns are basis vectors.
    pub fn matrix(&self) -> RatMatrix {
        let rows = self.basis.first().map_or(0, |b| b.len());
        RatMatrix::from_fn(rows, self.dim(), |i, j| self.basis[j].coeffs[i].clone())
    }

    pub fn contains(&self, v: &LevelValuation) -> bool {
        self.matrix().solve(&v.coeffs).is_some()
    }

    /// Coordinates of `v` in this basis.
    pub fn coordinates(&self, v: &LevelValuation) -> Option<Vec<Rational>> {
        self.matrix().solve(&v.coeffs)
    }
}

/// Basis of the image of `cosine` (rows indexed by `codomain`).
pub fn val_space_basis(codomain: &LevelIndex, cosine: &RatMatrix) -> ValSubspaceBasis {
    let (_, pivots) = cosine.rref();
    let meta = LevelValuation::meta_for(codomain);
    let basis = pivots.iter().map(|&c| LevelValuation::new(meta, cosine.column(c))).collect();
    ValSubspaceBasis { meta, basis }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::enumerate;
    use crate::linalg::rat;
    use crate::ring::ChainRing;

    #[test]
    fn json_round_trip_and_spherical() {
        let ring = ChainRing::new(FieldModel::equi(3).unwrap(), 1).unwrap();
        let idx = enumerate(&ring, 3, 1, None).unwrap();
        let s = spherical(&idx);
        assert!(s.coeffs.iter().all(|c| c.is_one()));
        let v = LevelValuation::from_fn(&idx, |p| rat(p.entries()[1] as i64, 7));
        let j = serde_json::to_string(&v.to_json()).unwrap();
        let back = LevelValuation::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn basis_membership() {
        let ring = ChainRing::new(FieldModel::equi(2).unwrap(), 1).unwrap();
        let idx = enumerate(&ring, 2, 1, None).unwrap();
        let m = RatMatrix::from_fn(3, 3, |i, j| if i == j { rat(2, 1) } else { rat(1, 1) });
        let b = val_space_basis(&idx, &m);
        assert_eq!(b.dim(), 3);
        assert!(b.contains(&spherical(&idx)));
    }
}
