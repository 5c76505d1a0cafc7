//! Radon transforms between level Grassmannians.
//!
//! `Superset`: `(R_{p,d} f)(W) = mean of f(F)` over rank-d summands `F ⊇ W`,
//! mapping `C(Gr_d)` to `C(Gr_p)`. This is the direction that composes with
//! the cosine operators in the kernel and Lefschetz identities.
//! `Subset`: `(R f)(F) = mean of f(W)` over rank-p summands `W ⊆ F`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operator::{OperatorMatrix, SideMeta, TransformTag};
use crate::error::{Error, Result};
use crate::grassmann::{contains, enumerate, level_count, LevelIndex};
use crate::linalg::{RatMatrix, Rational};
use crate::ring::ChainRing;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadonDirection {
    Superset,
    Subset,
}

/// Matrix of `R_{p,d}` for `p < d <= n`.
pub fn radon_matrix(ring: &ChainRing, n: usize, p: usize, d: usize, dir: RadonDirection) -> Result<OperatorMatrix> {
    if p >= d || d > n {
        return Err(Error::Dimension(format!("radon transform needs p < d <= n, got p = {p}, d = {d}, n = {n}")));
    }
    let small = enumerate(ring, n, p, None)?;
    let big = enumerate(ring, n, d, None)?;
    radon_matrix_on(ring, &small, &big, dir)
}

pub fn radon_matrix_on(ring: &ChainRing, small: &LevelIndex, big: &LevelIndex, dir: RadonDirection) -> Result<OperatorMatrix> {
    let (n, p, d) = (small.n(), small.k(), big.k());
    let (q, r) = (ring.q(), ring.depth());
    let incidence: Vec<Vec<bool>> = small
        .points()
        .par_iter()
        .map(|w| big.points().iter().map(|f| contains(ring, f, w)).collect())
        .collect();
    let supersets = level_count(n - p, d - p, q, r);
    let subsets = level_count(d, p, q, r);
    // Incidence counts must match the sizes of the fibers.
    for row in &incidence {
        if row.iter().filter(|&&b| b).count() as u128 != supersets {
            return Err(Error::Inconsistent);
        }
    }
    for j in 0..big.len() {
        if incidence.iter().filter(|row| row[j]).count() as u128 != subsets {
            return Err(Error::Inconsistent);
        }
    }
    let small_side = SideMeta { n, k: p, r, dual: false };
    let big_side = SideMeta { n, k: d, r, dual: false };
    let op = match dir {
        RadonDirection::Superset => {
            let w = Rational::new(1.into(), supersets.into());
            let m = RatMatrix::from_fn(small.len(), big.len(), |a, b| {
                if incidence[a][b] {
                    w.clone()
                } else {
                    Rational::from_integer(0.into())
                }
            });
            OperatorMatrix::new(TransformTag::Radon, ring.model(), big_side, small_side, m)
        }
        RadonDirection::Subset => {
            let w = Rational::new(1.into(), subsets.into());
            let m = RatMatrix::from_fn(big.len(), small.len(), |b, a| {
                if incidence[a][b] {
                    w.clone()
                } else {
                    Rational::from_integer(0.into())
                }
            });
            OperatorMatrix::new(TransformTag::Radon, ring.model(), small_side, big_side, m)
        }
    };
    Ok(op)
}
