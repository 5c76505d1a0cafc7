//! Pull-back of valuations along linear maps.
//!
//! `(F^* f)(E) = f(F(E)) · q^{-idx}` where `idx` is the valuation of the index
//! of `F(E ∩ Λ_X)` in `F(E) ∩ Λ_Y`; zero when `F|_E` is not injective.

use crate::error::{Error, Result};
use crate::field::{q_pow, smith_form, LocalScalar, Subspace};
use crate::grassmann::{enumerate, lift_subspace, reduce_subspace, LevelIndex};
use crate::linalg::{RatMatrix, Rational};
use crate::ring::ChainRing;
use crate::transforms::{OperatorMatrix, SideMeta, TransformTag};
use crate::valuation::LevelValuation;

use super::linear_map::LinearMap;

/// Pull-back of an arbitrary function of `k`-dimensional subspaces of `Y`.
pub fn pullback_eval_fn<S: LocalScalar>(
    f: &LinearMap<S>,
    target: impl Fn(&Subspace<S>) -> Result<Rational>,
    e: &Subspace<S>,
) -> Result<Rational> {
    if e.ambient_dim() != f.source_dim() {
        return Err(Error::Dimension("subspace does not live in the source".into()));
    }
    match f.restriction_index(e) {
        None => Ok(Rational::from_integer(0.into())),
        Some(idx) => Ok(target(&f.image(e))? * q_pow(f.model().q(), -idx)),
    }
}

/// `(F^* f)(E)` for a level valuation `f` on `index`.
pub fn pullback_eval<S: LocalScalar>(
    f: &LinearMap<S>,
    target: &LevelValuation,
    index: &LevelIndex,
    e: &Subspace<S>,
) -> Result<Rational> {
    if target.meta.k != e.dim() || target.meta.n != f.target_dim() {
        return Err(Error::Dimension("degree or ambient dimension mismatch".into()));
    }
    pullback_eval_fn(f, |img| Ok(target.at(index, &reduce_subspace(index.ring(), img)?)?.clone()), e)
}

/// Largest elementary divisor valuation of an integral injective square map.
pub fn level_shift<S: LocalScalar>(f: &LinearMap<S>) -> Result<u32> {
    if f.source_dim() != f.target_dim() {
        return Err(Error::NotLevelCompatible("map is not square; use pointwise evaluation".into()));
    }
    if f.matrix().data().iter().any(|x| !x.is_integral()) {
        return Err(Error::NotLevelCompatible("map is not integral; use pointwise evaluation".into()));
    }
    let sf = smith_form(f.model(), f.matrix());
    if sf.rank() < f.source_dim() {
        return Err(Error::NotLevelCompatible("map is singular; use pointwise evaluation".into()));
    }
    Ok(sf.divisors.iter().filter_map(|d| d.finite()).max().unwrap_or(0) as u32)
}

/// Matrix of `F^*` from level-r valuations on `Y` to level `r + v` on `X`,
/// `v` the largest elementary divisor valuation of `F`. Classes at level
/// `r + v` determine both `F(E) mod m^r` and the index factor.
pub fn pullback_matrix<S: LocalScalar>(ring: &ChainRing, f: &LinearMap<S>, k: usize) -> Result<OperatorMatrix> {
    if f.model() != ring.model() {
        return Err(Error::ModelMismatch("map and ring disagree".into()));
    }
    let v = level_shift(f)?;
    let n = f.source_dim();
    let source_ring = ring.at_depth(ring.depth() + v)?;
    let rows = enumerate(&source_ring, n, k, None)?;
    let cols = enumerate(ring, n, k, None)?;
    let mut m = RatMatrix::zeros(rows.len(), cols.len());
    for (a, x) in rows.points().iter().enumerate() {
        let e = lift_subspace::<S>(&source_ring, x);
        let idx = f.restriction_index(&e).ok_or(Error::Inconsistent)?;
        let b = cols.position(&reduce_subspace(ring, &f.image(&e))?).ok_or(Error::Inconsistent)?;
        m.set(a, b, q_pow(ring.q(), -idx));
    }
    let mut op = OperatorMatrix::new(
        TransformTag::Pullback,
        ring.model(),
        SideMeta { n, k, r: ring.depth(), dual: false },
        SideMeta { n, k, r: source_ring.depth(), dual: false },
        m,
    );
    op.evidence.insert("level_shift".into(), v.to_string());
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{EquiScalar, FieldModel, MixedScalar};
    use crate::grassmann::{fiber, sample_haar};
    use crate::linalg::{rat, Matrix};
    use num_traits::{One, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn perm_map<S: LocalScalar>(m: FieldModel, perm: &[usize]) -> LinearMap<S> {
        let n = perm.len();
        LinearMap::new(m, Matrix::from_fn(n, n, |i, j| if perm[i] == j { S::one(m) } else { S::zero(m) }))
    }

    #[test]
    fn identity_and_permutations() {
        let m = FieldModel::equi(2).unwrap();
        let ring = ChainRing::new(m, 1).unwrap();
        let id = pullback_matrix(&ring, &LinearMap::<EquiScalar>::identity(m, 3), 1).unwrap();
        assert_eq!(id.entries, RatMatrix::identity(7));
        let p = pullback_matrix(&ring, &perm_map::<EquiScalar>(m, &[2, 0, 1]), 1).unwrap();
        for i in 0..p.rows() {
            let row = p.entries.row(i);
            assert_eq!(row.iter().filter(|x| x.is_one()).count(), 1);
            assert_eq!(row.iter().filter(|x| x.is_zero()).count(), 6);
        }
    }

    #[test]
    fn diag_t_one_shifts_level_and_matches_pointwise() {
        let m = FieldModel::mixed(3).unwrap();
        let ring = ChainRing::new(m, 1).unwrap();
        let pi = MixedScalar::uniformizer(m);
        let g = LinearMap::new(
            m,
            Matrix::from_rows(vec![vec![pi, MixedScalar::zero(m)], vec![MixedScalar::zero(m), MixedScalar::one(m)]]),
        );
        let op = pullback_matrix(&ring, &g, 1).unwrap();
        assert_eq!(op.codomain.r, 2);
        let cols = enumerate(&ring, 2, 1, None).unwrap();
        let target = LevelValuation::from_fn(&cols, |p| rat(p.entries()[0] as i64 + 2 * p.entries()[1] as i64 + 1, 1));
        let image = target.apply(&op.entries, LevelValuation::meta_for(&enumerate(&ring.at_depth(2).unwrap(), 2, 1, None).unwrap()));
        let deep = ring.at_depth(4).unwrap();
        let rows = enumerate(&ring.at_depth(2).unwrap(), 2, 1, None).unwrap();
        let mut factors = std::collections::BTreeSet::new();
        for (a, x) in rows.points().iter().enumerate() {
            for y in fiber(&ring.at_depth(2).unwrap(), &deep, x).iter().step_by(5) {
                let e = lift_subspace::<MixedScalar>(&deep, y);
                let v = pullback_eval(&g, &target, &cols, &e).unwrap();
                assert_eq!(v, image.coeffs[a]);
            }
            factors.insert(op.entries.row(a).iter().find(|x| !x.is_zero()).cloned().unwrap());
        }
        // Lines where g loses a factor of π and lines where it does not.
        assert_eq!(factors.into_iter().collect::<Vec<_>>(), vec![rat(1, 3), rat(1, 1)]);
    }

    #[test]
    fn functoriality_pointwise() {
        let m = FieldModel::equi(2).unwrap();
        let ring = ChainRing::new(m, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let random_map = |rng: &mut ChaCha8Rng| {
            let x = sample_haar(&ring, 6, 3, rng);
            LinearMap::new(m, Matrix::from_fn(3, 3, |i, j| ring.to_scalar::<EquiScalar>(x.entry(i % 3, 3 + j))))
        };
        let f = |e: &Subspace<EquiScalar>| Ok(rat(1 + e.basis()[0][0].val().finite().unwrap_or(9), 1));
        for _ in 0..100 {
            let a = random_map(&mut rng);
            let b = random_map(&mut rng);
            let e = lift_subspace::<EquiScalar>(&ring, &sample_haar(&ring, 3, 1, &mut rng));
            let ab = a.compose(&b).unwrap();
            let direct = pullback_eval_fn(&ab, f, &e).unwrap();
            let nested = pullback_eval_fn(&b, |w| pullback_eval_fn(&a, f, w), &e).unwrap();
            assert_eq!(direct, nested);
        }
    }

    #[test]
    fn incompatible_maps_are_rejected() {
        let m = FieldModel::equi(2).unwrap();
        let ring = ChainRing::new(m, 1).unwrap();
        let proj = LinearMap::new(m, Matrix::from_fn(1, 2, |_, j| if j == 0 { EquiScalar::one(m) } else { EquiScalar::zero(m) }));
        assert!(matches!(pullback_matrix(&ring, &proj, 1), Err(Error::NotLevelCompatible(_))));
    }
}
