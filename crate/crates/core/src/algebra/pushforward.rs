//! Push-forward of twisted valuations, `F_* = 𝔽_Y ∘ (F^∨)^* ∘ 𝔽_X^{-1}`.
//!
//! Coefficients are lattice-normalized on both sides. Besides the
//! definitional composite there are closed forms for injective and surjective
//! maps; they are computed independently and compared in tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::lattice::{field_rank, mat_mul};
use crate::field::{q_pow, saturation_index, smith_form, LocalScalar, Subspace};
use crate::grassmann::{enumerate, lift_subspace, reduce_subspace, LevelIndex};
use crate::linalg::{Matrix, Rational};
use crate::ring::ChainRing;
use crate::transforms::measure_chain;
use crate::valuation::{LevelValuation, ValuationMeta};

use super::linear_map::LinearMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PushforwardRoute {
    /// Fourier, dual pull-back, Fourier.
    Definitional,
    /// Closed form for injective maps.
    Injective,
    /// Closed form for surjective maps.
    Surjective,
    /// Injective or surjective closed form when applicable.
    Auto,
}

fn zero() -> Rational {
    Rational::from_integer(0.into())
}

fn columns<S: LocalScalar>(m: &Matrix<S>) -> Vec<Vec<S>> {
    (0..m.cols()).map(|j| m.column(j)).collect()
}

fn smith_sum<S: LocalScalar>(f: &LinearMap<S>) -> i64 {
    smith_form(f.model(), f.matrix()).index_valuation()
}

fn lookup<S: LocalScalar>(xi: &LevelValuation, index: &LevelIndex, e: &Subspace<S>) -> Result<Rational> {
    Ok(xi.at(index, &reduce_subspace(index.ring(), e)?)?.clone())
}

fn definitional<S: LocalScalar>(f: &LinearMap<S>, xi: &LevelValuation, index: &LevelIndex, e: &Subspace<S>) -> Result<Rational> {
    let q = f.model().q();
    let dual = f.dual();
    let u = e.annihilator();
    let Some(idx) = dual.restriction_index(&u) else {
        return Ok(zero());
    };
    let w = dual.image(&u);
    // 𝔽_Y at E^⊥, the dual pull-back, and the inverse of 𝔽_X at w.
    let outer = measure_chain(&u)?.value(q);
    let inner = measure_chain(&w)?.value(q);
    Ok(outer * q_pow(q, -idx) * lookup(xi, index, &w.annihilator())? / inner)
}

fn injective<S: LocalScalar>(f: &LinearMap<S>, xi: &LevelValuation, index: &LevelIndex, e: &Subspace<S>) -> Result<Rational> {
    let model = f.model();
    let n = f.target_dim();
    let image = Subspace::span(model, n, &columns(f.matrix()));
    if e.sum(&image).dim() < n {
        return Ok(zero());
    }
    let e0 = f.preimage(e);
    let a0 = f.restriction_index(&e0).ok_or(Error::Inconsistent)?;
    let a = smith_sum(f);
    let perp = image.annihilator();
    let b = if perp.dim() == 0 || e.dim() == 0 {
        0
    } else {
        smith_form(model, &mat_mul(&perp.basis_matrix().transpose(), &e.basis_matrix())).index_valuation()
    };
    Ok(q_pow(model.q(), a0 - a - b) * lookup(xi, index, &e0)?)
}

/// For surjective `F`: `(F_* ξ)(E) = scale · ξ(F^{-1}(E))`. Returns the scale
/// and `F^{-1}(E)`, so that `ξ` may be any function of subspaces of `X`.
pub fn surjective_transport<S: LocalScalar>(f: &LinearMap<S>, e: &Subspace<S>) -> Result<(Rational, Subspace<S>)> {
    if !f.is_surjective() {
        return Err(Error::Dimension("map is not surjective".into()));
    }
    let model = f.model();
    let pre = f.preimage(e);
    let e1 = if pre.dim() == 0 {
        0
    } else {
        let img = mat_mul(f.matrix(), &pre.basis_matrix());
        saturation_index(model, &columns(&img), f.target_dim())
    };
    Ok((q_pow(model.q(), e1 - smith_sum(f)), pre))
}

fn surjective<S: LocalScalar>(f: &LinearMap<S>, xi: &LevelValuation, index: &LevelIndex, e: &Subspace<S>) -> Result<Rational> {
    let (scale, pre) = surjective_transport(f, e)?;
    Ok(scale * lookup(xi, index, &pre)?)
}

/// `(F_* ξ)(E)` for `ξ` a level valuation of degree `k` on the source; `E`
/// has dimension `k + dim Y - dim X`.
pub fn pushforward_eval<S: LocalScalar>(
    f: &LinearMap<S>,
    xi: &LevelValuation,
    index: &LevelIndex,
    e: &Subspace<S>,
    route: PushforwardRoute,
) -> Result<Rational> {
    let (m, n) = (f.source_dim(), f.target_dim());
    if xi.meta.n != m || e.ambient_dim() != n || xi.meta.k + n < m || e.dim() != xi.meta.k + n - m {
        return Err(Error::Dimension("push-forward degree bookkeeping".into()));
    }
    let rank = if m == 0 || n == 0 { 0 } else { field_rank(f.matrix()) };
    let route = match route {
        PushforwardRoute::Auto if rank == m => PushforwardRoute::Injective,
        PushforwardRoute::Auto if rank == n => PushforwardRoute::Surjective,
        PushforwardRoute::Auto => PushforwardRoute::Definitional,
        r => r,
    };
    match route {
        PushforwardRoute::Injective if rank != m => Err(Error::Dimension("map is not injective".into())),
        PushforwardRoute::Surjective if rank != n => Err(Error::Dimension("map is not surjective".into())),
        PushforwardRoute::Injective => injective(f, xi, index, e),
        PushforwardRoute::Surjective => surjective(f, xi, index, e),
        _ => definitional(f, xi, index, e),
    }
}

/// Push-forward evaluated at the canonical lifts of the level-r points of the
/// target Grassmannian. Exact as a level valuation only for maps that respect
/// levels; otherwise it records values at the chosen representatives.
pub fn pushforward_at_lifts<S: LocalScalar>(
    ring: &ChainRing,
    f: &LinearMap<S>,
    xi: &LevelValuation,
    index: &LevelIndex,
) -> Result<LevelValuation> {
    let (m, n) = (f.source_dim(), f.target_dim());
    if xi.meta.k + n < m {
        return Err(Error::Dimension("push-forward degree is negative".into()));
    }
    let target = enumerate(ring, n, xi.meta.k + n - m, None)?;
    let coeffs = target
        .points()
        .iter()
        .map(|p| pushforward_eval(f, xi, index, &lift_subspace::<S>(ring, p), PushforwardRoute::Auto))
        .collect::<Result<Vec<_>>>()?;
    let meta = ValuationMeta { n, k: target.k(), ..xi.meta };
    Ok(LevelValuation::new(meta, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{EquiScalar, FieldModel, MixedScalar};
    use crate::grassmann::sample_haar;
    use num_traits::{One, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn indicator(index: &LevelIndex, at: usize) -> LevelValuation {
        LevelValuation::from_fn(index, |p| {
            if index.position(p) == Some(at) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    fn random_map<S: LocalScalar>(deep: &ChainRing, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> LinearMap<S> {
        let m = deep.model();
        let q = deep.q();
        LinearMap::new(
            m,
            Matrix::from_fn(rows, cols, |_, _| {
                let digits: Vec<u32> = (0..3).map(|_| rng.gen_range(0..q as u32)).collect();
                S::from_digits(m, &digits)
            }),
        )
    }

    fn dual_paths<S: LocalScalar>(model: FieldModel) {
        let ring = ChainRing::new(model, 1).unwrap();
        let deep = ring.at_depth(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        for m in 1..=3usize {
            for n in 1..=3usize {
                for _ in 0..3 {
                    let f = random_map::<S>(&deep, n, m, &mut rng);
                    let rank = f.rank();
                    for k in 0..=m {
                        if k + n < m {
                            continue;
                        }
                        let src = enumerate(&ring, m, k, None).unwrap();
                        let tgt = enumerate(&ring, n, k + n - m, None).unwrap();
                        for at in 0..src.len() {
                            let xi = indicator(&src, at);
                            for p in tgt.points() {
                                let e = lift_subspace::<S>(&ring, p);
                                let d = pushforward_eval(&f, &xi, &src, &e, PushforwardRoute::Definitional).unwrap();
                                if rank == m {
                                    let v = pushforward_eval(&f, &xi, &src, &e, PushforwardRoute::Injective).unwrap();
                                    assert_eq!(d, v, "injective, m = {m}, n = {n}, k = {k}");
                                    checked += 1;
                                }
                                if rank == n {
                                    let v = pushforward_eval(&f, &xi, &src, &e, PushforwardRoute::Surjective).unwrap();
                                    assert_eq!(d, v, "surjective, m = {m}, n = {n}, k = {k}");
                                    checked += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn dual_paths_agree_equi() {
        dual_paths::<EquiScalar>(FieldModel::equi(2).unwrap());
    }

    #[test]
    fn dual_paths_agree_mixed() {
        dual_paths::<MixedScalar>(FieldModel::mixed(2).unwrap());
    }

    #[test]
    fn identity_pushes_forward_to_itself() {
        let model = FieldModel::equi(3).unwrap();
        let ring = ChainRing::new(model, 1).unwrap();
        let idx = enumerate(&ring, 2, 1, None).unwrap();
        let xi = LevelValuation::from_fn(&idx, |p| Rational::from_integer((p.entries()[1] as i64 + 1).into()));
        let id = LinearMap::<EquiScalar>::identity(model, 2);
        assert_eq!(pushforward_at_lifts(&ring, &id, &xi, &idx).unwrap(), xi);
    }

    #[test]
    fn functoriality_pointwise() {
        // (A B)_* = A_* B_* pointwise for injective maps between lifts.
        let model = FieldModel::mixed(3).unwrap();
        let ring = ChainRing::new(model, 1).unwrap();
        let deep = ring.at_depth(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let src = enumerate(&ring, 1, 1, None).unwrap();
        let xi = LevelValuation::from_fn(&src, |_| Rational::from_integer(2.into()));
        for _ in 0..20 {
            let b = random_map::<MixedScalar>(&deep, 2, 1, &mut rng);
            let a = random_map::<MixedScalar>(&deep, 3, 2, &mut rng);
            if a.rank() < 2 || b.rank() < 1 {
                continue;
            }
            let ab = a.compose(&b).unwrap();
            let e = lift_subspace::<MixedScalar>(&deep, &sample_haar(&deep, 3, 3, &mut rng));
            let direct = pushforward_eval(&ab, &xi, &src, &e, PushforwardRoute::Auto).unwrap();
            // B_* ξ is evaluated on the only degree-2 subspace of a plane.
            let mid = pushforward_eval(&b, &xi, &src, &Subspace::full(model, 2), PushforwardRoute::Auto).unwrap();
            let full2 = enumerate(&ring, 2, 2, None).unwrap();
            let bxi = LevelValuation::new(LevelValuation::meta_for(&full2), vec![mid]);
            let nested = pushforward_eval(&a, &bxi, &full2, &e, PushforwardRoute::Auto).unwrap();
            assert_eq!(direct, nested);
        }
    }
}
