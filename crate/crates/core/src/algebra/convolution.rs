//! Convolution of twisted valuations, `φ ∗ ψ = 𝔽(𝔽^{-1}φ · 𝔽^{-1}ψ)`.
//!
//! The Fourier matrices square to the identity, so `𝔽^{-1}` is `𝔽` again with
//! the side and twist label restored. Degrees add as `i + j - n`.
//! Independently, `a_*(φ ⊠ ψ)` along the addition map `V × V -> V` is
//! evaluated pointwise for comparison.

use super::exterior::{exterior_product_eval, ExteriorValue};
use super::linear_map::LinearMap;
use super::preimage::IntervalValuation;
use super::product::{ProductEngine, ProductResult};
use super::pushforward::surjective_transport;
use crate::error::{Error, Result};
use crate::field::{LocalScalar, Subspace};
use crate::interval::dot;
use crate::linalg::{Matrix, Rational};
use crate::ring::ChainRing;
use crate::transforms::{fourier_matrix, fourier_meta};
use crate::valuation::{LevelValuation, ValuationMeta};

/// Fourier transform of an enclosure, coefficientwise.
pub fn fourier_intervals(ring: &ChainRing, v: &IntervalValuation) -> Result<IntervalValuation> {
    let m = v.meta;
    if m.model != ring.model() || m.r != ring.depth() {
        return Err(Error::ModelMismatch("valuation and ring disagree".into()));
    }
    let op = fourier_matrix(ring, m.n, m.k, m.dual)?;
    let values = (0..op.rows()).map(|a| dot(op.entries.row(a), &v.values)).collect();
    Ok(IntervalValuation { meta: fourier_meta(m), values })
}

/// `vol ⊗ vol^{-1}` carrying the label `meta` (its degree is forced to `n`).
pub fn convolution_unit(meta: ValuationMeta) -> LevelValuation {
    LevelValuation::new(ValuationMeta { k: meta.n, ..meta }, vec![Rational::from_integer(1.into())])
}

pub fn convolution(engine: &ProductEngine, phi: &IntervalValuation, psi: &IntervalValuation) -> Result<ProductResult> {
    if phi.meta != (ValuationMeta { k: phi.meta.k, ..psi.meta }) {
        return Err(Error::ModelMismatch("factors carry different labels".into()));
    }
    let n = engine.n();
    if phi.meta.k + psi.meta.k < n {
        return Ok(ProductResult {
            value: IntervalValuation { meta: phi.meta, values: Vec::new() },
            certified: true,
            depth: engine.ring().depth(),
            warnings: vec![format!("degree {} + {} is below {n}: the convolution vanishes", phi.meta.k, psi.meta.k)],
        });
    }
    let ring = engine.ring();
    let a = fourier_intervals(ring, phi)?;
    let b = fourier_intervals(ring, psi)?;
    let mut p = engine.product(&a, &b)?;
    p.value = fourier_intervals(ring, &p.value)?;
    Ok(p)
}

/// The addition map `V × V -> V`.
pub fn addition_map<S: LocalScalar>(ring: &ChainRing, n: usize) -> LinearMap<S> {
    let m = ring.model();
    LinearMap::new(m, Matrix::from_fn(n, 2 * n, |a, b| if b % n == a { S::one(m) } else { S::zero(m) }))
}

/// `(a_*(φ ⊠ ψ))(E)` through the surjective closed form for `a`.
pub fn convolution_via_addition<S: LocalScalar>(
    engine: &ProductEngine,
    phi: &IntervalValuation,
    psi: &IntervalValuation,
    e: &Subspace<S>,
) -> Result<ExteriorValue> {
    let add = addition_map::<S>(engine.ring(), engine.n());
    let (scale, pre) = surjective_transport(&add, e)?;
    let mut v = exterior_product_eval(engine, phi, engine, psi, &pre)?;
    v.value = v.value.scale(&scale);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{q_pow, EquiScalar, FieldModel};
    use crate::grassmann::lift_subspace;
    use crate::linalg::rat;
    use crate::transforms::DepthPolicy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn engine(q: u64, n: usize) -> ProductEngine {
        let ring = ChainRing::new(FieldModel::equi(q).unwrap(), 1).unwrap();
        ProductEngine::new(ring, n, DepthPolicy::standard(q).with_extra_depth(5))
    }

    fn random_val(e: &ProductEngine, k: usize, rng: &mut ChaCha8Rng) -> LevelValuation {
        let len = e.index(e.n() - k).unwrap().len();
        let fhat: Vec<Rational> = (0..len).map(|_| rat(rng.gen_range(-3..4), 1)).collect();
        e.from_section(k, &fhat).unwrap()
    }

    #[test]
    fn unit_is_volume_over_volume() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let e = engine(2, 2);
        for k in 0..=2 {
            let psi = random_val(&e, k, &mut rng);
            let unit = convolution_unit(psi.meta);
            let out = convolution(&e, &IntervalValuation::exact(&unit), &IntervalValuation::exact(&psi)).unwrap();
            assert_eq!(out.value.to_exact(), Some(psi));
        }
    }

    #[test]
    fn fourier_intertwines_product_and_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let e = engine(2, 2);
        for _ in 0..3 {
            let a = IntervalValuation::exact(&random_val(&e, 1, &mut rng));
            let b = IntervalValuation::exact(&random_val(&e, 1, &mut rng));
            let lhs = fourier_intervals(e.ring(), &e.product(&a, &b).unwrap().value).unwrap();
            let fa = fourier_intervals(e.ring(), &a).unwrap();
            let fb = fourier_intervals(e.ring(), &b).unwrap();
            let rhs = convolution(&e, &fa, &fb).unwrap();
            assert!(lhs.overlaps(&rhs.value));
        }
    }

    #[test]
    fn addition_push_forward_matches_fourier_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let ring = ChainRing::new(FieldModel::equi(2).unwrap(), 1).unwrap();
        let e = ProductEngine::new(ring, 2, DepthPolicy::standard(2).with_extra_depth(10));
        for (i, j) in [(1usize, 1usize), (2, 1), (1, 2)] {
            let a = IntervalValuation::exact(&random_val(&e, i, &mut rng));
            let b = IntervalValuation::exact(&random_val(&e, j, &mut rng));
            let conv = convolution(&e, &a, &b).unwrap();
            let idx = e.index(i + j - 2).unwrap();
            for (w, p) in idx.points().iter().enumerate() {
                let sub = lift_subspace::<EquiScalar>(e.ring(), p);
                let direct = convolution_via_addition(&e, &a, &b, &sub).unwrap();
                assert!(direct.value.overlaps(&conv.value.values[w]), "({i}, {j}) at {w}: {} vs {}", direct.value, conv.value.values[w]);
                assert!(direct.value.width() < q_pow(2, -6));
            }
        }
    }
}
