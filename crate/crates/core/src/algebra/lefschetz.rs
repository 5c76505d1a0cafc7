//! Multiplication by powers of the spherical valuation `V_1`.
//!
//! For `φ = D_i f̂` one has `φ·V_1^k = c_{n,i,k} · D_{i+k} R_{n-i-k,n-i} f̂`
//! with a positive constant `c_{n,i,k}`. The right side is exact; the constant
//! is calibrated on the spherical line against quadrature products, so every
//! rank statement below is independent of it.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::preimage::IntervalValuation;
use super::product::{ProductEngine, ProductResult};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::{RatMatrix, Rational};
use crate::transforms::{radon_matrix_on, spherical_eigenvalue, RadonDirection};
use crate::valuation::{spherical, LevelValuation};

/// `V_1^k`, computed as `V_1^{k-1}·V_1` with `V_1^0 = χ`.
pub fn spherical_power(engine: &ProductEngine, k: usize) -> Result<ProductResult> {
    if k > engine.n() {
        return Err(Error::Dimension(format!("V_1^{k} vanishes for n = {}", engine.n())));
    }
    let v1 = IntervalValuation::exact(&spherical(&*engine.index(1.min(engine.n()))?));
    let mut acc = ProductResult {
        value: IntervalValuation::exact(&spherical(&*engine.index(0)?)),
        certified: true,
        depth: engine.ring().depth(),
        warnings: Vec::new(),
    };
    for _ in 0..k {
        // The enclosure enters the diagonal route directly; V_1 only through its section.
        let next = engine.product(&acc.value, &v1)?;
        acc = ProductResult {
            certified: acc.certified && next.certified,
            depth: acc.depth.max(next.depth),
            warnings: [acc.warnings, next.warnings].concat(),
            value: next.value,
        };
    }
    Ok(acc)
}

/// Matrix of `f̂ ↦ D_{i+k} R_{n-i-k,n-i} f̂`, from `C(Gr_{n-i})` to `C(Gr_{i+k})`.
pub fn lefschetz_operator(engine: &ProductEngine, i: usize, k: usize) -> Result<RatMatrix> {
    let n = engine.n();
    if i + k > n {
        return Err(Error::Dimension(format!("degree {} exceeds {n}", i + k)));
    }
    let radon = radon_to(engine, n - i - k, n - i)?;
    Ok(engine.cosine(i + k)?.entries.mul(&radon))
}

/// Map `C(Gr_from) -> C(Gr_to)` averaging over incident subspaces; the
/// identity when the degrees agree.
fn radon_to(engine: &ProductEngine, to: usize, from: usize) -> Result<RatMatrix> {
    let (a, b) = (engine.index(to)?, engine.index(from)?);
    Ok(match to.cmp(&from) {
        std::cmp::Ordering::Equal => RatMatrix::identity(a.len()),
        std::cmp::Ordering::Less => radon_matrix_on(engine.ring(), &a, &b, RadonDirection::Superset)?.entries,
        std::cmp::Ordering::Greater => radon_matrix_on(engine.ring(), &b, &a, RadonDirection::Subset)?.entries,
    })
}

fn eigenvalue(engine: &ProductEngine, i: usize) -> Result<Rational> {
    spherical_eigenvalue(&*engine.cosine(i)?).ok_or(Error::Inconsistent)
}

/// Enclosure of `c_{n,i,k}`: `1_i · V_1^k` divided by `D_{i+k} R f̂` for the
/// constant preimage of `1_i`.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub i: usize,
    pub k: usize,
    pub constant: Interval,
    /// The quadrature product is constant within its enclosures.
    pub spherical: bool,
    pub certified: bool,
}

pub fn calibration(engine: &ProductEngine, i: usize, k: usize) -> Result<Calibration> {
    let power = spherical_power(engine, k)?;
    let sph = IntervalValuation::exact(&spherical(&*engine.index(i)?));
    let prod = engine.product(&power.value, &sph)?;
    let ratio = eigenvalue(engine, i)? / eigenvalue(engine, i + k)?;
    let constant = prod.value.range().scale(&ratio);
    let first = &prod.value.values[0];
    Ok(Calibration {
        i,
        k,
        constant,
        spherical: prod.value.values.iter().all(|x| x.overlaps(first)),
        certified: power.certified && prod.certified,
    })
}

/// `φ·V_1^k` for `φ = D_i f̂`: the constant and the exact valuation
/// `D_{i+k} R f̂`. For `k = 0` this is `φ` itself with constant 1.
pub fn product_with_v1_power(
    engine: &ProductEngine,
    phi: &LevelValuation,
    k: usize,
) -> Result<(Interval, LevelValuation)> {
    let i = phi.meta.k;
    if k == 0 {
        return Ok((Interval::point(Rational::from_integer(1.into())), phi.clone()));
    }
    let fhat = engine.section(i)?.apply(&phi.coeffs)?;
    let image = lefschetz_operator(engine, i, k)?.mul_vec(&fhat);
    let meta = crate::valuation::ValuationMeta { k: i + k, ..phi.meta };
    Ok((calibration(engine, i, k)?.constant, LevelValuation::new(meta, image)))
}

/// Ranks behind `Ker(D_{n-i} ∘ R_{i,n-i}) = Ker(D_i)` and behind multiplication by
/// `V_1^{n-2i}` being a bijection `Val_i -> Val_{n-i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LefschetzRanks {
    pub n: usize,
    pub i: usize,
    pub dim_source: usize,
    pub dim_target: usize,
    pub rank_composite: usize,
    pub rank_stacked: usize,
}

impl LefschetzRanks {
    /// The kernels of `D_i` and of the composite coincide.
    pub fn kernels_equal(&self) -> bool {
        self.rank_stacked == self.dim_source && self.rank_composite == self.dim_source
    }

    /// The induced map on `Val_i` is well defined, injective and onto `Val_{n-i}`.
    pub fn bijective(&self) -> bool {
        self.kernels_equal() && self.dim_source == self.dim_target
    }
}

pub fn lefschetz_ranks(engine: &ProductEngine, i: usize) -> Result<LefschetzRanks> {
    let n = engine.n();
    if i > n {
        return Err(Error::Dimension(format!("degree {i} exceeds {n}")));
    }
    let d_i = engine.cosine(i)?;
    let d_c = engine.cosine(n - i)?;
    let composite = d_c.entries.mul(&radon_to(engine, i, n - i)?);
    Ok(LefschetzRanks {
        n,
        i,
        dim_source: d_i.entries.rank(),
        dim_target: d_c.entries.rank(),
        rank_composite: composite.rank(),
        rank_stacked: d_i.entries.vstack(&composite).rank(),
    })
}

/// The smallest lower bound among the coefficients of `V_1^k`.
pub fn positivity_margin(power: &IntervalValuation) -> Rational {
    power.values.iter().map(|x| x.lo.clone()).min().unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{q_pow, FieldModel};
    use crate::linalg::rat;
    use crate::ring::ChainRing;
    use crate::transforms::DepthPolicy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn engine(q: u64, n: usize) -> ProductEngine {
        let ring = ChainRing::new(FieldModel::equi(q).unwrap(), 1).unwrap();
        ProductEngine::new(ring, n, DepthPolicy::standard(q).with_extra_depth(5))
    }

    #[test]
    fn powers_of_v1_are_positive_and_spherical() {
        for (q, n) in [(2u64, 2usize), (3, 2), (2, 3)] {
            let e = engine(q, n);
            for k in 1..=n {
                let p = spherical_power(&e, k).unwrap();
                assert!(positivity_margin(&p.value) > Rational::zero(), "q = {q}, n = {n}, k = {k}");
                let first = &p.value.values[0];
                assert!(p.value.values.iter().all(|x| x.overlaps(first)));
            }
            // Top degree is exact from exact factors; V_1^{n-1} is already an enclosure for n = 3.
            let top = spherical_power(&e, n).unwrap();
            assert_eq!(top.is_exact(), n == 2);
            assert!(top.value.widest() < q_pow(q, -6));
        }
    }

    #[test]
    fn lemma_matches_quadrature_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, i, k) in [(2usize, 0usize, 1usize), (2, 0, 2), (2, 1, 1), (3, 1, 1), (3, 1, 2), (3, 0, 2)] {
            let e = engine(2, n);
            let len = e.index(n - i).unwrap().len();
            let fhat: Vec<Rational> = (0..len).map(|_| rat(rng.gen_range(-3..4), 1)).collect();
            let phi = e.from_section(i, &fhat).unwrap();
            let (c, exact) = product_with_v1_power(&e, &phi, k).unwrap();
            assert!(c.lo > Rational::zero());
            let power = spherical_power(&e, k).unwrap();
            let quad = e.product(&power.value, &IntervalValuation::exact(&phi)).unwrap();
            let predicted = IntervalValuation {
                meta: exact.meta,
                values: exact.coeffs.iter().map(|x| c.scale(x)).collect(),
            };
            assert!(quad.value.overlaps(&predicted), "n = {n}, i = {i}, k = {k}: {} vs {}", quad.value, predicted);
            assert!(c.width() < q_pow(2, -6));
        }
    }

    #[test]
    fn zero_power_is_the_identity() {
        let e = engine(3, 2);
        let phi = spherical(&e.index(1).unwrap());
        let (c, out) = product_with_v1_power(&e, &phi, 0).unwrap();
        assert!(c.is_point());
        assert_eq!(out, phi);
    }

    #[test]
    fn hard_lefschetz_ranks() {
        for q in [2u64, 3] {
            for (n, i) in [(2usize, 0usize), (3, 0), (3, 1), (2, 1)] {
                let r = lefschetz_ranks(&engine(q, n), i).unwrap();
                assert!(r.bijective(), "{r:?}");
            }
        }
    }
}
