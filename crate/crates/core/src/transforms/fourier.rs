//! Fourier transform of level valuations: transport along `E ↦ E^⊥`.
//!
//! In lattice-normalized coordinates the coefficient at `E^⊥` is the
//! coefficient at `E` times the scalar of the measure chain
//! `D(E) ≅ D(E^∨)^* ≅ D(V^∨/E^⊥)^* ≅ D(E^⊥) ⊗ D(V^∨)^*`.
//! Each step is evaluated on concrete lattices and recorded, not assumed.

use std::collections::BTreeSet;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::operator::{OperatorMatrix, SideMeta, TransformTag};
use crate::error::{Error, Result};
use crate::field::lattice::columns_matrix;
use crate::field::{
    det_valuation, extend_to_lattice_basis, q_pow, smith_form, EquiScalar, FieldModel, LocalScalar, MixedScalar,
    Subspace, Valuation,
};
use crate::grassmann::{annihilator, enumerate, lift_subspace, GrassPoint};
use crate::linalg::{rat_to_string, Matrix, RatMatrix, Rational};
use crate::ring::ChainRing;
use crate::valuation::{LevelValuation, ValuationMeta};

/// Exponents of `q` contributed by each step of the chain at one subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChainScalars {
    /// `vol_E ↦ (vol_E^∨)^{-1}`, evaluated through a non-primitive sublattice.
    pub duality: i64,
    /// Index of the restriction image of `Λ^∨` in `(E ∩ Λ)^∨`.
    pub restriction: i64,
    /// Fubini decomposition of `vol_{Λ^∨}` along `E^⊥`.
    pub fubini: i64,
}

impl ChainScalars {
    pub fn exponent(&self) -> i64 {
        self.duality + self.restriction + self.fubini
    }

    pub fn value(&self, q: u64) -> Rational {
        q_pow(q, self.exponent())
    }
}

fn finite(v: Valuation) -> Result<i64> {
    v.finite().ok_or(Error::NotFreeSummand)
}

fn mul<S: LocalScalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    crate::field::lattice::mat_mul(a, b)
}

/// Chain scalars of `E` with the standard lattice `O^n` and its dual.
pub fn measure_chain<S: LocalScalar>(e: &Subspace<S>) -> Result<ChainScalars> {
    let model = e.model();
    let (n, k) = (e.ambient_dim(), e.dim());
    let t = S::uniformizer(model);
    let b = e.basis_matrix();

    // Step 1: L' = L X with X = t I + (ones above the diagonal) has
    // vol_E(L') = q^{-v(det X)}, so the dual measure gives L'^∨ mass q^{v(det X)};
    // L^∨ = L'^∨ X^T inside E^∨.
    let x = Matrix::from_fn(k, k, |i, j| {
        if i == j {
            t.clone()
        } else if j > i {
            S::one(model)
        } else {
            S::zero(model)
        }
    });
    let duality = if k == 0 { 0 } else { finite(det_valuation(&x))? - finite(det_valuation(&x.transpose()))? };

    // Step 2: the functionals e_j^* restrict to the rows of B in dual-basis
    // coordinates; their span has index q^{v} in (E ∩ Λ)^∨.
    let restriction_index = if k == 0 { 0 } else { smith_form(model, &b.transpose()).index_valuation() };
    let restriction = -restriction_index;

    // Step 3: complete a primitive basis A of E^⊥ ∩ Λ^∨ by C; compare
    // vol_{Λ^∨}(span[A|C]) with (vol_A ⊗ vol_image)(span[A|C]).
    let perp = e.annihilator();
    let a_cols = perp.basis().to_vec();
    let c_cols = extend_to_lattice_basis(model, &a_cols, n);
    let mut all = a_cols.clone();
    all.extend(c_cols.iter().cloned());
    let joint = if n == 0 { 0 } else { finite(det_valuation(&columns_matrix(model, &all, n)))? };
    let image = if k == 0 {
        0
    } else {
        let c = columns_matrix(model, &c_cols, n);
        finite(det_valuation(&mul(&c.transpose(), &b)))? - restriction_index
    };
    let fubini = image - joint;
    Ok(ChainScalars { duality, restriction, fubini })
}

/// Chain scalars of the canonical lift of a level point.
pub fn measure_chain_at(ring: &ChainRing, x: &GrassPoint) -> Result<ChainScalars> {
    match ring.model() {
        FieldModel::EquiChar { .. } => measure_chain(&lift_subspace::<EquiScalar>(ring, x)),
        FieldModel::MixedChar { .. } => measure_chain(&lift_subspace::<MixedScalar>(ring, x)),
    }
}

/// `F: C(Gr_k) -> C(Gr_{n-k})` on the dual side. `dual` says whether the
/// domain already lives on `V^∨`; the pairing identifies `V^∨∨` with `V`.
pub fn fourier_matrix(ring: &ChainRing, n: usize, k: usize, dual: bool) -> Result<OperatorMatrix> {
    if k > n {
        return Err(Error::Dimension(format!("k = {k} exceeds n = {n}")));
    }
    let dom = enumerate(ring, n, k, None)?;
    let cod = enumerate(ring, n, n - k, None)?;
    let mut m = RatMatrix::zeros(cod.len(), dom.len());
    let mut seen = BTreeSet::new();
    for (j, e) in dom.points().iter().enumerate() {
        let chain = measure_chain_at(ring, e)?;
        seen.insert(chain);
        let perp = annihilator(ring, e);
        let i = cod.position(&perp).ok_or(Error::Inconsistent)?;
        m.set(i, j, chain.value(ring.q()));
    }
    let r = ring.depth();
    let mut op = OperatorMatrix::new(
        TransformTag::Fourier,
        ring.model(),
        SideMeta { n, k, r, dual },
        SideMeta { n, k: n - k, r, dual: !dual },
        m,
    );
    let observed: Vec<String> = seen
        .iter()
        .map(|c| format!("{}:{}:{}->{}", c.duality, c.restriction, c.fubini, rat_to_string(&c.value(ring.q()))))
        .collect();
    op.evidence.insert("chain_scalars".into(), observed.join(","));
    op.evidence.insert(
        "chain_scalars_all_one".into(),
        seen.iter().all(|c| c.value(ring.q()).is_one()).to_string(),
    );
    Ok(op)
}

/// Fourier transform of one valuation; the twist by `D(V)^*` moves by one.
pub fn fourier(ring: &ChainRing, v: &LevelValuation) -> Result<LevelValuation> {
    let meta = v.meta;
    if meta.model != ring.model() || meta.r != ring.depth() {
        return Err(Error::ModelMismatch("valuation and ring disagree".into()));
    }
    let op = fourier_matrix(ring, meta.n, meta.k, meta.dual)?;
    Ok(v.apply(&op.entries, fourier_meta(meta)))
}

/// Degree, side and twist label after one Fourier transform. Two transforms
/// restore the original label.
pub fn fourier_meta(meta: ValuationMeta) -> ValuationMeta {
    ValuationMeta {
        k: meta.n - meta.k,
        dual: !meta.dual,
        twist: if meta.dual { meta.twist - 1 } else { meta.twist + 1 },
        ..meta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::reduce_subspace;
    use crate::linalg::rat;
    use crate::valuation::spherical;

    fn rings() -> Vec<ChainRing> {
        let mut out = Vec::new();
        for q in [2u64, 3] {
            for r in [1u32, 2] {
                out.push(ChainRing::new(FieldModel::equi(q).unwrap(), r).unwrap());
                out.push(ChainRing::new(FieldModel::mixed(q).unwrap(), r).unwrap());
            }
        }
        out
    }

    #[test]
    fn plancherel() {
        for ring in rings() {
            for n in [2usize, 3] {
                for k in 0..=n {
                    let f = fourier_matrix(&ring, n, k, false).unwrap();
                    let g = fourier_matrix(&ring, n, n - k, true).unwrap();
                    assert_eq!(g.entries.mul(&f.entries), RatMatrix::identity(f.cols()));
                    assert_eq!(f.evidence["chain_scalars_all_one"], "true");
                }
            }
        }
    }

    #[test]
    fn chain_with_non_primitive_span() {
        // Spanning vectors t e1 + t e2 and t^2 e3 describe the same subspace as e1 + e2, e3.
        let m = FieldModel::equi(2).unwrap();
        let s = |d: &[u32]| EquiScalar::from_digits(m, d);
        let e = Subspace::span(m, 3, &[vec![s(&[0, 1]), s(&[0, 1]), s(&[])], vec![s(&[]), s(&[]), s(&[0, 0, 1])]]);
        let c = measure_chain(&e).unwrap();
        assert_eq!(c.value(2), rat(1, 1));
    }

    fn exact_perp<S: LocalScalar>(ring: &ChainRing, x: &GrassPoint) -> GrassPoint {
        reduce_subspace(ring, &lift_subspace::<S>(ring, x).annihilator()).unwrap()
    }

    #[test]
    fn annihilator_matches_exact() {
        for ring in rings() {
            for k in 0..=3 {
                let idx = enumerate(&ring, 3, k, None).unwrap();
                for x in idx.points() {
                    let perp = match ring.model() {
                        FieldModel::EquiChar { .. } => exact_perp::<EquiScalar>(&ring, x),
                        FieldModel::MixedChar { .. } => exact_perp::<MixedScalar>(&ring, x),
                    };
                    assert_eq!(perp, annihilator(&ring, x));
                }
            }
        }
    }

    #[test]
    fn chi_and_vol() {
        let ring = ChainRing::new(FieldModel::equi(2).unwrap(), 1).unwrap();
        let idx0 = enumerate(&ring, 3, 0, None).unwrap();
        let chi = spherical(&idx0);
        let f = fourier(&ring, &chi).unwrap();
        assert_eq!((f.meta.k, f.meta.dual, f.meta.twist), (3, true, 1));
        assert_eq!(f.coeffs, vec![rat(1, 1)]);
        let back = fourier(&ring, &f).unwrap();
        assert_eq!(back, chi);
    }
}
