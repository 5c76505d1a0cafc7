use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::lattice::{field_rank, mat_mul};
use crate::field::{det_valuation, q_pow, saturation_index, FieldModel, LocalScalar, Subspace, Valuation};
use crate::linalg::{Matrix, Rational};

/// `F: F^m -> F^n` acting on column vectors, with its dual `F^∨ = F^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap<S> {
    model: FieldModel,
    matrix: Matrix<S>,
    dual: Matrix<S>,
}

impl<S: LocalScalar> LinearMap<S> {
    /// `matrix` is `dim Y x dim X`.
    pub fn new(model: FieldModel, matrix: Matrix<S>) -> Self {
        let dual = matrix.transpose();
        LinearMap { model, matrix, dual }
    }

    pub fn identity(model: FieldModel, n: usize) -> Self {
        Self::new(model, Matrix::from_fn(n, n, |i, j| if i == j { S::one(model) } else { S::zero(model) }))
    }

    /// `v ↦ (v, v)` into `V x V`.
    pub fn diagonal(model: FieldModel, n: usize) -> Self {
        Self::new(model, Matrix::from_fn(2 * n, n, |i, j| if i % n == j { S::one(model) } else { S::zero(model) }))
    }

    /// `(x, y) ↦ (y, x)` on `F^a x F^b`.
    pub fn swap(model: FieldModel, a: usize, b: usize) -> Self {
        let n = a + b;
        Self::new(
            model,
            Matrix::from_fn(n, n, |i, j| {
                let hit = if i < b { j == a + i } else { j == i - b };
                if hit {
                    S::one(model)
                } else {
                    S::zero(model)
                }
            }),
        )
    }

    /// `x ↦ (x, 0)` from `F^a` into `F^a x F^b`.
    pub fn inclusion(model: FieldModel, a: usize, b: usize) -> Self {
        Self::new(model, Matrix::from_fn(a + b, a, |i, j| if i == j { S::one(model) } else { S::zero(model) }))
    }

    /// `S x T` acting blockwise.
    pub fn product(&self, other: &Self) -> Self {
        let (r1, c1) = (self.target_dim(), self.source_dim());
        let (r2, c2) = (other.target_dim(), other.source_dim());
        Self::new(
            self.model,
            Matrix::from_fn(r1 + r2, c1 + c2, |i, j| {
                if i < r1 && j < c1 {
                    self.matrix.get(i, j).clone()
                } else if i >= r1 && j >= c1 {
                    other.matrix.get(i - r1, j - c1).clone()
                } else {
                    S::zero(self.model)
                }
            }),
        )
    }

    pub fn model(&self) -> FieldModel {
        self.model
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dual(&self) -> LinearMap<S> {
        LinearMap { model: self.model, matrix: self.dual.clone(), dual: self.matrix.clone() }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap<S>) -> Result<LinearMap<S>> {
        if self.source_dim() != inner.target_dim() {
            return Err(Error::Dimension("composition of incompatible maps".into()));
        }
        Ok(Self::new(self.model, mat_mul(&self.matrix, &inner.matrix)))
    }

    pub fn rank(&self) -> usize {
        if self.matrix.rows() == 0 || self.matrix.cols() == 0 {
            return 0;
        }
        field_rank(&self.matrix)
    }

    pub fn is_injective(&self) -> bool {
        self.rank() == self.source_dim()
    }

    pub fn is_surjective(&self) -> bool {
        self.rank() == self.target_dim()
    }

    pub fn image(&self, e: &Subspace<S>) -> Subspace<S> {
        e.image(&self.matrix)
    }

    pub fn preimage(&self, e: &Subspace<S>) -> Subspace<S> {
        e.preimage(&self.matrix)
    }

    pub fn kernel(&self) -> Subspace<S> {
        Subspace::zero(self.model, self.target_dim()).preimage(&self.matrix)
    }

    /// Valuation of the index of `F(E ∩ Λ_X)` in `F(E) ∩ Λ_Y`; `None` if `F|_E` is not injective.
    pub fn restriction_index(&self, e: &Subspace<S>) -> Option<i64> {
        if e.dim() == 0 {
            return Some(0);
        }
        let img = mat_mul(&self.matrix, &e.basis_matrix());
        let vecs: Vec<Vec<S>> = (0..img.cols()).map(|j| img.column(j)).collect();
        if field_rank(&img) < e.dim() {
            return None;
        }
        Some(saturation_index(self.model, &vecs, self.target_dim()))
    }
}

/// Coefficient of `T(F, scale·vol_Y)` against `vol_X`: `scale·|det F|`; zero if singular.
pub fn density_pullback<S: LocalScalar>(f: &LinearMap<S>, scale: &Rational) -> Result<Rational> {
    if f.source_dim() != f.target_dim() {
        return Err(Error::Dimension("density pull-back needs a square map".into()));
    }
    if f.source_dim() == 0 {
        return Ok(scale.clone());
    }
    Ok(match det_valuation(f.matrix()) {
        Valuation::Infinite => Rational::zero(),
        Valuation::Finite(v) => scale * q_pow(f.model().q(), -v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::EquiScalar;
    use crate::linalg::rat;

    #[test]
    fn density_examples() {
        let m = FieldModel::equi(3).unwrap();
        let id = LinearMap::<EquiScalar>::identity(m, 2);
        assert_eq!(density_pullback(&id, &rat(5, 2)).unwrap(), rat(5, 2));
        let t = EquiScalar::uniformizer(m);
        let z = EquiScalar::zero(m);
        let scaled = LinearMap::new(m, Matrix::from_rows(vec![vec![t.clone(), z.clone()], vec![z.clone(), t]]));
        assert_eq!(density_pullback(&scaled, &rat(1, 1)).unwrap(), rat(1, 9));
        let one = EquiScalar::one(m);
        let singular = LinearMap::new(m, Matrix::from_rows(vec![vec![one.clone(), one.clone()], vec![one.clone(), one]]));
        assert_eq!(density_pullback(&singular, &rat(1, 1)).unwrap(), rat(0, 1));
    }

    #[test]
    fn dual_of_dual_and_structure_maps() {
        let m = FieldModel::mixed(2).unwrap();
        let f = LinearMap::new(m, Matrix::from_fn(3, 2, |i, j| crate::field::MixedScalar::from_int(m, (i * 2 + j) as i64)));
        assert_eq!(f.dual().dual(), f);
        let d = LinearMap::<crate::field::MixedScalar>::diagonal(m, 2);
        let s = LinearMap::<crate::field::MixedScalar>::swap(m, 2, 2);
        assert_eq!(s.compose(&d).unwrap(), d);
        assert!(d.is_injective() && !d.is_surjective());
    }
}
