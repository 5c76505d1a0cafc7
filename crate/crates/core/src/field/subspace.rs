use super::lattice::{field_kernel, field_rank, mat_mul, primitive_basis};
use super::scalar::{FieldModel, LocalScalar};
use crate::linalg::Matrix;

/// Linear subspace of `F^n`, stored by a basis of `E ∩ O^n`.
#[derive(Clone, Debug)]
pub struct Subspace<S> {
    model: FieldModel,
    n: usize,
    basis: Vec<Vec<S>>,
}

impl<S: LocalScalar> Subspace<S> {
    pub fn span(model: FieldModel, n: usize, vectors: &[Vec<S>]) -> Self {
        Subspace { model, n, basis: primitive_basis(model, vectors, n) }
    }

    pub fn zero(model: FieldModel, n: usize) -> Self {
        Subspace { model, n, basis: Vec::new() }
    }

    pub fn full(model: FieldModel, n: usize) -> Self {
        let basis = (0..n)
            .map(|i| (0..n).map(|j| if i == j { S::one(model) } else { S::zero(model) }).collect())
            .collect();
        Subspace { model, n, basis }
    }

    pub fn model(&self) -> FieldModel {
        self.model
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Primitive basis: its `O`-span is `E ∩ O^n`.
    pub fn basis(&self) -> &[Vec<S>] {
        &self.basis
    }

    /// `n x dim` matrix with the primitive basis as columns.
    pub fn basis_matrix(&self) -> Matrix<S> {
        Matrix::from_fn(self.n, self.dim(), |i, j| self.basis[j][i].clone())
    }

    pub fn contains(&self, v: &[S]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        field_rank(&Matrix::from_rows(rows)) == self.dim()
    }

    pub fn contains_subspace(&self, other: &Subspace<S>) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace<S>) -> Subspace<S> {
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        Subspace::span(self.model, self.n, &all)
    }

    pub fn intersection(&self, other: &Subspace<S>) -> Subspace<S> {
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.model, self.n);
        }
        // x = A a = B b  <=>  [A | -B] (a, b) = 0.
        let (a, b) = (self.basis_matrix(), other.basis_matrix());
        let joined = Matrix::from_fn(self.n, a.cols() + b.cols(), |i, j| {
            if j < a.cols() {
                a.get(i, j).clone()
            } else {
                b.get(i, j - a.cols()).neg()
            }
        });
        let kernel = field_kernel(self.model, &joined);
        let vecs: Vec<Vec<S>> = kernel
            .iter()
            .map(|k| a.mul_coords(&k[..a.cols()]))
            .collect();
        Subspace::span(self.model, self.n, &vecs)
    }

    /// `E^⊥` in the dual space under the standard pairing.
    pub fn annihilator(&self) -> Subspace<S> {
        if self.dim() == 0 {
            return Subspace::full(self.model, self.n);
        }
        let rows = Matrix::from_rows(self.basis.clone());
        Subspace::span(self.model, self.n, &field_kernel(self.model, &rows))
    }

    pub fn same_as(&self, other: &Subspace<S>) -> bool {
        self.n == other.n && self.dim() == other.dim() && self.contains_subspace(other)
    }

    /// Image under the `m x n` matrix `f` acting on column vectors.
    pub fn image(&self, f: &Matrix<S>) -> Subspace<S> {
        assert_eq!(f.cols(), self.n);
        if self.dim() == 0 {
            return Subspace::zero(self.model, f.rows());
        }
        let img = mat_mul(f, &self.basis_matrix());
        let vecs: Vec<Vec<S>> = (0..img.cols()).map(|j| img.column(j)).collect();
        Subspace::span(self.model, f.rows(), &vecs)
    }

    /// `{x : f x ∈ E}` for an `n x m` matrix `f`.
    pub fn preimage(&self, f: &Matrix<S>) -> Subspace<S> {
        assert_eq!(f.rows(), self.n);
        let m = f.cols();
        // f x - B b = 0.
        let b = self.basis_matrix();
        let joined = Matrix::from_fn(self.n, m + b.cols(), |i, j| {
            if j < m {
                f.get(i, j).clone()
            } else {
                b.get(i, j - m).neg()
            }
        });
        let kernel = field_kernel(self.model, &joined);
        let vecs: Vec<Vec<S>> = kernel.iter().map(|k| k[..m].to_vec()).collect();
        Subspace::span(self.model, m, &vecs)
    }
}

trait MulCoords<S> {
    fn mul_coords(&self, c: &[S]) -> Vec<S>;
}

impl<S: LocalScalar> MulCoords<S> for Matrix<S> {
    fn mul_coords(&self, c: &[S]) -> Vec<S> {
        (0..self.rows())
            .map(|i| {
                c.iter()
                    .enumerate()
                    .fold(S::zero(c[0].model()), |acc, (j, x)| acc.add(&self.get(i, j).mul(x)))
            })
            .collect()
    }
}
