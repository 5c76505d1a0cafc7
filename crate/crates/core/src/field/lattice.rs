//! Lattice linear algebra over the valuation ring: determinant valuations,
//! Smith normal form with transforms, and primitive (saturated) bases.

use super::scalar::{FieldModel, LocalScalar, Valuation};
use crate::linalg::Matrix;

fn identity<S: LocalScalar>(model: FieldModel, n: usize) -> Matrix<S> {
    Matrix::from_fn(n, n, |i, j| if i == j { S::one(model) } else { S::zero(model) })
}

pub fn mat_mul<S: LocalScalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    assert_eq!(a.cols(), b.rows());
    let model = model_of(a).or_else(|| model_of(b)).expect("nonempty operand");
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).fold(S::zero(model), |acc, k| {
            let x = a.get(i, k);
            let y = b.get(k, j);
            if x.is_zero() || y.is_zero() {
                acc
            } else {
                acc.add(&x.mul(y))
            }
        })
    })
}

fn model_of<S: LocalScalar>(m: &Matrix<S>) -> Option<FieldModel> {
    m.data().first().map(|x| x.model())
}

/// Valuation of the determinant by fraction-free Bareiss elimination.
pub fn det_valuation<S: LocalScalar>(m: &Matrix<S>) -> Valuation {
    assert_eq!(m.rows(), m.cols(), "det_valuation needs a square matrix");
    let n = m.rows();
    if n == 0 {
        return Valuation::Finite(0);
    }
    let model = model_of(m).expect("nonempty");
    let mut a = m.clone();
    let mut prev = S::one(model);
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a.get(i, k).is_zero()) else {
            return Valuation::Infinite;
        };
        a.swap_rows(k, p);
        let akk = a.get(k, k).clone();
        for i in k + 1..n {
            let aik = a.get(i, k).clone();
            for j in k + 1..n {
                let num = akk.mul(a.get(i, j)).sub(&aik.mul(a.get(k, j)));
                a.set(i, j, num.div(&prev).expect("previous pivot is nonzero"));
            }
            a.set(i, k, S::zero(model));
        }
        prev = akk;
    }
    a.get(n - 1, n - 1).val()
}

#[derive(Clone, Debug)]
pub struct SmithForm<S> {
    /// Weakly increasing; `Infinite` marks zero diagonal entries.
    pub divisors: Vec<Valuation>,
    /// `u * m * v` is diagonal with entries `t^{divisors[i]}`.
    pub u: Matrix<S>,
    pub v: Matrix<S>,
    pub u_inv: Matrix<S>,
    pub v_inv: Matrix<S>,
}

impl<S> SmithForm<S> {
    pub fn rank(&self) -> usize {
        self.divisors.iter().filter(|d| !d.is_infinite()).count()
    }

    /// Sum of the finite divisor valuations.
    pub fn index_valuation(&self) -> i64 {
        self.divisors.iter().filter_map(|d| d.finite()).sum()
    }
}

fn row_axpy<S: LocalScalar>(m: &mut Matrix<S>, dst: usize, src: usize, c: &S) {
    // row dst += c * row src
    for j in 0..m.cols() {
        let v = m.get(dst, j).add(&c.mul(m.get(src, j)));
        m.set(dst, j, v);
    }
}

fn col_axpy<S: LocalScalar>(m: &mut Matrix<S>, dst: usize, src: usize, c: &S) {
    for i in 0..m.rows() {
        let v = m.get(i, dst).add(&c.mul(m.get(i, src)));
        m.set(i, dst, v);
    }
}

fn swap_cols<S: Clone>(m: &mut Matrix<S>, a: usize, b: usize) {
    if a != b {
        for i in 0..m.rows() {
            let x = m.get(i, a).clone();
            let y = m.get(i, b).clone();
            m.set(i, a, y);
            m.set(i, b, x);
        }
    }
}

fn scale_row<S: LocalScalar>(m: &mut Matrix<S>, r: usize, c: &S) {
    for j in 0..m.cols() {
        let v = m.get(r, j).mul(c);
        m.set(r, j, v);
    }
}

fn scale_col<S: LocalScalar>(m: &mut Matrix<S>, col: usize, c: &S) {
    for i in 0..m.rows() {
        let v = m.get(i, col).mul(c);
        m.set(i, col, v);
    }
}

/// Smith normal form over the valuation ring, pivoting on minimal valuation.
pub fn smith_form<S: LocalScalar>(model: FieldModel, m: &Matrix<S>) -> SmithForm<S> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut u = identity::<S>(model, rows);
    let mut u_inv = identity::<S>(model, rows);
    let mut v = identity::<S>(model, cols);
    let mut v_inv = identity::<S>(model, cols);
    let mut divisors = Vec::with_capacity(rows.min(cols));
    for k in 0..rows.min(cols) {
        let mut best: Option<(usize, usize, Valuation)> = None;
        for i in k..rows {
            for j in k..cols {
                let val = a.get(i, j).val();
                if !val.is_infinite() && best.is_none_or(|(_, _, b)| val < b) {
                    best = Some((i, j, val));
                }
            }
        }
        let Some((pi, pj, pv)) = best else {
            divisors.extend(std::iter::repeat_n(Valuation::Infinite, rows.min(cols) - k));
            break;
        };
        a.swap_rows(k, pi);
        u.swap_rows(k, pi);
        swap_cols(&mut u_inv, k, pi);
        swap_cols(&mut a, k, pj);
        swap_cols(&mut v, k, pj);
        v_inv.swap_rows(k, pj);
        let pivot = a.get(k, k).clone();
        let pinv = pivot.inv().expect("nonzero pivot");
        for i in k + 1..rows {
            if a.get(i, k).is_zero() {
                continue;
            }
            let c = a.get(i, k).mul(&pinv).neg();
            row_axpy(&mut a, i, k, &c);
            row_axpy(&mut u, i, k, &c);
            // inverse of (row i += c row k) is column k -= c column i on the left factor
            col_axpy(&mut u_inv, k, i, &c.neg());
        }
        for j in k + 1..cols {
            if a.get(k, j).is_zero() {
                continue;
            }
            let c = a.get(k, j).mul(&pinv).neg();
            col_axpy(&mut a, j, k, &c);
            col_axpy(&mut v, j, k, &c);
            row_axpy(&mut v_inv, k, j, &c.neg());
        }
        let Valuation::Finite(e) = pv else { unreachable!() };
        // pivot = unit * t^e; rescale row k by the unit's inverse.
        let unit = pivot.mul(&S::pow_uniformizer(model, -e));
        let unit_inv = unit.inv().expect("unit");
        scale_row(&mut a, k, &unit_inv);
        scale_row(&mut u, k, &unit_inv);
        scale_col(&mut u_inv, k, &unit);
        divisors.push(pv);
    }
    SmithForm { divisors, u, v, u_inv, v_inv }
}

/// Columns of the matrix whose columns are `vectors`.
pub fn columns_matrix<S: LocalScalar>(model: FieldModel, vectors: &[Vec<S>], n: usize) -> Matrix<S> {
    if vectors.is_empty() {
        return Matrix::from_fn(n, 0, |_, _| S::zero(model));
    }
    assert!(vectors.iter().all(|v| v.len() == n), "vector length must equal n");
    Matrix::from_fn(n, vectors.len(), |i, j| vectors[j][i].clone())
}

/// Basis of `span(vectors) ∩ O^n`.
pub fn primitive_basis<S: LocalScalar>(model: FieldModel, vectors: &[Vec<S>], n: usize) -> Vec<Vec<S>> {
    let m = columns_matrix(model, vectors, n);
    if m.cols() == 0 {
        return Vec::new();
    }
    let sf = smith_form(model, &m);
    (0..sf.rank()).map(|j| sf.u_inv.column(j)).collect()
}

/// Vectors completing a primitive basis to a basis of `O^n`.
pub fn extend_to_lattice_basis<S: LocalScalar>(
    model: FieldModel,
    basis: &[Vec<S>],
    n: usize,
) -> Vec<Vec<S>> {
    if basis.is_empty() {
        return (0..n).map(|j| identity::<S>(model, n).column(j)).collect();
    }
    let sf = smith_form(model, &columns_matrix(model, basis, n));
    (sf.rank()..n).map(|j| sf.u_inv.column(j)).collect()
}

/// Valuation of the index of the `O`-span of `vectors` in its saturation.
pub fn saturation_index<S: LocalScalar>(model: FieldModel, vectors: &[Vec<S>], n: usize) -> i64 {
    if vectors.is_empty() {
        return 0;
    }
    smith_form(model, &columns_matrix(model, vectors, n)).index_valuation()
}

/// Rank over the field.
pub fn field_rank<S: LocalScalar>(m: &Matrix<S>) -> usize {
    field_rref(m).1.len()
}

/// Reduced row echelon form over the field.
pub fn field_rref<S: LocalScalar>(m: &Matrix<S>) -> (Matrix<S>, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols() {
        if row == a.rows() {
            break;
        }
        let Some(p) = (row..a.rows()).find(|&i| !a.get(i, col).is_zero()) else {
            continue;
        };
        a.swap_rows(row, p);
        let inv = a.get(row, col).inv().expect("nonzero");
        scale_row(&mut a, row, &inv);
        for i in 0..a.rows() {
            if i != row && !a.get(i, col).is_zero() {
                let c = a.get(i, col).neg();
                row_axpy(&mut a, i, row, &c);
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Basis of the right kernel over the field.
pub fn field_kernel<S: LocalScalar>(model: FieldModel, m: &Matrix<S>) -> Vec<Vec<S>> {
    let (r, pivots) = field_rref(m);
    (0..m.cols())
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            let mut v = vec![S::zero(model); m.cols()];
            v[f] = S::one(model);
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = r.get(i, f).neg();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::scalar::{EquiScalar, MixedScalar};

    type E = EquiScalar;

    fn model() -> FieldModel {
        FieldModel::equi(2).unwrap()
    }

    fn s(x: &str) -> E {
        E::parse(model(), x).unwrap()
    }

    fn mat(rows: &[&[&str]]) -> Matrix<E> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|x| s(x)).collect()).collect())
    }

    #[test]
    fn det_valuation_examples() {
        assert_eq!(det_valuation(&identity::<E>(model(), 3)), Valuation::Finite(0));
        let d = mat(&[&["[1]", "[]", "[]"], &["[]", "[0,1]", "[]"], &["[]", "[]", "[0,0,0,1]"]]);
        assert_eq!(det_valuation(&d), Valuation::Finite(4));
        let sing = mat(&[&["[0,1]", "[1]"], &["[0,0,1]", "[0,1]"]]);
        assert_eq!(det_valuation(&sing), Valuation::Infinite);
    }

    #[test]
    fn smith_examples() {
        let m = model();
        let sf = smith_form(m, &identity::<E>(m, 2));
        assert_eq!(sf.divisors, vec![Valuation::Finite(0); 2]);
        let d = mat(&[&["[0,1]", "[]"], &["[]", "[0,0,1]"]]);
        assert_eq!(smith_form(m, &d).divisors, vec![Valuation::Finite(1), Valuation::Finite(2)]);
        let a = mat(&[&["[1]", "[1]"], &["[1]", "[1,1]"]]);
        let sf = smith_form(m, &a);
        assert_eq!(sf.divisors, vec![Valuation::Finite(0), Valuation::Finite(1)]);
        let prod = mat_mul(&mat_mul(&sf.u, &a), &sf.v);
        assert_eq!(prod, mat(&[&["[1]", "[]"], &["[]", "[0,1]"]]));
        assert_eq!(mat_mul(&sf.u, &sf.u_inv), identity::<E>(m, 2));
        assert_eq!(mat_mul(&sf.v, &sf.v_inv), identity::<E>(m, 2));
        assert_eq!(det_valuation(&sf.u), Valuation::Finite(0));
    }

    #[test]
    fn smith_rectangular_mixed() {
        let m = FieldModel::mixed(3).unwrap();
        let a: Matrix<MixedScalar> = Matrix::from_rows(vec![
            vec![MixedScalar::from_int(m, 3), MixedScalar::from_int(m, 6), MixedScalar::from_int(m, 9)],
            vec![MixedScalar::from_int(m, 1), MixedScalar::from_int(m, 2), MixedScalar::from_int(m, 4)],
        ]);
        let sf = smith_form(m, &a);
        assert_eq!(sf.divisors, vec![Valuation::Finite(0), Valuation::Finite(1)]);
        let d = mat_mul(&mat_mul(&sf.u, &a), &sf.v);
        assert_eq!(d.get(0, 1), &MixedScalar::zero(m));
        assert_eq!(d.get(1, 1), &MixedScalar::from_int(m, 3));
    }

    #[test]
    fn primitive_basis_examples() {
        let m = model();
        let e1 = vec![s("[1]"), s("[]")];
        assert_eq!(primitive_basis(m, std::slice::from_ref(&e1), 2), vec![e1.clone()]);
        let te1 = vec![s("[0,1]"), s("[]")];
        let b = primitive_basis(m, &[te1], 2);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0][0].val(), Valuation::Finite(0));
        assert!(b[0][1].is_zero());
        // e1+e2 and e1-e2 coincide over GF(2): rank one.
        let v1 = vec![s("[1]"), s("[1]")];
        assert_eq!(primitive_basis(m, &[v1.clone(), v1.clone()], 2).len(), 1);
        assert!(primitive_basis::<E>(m, &[], 2).is_empty());
    }

    #[test]
    fn primitive_basis_index_oracle() {
        // Over GF(3): e1+e2, e1-e2 span O^2 with index det = -2, a unit.
        let m = FieldModel::equi(3).unwrap();
        let one = E::one(m);
        let v1 = vec![one.clone(), one.clone()];
        let v2 = vec![one.clone(), one.neg()];
        let d = det_valuation(&columns_matrix(m, &[v1.clone(), v2.clone()], 2));
        assert_eq!(saturation_index(m, &[v1, v2], 2), d.finite().unwrap());
    }

    #[test]
    fn extension_is_unimodular() {
        let m = model();
        let v = vec![s("[1,1]"), s("[0,1]"), s("[0,0,1]")];
        let b = primitive_basis(m, &[v], 3);
        let mut all = b.clone();
        all.extend(extend_to_lattice_basis(m, &b, 3));
        assert_eq!(det_valuation(&columns_matrix(m, &all, 3)), Valuation::Finite(0));
    }

    #[test]
    fn field_kernel_annihilates() {
        let m = model();
        let a = mat(&[&["[1]", "[0,1]", "[1,1]"]]);
        let k = field_kernel(m, &a);
        assert_eq!(k.len(), 2);
        for v in &k {
            let prod = mat_mul(&a, &columns_matrix(m, std::slice::from_ref(v), 3));
            assert!(prod.get(0, 0).is_zero());
        }
    }
}
