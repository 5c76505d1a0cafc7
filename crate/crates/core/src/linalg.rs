//! Dense matrices with elimination over a field of coefficients.
//!
//! The algorithms are generic over [`Coefficient`]: exact rationals give exact
//! ranks and null spaces, floats give the usual tolerance-based answers.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub trait Coefficient: Num + Clone + Debug + Send + Sync + Neg<Output = Self> {
    /// Exact types pivot on the first nonzero entry, floats on the largest one.
    const EXACT: bool;
    fn is_negligible(&self) -> bool;
    fn pivot_weight(&self) -> f64;
}

impl Coefficient for BigRational {
    const EXACT: bool = true;
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn pivot_weight(&self) -> f64 {
        1.0
    }
}

impl Coefficient for Ratio<i64> {
    const EXACT: bool = true;
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn pivot_weight(&self) -> f64 {
        1.0
    }
}

macro_rules! float_coefficient {
    ($t:ty, $eps:expr) => {
        impl Coefficient for $t {
            const EXACT: bool = false;
            fn is_negligible(&self) -> bool {
                self.abs() <= $eps
            }
            fn pivot_weight(&self) -> f64 {
                self.abs() as f64
            }
        }
    };
}

float_coefficient!(f64, 1e-10);
float_coefficient!(f32, 1e-5);

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Matrix { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Rows stacked below `self`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Selects the given columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Matrix::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }
}

impl<T: Coefficient> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::filled(rows, cols, T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions");
        let mut out: Matrix<T> = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_negligible())
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let candidate = if T::EXACT {
                (row..m.rows).find(|&i| !m.get(i, col).is_negligible())
            } else {
                (row..m.rows)
                    .filter(|&i| !m.get(i, col).is_negligible())
                    .max_by(|&a, &b| {
                        m.get(a, col).pivot_weight().total_cmp(&m.get(b, col).pivot_weight())
                    })
            };
            let Some(p) = candidate else { continue };
            m.swap_rows(row, p);
            let inv = T::one() / m.get(row, col).clone();
            for j in 0..m.cols {
                let v = m.get(row, j).clone() * inv.clone();
                m.set(row, j, v);
            }
            for i in 0..m.rows {
                if i == row {
                    continue;
                }
                let factor = m.get(i, col).clone();
                if factor.is_negligible() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = m.get(i, j).clone() - factor.clone() * m.get(row, j).clone();
                    m.set(i, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self * x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![T::zero(); self.cols];
                v[f] = T::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(i, f).clone();
                }
                v
            })
            .collect()
    }

    /// A solution of `self * x = b`, or `None` if the system is inconsistent.
    /// Free variables are set to zero.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        let order: Vec<usize> = (0..self.cols).collect();
        self.solve_with_column_order(b, &order)
    }

    /// Like [`Matrix::solve`] but eliminating columns in the given order, which
    /// selects a different particular solution when the kernel is nontrivial.
    pub fn solve_with_column_order(&self, b: &[T], order: &[usize]) -> Option<Vec<T>> {
        assert_eq!(b.len(), self.rows);
        assert_eq!(order.len(), self.cols);
        let aug = Matrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.get(i, order[j]).clone()
            } else {
                b[i].clone()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![T::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[order[p]] = r.get(i, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let aug = Matrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                T::one()
            } else {
                T::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Matrix::from_fn(n, n, |i, j| r.get(i, j + n).clone()))
    }

    pub fn determinant(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = self.rows;
        let mut det = T::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&i| !m.get(i, col).is_negligible()) else {
                return T::zero();
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let piv = m.get(col, col).clone();
            det = det * piv.clone();
            for i in col + 1..n {
                let factor = m.get(i, col).clone() / piv.clone();
                if factor.is_negligible() {
                    continue;
                }
                for j in col..n {
                    let v = m.get(i, j).clone() - factor.clone() * m.get(col, j).clone();
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    /// True iff the column spaces of `self` and `other` coincide.
    pub fn same_column_space(&self, other: &Self) -> bool {
        let both = self.transpose().vstack(&other.transpose());
        let r = both.rank();
        r == self.rank() && r == other.rank()
    }
}

/// Exact rational number; the coefficient field of level valuations.
pub type Rational = BigRational;
pub type RatMatrix = Matrix<Rational>;
pub type F64Matrix = Matrix<f64>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical `"a/b"` string for an exact rational.
pub fn rat_to_string(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn rat_parse(s: &str) -> Option<Rational> {
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let a: BigInt = a.trim().parse().ok()?;
    let b: BigInt = b.trim().parse().ok()?;
    (!b.is_zero()).then(|| Rational::new(a, b))
}

pub fn rat_to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn is_nonnegative(x: &Rational) -> bool {
    !x.is_negative()
}

pub fn rat_one() -> Rational {
    Rational::one()
}
