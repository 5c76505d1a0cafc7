//! Sections of cosine operators and interval-valued valuations.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::interval::{dot, Interval};
use crate::linalg::{RatMatrix, Rational};
use crate::valuation::{LevelValuation, ValuationMeta};

/// Valuation whose coefficients are certified enclosures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalValuation {
    pub meta: ValuationMeta,
    pub values: Vec<Interval>,
}

impl IntervalValuation {
    pub fn exact(v: &LevelValuation) -> Self {
        IntervalValuation { meta: v.meta, values: v.coeffs.iter().cloned().map(Interval::point).collect() }
    }

    pub fn is_exact(&self) -> bool {
        self.values.iter().all(Interval::is_point)
    }

    pub fn to_exact(&self) -> Option<LevelValuation> {
        self.is_exact().then(|| LevelValuation::new(self.meta, self.values.iter().map(|x| x.lo.clone()).collect()))
    }

    pub fn midpoint(&self) -> LevelValuation {
        LevelValuation::new(self.meta, self.values.iter().map(Interval::midpoint).collect())
    }

    pub fn widest(&self) -> Rational {
        self.values.iter().map(Interval::width).max().unwrap_or_else(Rational::zero)
    }

    /// Coefficientwise enclosures overlap.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.meta == other.meta && self.values.iter().zip(&other.values).all(|(a, b)| a.overlaps(b))
    }

    pub fn contains(&self, v: &LevelValuation) -> bool {
        self.meta == v.meta && self.values.iter().zip(&v.coeffs).all(|(a, x)| a.contains(x))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        IntervalValuation { meta: self.meta, values: self.values.iter().map(|x| x.scale(c)).collect() }
    }

    pub fn range(&self) -> Interval {
        self.values.iter().skip(1).fold(self.values[0].clone(), |acc, x| acc.hull(x))
    }
}

impl fmt::Display for IntervalValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Linear right inverse of `D` on its image: selects independent columns `C`
/// and rows `R` with `D[R, C]` invertible and solves on them.
#[derive(Clone, Debug)]
pub struct Section {
    cols: Vec<usize>,
    rows: Vec<usize>,
    inverse: RatMatrix,
    domain_len: usize,
    operator: RatMatrix,
}

impl Section {
    /// Pivot columns chosen greedily in `order`.
    pub fn with_column_order(d: &RatMatrix, order: &[usize]) -> Self {
        let reordered = d.select_columns(order);
        let (_, piv) = reordered.rref();
        let cols: Vec<usize> = piv.iter().map(|&p| order[p]).collect();
        let sub = d.select_columns(&cols);
        let (_, rows) = sub.transpose().rref();
        let square = RatMatrix::from_fn(rows.len(), cols.len(), |a, b| sub.get(rows[a], b).clone());
        let inverse = square.inverse().expect("pivot minor is invertible");
        Section { cols, rows, inverse, domain_len: d.cols(), operator: d.clone() }
    }

    pub fn new(d: &RatMatrix) -> Self {
        let order: Vec<usize> = (0..d.cols()).collect();
        Self::with_column_order(d, &order)
    }

    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    fn spread(&self, small: Vec<Rational>) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.domain_len];
        for (c, v) in self.cols.iter().zip(small) {
            out[*c] = v;
        }
        out
    }

    /// Preimage of an exact vector; fails outside the image.
    pub fn apply(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        let picked: Vec<Rational> = self.rows.iter().map(|&r| v[r].clone()).collect();
        let x = self.spread(self.inverse.mul_vec(&picked));
        if self.operator.mul_vec(&x) != v {
            return Err(Error::Inconsistent);
        }
        Ok(x)
    }

    /// Enclosure of the preimage of every vector in the box `v` that lies in the image.
    pub fn apply_intervals(&self, v: &[Interval]) -> Vec<Interval> {
        let picked: Vec<Interval> = self.rows.iter().map(|&r| v[r].clone()).collect();
        let mut out = vec![Interval::zero(); self.domain_len];
        for (a, &c) in self.cols.iter().enumerate() {
            out[c] = dot(self.inverse.row(a), &picked);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    #[test]
    fn sections_invert_on_the_image() {
        let d = RatMatrix::from_rows(vec![
            vec![rat(1, 1), rat(1, 1), rat(2, 1)],
            vec![rat(0, 1), rat(1, 1), rat(1, 1)],
            vec![rat(1, 1), rat(2, 1), rat(3, 1)],
        ]);
        let v = d.mul_vec(&[rat(1, 2), rat(-1, 1), rat(3, 1)]);
        let a = Section::new(&d);
        let b = Section::with_column_order(&d, &[2, 1, 0]);
        assert_eq!(a.rank(), 2);
        let xa = a.apply(&v).unwrap();
        let xb = b.apply(&v).unwrap();
        assert_ne!(xa, xb);
        assert_eq!(d.mul_vec(&xa), v);
        assert_eq!(d.mul_vec(&xb), v);
        assert_eq!(a.apply(&[rat(1, 1), rat(0, 1), rat(0, 1)]), Err(Error::Inconsistent));
        let boxed: Vec<Interval> = v.iter().map(|x| Interval::new(x - rat(1, 100), x + rat(1, 100))).collect();
        let enc = a.apply_intervals(&boxed);
        assert!(enc.iter().zip(&xa).all(|(i, x)| i.contains(x)));
    }
}
