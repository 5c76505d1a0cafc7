//! The cosine-type operator `D_i: C(Gr_{n-i}) -> C(Gr_i)` at level r.
//!
//! `D_i[E, N] = ∫_{cell N} s(E, N') dN'` for the probability Haar measure.
//! The integral depends only on the level-r classes. It is evaluated exactly
//! by moving `E` to the standard coordinate space and reducing the kernel to
//! the content of the transversality block (see `cell_integral`). The adaptive
//! quadrature engine recomputes the same entries as certified enclosures.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::cell_integral::{
    cell_key, conditional_kernel_mean, transport_to_standard, transversality_block, CellKey, ContentRecursion,
};
use super::operator::{OperatorMatrix, SideMeta, TransformTag};
use super::quadrature::{integrate, CellIntegrand, CellValue, DepthPolicy, Factor, Quadrature};
use crate::error::{Error, Result};
use crate::field::{q_pow, LocalScalar, Subspace};
use crate::grassmann::{enumerate, level_count, reduce_subspace, GrassPoint, LevelIndex};
use crate::interval::Interval;
use crate::linalg::{RatMatrix, Rational};
use crate::ring::ChainRing;

fn cell_mass(ring: &ChainRing, n: usize, k: usize) -> Rational {
    Rational::new(1.into(), level_count(n, k, ring.q(), ring.depth()).into())
}

fn check_dims(n: usize, i: usize) -> Result<()> {
    if i > n {
        return Err(Error::Dimension(format!("cosine operator needs i <= n, got i = {i}, n = {n}")));
    }
    Ok(())
}

/// Exact `∫_{N ∈ cell} s(E, N) dN` for an exact subspace `E`.
pub fn haar_integrate<S: LocalScalar>(
    ring: &ChainRing,
    e: &Subspace<S>,
    cell: &GrassPoint,
    rec: &ContentRecursion,
) -> Result<Rational> {
    let e_bar = reduce_subspace(ring, e)?;
    if e_bar.n() != cell.n() || e_bar.k() + cell.k() != cell.n() {
        return Err(Error::Dimension("cell must have complementary dimension".into()));
    }
    Ok(cell_integral(ring, rec, &e_bar, cell))
}

fn cell_integral(ring: &ChainRing, rec: &ContentRecursion, e: &GrassPoint, cell: &GrassPoint) -> Rational {
    let key = cell_key(ring, e, cell);
    conditional_kernel_mean(rec, ring, &key) * cell_mass(ring, cell.n(), cell.k())
}

/// Exact matrix of `D_i`.
pub fn cosine_matrix(ring: &ChainRing, n: usize, i: usize, rec: &ContentRecursion) -> Result<OperatorMatrix> {
    check_dims(n, i)?;
    let rows = enumerate(ring, n, i, None)?;
    let cols = enumerate(ring, n, n - i, None)?;
    cosine_matrix_on(ring, &rows, &cols, rec)
}

/// `D_i` with prebuilt indexes (`rows` of degree `i`, `cols` of degree `n - i`).
pub fn cosine_matrix_on(
    ring: &ChainRing,
    rows: &LevelIndex,
    cols: &LevelIndex,
    rec: &ContentRecursion,
) -> Result<OperatorMatrix> {
    let (n, i) = (rows.n(), rows.k());
    if cols.n() != n || cols.k() + i != n {
        return Err(Error::Dimension("cosine indexes must be complementary".into()));
    }
    let mass = cell_mass(ring, n, n - i);
    let data: Vec<Vec<Rational>> = rows
        .points()
        .par_iter()
        .map(|e| {
            cols.points()
                .iter()
                .map(|c| conditional_kernel_mean(rec, ring, &cell_key(ring, e, c)) * &mass)
                .collect()
        })
        .collect();
    let r = ring.depth();
    Ok(OperatorMatrix::new(
        TransformTag::Cosine,
        ring.model(),
        SideMeta { n, k: n - i, r, dual: false },
        SideMeta { n, k: i, r, dual: false },
        RatMatrix::from_fn(rows.len(), cols.len(), |a, b| data[a][b].clone()),
    ))
}

/// The common row sum, when `D` maps constants to constants.
pub fn spherical_eigenvalue(op: &OperatorMatrix) -> Option<Rational> {
    let sums = op.row_sums();
    let first = sums.first()?.clone();
    sums.iter().all(|s| *s == first).then_some(first)
}

/// `D_i[M, N] |Gr_{n-i}| = D_{n-i}[N, M] |Gr_i|`: adjointness for the Haar pairings.
pub fn adjointness_holds(d_i: &OperatorMatrix, d_complement: &OperatorMatrix) -> bool {
    if d_i.rows() != d_complement.cols() || d_i.cols() != d_complement.rows() {
        return false;
    }
    let rows = Rational::from_integer(d_i.rows().into());
    let cols = Rational::from_integer(d_i.cols().into());
    (0..d_i.rows()).all(|m| (0..d_i.cols()).all(|c| d_i.get(m, c) * &cols == d_complement.get(c, m) * &rows))
}

struct BlockIntegrand {
    i: usize,
}

impl CellIntegrand for BlockIntegrand {
    type Key = ();

    fn eval(&self, ring: &ChainRing, cells: &[GrassPoint]) -> CellValue<()> {
        let block = transversality_block(ring, self.i, &cells[0]);
        let exps = if block.rows() == 0 { Vec::new() } else { ring.smith_exponents(&block) };
        let sum: u32 = exps.iter().sum();
        let bound = q_pow(ring.q(), -(sum as i64));
        if exps.iter().all(|&e| e < ring.depth()) {
            CellValue::Closed { key: (), value: bound }
        } else {
            CellValue::Open { lo: Rational::zero(), hi: bound }
        }
    }
}

/// Certified enclosure of `∫_{N ∈ cell} s(E, N) dN` by adaptive refinement.
///
/// A cell closes once every elementary divisor of the transversality block is
/// below the current depth; an open cell contributes `[0, q^{-Σ min(e_j, d)}]`.
pub fn haar_integrate_adaptive(
    ring: &ChainRing,
    e: &GrassPoint,
    cell: &GrassPoint,
    policy: &DepthPolicy,
) -> Result<Quadrature<()>> {
    if e.k() + cell.k() != cell.n() {
        return Err(Error::Dimension("cell must have complementary dimension".into()));
    }
    let moved = transport_to_standard(ring, e, cell);
    let mass = cell_mass(ring, cell.n(), cell.k());
    integrate(ring, &[Factor { start: moved }], mass, &BlockIntegrand { i: e.k() }, policy)
}

/// `D_i` by adaptive quadrature: midpoints as entries, enclosures attached.
pub fn cosine_matrix_adaptive(ring: &ChainRing, n: usize, i: usize, policy: &DepthPolicy) -> Result<OperatorMatrix> {
    check_dims(n, i)?;
    let rows = enumerate(ring, n, i, None)?;
    let cols = enumerate(ring, n, n - i, None)?;
    // Cells with equal keys have equal integrals; integrate one representative.
    let mut reps: HashMap<CellKey, (usize, usize)> = HashMap::new();
    let mut keys = Vec::with_capacity(rows.len() * cols.len());
    for (a, e) in rows.points().iter().enumerate() {
        for (b, c) in cols.points().iter().enumerate() {
            let key = cell_key(ring, e, c);
            reps.entry(key.clone()).or_insert((a, b));
            keys.push(key);
        }
    }
    let mut unique: Vec<(CellKey, (usize, usize))> = reps.into_iter().collect();
    unique.sort();
    let results: Vec<(CellKey, Quadrature<()>)> = unique
        .into_par_iter()
        .map(|(key, (a, b))| {
            haar_integrate_adaptive(ring, rows.point(a), cols.point(b), policy).map(|q| (key, q))
        })
        .collect::<Result<_>>()?;
    let by_key: HashMap<CellKey, Quadrature<()>> = results.into_iter().collect();
    let intervals: Vec<Interval> = keys.iter().map(|k| by_key[k].total()).collect();
    let entries = RatMatrix::from_fn(rows.len(), cols.len(), |a, b| intervals[a * cols.len() + b].midpoint());
    let r = ring.depth();
    let mut op = OperatorMatrix::new(
        TransformTag::Cosine,
        ring.model(),
        SideMeta { n, k: n - i, r, dual: false },
        SideMeta { n, k: i, r, dual: false },
        entries,
    );
    op.uncertified = by_key.values().any(|q| !q.certified);
    let widest = intervals.iter().map(|x| x.width()).max().unwrap_or_else(Rational::zero);
    let deepest = by_key.values().map(|q| q.depth).max().unwrap_or(r);
    op.evidence.insert("widest_interval".into(), crate::linalg::rat_to_string(&widest));
    op.evidence.insert("deepest_level".into(), deepest.to_string());
    op.evidence.insert("depth_policy".into(), policy.tag());
    op.intervals = Some(intervals);
    Ok(op)
}

/// `(q^2 + q + 1)/(q + 1)^2`: `E[s(E, N)]` for lines in the plane.
pub fn plane_line_mean(q: u64) -> Rational {
    let q = Rational::from_integer(q.into());
    let one = Rational::one();
    (&q * &q + &q + &one) / ((&q + &one) * (&q + &one))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{EquiScalar, FieldModel};
    use crate::grassmann::canonicalize;
    use crate::linalg::{rat, Matrix};

    fn ring(q: u64, r: u32) -> ChainRing {
        ChainRing::new(FieldModel::equi(q).unwrap(), r).unwrap()
    }

    #[test]
    fn spherical_eigenvalue_for_lines_in_the_plane() {
        // Independent derivation: N = (a : b), s = |b| when b is a unit, else
        // b is uniform in m and E|b| = q^{-1} * q/(q+1).
        for q in [2u64, 3] {
            let qq = rat(q as i64, 1);
            let one = rat(1, 1);
            let by_hand = &qq / (&qq + &one) + (&one / (&qq + &one)) * (&one / (&qq + &one));
            assert_eq!(plane_line_mean(q), by_hand);
            for r in [1u32, 2] {
                let rec = ContentRecursion::new(q);
                let d = cosine_matrix(&ring(q, r), 2, 1, &rec).unwrap();
                assert_eq!(spherical_eigenvalue(&d), Some(by_hand.clone()), "q={q} r={r}");
            }
        }
        assert_eq!(plane_line_mean(2), rat(7, 9));
    }

    #[test]
    fn transversal_entry_is_cell_mass() {
        let r = ring(2, 1);
        let rec = ContentRecursion::new(2);
        let d = cosine_matrix(&r, 2, 1, &rec).unwrap();
        let idx = enumerate(&r, 2, 1, None).unwrap();
        let e1 = canonicalize(&r, &Matrix::from_rows(vec![vec![1, 0]])).unwrap();
        let e2 = canonicalize(&r, &Matrix::from_rows(vec![vec![0, 1]])).unwrap();
        let (a, b) = (idx.position(&e1).unwrap(), idx.position(&e2).unwrap());
        assert_eq!(*d.get(a, b), rat(1, 3));
        // Same cell: q^{-1} * E|z| / |Gr|.
        assert_eq!(*d.get(a, a), rat(1, 2) * rat(2, 3) * rat(1, 3));
    }

    #[test]
    fn adjointness_for_small_cases() {
        for (q, r, n) in [(2u64, 1u32, 2usize), (2, 1, 3), (3, 1, 3), (2, 2, 2), (3, 2, 2)] {
            let ring = ring(q, r);
            let rec = ContentRecursion::new(q);
            for i in 0..=n {
                let a = cosine_matrix(&ring, n, i, &rec).unwrap();
                let b = cosine_matrix(&ring, n, n - i, &rec).unwrap();
                assert!(a.is_nonnegative());
                assert!(adjointness_holds(&a, &b), "q={q} r={r} n={n} i={i}");
            }
        }
    }

    #[test]
    fn equivariance_under_level_group() {
        let ring = ring(3, 1);
        let rec = ContentRecursion::new(3);
        let rows = enumerate(&ring, 3, 1, None).unwrap();
        let cols = enumerate(&ring, 3, 2, None).unwrap();
        let d = cosine_matrix_on(&ring, &rows, &cols, &rec).unwrap();
        let g = Matrix::from_rows(vec![vec![0, 1, 2], vec![1, 1, 0], vec![0, 0, 1]]);
        let act = |x: &GrassPoint| canonicalize(&ring, &ring.mat_mul(&x.matrix(), &g)).unwrap();
        for (a, e) in rows.points().iter().enumerate() {
            for (b, c) in cols.points().iter().enumerate() {
                let (ga, gb) = (rows.position(&act(e)).unwrap(), cols.position(&act(c)).unwrap());
                assert_eq!(d.get(ga, gb), d.get(a, b));
            }
        }
    }

    #[test]
    fn adaptive_encloses_exact() {
        for (n, q) in [(2usize, 2u64), (3, 2), (2, 3)] {
            let ring = ring(q, 1);
            let rec = ContentRecursion::new(q);
            let policy = DepthPolicy::standard(q);
            for i in 1..n {
                let exact = cosine_matrix(&ring, n, i, &rec).unwrap();
                let adaptive = cosine_matrix_adaptive(&ring, n, i, &policy).unwrap();
                assert!(!adaptive.uncertified);
                let iv = adaptive.intervals.as_ref().unwrap();
                for a in 0..exact.rows() {
                    for b in 0..exact.cols() {
                        let x = &iv[a * exact.cols() + b];
                        assert!(x.contains(exact.get(a, b)), "n={n} i={i} ({a},{b}): {x}");
                        assert!(x.width() <= policy.tolerance);
                    }
                }
                // Per-pair integration, without sharing results across equal keys.
                let rows = enumerate(&ring, n, i, None).unwrap();
                let cols = enumerate(&ring, n, n - i, None).unwrap();
                for (a, e) in rows.points().iter().enumerate() {
                    for (b, c) in cols.points().iter().enumerate() {
                        let quad = haar_integrate_adaptive(&ring, e, c, &policy).unwrap();
                        assert!(quad.total().contains(exact.get(a, b)));
                    }
                }
            }
        }
    }

    #[test]
    fn adaptive_intervals_are_nested() {
        let ring = ring(2, 1);
        let e = canonicalize(&ring, &Matrix::from_rows(vec![vec![1, 0]])).unwrap();
        let policy = DepthPolicy::standard(2).with_tolerance(rat(0, 1));
        let quad = haar_integrate_adaptive(&ring, &e, &e, &policy).unwrap();
        assert!(!quad.certified);
        for w in quad.history.windows(2) {
            assert!(w[0].contains_interval(&w[1]));
        }
    }

    #[test]
    fn haar_integrate_matches_matrix() {
        let ring = ring(2, 2);
        let m = ring.model();
        let rec = ContentRecursion::new(2);
        let e = Subspace::span(
            m,
            2,
            &[vec![EquiScalar::from_digits(m, &[1]), EquiScalar::from_digits(m, &[0, 1, 1])]],
        );
        let idx = enumerate(&ring, 2, 1, None).unwrap();
        let d = cosine_matrix(&ring, 2, 1, &rec).unwrap();
        let row = idx.position(&reduce_subspace(&ring, &e).unwrap()).unwrap();
        for (b, c) in idx.points().iter().enumerate() {
            assert_eq!(&haar_integrate(&ring, &e, c, &rec).unwrap(), d.get(row, b));
        }
    }
}
