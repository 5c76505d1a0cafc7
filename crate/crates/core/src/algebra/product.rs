//! Product of level valuations.
//!
//! Write `φ = D_i f̂` and `ψ = D_j ĝ`. Two integral formulas are evaluated
//! independently on Grassmannian cells, always after moving `E` to the span of
//! the first `m = i + j` basis vectors:
//!
//! * diagonal route: `(φ·ψ)(E) = ∫ ĝ(L) φ(E ∩ L) μ_L(p_L(E ∩ Λ)) dL`, the
//!   diagonal pull-back of the exterior product. Only `φ` itself and a
//!   preimage of `ψ` enter.
//! * incidence route: `(φ·ψ)(E) = ∫∫ f̂(F) ĝ(L) c(F, L) s(F ∩ L, E) dF dL`.
//!   With `A_F`, `A_L` primitive bases of the annihilators the integrand is
//!   `|det [A_F | A_L]^T B_E|`.
//!
//! Cells are parametrized by the annihilators `F^⊥`, `L^⊥`, which carry the
//! same Haar measure. A cell closes once the integrand is provably constant on
//! it; cells that stay open contribute a certified enclosure.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::preimage::{IntervalValuation, Section};
use crate::error::{Error, Result};
use crate::field::q_pow;
use crate::grassmann::{annihilator, canonicalize, enumerate, level_count, GrassPoint, LevelIndex};
use crate::interval::Interval;
use crate::linalg::{Matrix, Rational};
use crate::ring::ChainRing;
use crate::transforms::cell_integral::completion;
use crate::transforms::{
    cosine_matrix_on, integrate, CellIntegrand, CellValue, ContentRecursion, DepthPolicy, Factor, OperatorMatrix,
    Quadrature,
};
use crate::valuation::LevelValuation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProductRoute {
    Diagonal,
    Incidence,
}

#[derive(Clone, Debug)]
pub struct ProductResult {
    pub value: IntervalValuation,
    /// Every quadrature met the tolerance or closed.
    pub certified: bool,
    /// Deepest level touched by any quadrature.
    pub depth: u32,
    pub warnings: Vec<String>,
}

impl ProductResult {
    pub fn is_exact(&self) -> bool {
        self.value.is_exact()
    }
}

/// Diagonal-route integral for one `(E, L̄)`: closed mass per class of `E ∩ L`.
#[derive(Clone, Debug)]
pub struct DiagonalEntry {
    pub weights: Vec<(usize, Rational)>,
    /// Upper bound of the open mass weight; the lower bound is zero.
    pub open: Rational,
    pub certified: bool,
    pub depth: u32,
}

#[derive(Debug)]
pub struct DiagonalKernel {
    pub i: usize,
    pub j: usize,
    /// Indexed by `[E][L̄]`.
    pub entries: Vec<Vec<DiagonalEntry>>,
}

#[derive(Debug)]
pub struct IncidenceKernel {
    pub i: usize,
    pub j: usize,
    /// Indexed by `[E][F̄][L̄]`.
    pub entries: Vec<Vec<Vec<Interval>>>,
    pub certified: bool,
    pub depth: u32,
}

fn standard_point(ring: &ChainRing, n: usize, m: usize) -> GrassPoint {
    let rows = Matrix::from_fn(m, n, |a, b| if a == b { ring.one() } else { 0 });
    canonicalize(ring, &rows).expect("coordinate subspace")
}

fn transport(ring: &ChainRing, u: &GrassPoint, g_t: &Matrix<u64>) -> GrassPoint {
    canonicalize(ring, &ring.mat_mul(&u.matrix(), g_t)).expect("GL_n preserves summands")
}

struct DiagonalIntegrand {
    base: ChainRing,
    n: usize,
    m: usize,
    j: usize,
    rec: Arc<ContentRecursion>,
}

impl CellIntegrand for DiagonalIntegrand {
    type Key = GrassPoint;

    fn eval(&self, ring: &ChainRing, cells: &[GrassPoint]) -> CellValue<GrassPoint> {
        let (n, m, j) = (self.n, self.m, self.j);
        let i = m - j;
        let q = ring.q();
        let d = ring.depth();
        let u = &cells[0];
        if j == 0 {
            return CellValue::Closed { key: standard_point(&self.base, n, m), value: Rational::one() };
        }
        if i == 0 {
            // E ∩ L = 0: only the content varies. Rows with pivot inside the
            // block split off; the rest is a constant block plus t^d Haar.
            let piv = u.pivots(ring);
            let rows: Vec<usize> = (0..j).filter(|&a| piv[a] >= m).collect();
            let cols: Vec<usize> = (0..m).filter(|c| !piv.contains(c)).collect();
            let sub = Matrix::from_fn(rows.len(), cols.len(), |a, b| u.entry(rows[a], cols[b]));
            let exps = if rows.is_empty() { Vec::new() } else { ring.smith_exponents(&sub) };
            let value = self.rec.expected(rows.len(), cols.len(), &exps, d);
            return CellValue::Closed { key: standard_point(&self.base, n, 0), value };
        }
        let block = Matrix::from_fn(j, m, |a, b| u.entry(a, b));
        let sm = ring.smith(&block);
        let emax = sm.exps.iter().copied().max().unwrap_or(0);
        let total: u32 = sm.exps.iter().map(|&e| e.min(d)).sum();
        // The kernel is stable mod t^{d - emax}; its class is needed mod t^r.
        if emax >= d || emax + self.base.depth() > d {
            return CellValue::Open { lo: Rational::zero(), hi: q_pow(q, -(total as i64)) };
        }
        let w = Matrix::from_fn(i, n, |a, c| if c < m { self.base.reduce(*sm.v.get(c, j + a)) } else { 0 });
        let key = canonicalize(&self.base, &w).expect("kernel columns of a unimodular matrix are primitive");
        CellValue::Closed { key, value: q_pow(q, -(total as i64)) }
    }
}

struct IncidenceIntegrand {
    m: usize,
}

impl CellIntegrand for IncidenceIntegrand {
    type Key = ();

    fn eval(&self, ring: &ChainRing, cells: &[GrassPoint]) -> CellValue<()> {
        let m = self.m;
        if m == 0 {
            return CellValue::Closed { key: (), value: Rational::one() };
        }
        let (u, w) = (&cells[0], &cells[1]);
        let stacked = Matrix::from_fn(m, m, |a, b| if a < u.k() { u.entry(a, b) } else { w.entry(a - u.k(), b) });
        let d = ring.depth();
        let exps = ring.smith_exponents(&stacked);
        let total: u32 = exps.iter().map(|&e| e.min(d)).sum();
        let value = q_pow(ring.q(), -(total as i64));
        if exps.iter().all(|&e| e < d) {
            CellValue::Closed { key: (), value }
        } else {
            CellValue::Open { lo: Rational::zero(), hi: value }
        }
    }
}

/// Caches operators, sections and product kernels at one `(q, n, r)` and policy.
pub struct ProductEngine {
    ring: ChainRing,
    n: usize,
    policy: DepthPolicy,
    rec: Arc<ContentRecursion>,
    indices: Mutex<HashMap<usize, Arc<LevelIndex>>>,
    cosines: Mutex<HashMap<usize, Arc<OperatorMatrix>>>,
    sections: Mutex<HashMap<usize, Arc<Section>>>,
    diagonal: Mutex<HashMap<(usize, usize), Arc<DiagonalKernel>>>,
    incidence: Mutex<HashMap<(usize, usize), Arc<IncidenceKernel>>>,
}

impl ProductEngine {
    pub fn new(ring: ChainRing, n: usize, policy: DepthPolicy) -> Self {
        let rec = Arc::new(ContentRecursion::new(ring.q()));
        ProductEngine {
            ring,
            n,
            policy,
            rec,
            indices: Mutex::default(),
            cosines: Mutex::default(),
            sections: Mutex::default(),
            diagonal: Mutex::default(),
            incidence: Mutex::default(),
        }
    }

    pub fn ring(&self) -> &ChainRing {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn policy(&self) -> &DepthPolicy {
        &self.policy
    }

    pub fn recursion(&self) -> &ContentRecursion {
        &self.rec
    }

    pub fn index(&self, k: usize) -> Result<Arc<LevelIndex>> {
        if let Some(x) = self.indices.lock().expect("cache").get(&k) {
            return Ok(x.clone());
        }
        let idx = Arc::new(enumerate(&self.ring, self.n, k, None)?);
        self.indices.lock().expect("cache").insert(k, idx.clone());
        Ok(idx)
    }

    /// `D_i`, rows `Gr_i`, columns `Gr_{n-i}`.
    pub fn cosine(&self, i: usize) -> Result<Arc<OperatorMatrix>> {
        if let Some(x) = self.cosines.lock().expect("cache").get(&i) {
            return Ok(x.clone());
        }
        let (rows, cols) = (self.index(i)?, self.index(self.n - i)?);
        let op = Arc::new(cosine_matrix_on(&self.ring, &rows, &cols, &self.rec)?);
        self.cosines.lock().expect("cache").insert(i, op.clone());
        Ok(op)
    }

    /// Seeds the cache with a previously computed `D_i`, e.g. read from disk.
    pub fn insert_cosine(&self, i: usize, op: OperatorMatrix) -> Result<()> {
        let (rows, cols) = (self.index(i)?, self.index(self.n - i)?);
        if op.tag != crate::transforms::TransformTag::Cosine
            || op.model != self.ring.model()
            || op.rows() != rows.len()
            || op.cols() != cols.len()
            || op.codomain.k != i
            || op.codomain.r != self.ring.depth()
        {
            return Err(Error::ModelMismatch("operator does not match this engine".into()));
        }
        self.cosines.lock().expect("cache").insert(i, Arc::new(op));
        Ok(())
    }

    pub fn section(&self, i: usize) -> Result<Arc<Section>> {
        if let Some(x) = self.sections.lock().expect("cache").get(&i) {
            return Ok(x.clone());
        }
        let s = Arc::new(Section::new(&self.cosine(i)?.entries));
        self.sections.lock().expect("cache").insert(i, s.clone());
        Ok(s)
    }

    /// Image of `f̂` on `Gr_{n-i}` under `D_i`.
    pub fn from_section(&self, i: usize, fhat: &[Rational]) -> Result<LevelValuation> {
        let idx = self.index(i)?;
        Ok(LevelValuation::new(LevelValuation::meta_for(&idx), self.cosine(i)?.entries.mul_vec(fhat)))
    }

    /// Preimage of `v` under `D_k`; exact input must lie in the image.
    pub fn section_values(&self, v: &IntervalValuation) -> Result<Vec<Interval>> {
        let s = self.section(v.meta.k)?;
        match v.to_exact() {
            Some(x) => Ok(s.apply(&x.coeffs)?.into_iter().map(Interval::point).collect()),
            None => Ok(s.apply_intervals(&v.values)),
        }
    }

    fn cell_mass(&self, k: usize) -> Rational {
        Rational::new(1.into(), level_count(self.n, k, self.ring.q(), self.ring.depth()).into())
    }

    pub fn diagonal_kernel(&self, i: usize, j: usize) -> Result<Arc<DiagonalKernel>> {
        if let Some(x) = self.diagonal.lock().expect("cache").get(&(i, j)) {
            return Ok(x.clone());
        }
        let (n, m) = (self.n, i + j);
        if m > n {
            return Err(Error::Dimension(format!("degrees {i} + {j} exceed {n}")));
        }
        let ring = &self.ring;
        let (es, ls, ws) = (self.index(m)?, self.index(n - j)?, self.index(i)?);
        let perps: Vec<GrassPoint> = ls.points().iter().map(|l| annihilator(ring, l)).collect();
        let frames: Vec<Matrix<u64>> = es.points().iter().map(|e| completion(ring, e)).collect();
        let keys: Vec<Vec<GrassPoint>> = frames
            .par_iter()
            .map(|g| {
                let g_t = g.transpose();
                perps.iter().map(|u| transport(ring, u, &g_t)).collect()
            })
            .collect();
        let unique: BTreeSet<&GrassPoint> = keys.iter().flatten().collect();
        let integrand = DiagonalIntegrand { base: *ring, n, m, j, rec: self.rec.clone() };
        let mass = self.cell_mass(j);
        let solved: Vec<(GrassPoint, Quadrature<GrassPoint>)> = unique
            .into_par_iter()
            .map(|k| {
                let quad = integrate(ring, &[Factor { start: k.clone() }], mass.clone(), &integrand, &self.policy)?;
                Ok((k.clone(), quad))
            })
            .collect::<Result<_>>()?;
        let table: HashMap<GrassPoint, Quadrature<GrassPoint>> = solved.into_iter().collect();
        let entries = frames
            .par_iter()
            .zip(keys.par_iter())
            .map(|(g, row)| {
                row.iter()
                    .map(|k| {
                        let quad = &table[k];
                        let mut weights: BTreeMap<usize, Rational> = BTreeMap::new();
                        for (w_std, value) in &quad.closed {
                            let w = canonicalize(ring, &ring.mat_mul(&w_std.matrix(), g)).expect("summand");
                            let pos = ws.position(&w).ok_or(Error::Inconsistent)?;
                            *weights.entry(pos).or_insert_with(Rational::zero) += value;
                        }
                        Ok(DiagonalEntry {
                            weights: weights.into_iter().collect(),
                            open: quad.open.hi.clone(),
                            certified: quad.certified,
                            depth: quad.depth,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let kernel = Arc::new(DiagonalKernel { i, j, entries });
        self.diagonal.lock().expect("cache").insert((i, j), kernel.clone());
        Ok(kernel)
    }

    pub fn incidence_kernel(&self, i: usize, j: usize) -> Result<Arc<IncidenceKernel>> {
        if let Some(x) = self.incidence.lock().expect("cache").get(&(i, j)) {
            return Ok(x.clone());
        }
        let (n, m) = (self.n, i + j);
        if m > n {
            return Err(Error::Dimension(format!("degrees {i} + {j} exceed {n}")));
        }
        let ring = &self.ring;
        let (es, fs, ls) = (self.index(m)?, self.index(n - i)?, self.index(n - j)?);
        let f_perp: Vec<GrassPoint> = fs.points().iter().map(|f| annihilator(ring, f)).collect();
        let l_perp: Vec<GrassPoint> = ls.points().iter().map(|l| annihilator(ring, l)).collect();
        type Pair = (GrassPoint, GrassPoint);
        let keys: Vec<Vec<Vec<Pair>>> = es
            .points()
            .par_iter()
            .map(|e| {
                let g_t = completion(ring, e).transpose();
                let fu: Vec<GrassPoint> = f_perp.iter().map(|u| transport(ring, u, &g_t)).collect();
                let lu: Vec<GrassPoint> = l_perp.iter().map(|u| transport(ring, u, &g_t)).collect();
                fu.iter().map(|a| lu.iter().map(|b| (a.clone(), b.clone())).collect()).collect()
            })
            .collect();
        let unique: BTreeSet<&Pair> = keys.iter().flatten().flatten().collect();
        let integrand = IncidenceIntegrand { m };
        let mass = self.cell_mass(i) * self.cell_mass(j);
        let solved: Vec<(Pair, Quadrature<()>)> = unique
            .into_par_iter()
            .map(|p| {
                let factors = [Factor { start: p.0.clone() }, Factor { start: p.1.clone() }];
                Ok((p.clone(), integrate(ring, &factors, mass.clone(), &integrand, &self.policy)?))
            })
            .collect::<Result<_>>()?;
        let certified = solved.iter().all(|(_, q)| q.certified);
        let depth = solved.iter().map(|(_, q)| q.depth).max().unwrap_or(ring.depth());
        let table: HashMap<Pair, Interval> = solved.into_iter().map(|(k, q)| (k, q.total())).collect();
        let entries = keys
            .iter()
            .map(|per_e| per_e.iter().map(|per_f| per_f.iter().map(|k| table[k].clone()).collect()).collect())
            .collect();
        let kernel = Arc::new(IncidenceKernel { i, j, entries, certified, depth });
        self.incidence.lock().expect("cache").insert((i, j), kernel.clone());
        Ok(kernel)
    }

    fn check_factor(&self, v: &IntervalValuation) -> Result<()> {
        let m = v.meta;
        if m.model != self.ring.model() || m.n != self.n || m.r != self.ring.depth() {
            return Err(Error::ModelMismatch("valuation does not match the engine".into()));
        }
        if v.values.len() != self.index(m.k)?.len() {
            return Err(Error::Dimension("coefficient count does not match the index".into()));
        }
        Ok(())
    }

    /// `φ·ψ` along the diagonal route.
    pub fn product(&self, phi: &IntervalValuation, psi: &IntervalValuation) -> Result<ProductResult> {
        self.product_via(phi, psi, ProductRoute::Diagonal)
    }

    pub fn product_exact(&self, phi: &LevelValuation, psi: &LevelValuation) -> Result<ProductResult> {
        self.product(&IntervalValuation::exact(phi), &IntervalValuation::exact(psi))
    }

    pub fn product_via(&self, phi: &IntervalValuation, psi: &IntervalValuation, route: ProductRoute) -> Result<ProductResult> {
        self.check_factor(phi)?;
        self.check_factor(psi)?;
        if phi.meta.dual != psi.meta.dual || phi.meta.twist != psi.meta.twist {
            return Err(Error::ModelMismatch("factors live on different spaces".into()));
        }
        let (i, j) = (phi.meta.k, psi.meta.k);
        let m = i + j;
        let meta = crate::valuation::ValuationMeta { k: m, ..phi.meta };
        if m > self.n {
            return Ok(ProductResult {
                value: IntervalValuation { meta, values: Vec::new() },
                certified: true,
                depth: self.ring.depth(),
                warnings: vec![format!("degree {m} exceeds {}: the product vanishes", self.n)],
            });
        }
        let ghat = self.section_values(psi)?;
        let (values, certified, depth) = match route {
            ProductRoute::Diagonal => {
                let kernel = self.diagonal_kernel(i, j)?;
                let spread = phi.range().hull(&Interval::zero());
                let values: Vec<Interval> = kernel
                    .entries
                    .par_iter()
                    .map(|row| {
                        row.iter().zip(&ghat).fold(Interval::zero(), |acc, (entry, g)| {
                            let mut inner = spread.scale(&entry.open);
                            for (w, weight) in &entry.weights {
                                inner = inner.add(&phi.values[*w].scale(weight));
                            }
                            acc.add(&g.mul(&inner))
                        })
                    })
                    .collect();
                let certified = kernel.entries.iter().flatten().all(|e| e.certified);
                let depth = kernel.entries.iter().flatten().map(|e| e.depth).max().unwrap_or(self.ring.depth());
                (values, certified, depth)
            }
            ProductRoute::Incidence => {
                let fhat = self.section_values(phi)?;
                let kernel = self.incidence_kernel(i, j)?;
                let values: Vec<Interval> = kernel
                    .entries
                    .par_iter()
                    .map(|per_e| {
                        per_e.iter().zip(&fhat).fold(Interval::zero(), |acc, (per_f, f)| {
                            let inner = per_f.iter().zip(&ghat).fold(Interval::zero(), |a, (x, g)| a.add(&g.mul(x)));
                            acc.add(&f.mul(&inner))
                        })
                    })
                    .collect();
                (values, kernel.certified, kernel.depth)
            }
        };
        Ok(ProductResult { value: IntervalValuation { meta, values }, certified, depth, warnings: Vec::new() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldModel;
    use crate::linalg::rat;
    use crate::valuation::spherical;
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
    fn euler_characteristic_is_an_exact_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (q, n) in [(2u64, 2usize), (3, 2), (2, 3)] {
            let e = engine(q, n);
            let chi = spherical(&e.index(0).unwrap());
            for j in 0..=n {
                let psi = random_val(&e, j, &mut rng);
                let left = e.product_exact(&chi, &psi).unwrap();
                assert_eq!(left.value.to_exact().as_ref(), Some(&psi), "q = {q}, n = {n}, j = {j}");
                let right = e.product_exact(&psi, &chi).unwrap();
                assert_eq!(right.value.to_exact().as_ref(), Some(&psi));
            }
        }
    }

    #[test]
    fn top_degree_is_exact_and_commutative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = engine(2, 2);
        for _ in 0..5 {
            let a = random_val(&e, 1, &mut rng);
            let b = random_val(&e, 1, &mut rng);
            let ab = e.product_exact(&a, &b).unwrap();
            let ba = e.product_exact(&b, &a).unwrap();
            assert!(ab.is_exact());
            assert_eq!(ab.value, ba.value);
        }
    }

    #[test]
    fn routes_agree_on_the_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in [2u64, 3] {
            let e = engine(q, 2);
            for _ in 0..3 {
                let a = IntervalValuation::exact(&random_val(&e, 1, &mut rng));
                let b = IntervalValuation::exact(&random_val(&e, 1, &mut rng));
                let diag = e.product(&a, &b).unwrap();
                let inc = e.product_via(&a, &b, ProductRoute::Incidence).unwrap();
                assert!(diag.value.overlaps(&inc.value), "{} vs {}", diag.value, inc.value);
                assert!(diag.certified);
            }
        }
    }

    #[test]
    fn routes_agree_in_three_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = engine(2, 3);
        let a = IntervalValuation::exact(&random_val(&e, 1, &mut rng));
        let b = IntervalValuation::exact(&random_val(&e, 1, &mut rng));
        let diag = e.product(&a, &b).unwrap();
        let inc = e.product_via(&a, &b, ProductRoute::Incidence).unwrap();
        assert!(diag.value.overlaps(&inc.value), "{} vs {}", diag.value, inc.value);
        let swapped = e.product(&b, &a).unwrap();
        assert!(diag.value.overlaps(&swapped.value));
        assert!(diag.value.widest() < q_pow(2, -6));
    }

    #[test]
    fn degree_overflow_vanishes_with_warning() {
        let e = engine(2, 2);
        let v = spherical(&e.index(2).unwrap());
        let w = spherical(&e.index(1).unwrap());
        let out = e.product_exact(&v, &w).unwrap();
        assert!(out.value.values.is_empty());
        assert_eq!(out.warnings.len(), 1);
    }
}
