//! Exterior product `φ ⊠ ψ` evaluated at exact subspaces of `X x Y`.
//!
//! With `ψ = D_j ĝ` and `E ⊆ X x Y` of dimension `i + j`,
//! `(φ ⊠ ψ)(E) = ∫ ĝ(L) φ(π_X(E ∩ (X x L))) q^{-c(L)} dL` over `L ∈ Gr_{n_Y - j}(Y)`.
//! `q^{-c}` compares the lattice measure of `E` with the product of the
//! measures on `E_L = E ∩ (X x L)` (through `π_X`) and on `E / E_L` (through
//! `p_L π_Y`). Integration runs over cells of `L^⊥`, lifted to exact
//! subspaces, so this path shares no code with the product kernels.

use num_traits::Zero;

use super::preimage::IntervalValuation;
use super::product::ProductEngine;
use crate::error::{Error, Result};
use crate::field::lattice::{field_kernel, mat_mul};
use crate::field::{primitive_basis, q_pow, smith_form, LocalScalar, Subspace, Valuation};
use crate::grassmann::{annihilator, reduce_subspace, GrassPoint, LevelIndex};
use crate::interval::Interval;
use crate::linalg::{Matrix, Rational};
use crate::ring::ChainRing;
use crate::transforms::{integrate, CellIntegrand, CellValue, DepthPolicy, Factor};

#[derive(Clone, Debug)]
pub struct ExteriorValue {
    pub value: Interval,
    pub certified: bool,
    pub depth: u32,
}

struct ExteriorIntegrand<'a, S> {
    x_index: &'a LevelIndex,
    n_x: usize,
    basis: Matrix<S>,
}

fn divisor_sum(divs: &[Valuation], cap: i64) -> (i64, i64, bool) {
    let mut sum = 0;
    let mut max = 0;
    let mut finite = true;
    for d in divs {
        match d.finite() {
            Some(v) if v < cap => {
                sum += v;
                max = max.max(v);
            }
            _ => {
                sum += cap;
                max = cap;
                finite = false;
            }
        }
    }
    (sum, max, finite)
}

impl<S: LocalScalar> CellIntegrand for ExteriorIntegrand<'_, S> {
    type Key = usize;

    fn eval(&self, ring: &ChainRing, cells: &[GrassPoint]) -> CellValue<usize> {
        let model = ring.model();
        let q = ring.q();
        let d = ring.depth() as i64;
        let u = &cells[0];
        let (n_x, m) = (self.n_x, self.basis.cols());
        let n_y = self.basis.rows() - n_x;
        let j = u.k();
        let a = Matrix::from_fn(j, n_y, |r, c| ring.to_scalar::<S>(u.entry(r, c)));
        let pi_y = Matrix::from_fn(n_y, m, |r, c| self.basis.get(n_x + r, c).clone());
        let pi_x = Matrix::from_fn(n_x, m, |r, c| self.basis.get(r, c).clone());
        let (esum, emax, efinite) = if j == 0 {
            (0, 0, true)
        } else {
            divisor_sum(&smith_form(model, &mat_mul(&a, &pi_y)).divisors, d)
        };
        let open = |extra: i64| CellValue::Open { lo: Rational::zero(), hi: q_pow(q, -(esum + extra)) };
        if !efinite {
            return open(0);
        }
        let kernel = if j == 0 {
            (0..m).map(|c| (0..m).map(|r| if r == c { S::one(model) } else { S::zero(model) }).collect()).collect()
        } else {
            primitive_basis(model, &field_kernel(model, &mat_mul(&a, &pi_y)), m)
        };
        if kernel.len() != m - j {
            return open(0);
        }
        let k = Matrix::from_fn(m, kernel.len(), |r, c| kernel[c][r].clone());
        let p = if kernel.is_empty() { Matrix::from_fn(n_x, 0, |_, _| S::zero(model)) } else { mat_mul(&pi_x, &k) };
        let (csum, cmax, cfinite) =
            if kernel.is_empty() { (0, 0, true) } else { divisor_sum(&smith_form(model, &p).divisors, d) };
        if !cfinite || emax + cmax + self.x_index.level() as i64 > d {
            return open(0);
        }
        let vecs: Vec<Vec<S>> = (0..p.cols()).map(|c| p.column(c)).collect();
        let w = Subspace::span(model, n_x, &vecs);
        let key = reduce_subspace(self.x_index.ring(), &w)
            .ok()
            .and_then(|w| self.x_index.position(&w))
            .expect("intersection class lies in the index");
        CellValue::Closed { key, value: q_pow(q, -(esum + csum)) }
    }
}

/// `(φ ⊠ ψ)(E)` with `ψ = D_j ĝ` given through `ĝ` on `y_index = Gr_{n_Y - j}(Y)`.
pub fn exterior_with_section<S: LocalScalar>(
    x_index: &LevelIndex,
    phi: &IntervalValuation,
    y_index: &LevelIndex,
    ghat: &[Interval],
    e: &Subspace<S>,
    policy: &DepthPolicy,
) -> Result<ExteriorValue> {
    let (n_x, n_y) = (x_index.n(), y_index.n());
    let j = n_y - y_index.k();
    if e.ambient_dim() != n_x + n_y || e.dim() != phi.meta.k + j || x_index.k() != phi.meta.k {
        return Err(Error::Dimension("exterior product degree bookkeeping".into()));
    }
    if ghat.len() != y_index.len() || phi.values.len() != x_index.len() {
        return Err(Error::Dimension("coefficients do not match their indexes".into()));
    }
    let ring_y = y_index.ring();
    let integrand = ExteriorIntegrand { x_index, n_x, basis: e.basis_matrix() };
    let mass = Rational::new(1.into(), (y_index.len() as u64).into());
    let spread = phi.range().hull(&Interval::zero());
    let mut value = Interval::zero();
    let mut certified = true;
    let mut depth = ring_y.depth();
    for (l, g) in y_index.points().iter().zip(ghat) {
        if g.is_point() && g.lo.is_zero() {
            continue;
        }
        let start = annihilator(ring_y, l);
        let quad = integrate(ring_y, &[Factor { start }], mass.clone(), &integrand, policy)?;
        certified &= quad.certified;
        depth = depth.max(quad.depth);
        let mut inner = spread.scale(&quad.open.hi);
        for (w, weight) in &quad.closed {
            inner = inner.add(&phi.values[*w].scale(weight));
        }
        value = value.add(&g.mul(&inner));
    }
    Ok(ExteriorValue { value, certified, depth })
}

/// `(φ ⊠ ψ)(E)` for valuations described by their engines on `X` and `Y`.
pub fn exterior_product_eval<S: LocalScalar>(
    x: &ProductEngine,
    phi: &IntervalValuation,
    y: &ProductEngine,
    psi: &IntervalValuation,
    e: &Subspace<S>,
) -> Result<ExteriorValue> {
    let ghat = y.section_values(psi)?;
    let x_index = x.index(phi.meta.k)?;
    let y_index = y.index(y.n() - psi.meta.k)?;
    exterior_with_section(&x_index, phi, &y_index, &ghat, e, x.policy())
}
