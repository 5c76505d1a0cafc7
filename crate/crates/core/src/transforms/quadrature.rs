//! Adaptive exact quadrature over products of level cells.
//!
//! The domain is a product of Grassmannian cells, each with uniform Haar mass.
//! At depth `d` every open product cell is evaluated by the integrand at level
//! `d`: it either proves the integrand constant on the cell (closed, exact
//! contribution) or returns bounds. Open cells are refined by one digit.
//! Enclosures are nested: a child's bounds lie inside its parent's.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::q_pow;
use crate::grassmann::{fiber, GrassPoint};
use crate::interval::Interval;
use crate::linalg::Rational;
use crate::ring::{max_depth, ChainRing};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthPolicy {
    /// Refinement stops at `r + max_extra_depth`.
    pub max_extra_depth: u32,
    /// Stop once the open enclosure is at most this wide.
    pub tolerance: Rational,
    /// Refusing to hold more open cells than this.
    pub max_cells: usize,
}

impl DepthPolicy {
    /// Depth cap `r + 8`, tolerance `q^{-10}`.
    pub fn standard(q: u64) -> Self {
        DepthPolicy { max_extra_depth: 8, tolerance: q_pow(q, -10), max_cells: 1_000_000 }
    }

    pub fn with_tolerance(mut self, tol: Rational) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_extra_depth(mut self, d: u32) -> Self {
        self.max_extra_depth = d;
        self
    }

    pub fn tag(&self) -> String {
        format!("extra{}-tol{}", self.max_extra_depth, crate::linalg::rat_to_string(&self.tolerance))
    }
}

/// One Grassmannian factor of the domain, starting from a level-r cell.
#[derive(Clone, Debug)]
pub struct Factor {
    pub start: GrassPoint,
}

impl Factor {
    fn fiber_exponent(&self) -> u32 {
        (self.start.k() * (self.start.n() - self.start.k())) as u32
    }
}

pub enum CellValue<K> {
    /// Integrand is constant on the cell.
    Closed { key: K, value: Rational },
    /// Integrand values on the cell lie in `[lo, hi]`.
    Open { lo: Rational, hi: Rational },
}

pub trait CellIntegrand: Sync {
    type Key: Clone + Ord + Send + Sync;
    /// Evaluates on a product cell whose points live at the level of `ring`.
    fn eval(&self, ring: &ChainRing, cells: &[GrassPoint]) -> CellValue<Self::Key>;
}

#[derive(Clone, Debug)]
pub struct Quadrature<K> {
    /// Exact contributions of closed cells, grouped by key.
    pub closed: BTreeMap<K, Rational>,
    /// Enclosure of the contribution of the cells still open.
    pub open: Interval,
    /// Haar mass of the open cells.
    pub open_mass: Rational,
    /// Deepest level evaluated.
    pub depth: u32,
    /// No open cells remain, or the open enclosure met the tolerance.
    pub certified: bool,
    /// Total enclosure after each depth, shallow to deep.
    pub history: Vec<Interval>,
    pub cells_evaluated: u64,
}

impl<K: Clone + Ord> Quadrature<K> {
    pub fn is_exact(&self) -> bool {
        self.open_mass.is_zero()
    }

    pub fn closed_total(&self) -> Rational {
        self.closed.values().fold(Rational::zero(), |a, b| a + b)
    }

    /// Enclosure of the whole integral.
    pub fn total(&self) -> Interval {
        Interval::point(self.closed_total()).add(&self.open)
    }

    pub fn width(&self) -> Rational {
        self.open.width()
    }
}

fn children(shallow: &ChainRing, deep: &ChainRing, cell: &[GrassPoint]) -> Vec<Vec<GrassPoint>> {
    let mut out: Vec<Vec<GrassPoint>> = vec![Vec::new()];
    for x in cell {
        let f = fiber(shallow, deep, x);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                f.iter().map(move |y| {
                    let mut p = prefix.clone();
                    p.push(y.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Integrates over the product of `factors` starting from level `base`; each
/// level-r product cell carries mass `base_mass`.
pub fn integrate<I: CellIntegrand>(
    base: &ChainRing,
    factors: &[Factor],
    base_mass: Rational,
    integrand: &I,
    policy: &DepthPolicy,
) -> Result<Quadrature<I::Key>> {
    let cap = (base.depth() + policy.max_extra_depth).min(max_depth(base.q()));
    let fiber_exp: u32 = factors.iter().map(|f| f.fiber_exponent()).sum();
    let mut cells: Vec<Vec<GrassPoint>> = vec![factors.iter().map(|f| f.start.clone()).collect()];
    let mut ring = *base;
    let mut mass = base_mass;
    let mut closed: BTreeMap<I::Key, Rational> = BTreeMap::new();
    let mut history = Vec::new();
    let mut evaluated = 0u64;
    loop {
        let values: Vec<CellValue<I::Key>> = cells.par_iter().map(|c| integrand.eval(&ring, c)).collect();
        evaluated += values.len() as u64;
        let mut open_cells = Vec::new();
        let mut open = Interval::zero();
        for (cell, v) in cells.into_iter().zip(values) {
            match v {
                CellValue::Closed { key, value } => {
                    let slot = closed.entry(key).or_insert_with(Rational::zero);
                    *slot += &mass * value;
                }
                CellValue::Open { lo, hi } => {
                    open = open.add(&Interval::new(&mass * lo, &mass * hi));
                    open_cells.push(cell);
                }
            }
        }
        let open_mass = &mass * Rational::from_integer(open_cells.len().into());
        let closed_total = closed.values().fold(Rational::zero(), |a, b| a + b);
        history.push(Interval::point(closed_total).add(&open));
        let done = open_cells.is_empty() || open.width() <= policy.tolerance;
        let next_count = open_cells.len().saturating_mul(base.q().pow(fiber_exp) as usize);
        if done || ring.depth() >= cap || next_count > policy.max_cells {
            return Ok(Quadrature {
                closed,
                open,
                open_mass,
                depth: ring.depth(),
                certified: done,
                history,
                cells_evaluated: evaluated,
            });
        }
        let deeper = ring.at_depth(ring.depth() + 1)?;
        cells = open_cells.par_iter().flat_map_iter(|c| children(&ring, &deeper, c)).collect();
        mass *= q_pow(base.q(), -(fiber_exp as i64));
        ring = deeper;
    }
}
