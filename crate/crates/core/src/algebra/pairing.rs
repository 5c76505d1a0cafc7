//! The pairing `Val_i × Val_{n-i} -> Val_n` on level-r bases.

use serde::{Deserialize, Serialize};

use super::preimage::IntervalValuation;
use super::product::ProductEngine;
use crate::error::Result;
use crate::interval::Interval;
use crate::linalg::{RatMatrix, Rational};
use crate::valuation::val_space_basis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingVerdict {
    Nonsingular,
    Singular,
    /// Some entry is an enclosure rather than a number.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct PairingMatrix {
    pub n: usize,
    pub i: usize,
    /// Entry `(a, b)`: the top coefficient of `basis_i[a] · basis_{n-i}[b]`.
    pub entries: Vec<Vec<Interval>>,
    pub certified: bool,
    pub exact: Option<RatMatrix>,
    pub determinant: Option<Rational>,
    pub verdict: PairingVerdict,
    /// Why the verdict is inconclusive, if it is.
    pub obstruction: Option<String>,
}

impl PairingMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    pub fn widest(&self) -> Rational {
        self.entries.iter().flatten().map(Interval::width).max().unwrap_or_else(|| Rational::from_integer(0.into()))
    }
}

pub fn poincare_pairing(engine: &ProductEngine, i: usize) -> Result<PairingMatrix> {
    let n = engine.n();
    let left = val_space_basis(&*engine.index(i)?, &engine.cosine(i)?.entries);
    let right = val_space_basis(&*engine.index(n - i)?, &engine.cosine(n - i)?.entries);
    let mut certified = true;
    let mut entries = Vec::with_capacity(left.dim());
    for a in &left.basis {
        let mut row = Vec::with_capacity(right.dim());
        for b in &right.basis {
            let p = engine.product(&IntervalValuation::exact(a), &IntervalValuation::exact(b))?;
            certified &= p.certified;
            row.push(p.value.values[0].clone());
        }
        entries.push(row);
    }
    let all_exact = entries.iter().flatten().all(Interval::is_point);
    let exact = all_exact.then(|| {
        RatMatrix::from_fn(left.dim(), right.dim(), |a, b| entries[a][b].lo.clone())
    });
    let square = left.dim() == right.dim();
    let determinant = exact.as_ref().filter(|_| square).map(RatMatrix::determinant);
    let (verdict, obstruction) = match (&exact, &determinant) {
        (Some(_), Some(d)) if *d != Rational::from_integer(0.into()) => (PairingVerdict::Nonsingular, None),
        (Some(_), _) => (PairingVerdict::Singular, None),
        (None, _) => {
            let mut m = PairingMatrix {
                n,
                i,
                entries,
                certified,
                exact: None,
                determinant: None,
                verdict: PairingVerdict::Inconclusive,
                obstruction: None,
            };
            let why = if certified { "entries are enclosures" } else { "uncertified entries" };
            m.obstruction = Some(format!("{why}, widest width {}", m.widest()));
            return Ok(m);
        }
    };
    Ok(PairingMatrix { n, i, entries, certified, exact, determinant, verdict, obstruction })
}
