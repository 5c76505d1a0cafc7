use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{det_valuation, q_pow, LocalScalar, Subspace, Valuation};
use crate::field::lattice::columns_matrix;
use crate::linalg::Rational;

/// `s(M, N)`: zero, or `q^{-v}` with `v >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelValue {
    Zero,
    Power { q: u64, v: u64 },
}

impl KernelValue {
    pub fn value(&self) -> Rational {
        match *self {
            KernelValue::Zero => Rational::zero(),
            KernelValue::Power { q, v } => q_pow(q, -(v as i64)),
        }
    }
}

/// Covolume of `(M ∩ Λ) + (N ∩ Λ)` for complementary dimensions.
pub fn kernel_s<S: LocalScalar>(m: &Subspace<S>, n: &Subspace<S>) -> Result<KernelValue> {
    let dim = m.ambient_dim();
    if n.ambient_dim() != dim || m.dim() + n.dim() != dim {
        return Err(Error::Dimension(format!(
            "kernel needs dim M + dim N = n, got {} + {} in {dim}",
            m.dim(),
            n.dim()
        )));
    }
    let mut cols = m.basis().to_vec();
    cols.extend(n.basis().iter().cloned());
    if cols.is_empty() {
        return Ok(KernelValue::Power { q: m.model().q(), v: 0 });
    }
    match det_valuation(&columns_matrix(m.model(), &cols, dim)) {
        Valuation::Infinite => Ok(KernelValue::Zero),
        Valuation::Finite(v) => {
            debug_assert!(v >= 0, "primitive bases are integral");
            Ok(KernelValue::Power { q: m.model().q(), v: v as u64 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{EquiScalar, FieldModel};
    use crate::linalg::rat;

    #[test]
    fn kernel_examples() {
        let m = FieldModel::equi(2).unwrap();
        let v = |xs: &[&[u32]]| -> Vec<EquiScalar> { xs.iter().map(|d| EquiScalar::from_digits(m, d)).collect() };
        let e1 = Subspace::span(m, 2, &[v(&[&[1], &[]])]);
        let e2 = Subspace::span(m, 2, &[v(&[&[], &[1]])]);
        let d = Subspace::span(m, 2, &[v(&[&[1], &[0, 1]])]);
        assert_eq!(kernel_s(&e1, &e2).unwrap().value(), rat(1, 1));
        assert_eq!(kernel_s(&e1, &d).unwrap().value(), rat(1, 2));
        assert_eq!(kernel_s(&e1, &e1).unwrap(), KernelValue::Zero);
        assert!(kernel_s(&e1, &Subspace::full(m, 2)).is_err());
    }
}
