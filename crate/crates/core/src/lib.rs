//! Finite-level valuation spaces over non-Archimedean local fields.

pub mod algebra;
pub mod error;
pub mod field;
pub mod grassmann;
pub mod interval;
pub mod linalg;
pub mod ring;
pub mod transforms;
pub mod valuation;

pub use error::{Error, Result};
pub use field::{EquiScalar, FieldModel, LocalScalar, MixedScalar, Subspace, Valuation};
pub use linalg::{F64Matrix, Matrix, RatMatrix, Rational};
