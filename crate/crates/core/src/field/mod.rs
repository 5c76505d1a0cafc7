//! Exact arithmetic in a dense subfield of a non-Archimedean local field and
//! lattice linear algebra over its valuation ring.

pub mod gf;
pub mod lattice;
pub mod poly;
pub mod scalar;
pub mod subspace;

pub use lattice::{
    det_valuation, extend_to_lattice_basis, primitive_basis, saturation_index, smith_form, SmithForm,
};
pub use scalar::{q_pow, EquiScalar, FieldModel, LocalScalar, MixedScalar, Valuation};
pub use subspace::Subspace;
