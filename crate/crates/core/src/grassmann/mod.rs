//! Level-r finite Grassmannians: free rank-k direct summands of `(O/m^r)^n`.
//!
//! Canonical form: the generator matrix whose columns `P` form the identity,
//! where `P` is the pivot set of the reduced row echelon form of the residue
//! mod `m`. Every other entry is a reduced residue; entries of row `a` left of
//! its pivot are divisible by `t`.

mod index;
mod point;
mod sample;

pub use index::{enumerate, gaussian_binomial, level_count, LevelIndex, DEFAULT_POINT_CAP};
pub use point::{
    annihilator, canonicalize, contains, fiber, lift_subspace, pair_orbit_invariant, reduce,
    reduce_subspace, GrassPoint, GrassPointJson, PairInvariant,
};
pub use sample::{sample_haar, PatternSampler};
