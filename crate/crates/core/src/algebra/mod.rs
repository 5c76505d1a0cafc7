//! Pull-back, push-forward, exterior product, product and convolution.

pub mod convolution;
pub mod exterior;
pub mod lefschetz;
pub mod linear_map;
pub mod pairing;
pub mod preimage;
pub mod product;
pub mod pullback;
pub mod pushforward;

pub use linear_map::{density_pullback, LinearMap};
pub use preimage::{IntervalValuation, Section};
pub use product::{DiagonalEntry, DiagonalKernel, IncidenceKernel, ProductEngine, ProductResult, ProductRoute};
pub use pullback::{level_shift, pullback_eval, pullback_eval_fn, pullback_matrix};
pub use pushforward::{pushforward_at_lifts, pushforward_eval, surjective_transport, PushforwardRoute};
pub use exterior::{exterior_product_eval, exterior_with_section, ExteriorValue};
pub use convolution::{addition_map, convolution, convolution_unit, convolution_via_addition, fourier_intervals};
pub use lefschetz::{
    calibration, lefschetz_operator, lefschetz_ranks, positivity_margin, product_with_v1_power, spherical_power,
    Calibration, LefschetzRanks,
};
pub use pairing::{poincare_pairing, PairingMatrix, PairingVerdict};
