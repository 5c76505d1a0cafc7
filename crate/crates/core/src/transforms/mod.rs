//! Cosine, Radon and Fourier transforms at finite level.

pub mod cell_integral;
pub mod cosine;
pub mod fourier;
pub mod kernel;
pub mod operator;
pub mod oracle;
pub mod quadrature;
pub mod radon;

pub use cell_integral::{cell_key, conditional_kernel_mean, CellKey, ContentRecursion};
pub use kernel::{kernel_s, KernelValue};
pub use quadrature::{integrate, CellIntegrand, CellValue, DepthPolicy, Factor, Quadrature};
pub use cosine::{
    adjointness_holds, cosine_matrix, cosine_matrix_adaptive, cosine_matrix_on, haar_integrate, haar_integrate_adaptive,
    plane_line_mean, spherical_eigenvalue,
};
pub use operator::{OperatorMatrix, OperatorMatrixJson, SideMeta, TransformTag, FORMAT_VERSION};
pub use fourier::{fourier, fourier_matrix, fourier_meta, measure_chain, measure_chain_at, ChainScalars};
pub use radon::{radon_matrix, radon_matrix_on, RadonDirection};
pub use oracle::{cosine_monte_carlo, MonteCarloMatrix};
