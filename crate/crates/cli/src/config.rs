//! Run configuration read from a flat `key = value` file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Seed for every random choice made by the checks.
    pub seed: u64,
    /// Random inputs per law in the product checks.
    pub trials: usize,
    /// Monte Carlo draws per matrix row when the oracle runs.
    pub oracle_samples: u64,
    /// Accepted deviation of the oracle, in standard errors.
    pub oracle_sigmas: f64,
    /// Largest Grassmannian enumerated by the matrix-only checks.
    pub matrix_cap: u64,
    /// Largest Grassmannian entering a quadrature product.
    pub product_cap: u64,
    /// Extra refinement depth beyond the level for quadrature.
    pub extra_depth: u32,
    /// Quadrature stops once open mass is below `q^-tolerance_exp`.
    pub tolerance_exp: u32,
    /// Overrides the cache directory from the environment.
    pub cache_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 1729,
            trials: 10,
            oracle_samples: 1_000_000,
            oracle_sigmas: 4.0,
            matrix_cap: 2_000,
            product_cap: 40,
            extra_depth: 8,
            tolerance_exp: 10,
            cache_dir: None,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }
}
