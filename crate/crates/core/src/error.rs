use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("residue field size {0} is not a supported prime power")]
    BadResidueSize(u64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("enumeration of {count} points exceeds the cap {cap}")]
    ResourceCap { count: u128, cap: u128 },
    #[error("precision {needed} digits exceeds the machine word capacity {available}")]
    Precision { needed: u32, available: u32 },
    #[error("matrix does not generate a free direct summand")]
    NotFreeSummand,
    #[error("element is not integral")]
    NotIntegral,
    #[error("map is not level-compatible: {0}")]
    NotLevelCompatible(String),
    #[error("linear system has no solution")]
    Inconsistent,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
