use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("layer {k} out of range (network has layers 0..={n})")]
    LayerOutOfRange { k: usize, n: usize },

    #[error("layer {k} has no successor layer (network has {n} layers)")]
    NoSuccessor { k: usize, n: usize },

    #[error("arithmetic overflow while processing layer {layer}")]
    Overflow { layer: usize },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("brute-force oracle would materialize {positions} positions (limit {limit})")]
    OracleLimit { positions: u64, limit: u64 },
}

pub type Result<T, E = FieldError> = std::result::Result<T, E>;
