use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("enumeration over an infinite sign group is not supported")]
    UnsupportedEnumeration,

    #[error("guard exceeded: {0}")]
    Guard(String),

    #[error("partitions are not comparable: {0}")]
    Order(String),

    #[error("singular Gram matrix for n={n}, N={dim}, category {category}")]
    SingularGram {
        n: usize,
        dim: u64,
        category: String,
    },

    #[error("validation failed: {what} (residual {residual:e})")]
    Validation { what: String, residual: f64 },

    #[error("missing moment of order {0}")]
    MissingMoment(usize),

    #[error("parse error: {0}")]
    Parse(String),
}
