use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// The triple has k equal to one of the slice exponents, so the linked
    /// system collapses and no count is defined for it.
    #[error("degenerate triple: {}", degeneracy_label(.k, .m, .n))]
    Degenerate { k: u32, m: u32, n: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A power sum or table key would not fit the 128-bit working width.
    #[error("128-bit overflow: {what}")]
    Overflow { what: String },

    /// A projected allocation or grid exceeds the configured budget.
    #[error("budget exceeded for {what}: needs {needed}, budget {budget}")]
    BudgetExceeded {
        what: String,
        needed: u128,
        budget: u128,
    },

    /// A quadrature result failed the integer-closeness check.
    #[error("quadrature result {value} is not within {tolerance} of an integer")]
    NotIntegral { value: f64, tolerance: f64 },

    #[error("grid too small: need at least {needed} points, got {got}")]
    InsufficientGrid { needed: usize, got: usize },

    /// Cache file written by a different format version; safe to recompute.
    #[error("cache format version mismatch: found {found:?}")]
    CacheVersion { found: String },

    #[error("corrupt cache file: {0}")]
    CacheCorrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn degeneracy_label(k: &u32, m: &u32, n: &u32) -> &'static str {
    if k == m {
        "k=m"
    } else if k == n {
        "k=n"
    } else {
        "k=m"
    }
}

pub type Result<T> = std::result::Result<T, Error>;
