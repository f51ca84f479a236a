use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "Fock cutoff {cutoff} leaves tail mass {tail:.3e} (tolerance {tolerance:.1e}); raise the cutoff"
    )]
    Truncation {
        cutoff: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("unsupported by the closed-form engine: {0}; use the exact engine instead")]
    UnsupportedConfiguration(String),

    #[error("unphysical state: {0}")]
    Physicality(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
