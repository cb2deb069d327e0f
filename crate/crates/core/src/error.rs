use thiserror::Error;

/// Errors produced by the ranking-depth library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected} items, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("empty sample")]
    EmptySample,

    #[error("pairwise matrix is not stochastically transitive: items ({0}, {1}, {2}) violate transitivity")]
    NotTransitive(usize, usize, usize),

    #[error("pairwise matrix is not strictly stochastically transitive: items ({0}, {1}) are tied")]
    NotStrict(usize, usize),

    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("{what} requires n <= {max}, got n = {n}")]
    TooLarge { what: &'static str, n: usize, max: usize },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_same_size(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::SizeMismatch { expected, found })
    }
}
