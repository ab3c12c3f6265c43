/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A dataset-consuming operation received zero rows.
    #[error("empty dataset")]
    EmptyDataset,
    /// Two paired inputs have different lengths.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    /// A root-finding problem has no solution in its search interval.
    #[error("no solution: {0}")]
    NoSolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
